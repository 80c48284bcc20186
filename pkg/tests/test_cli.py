import json

import pytest
import yaml

from klmcnot.cli import main
from klmcnot.scenario import Scenario, ScenarioError, bundled_names, load_scenario


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bundled_scenarios_listed(capsys):
    code, out, _ = run(["list"], capsys)
    assert code == 0
    for name in ("klm-cnot-ideal", "reference-counts", "hom-ppbs2", "klm-cnot-noisy"):
        assert name in out.split()


def test_ns_check(capsys):
    code, out, _ = run(["ns-check"], capsys)
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(vals["r_star"]) == pytest.approx(0.226541, abs=1e-6)
    assert float(vals["eta_star"]) == pytest.approx(0.757359, abs=1e-6)
    assert float(vals["success_probability"]) == pytest.approx(0.2265, abs=1e-4)
    assert float(vals["balance_residual"]) < 1e-12


def test_truth_table_command(capsys):
    code, out, _ = run(["truth-table", "--gate", "klm-cnot-ppbs", "--basis", "ZZ"], capsys)
    assert code == 0
    assert out.splitlines()[1:] == ["Z0Z0,1,0,0,0", "Z0Z1,0,1,0,0", "Z1Z0,0,0,0,1", "Z1Z1,0,0,1,0"]


def test_ideal_scenario(tmp_path, capsys):
    assert run(["run", "klm-cnot-ideal", "--out", tmp_path], capsys)[0] == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["f_p"] == 1.0


def test_fixture_scenario(tmp_path, capsys):
    assert run(["run", "reference-counts", "--out", tmp_path], capsys)[0] == 0
    r = json.loads((tmp_path / "report.json").read_text())
    assert (r["f_zz_zz"], r["f_xx_xx"], r["f_xz_yy"]) == (0.87, 0.88, 0.81)
    assert r["f_p"] == 0.78 and r["f_avg"] == 0.824
    assert r["entanglement_capable"] is True


def test_hom_scenario(tmp_path, capsys):
    assert run(["run", "hom-ppbs2", "--out", tmp_path], capsys)[0] == 0
    lines = (tmp_path / "hom_scan.csv").read_text().splitlines()
    assert lines[0].split(",")[-1] == "visibility_analytic"
    assert {l.split(",")[-1] for l in lines[1:]} == {"0.548467017653"}


def test_sweep_minimum_near_balanced_reflectivity(tmp_path, capsys):
    argv = ["sweep", "--param", "ppbs2.r_h", "--from", 0.18, "--to", 0.28, "--steps", 11, "--out", tmp_path]
    assert run(argv, capsys)[0] == 0
    rows = [l.split(",") for l in (tmp_path / "sweep.csv").read_text().splitlines()[1:]]
    dev = {float(r[1]): float(r[3]) for r in rows if r[2] == "relative_deviation"}
    assert min(dev, key=dev.get) == pytest.approx(0.23)


def test_manifest_reruns_identically(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["truth-table", "--basis", "XZ->YY", "--overlap", 0.95, "--trials", 300, "--seed", 4, "--out", a], capsys)
    run(["run", a / "manifest.yaml", "--out", b], capsys)
    for f in a.iterdir():
        assert (b / f.name).read_bytes() == f.read_bytes()


def test_schema_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"version": 1, "kind": "gate", "trials": 10}))
    code, _, err = run(["run", bad], capsys)
    assert code == 2 and "seed" in err
    bad.write_text(yaml.safe_dump({"version": 7, "kind": "gate"}))
    assert run(["run", bad], capsys)[0] == 2
    bad.write_text(yaml.safe_dump({"version": 1, "kind": "gate", "gate": "toffoli"}))
    code, _, err = run(["run", bad], capsys)
    assert code == 2 and "klm-cnot-ppbs" in err
    code, _, err = run(["truth-table", "--basis", "ZQ"], capsys)
    assert code == 2 and "ZQ" in err
    code, _, err = run(["truth-table", "--gate", "klm-cnot-dualrail", "--reflectivity", 0.2], capsys)
    assert code == 2 and "--reflectivity" in err


def test_simulation_errors_exit_3(tmp_path, capsys):
    bad = tmp_path / "pert.yaml"
    bad.write_text(yaml.safe_dump({
        "version": 1, "kind": "gate",
        "noise": {"perturbation": {"offsets": {"ppbs2.r_h": 2.0}}},
    }))
    code, _, err = run(["run", bad, "--out", tmp_path / "out"], capsys)
    assert code == 3 and "ppbs2" in err
    assert not (tmp_path / "out").exists()


def test_unknown_argument_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["truth-table", "--gate", "nope"])
    assert exc.value.code == 2


def test_scenario_roundtrip():
    for name in bundled_names():
        sc = load_scenario(name)
        assert Scenario.from_dict(sc.to_dict()) == sc
    with pytest.raises(ScenarioError, match="unknown key"):
        Scenario.from_dict({"version": 1, "kind": "gate", "colour": "red"})


def test_malformed_basis_is_schema_error(capsys):
    code, _, err = run(["truth-table", "--basis", "XZ-"], capsys)
    assert code == 2 and "XZ-" in err
