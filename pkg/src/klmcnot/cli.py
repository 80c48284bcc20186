"""Command-line front end.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 simulation error.
"""

from __future__ import annotations

import argparse
import sys
from math import sqrt
from pathlib import Path

import numpy as np

from .analysis import format_number
from .gates import BUILDERS, PRESETS, build, ns_heralded_amplitudes, solve_ns_balance
from .scenario import (
    Scenario,
    ScenarioError,
    bundled_names,
    load_scenario,
    parse_setting,
    run_scenario,
)

EXIT_SCHEMA = 2
EXIT_SIMULATION = 3

# builder keyword that ``--reflectivity`` sets, per gate
REFLECTIVITY_PARAM = {"klm-cnot-ppbs": "r_h", "ns-simplified": "r"}


def _gate_fields(args) -> dict:
    d = {"gate": args.gate, "preset": args.preset, "method": args.method}
    if args.reflectivity is not None:
        key = REFLECTIVITY_PARAM.get(args.gate)
        if key is None:
            raise ScenarioError(
                "--reflectivity",
                f"gate {args.gate!r} has no single reflectivity; supported: {sorted(REFLECTIVITY_PARAM)}",
            )
        d["params"] = {key: args.reflectivity}
    if getattr(args, "overlap", None) is not None:
        d["noise"] = {"overlap": args.overlap}
    return d


def _sampling_fields(args) -> dict:
    d = {}
    if args.trials:
        d["trials"] = args.trials
    if args.seed is not None:
        d["seed"] = args.seed
    return d


def _emit(sc: Scenario, args, primary: str) -> int:
    """Write all artifacts to ``--out`` or print the primary one."""
    if args.out:
        for name in run_scenario(sc, args.out, getattr(args, "jobs", 1)):
            print(Path(args.out) / name)
        return 0
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        names = run_scenario(sc, tmp, getattr(args, "jobs", 1))
        wanted = [n for n in names if n == primary or n.startswith(primary)]
        for n in wanted:
            sys.stdout.write((Path(tmp) / n).read_text(encoding="utf-8"))
    return 0


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    out = args.out or Path("runs") / sc.name
    for name in run_scenario(sc, out, args.jobs):
        print(Path(out) / name)
    return 0


def cmd_truth_table(args) -> int:
    a, b = parse_setting(args.basis)
    d = {"version": 1, "kind": "gate", "name": "truth-table", "settings": [[a, b]]}
    d.update(_gate_fields(args))
    d.update(_sampling_fields(args))
    if args.detector:
        d["detector"] = {"kind": args.detector, "efficiency": args.efficiency}
    return _emit(Scenario.from_dict(d), args, "truth_")


def cmd_fidelity_report(args) -> int:
    if args.counts:
        sc = load_scenario(args.counts)
        if sc.kind != "fixture":
            raise ScenarioError("--counts", f"expected a fixture scenario, got kind {sc.kind!r}")
    else:
        d = {"version": 1, "kind": "gate", "name": "fidelity-report"}
        d.update(_gate_fields(args))
        d.update(_sampling_fields(args))
        sc = Scenario.from_dict(d)
    return _emit(sc, args, "report.json")


def cmd_hom_scan(args) -> int:
    hom = {
        "reflectivity": args.reflectivity if args.reflectivity is not None else 0.23,
        "tau_c": args.tau_c,
        "from": args.start,
        "to": args.stop,
        "steps": args.steps,
        "overlap": args.overlap if args.overlap is not None else 1.0,
    }
    d = {"version": 1, "kind": "hom-scan", "name": "hom-scan", "hom": hom, "method": args.method}
    return _emit(Scenario.from_dict(d), args, "hom_scan.csv")


def cmd_sweep(args) -> int:
    d = {
        "version": 1,
        "kind": "sweep",
        "name": "sweep",
        "sweep": {
            "param": args.param,
            "from": args.start,
            "to": args.stop,
            "steps": args.steps,
            "fidelities": args.fidelities,
        },
    }
    d.update(_gate_fields(args))
    return _emit(Scenario.from_dict(d), args, "sweep.csv")


def cmd_ns_check(args) -> int:
    R, eta = solve_ns_balance()
    residual = max(abs(sqrt(R) - (1 - 2 * R) * sqrt(eta)), abs((2 - 3 * R) * eta - 1))
    amps = ns_heralded_amplitudes(build("ns-simplified", preset=args.preset))
    lines = [
        ("r_star", R),
        ("eta_star", eta),
        ("balance_residual", residual),
        ("preset", args.preset),
        ("amplitude_0", amps[0].real),
        ("amplitude_1", amps[1].real),
        ("amplitude_2", amps[2].real),
        ("success_probability", float(np.mean(np.abs(amps) ** 2))),
    ]
    for k, v in lines:
        print(f"{k} = {format_number(v)}")
    return 0


def cmd_list(args) -> int:
    for name in bundled_names():
        print(name)
    return 0


def _add_gate_flags(p: argparse.ArgumentParser, overlap: bool = True):
    p.add_argument("--gate", default="klm-cnot-ppbs", choices=sorted(BUILDERS), help="gate to simulate")
    p.add_argument("--preset", default="exact", choices=sorted(PRESETS), help="NS parameter preset")
    p.add_argument("--reflectivity", type=float, help="override the NS reflectivity (PPBS2 R_H)")
    if overlap:
        p.add_argument(
            "--overlap",
            type=float,
            help="wavepacket overlap o between signal and ancilla photons (relative visibility o^2)",
        )
    p.add_argument("--method", default="permanent", choices=["permanent", "sequential"])
    p.add_argument("--out", type=Path, help="output directory (default: print to stdout)")


def _add_sampling_flags(p: argparse.ArgumentParser):
    p.add_argument("--trials", type=int, default=0, help="sampled events per input (0 = exact probabilities)")
    p.add_argument("--seed", type=int, help="RNG seed, required with --trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="klmcnot",
        description="Simulate heralded linear-optics CNOT gates and analyse their fidelities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or bundled scenario")
    p.add_argument("scenario", help="path to a YAML scenario, or a bundled name (see 'list')")
    p.add_argument("--out", type=Path, help="output directory (default: runs/<name>)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("truth-table", help="truth table for one basis setting")
    _add_gate_flags(p)
    _add_sampling_flags(p)
    p.add_argument("--basis", default="ZZ", help="setting, e.g. ZZ, XX or XZ->YY")
    p.add_argument("--detector", choices=["number_resolving", "threshold"])
    p.add_argument("--efficiency", type=float, default=1.0, help="detector efficiency")
    p.set_defaults(func=cmd_truth_table)

    p = sub.add_parser("fidelity-report", help="fidelities and dephasing-model fit")
    _add_gate_flags(p)
    _add_sampling_flags(p)
    p.add_argument("--counts", help="fixture scenario with measured counts instead of a simulation")
    p.set_defaults(func=cmd_fidelity_report)

    p = sub.add_parser("hom-scan", help="two-photon dip versus delay")
    p.add_argument("--reflectivity", type=float, help="beamsplitter reflectivity (default 0.23)")
    p.add_argument("--overlap", type=float, help="overlap at zero delay (default 1)")
    p.add_argument("--tau-c", type=float, default=1.0, help="coherence time")
    p.add_argument("--from", dest="start", type=float, default=-3.0)
    p.add_argument("--to", dest="stop", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=61)
    p.add_argument("--method", default="permanent", choices=["permanent", "sequential"])
    p.add_argument("--out", type=Path, help="output directory (default: print to stdout)")
    p.set_defaults(func=cmd_hom_scan)

    p = sub.add_parser("ns-check", help="balanced NS parameters and heralded amplitudes")
    p.add_argument("--preset", default="exact", choices=sorted(PRESETS))
    p.set_defaults(func=cmd_ns_check)

    p = sub.add_parser("sweep", help="vary one parameter and tabulate metrics")
    _add_gate_flags(p)
    p.add_argument("--param", required=True, help="'<element>.<param>' (e.g. ppbs2.r_h) or 'overlap'")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--fidelities", action="store_true", help="also compute truth-table fidelities")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("list", help="list bundled scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ValueError, RuntimeError, ArithmeticError, KeyError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
