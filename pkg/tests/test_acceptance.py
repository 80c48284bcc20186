"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the summary lines appear at the
end of the session) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import json
import sys
from math import sqrt
from pathlib import Path

import numpy as np
import pytest

from klmcnot.analysis import (
    STANDARD_SETTINGS,
    ChiDiagonal,
    TruthTable,
    average_gate_fidelity,
    channel_truth_table,
    classical_fidelity,
    dephasing_fit,
    fidelity_report,
    hom_visibility,
    ideal_truth_table,
    process_fidelity,
    relative_visibility,
    simulated_visibility,
    standard_tables,
    truth_table,
)
from klmcnot.circuit import BS, PHASE, Circuit
from klmcnot.cli import main
from klmcnot.evolve import apply_sequential, apply_unitary, compiled, permanent
from klmcnot.fock import ModeLayout, StateVector, enumerate_basis
from klmcnot.gates import (
    CNOT,
    ETA_STAR,
    POLARIZATION_ENCODING,
    R_STAR,
    build_klm_cnot_dualrail,
    build_klm_cnot_polarization,
    build_ns_original,
    build_ns_simplified,
    ns_component_amplitudes,
    ns_heralded_amplitudes,
    solve_ns_balance,
    solve_ns_original,
)
from klmcnot.measure import conditional_map, proportionality_check
from klmcnot.noise import OverlapSpec
from klmcnot.scenario import load_scenario

sys.path.insert(0, str(Path(__file__).parent))
from oracles import naive_permanent  # noqa: E402

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_01_ns_closed_forms():
    worst = 0.0
    for R in (0.1, 0.2265, 0.3, 0.5, 0.66):
        amps = ns_heralded_amplitudes(build_ns_simplified(R))
        worst = max(worst, float(np.max(np.abs(amps - ns_component_amplitudes(R)))))
    below = ns_heralded_amplitudes(build_ns_simplified(2 / 3 - 1e-6))[2].real
    above = ns_heralded_amplitudes(build_ns_simplified(2 / 3 + 1e-6))[2].real
    at = ns_heralded_amplitudes(build_ns_simplified(2 / 3))[2].real
    ok = worst < 1e-12 and below < 0 < above and abs(at) < 1e-12
    record(1, ok, f"max |amp - closed form| = {worst:.1e}; |2> sign {below:+.1e} -> {above:+.1e} across R = 2/3")


def test_criterion_02_balance_solver():
    R, eta = solve_ns_balance()
    eq1 = abs(sqrt(R) - (1 - 2 * R) * sqrt(eta))
    eq2 = abs((2 - 3 * R) * eta - 1)
    amps = ns_heralded_amplitudes(_balanced_ns())
    success = abs(amps[1]) ** 2
    ok = (
        abs(R - (3 - sqrt(2)) / 7) < 1e-12
        and abs(eta - 1 / (2 - 3 * R)) < 1e-12
        and max(eq1, eq2) < 1e-12
        and round(R, 2) == 0.23
        and round(eta, 2) == 0.76
        and abs(success - R) < 1e-12
    )
    record(2, ok, f"R* = {R:.6f}, eta* = {eta:.6f}, residuals {eq1:.1e}/{eq2:.1e}, success = {success:.6f}")


def _balanced_ns():
    from klmcnot.gates import NsParameters

    return build_ns_simplified(NsParameters(R_STAR, ETA_STAR))


def test_criterion_03_original_ns():
    R1, R2, R3 = solve_ns_original()
    amps = ns_heralded_amplitudes(build_ns_original(R1, R2, R3))
    scale = amps[0]
    dev = float(np.max(np.abs(amps / scale - np.array([1, 1, -1]))))
    success = abs(scale) ** 2
    ok = dev < 1e-9 and abs(success - 0.25) < 1e-9
    record(3, ok, f"R = ({R1:.6f}, {R2:.6f}, {R3:.6f}); map deviation {dev:.1e}; success {success:.10f}")


def test_criterion_04_dualrail_cnot():
    b = build_klm_cnot_dualrail("original")
    m = conditional_map(b.circuit, b.herald, b.encoding)
    alpha, dev = proportionality_check(m, CNOT)
    succ = float(np.max(np.abs(m.success - 1 / 16)))
    ok = dev < 1e-9 and succ < 1e-10
    record(4, ok, f"deviation {dev:.1e}; success {m.success[0]:.12f} (|p - 1/16| <= {succ:.1e})")


def test_criterion_05_ppbs_cnot():
    b = build_klm_cnot_polarization("exact")
    m = conditional_map(b.circuit, b.herald, b.encoding)
    alpha, dev = proportionality_check(m, CNOT)
    succ = float(np.max(np.abs(m.success - R_STAR**2)))
    zz = truth_table(b, "ZZ", "ZZ")
    raw_rows = np.abs(zz.probabilities - np.abs(CNOT) ** 2).max()
    ok = dev < 1e-9 and succ < 1e-9 and raw_rows < 1e-10
    record(5, ok, f"deviation {dev:.1e}; success {m.success[0]:.6f} = R*^2; ZZ table error {raw_rows:.1e}")


def test_criterion_06_hom_visibility():
    v_an = hom_visibility(0.23)
    v_sim = simulated_visibility(0.23)
    v_half = simulated_visibility(0.5)
    ok = abs(v_an - 0.5485) < 1e-4 and abs(v_sim - v_an) < 1e-10 and abs(v_half - 1) < 1e-10
    # 0.5485 is itself rounded (exact value 0.548467...), so it is matched to
    # its four printed digits; the 1e-10 tolerance applies to analytic vs
    # simulated
    record(6, ok, f"V(0.23) analytic {v_an:.10f}, simulated {v_sim:.10f} (0.5485 to 4 digits); V(0.5) = {v_half:.10f}")


def test_criterion_07_fidelity_arithmetic():
    fp = process_fidelity(0.87, 0.88, 0.81)
    favg = average_gate_fidelity(fp)
    ok = abs(fp - 0.78) < 1e-12 and abs(favg - 0.824) < 1e-12 and round(favg, 2) == 0.82
    record(7, ok, f"F_p = {fp:.12f}, F_avg = {favg:.12f}")


def test_criterion_08_dephasing_model():
    rng = np.random.default_rng(8)
    worst_fwd = worst_fit = 0.0
    for _ in range(100):
        w = rng.dirichlet(np.ones(4))
        chi = ChiDiagonal(*w)
        sim = [
            classical_fidelity(channel_truth_table(chi, *s, POLARIZATION_ENCODING), ideal_truth_table(*s, POLARIZATION_ENCODING))
            for s in STANDARD_SETTINGS
        ]
        worst_fwd = max(worst_fwd, float(np.max(np.abs(np.array(sim) - chi.predicted_fidelities()))))
        fit = dephasing_fit(*chi.predicted_fidelities())
        worst_fit = max(worst_fit, float(np.max(np.abs(fit.weights - w))))
    try:
        ChiDiagonal(0.5, 0.2, 0.2, 0.2)
        enforced = False
    except ValueError:
        enforced = True
    ok = worst_fwd < 1e-12 and worst_fit < 1e-12 and enforced
    record(8, ok, f"forward vs simulated {worst_fwd:.1e}; fit o forward {worst_fit:.1e}; normalization enforced")


def test_criterion_09_oracle_equivalence():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(1, 5))
        lay = ModeLayout.from_ports([f"m{i}" for i in range(m)])
        els = []
        for _ in range(int(rng.integers(1, 10))):
            i, j = rng.choice(m, 2, replace=False)
            els += [BS(f"m{i}", f"m{j}", rng.uniform(), int(rng.integers(2))), PHASE(f"m{i}", rng.uniform(0, 6.3))]
        c = Circuit(lay, els)
        basis = enumerate_basis(m, n)
        picks = rng.choice(len(basis), size=min(4, len(basis)), replace=False)
        psi = StateVector(lay, {basis[k]: rng.normal() + 1j * rng.normal() for k in picks}).normalized()
        a, b = apply_unitary(compiled(c), psi), apply_sequential(c, psi)
        keys = set(a.amplitudes) | set(b.amplitudes)
        worst = max(worst, max(abs(a[k] - b[k]) for k in keys))
    perm_worst = 0.0
    for n in range(1, 6):
        for _ in range(5):
            M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            perm_worst = max(perm_worst, abs(permanent(M) - naive_permanent(M)))
    ok = worst < 1e-9 and perm_worst < 1e-10
    record(9, ok, f"sequential vs permanent {worst:.1e} (100 circuits); Ryser vs naive {perm_worst:.1e}")


def test_criterion_10_substituted_experimental_values():
    # (a) fixture counts regress to the quoted ratios through the pipeline
    fx = load_scenario("reference-counts")
    tables = [TruthTable.from_counts(a, b, fx.fixture[f"{a}->{b}"]) for a, b in STANDARD_SETTINGS]
    ideals = [ideal_truth_table(a, b, POLARIZATION_ENCODING) for a, b in STANDARD_SETTINGS]
    rep = fidelity_report(tables, ideals, resamples=100, seed=1)
    fixture_ok = (
        np.allclose([rep.f_zz_zz, rep.f_xx_xx, rep.f_xz_yy], [0.87, 0.88, 0.81], atol=1e-12)
        and abs(rep.f_p - 0.78) < 1e-12
    )
    # (b) documented noise scenario: relative visibility o^2 = 0.90
    b = build_klm_cnot_polarization()
    o = load_scenario("klm-cnot-noisy").overlaps()
    o_sq = o.overlap("C", "A1") ** 2
    sims, ideals = standard_tables(b, overlaps=o)
    f = [classical_fidelity(s, i) for s, i in zip(sims, ideals)]
    zz, xx = sims[0].probabilities, sims[1].probabilities
    control_flips_zz = max(zz[:2, 2:].max(), zz[2:, :2].max())
    target_flips_xx = max(xx[[0, 2]][:, [1, 3]].max(), xx[[1, 3]][:, [0, 2]].max())
    noise_ok = all(0.7 < x < 1.0 for x in f) and 0.89 <= o_sq <= 0.91 and max(control_flips_zz, target_flips_xx) < 1e-9
    record(
        10,
        fixture_ok and noise_ok,
        f"fixture -> ({rep.f_zz_zz:.2f}, {rep.f_xx_xx:.2f}, {rep.f_xz_yy:.2f}), F_p {rep.f_p:.2f}; "
        f"noise o^2={o_sq:.2f} -> ({f[0]:.3f}, {f[1]:.3f}, {f[2]:.3f}), protected flips {max(control_flips_zz, target_flips_xx):.0e}",
    )


def test_criterion_11_determinism(tmp_path):
    same = True
    for scenario in ("klm-cnot-noisy", "reference-counts", "hom-ppbs2"):
        a, b = tmp_path / f"{scenario}-a", tmp_path / f"{scenario}-b"
        assert main(["run", scenario, "--out", str(a)]) == 0
        assert main(["run", scenario, "--out", str(b), "--jobs", "2"]) == 0
        files = sorted(p.name for p in a.iterdir())
        same &= files == sorted(p.name for p in b.iterdir())
        same &= all((a / n).read_bytes() == (b / n).read_bytes() for n in files)
    record(11, same, "repeated seeded CLI runs are byte-identical (noisy, fixture, HOM scenarios)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
