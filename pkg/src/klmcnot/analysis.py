"""Truth tables, fidelities and the diagonal dephasing process model.

Three measurement settings characterise the CNOT:

* ``ZZ -> ZZ``: computational basis, tests the bit flip on the target;
* ``XX -> XX``: conjugate basis, tests the phase kick-back on the control;
* ``XZ -> YY``: control in X, target in Z, both read out in Y; the ideal
  output is a Y-parity eigenstate, so each row has two allowed outcomes.

The dephasing model expands the process over the ideal gate and three
phase-flip errors, all diagonal in the (control Z) x (target X) basis.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from math import sqrt
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .fock import ModeLayout, StateVector, create_photons, inner_product
from .gates import CNOT, CnotEncoding, GateBundle
from .evolve import evolve
from .measure import (
    DetectorModel,
    analyzed_probability,
    detector_loss,
    outcome_probability,
    herald,
    sample_counts,
)
from .noise import OverlapSpec, double_pair_background, distinguishable_input

BASES = ("Z", "X", "Y")
QUBITS = ("control", "target")
STANDARD_SETTINGS = (("ZZ", "ZZ"), ("XX", "XX"), ("XZ", "YY"))
CHI_TOL = 1e-9


class BasisError(ValueError):
    pass


class ModelInconsistencyError(ValueError):
    """Fidelities that the diagonal dephasing model cannot produce."""


# --------------------------------------------------------------------------
# basis states


def _check_pair(label: str) -> tuple[str, str]:
    if len(label) != 2 or any(b not in BASES for b in label):
        raise BasisError(f"basis pair must be two letters from {BASES}, got {label!r}")
    return label[0], label[1]


def basis_photons(basis: str, qubit: str, encoding: CnotEncoding):
    """The two eigenstates of ``basis`` for one qubit as ``{port: amplitude}``."""
    if basis not in BASES:
        raise BasisError(f"unknown basis {basis!r}; expected one of {BASES}")
    if qubit not in QUBITS:
        raise BasisError(f"unknown qubit {qubit!r}; expected one of {QUBITS}")
    if encoding.bases and (qubit, basis) in encoding.bases:
        return tuple(dict(s) for s in encoding.bases[(qubit, basis)])
    e0, e1 = encoding.control if qubit == "control" else encoding.target
    if basis == "Z":
        return dict(e0), dict(e1)
    phase = 1.0 if basis == "X" else 1j
    return _superpose(e0, e1, phase), _superpose(e0, e1, -phase)


def _superpose(a, b, c):
    out: dict[str, complex] = {}
    for p, x in a.items():
        out[p] = out.get(p, 0) + x / sqrt(2)
    for p, x in b.items():
        out[p] = out.get(p, 0) + c * x / sqrt(2)
    return {p: x for p, x in out.items() if abs(x) > 1e-15}


def basis_states(basis: str, qubit: str, encoding: CnotEncoding) -> tuple[StateVector, StateVector]:
    """Single-photon eigenstates on the qubit's own modes."""
    e0, e1 = encoding.control if qubit == "control" else encoding.target
    ports = list(dict.fromkeys([*e0, *e1]))
    layout = ModeLayout.from_ports(ports)
    out = []
    for ph in basis_photons(basis, qubit, encoding):
        out.append(create_photons(layout, [{layout.index(_mode(p)): c for p, c in ph.items()}]))
    return tuple(out)


def _mode(port: str):
    path, _, pol = port.partition(":")
    return (path, pol or None, 0)


def _logical(photon: Mapping[str, complex], basis_pair) -> np.ndarray:
    """Coordinates of a single-photon state in the encoding's logical basis."""
    return np.array(
        [sum(np.conj(e.get(p, 0)) * c for p, c in photon.items()) for e in basis_pair]
    )


# --------------------------------------------------------------------------
# truth tables


@dataclass(frozen=True)
class TruthTable:
    """Outcome probabilities, rows = input product states, columns = outcomes.

    Row/column ``2 * c + t`` is the product of control eigenstate ``c`` and
    target eigenstate ``t``.
    """

    in_basis: str
    out_basis: str
    probabilities: np.ndarray
    counts: np.ndarray | None = None

    def __post_init__(self):
        _check_pair(self.in_basis)
        _check_pair(self.out_basis)
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (4, 4):
            raise ValueError(f"truth table must be 4x4, got {p.shape}")
        if np.any(p < -1e-12):
            raise ValueError("truth table has negative entries")
        p = np.clip(p, 0.0, None)
        sums = p.sum(axis=1, keepdims=True)
        if np.any(sums <= 0):
            raise ValueError("truth table row with no events")
        p = p / sums
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        if self.counts is not None:
            c = np.asarray(self.counts)
            if c.shape != (4, 4):
                raise ValueError(f"counts must be 4x4, got {c.shape}")
            object.__setattr__(self, "counts", c)

    @property
    def setting(self) -> str:
        return f"{self.in_basis}->{self.out_basis}"

    @classmethod
    def from_counts(cls, in_basis: str, out_basis: str, counts) -> "TruthTable":
        c = np.asarray(counts, dtype=float)
        return cls(in_basis, out_basis, c, c)

    def labels(self, which: str = "out") -> list[str]:
        basis = self.out_basis if which == "out" else self.in_basis
        return [f"{basis[0]}{c}{basis[1]}{t}" for c in (0, 1) for t in (0, 1)]


def ideal_truth_table(in_basis: str, out_basis: str, encoding: CnotEncoding, gate=CNOT) -> TruthTable:
    """Ideal outcome probabilities from the logical ``gate`` and the encoding.

    Physical eigenstates are projected onto the logical basis, evolved by
    ``gate`` and projected onto the output eigenstates; no sign convention
    is hard-coded.
    """
    bi, bo = _check_pair(in_basis), _check_pair(out_basis)
    probs = np.zeros((4, 4))
    ins = _product_vectors(bi, encoding)
    outs = _product_vectors(bo, encoding)
    for r, v in enumerate(ins):
        w = gate @ v
        for c, u in enumerate(outs):
            probs[r, c] = abs(np.vdot(u, w)) ** 2
    return TruthTable(in_basis, out_basis, probs)


def _product_vectors(bases: tuple[str, str], encoding: CnotEncoding) -> list[np.ndarray]:
    cs = [_logical(p, encoding.control) for p in basis_photons(bases[0], "control", encoding)]
    ts = [_logical(p, encoding.target) for p in basis_photons(bases[1], "target", encoding)]
    return [np.kron(c, t) for c in cs for t in ts]


def _analyzer_path(photons) -> str | None:
    """Common path if every port is ``path:H`` or ``path:V`` of one path."""
    paths = set()
    for ph in photons:
        for p in ph:
            path, _, pol = p.partition(":")
            if pol not in ("H", "V"):
                return None
            paths.add(path)
    return paths.pop() if len(paths) == 1 else None


def _single_ports(photons) -> bool:
    """True if every eigenstate is one photon in one mode (direct counting)."""
    return all(len(ph) == 1 and abs(abs(next(iter(ph.values()))) - 1.0) < 1e-12 for ph in photons)


def _ports(photons) -> list[str]:
    return list(dict.fromkeys(p for ph in photons for p in ph))


def _pol(photon: Mapping[str, complex], path: str) -> tuple[complex, complex]:
    return complex(photon.get(f"{path}:H", 0)), complex(photon.get(f"{path}:V", 0))


def simulate_outcomes(
    bundle: GateBundle,
    in_basis: str,
    out_basis: str,
    overlaps: OverlapSpec | None = None,
    detector: DetectorModel | None = None,
    method: str = "permanent",
) -> np.ndarray:
    """Unnormalized heralded coincidence probabilities (4 inputs x 4 outcomes).

    Polarization-encoded qubits are read out with analyzers in front of the
    detectors, which supports internal slots, losses and threshold
    detectors. Other encodings are read out by projecting the heralded
    state, which needs an unambiguous pure herald.
    """
    enc = bundle.encoding
    if enc is None:
        raise BasisError(f"gate {bundle.name!r} has no qubit encoding")
    bi, bo = _check_pair(in_basis), _check_pair(out_basis)
    rule = bundle.herald if detector is None else bundle.herald.with_detector(detector)
    circuit = bundle.circuit
    if rule.detector.efficiency < 1.0:
        ports = list(dict.fromkeys(m.path for m in circuit.base_layout))
        circuit = circuit.extended(detector_loss(ports, rule.detector.efficiency))

    c_in = basis_photons(bi[0], "control", enc)
    t_in = basis_photons(bi[1], "target", enc)
    c_out = basis_photons(bo[0], "control", enc)
    t_out = basis_photons(bo[1], "target", enc)
    c_path = _analyzer_path(c_out + tuple(enc.control))
    t_path = _analyzer_path(t_out + tuple(enc.target))
    use_analyzers = c_path is not None and t_path is not None and c_path != t_path
    counting = not use_analyzers and _single_ports(c_out + t_out)

    if overlaps is not None:
        if not (use_analyzers or counting):
            raise BasisError(
                "partial distinguishability needs polarization analyzers or a "
                "photon-counting (single-mode) readout basis"
            )
        k = overlaps.slot_vectors().shape[1]
        circuit = circuit.with_slots(k)

    probs = np.zeros((4, 4))
    for r, (cs, ts) in enumerate((c, t) for c in c_in for t in t_in):
        if overlaps is None:
            psi = enc.product_input(cs, ts)
        else:
            placements = [cs, ts] + [{p: 1.0} for p in enc.ancilla]
            base = ModeLayout.from_ports(enc.qubit_ports + tuple(enc.ancilla))
            psi = distinguishable_input(base, placements, overlaps)
        out = evolve(circuit, psi, method)
        if use_analyzers:
            for col, (co, to) in enumerate((c, t) for c in c_out for t in t_out):
                analyzers = {c_path: _pol(co, c_path), t_path: _pol(to, t_path)}
                probs[r, col] = analyzed_probability(out, analyzers, rule)
        elif counting:
            for col, (co, to) in enumerate((c, t) for c in c_out for t in t_out):
                clicks = {p: int(p in co) for p in _ports(c_out)}
                clicks.update({p: int(p in to) for p in _ports(t_out)})
                probs[r, col] = outcome_probability(out, rule.merged(clicks))
        else:
            heralded = herald(out, rule)
            for col, (co, to) in enumerate((c, t) for c in c_out for t in t_out):
                target_state = enc._state([co, to], enc.qubit_ports).embed(heralded.layout)
                probs[r, col] = abs(inner_product(target_state, heralded)) ** 2
    # round-off from interference that should cancel exactly
    probs[probs < 1e-20] = 0.0
    return probs


def background_outcomes(
    bundle: GateBundle,
    out_basis: str,
    overlaps: OverlapSpec | None = None,
    method: str = "sequential",
) -> np.ndarray:
    """Double-pair background for each output setting (4 values)."""
    enc = bundle.encoding
    bo = _check_pair(out_basis)
    c_out = basis_photons(bo[0], "control", enc)
    t_out = basis_photons(bo[1], "target", enc)
    c_path = _analyzer_path(c_out)
    t_path = _analyzer_path(t_out)
    if c_path is None or t_path is None:
        raise BasisError("double-pair background needs polarization analyzers")
    settings = [{c_path: _pol(co, c_path), t_path: _pol(to, t_path)} for co in c_out for to in t_out]
    return double_pair_background(
        bundle.circuit, bundle.herald, settings, overlaps, tuple(enc.ancilla), method
    )


def truth_table(
    bundle: GateBundle,
    in_basis: str = "ZZ",
    out_basis: str = "ZZ",
    overlaps: OverlapSpec | None = None,
    double_pair: float = 0.0,
    detector: DetectorModel | None = None,
    trials: int = 0,
    seed=None,
    method: str = "permanent",
) -> TruthTable:
    """Heralded, background-subtracted truth table.

    ``double_pair`` is the rate of ancilla double-pair events relative to
    signal events. Their fourfold coincidences are added to the raw
    outcomes and then subtracted again, as in a reference run without
    signal photons. With ``trials > 0`` each row is sampled as a
    multinomial of that many raw events and the expected background counts
    are subtracted; the result keeps the raw counts.
    """
    raw = simulate_outcomes(bundle, in_basis, out_basis, overlaps, detector, method)
    bg = np.zeros(4)
    if double_pair:
        if double_pair < 0:
            raise ValueError("double-pair weight must be non-negative")
        bg = double_pair * background_outcomes(bundle, out_basis, overlaps)
        raw = raw + bg[None, :]
    if trials <= 0:
        return TruthTable(in_basis, out_basis, np.clip(raw - bg[None, :], 0.0, None))
    if seed is None:
        raise ValueError("a seed is required when sampling counts")
    rng = np.random.default_rng(seed)
    counts = np.zeros((4, 4), dtype=np.int64)
    net = np.zeros((4, 4))
    for r in range(4):
        counts[r] = sample_counts(raw[r], trials, rng)
        scale = trials / raw[r].sum()
        net[r] = np.clip(counts[r] - bg * scale, 0.0, None)
    return TruthTable(in_basis, out_basis, net, counts)


# --------------------------------------------------------------------------
# fidelities


def classical_fidelity(table: TruthTable, ideal: TruthTable, weighting: str = "equal") -> float:
    """Probability mass on the ideal outcome(s), averaged over inputs.

    ``weighting="equal"`` averages the four rows with equal weight;
    ``"counts"`` pools raw counts (fraction of all events that landed on an
    allowed outcome) and needs ``table.counts``.
    """
    if (table.in_basis, table.out_basis) != (ideal.in_basis, ideal.out_basis):
        raise BasisError(f"basis mismatch: {table.setting} vs {ideal.setting}")
    allowed = ideal.probabilities > 1e-9
    if weighting == "equal":
        return float(np.mean(np.sum(table.probabilities * allowed, axis=1)))
    if weighting == "counts":
        if table.counts is None:
            raise ValueError("count weighting needs raw counts")
        c = np.asarray(table.counts, dtype=float)
        return float(np.sum(c * allowed) / np.sum(c))
    raise ValueError(f"unknown weighting {weighting!r}")


def process_fidelity(f_zz: float, f_xx: float, f_xzyy: float) -> float:
    """Process fidelity bound from three complementary classical fidelities."""
    f_p = (f_zz + f_xx + f_xzyy - 1.0) / 2.0
    if not -1e-12 <= f_p <= 1.0 + 1e-12:
        warnings.warn(
            f"process fidelity {f_p:.4f} lies outside [0, 1]; the three fidelities "
            "are not consistent with the dephasing model",
            RuntimeWarning,
            stacklevel=2,
        )
    return f_p


def average_gate_fidelity(f_p: float, d: int = 4) -> float:
    return (d * f_p + 1.0) / (d + 1.0)


# --------------------------------------------------------------------------
# diagonal dephasing model

# Basis order (VV, VH, HV, HH) = control Z eigenstates x target X eigenstates.
OPERATORS = {
    "gate": np.diag([1, 1, 1, -1]).astype(complex),
    "t": np.diag([1, 1, -1, 1]).astype(complex),
    "c": np.diag([1, -1, 1, 1]).astype(complex),
    "ct": np.diag([1, -1, -1, -1]).astype(complex),
}


@dataclass(frozen=True)
class ChiDiagonal:
    """Weights of the ideal operation and the three phase-flip errors."""

    f_p: float
    eta_t: float
    eta_c: float
    eta_ct: float

    def __post_init__(self):
        vals = self.weights
        if np.any(vals < -CHI_TOL):
            raise ModelInconsistencyError(f"negative process weight in {vals}")
        if abs(vals.sum() - 1.0) > CHI_TOL:
            raise ModelInconsistencyError(f"process weights sum to {vals.sum()}, not 1")

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.f_p, self.eta_t, self.eta_c, self.eta_ct])

    @property
    def entanglement_capable(self) -> bool:
        return self.f_p >= 0.5

    def predicted_fidelities(self) -> tuple[float, float, float]:
        return (self.f_p + self.eta_t, self.f_p + self.eta_c, self.f_p + self.eta_ct)


def dephasing_forward(chi: ChiDiagonal, rho_in: np.ndarray) -> np.ndarray:
    """Apply ``sum_n chi_n U_n rho U_n^dagger`` in the (VV, VH, HV, HH) basis."""
    rho = np.asarray(rho_in, dtype=complex)
    out = np.zeros_like(rho)
    for w, U in zip(chi.weights, OPERATORS.values()):
        out += w * U @ rho @ U.conj().T
    return out


def _physical_vector(photon: Mapping[str, complex], path: str) -> np.ndarray:
    h, v = _pol(photon, path)
    return np.array([v, h])


def channel_truth_table(chi: ChiDiagonal, in_basis: str, out_basis: str, encoding: CnotEncoding) -> TruthTable:
    """Truth table of the dephasing channel acting on polarization qubits."""
    bi, bo = _check_pair(in_basis), _check_pair(out_basis)
    paths = []
    for q in QUBITS:
        states = basis_photons("Z", q, encoding) + basis_photons("X", q, encoding)
        path = _analyzer_path(states)
        if path is None:
            raise BasisError("the dephasing channel is defined on polarization qubits")
        paths.append(path)

    def vectors(bases):
        cs = [_physical_vector(p, paths[0]) for p in basis_photons(bases[0], "control", encoding)]
        ts = [_physical_vector(p, paths[1]) for p in basis_photons(bases[1], "target", encoding)]
        return [np.kron(c, t) for c in cs for t in ts]

    outs = vectors(bo)
    probs = np.zeros((4, 4))
    for r, v in enumerate(vectors(bi)):
        rho = dephasing_forward(chi, np.outer(v, v.conj()))
        for c, u in enumerate(outs):
            probs[r, c] = float(np.real(u.conj() @ rho @ u))
    return TruthTable(in_basis, out_basis, probs)


def dephasing_fit(f_zz: float, f_xx: float, f_xzyy: float) -> ChiDiagonal:
    """Invert the three fidelity relations of the dephasing model."""
    f_p = process_fidelity(f_zz, f_xx, f_xzyy)
    etas = (f_zz - f_p, f_xx - f_p, f_xzyy - f_p)
    if f_p < -CHI_TOL or any(e < -CHI_TOL for e in etas):
        raise ModelInconsistencyError(
            f"fidelities ({f_zz}, {f_xx}, {f_xzyy}) give negative process weights "
            f"(F_p={f_p:.4g}, eta={tuple(round(e, 6) for e in etas)})"
        )
    return ChiDiagonal(f_p, *etas)


def choi_process_fidelity(operators: Sequence[np.ndarray], weights: Sequence[float], target: np.ndarray) -> float:
    """``<Phi_U| J(E) |Phi_U>`` for a mixed-unitary channel ``E``."""
    d = target.shape[0]
    phi_u = target.reshape(-1) / sqrt(d)  # vec(U)/sqrt(d) = (I x U)|Phi+>
    total = 0.0
    for U, w in zip(operators, weights):
        vec = np.asarray(U).reshape(-1) / sqrt(d)
        total += w * abs(np.vdot(phi_u, vec)) ** 2
    return float(total)


# --------------------------------------------------------------------------
# HOM


def hom_visibility(R: float) -> float:
    """Ideal dip visibility ``2RT / (R^2 + T^2)`` for one photon per port."""
    if not 0.0 < R < 1.0:
        raise ValueError(f"visibility needs 0 < R < 1, got {R}")
    T = 1.0 - R
    return 2 * R * T / (R * R + T * T)


def relative_visibility(v_exp: float, R: float) -> float:
    return v_exp / hom_visibility(R)


def simulated_visibility(R: float, overlap: float = 1.0, method: str = "permanent") -> float:
    from .noise import hom_coincidence

    if not 0.0 < R < 1.0:
        raise ValueError(f"visibility needs 0 < R < 1, got {R}")
    p_dist = hom_coincidence(R, 0.0, method)
    return (p_dist - hom_coincidence(R, overlap, method)) / p_dist


def hom_scan(
    R: float,
    taus: Sequence[float],
    tau_c: float,
    method: str = "permanent",
    max_overlap: float = 1.0,
):
    """Dip curve rows ``(tau, overlap, simulated, analytic)`` coincidences.

    ``max_overlap`` caps the overlap at zero delay (residual spectral or
    spatial mismatch).
    """
    from .noise import delay_to_overlap, hom_coincidence

    hom_visibility(R)
    rows = []
    T = 1.0 - R
    for tau in taus:
        o = max_overlap * delay_to_overlap(tau, tau_c)
        rows.append((float(tau), o, hom_coincidence(R, o, method), R * R + T * T - 2 * R * T * o * o))
    return rows


# --------------------------------------------------------------------------
# reports

REPORT_FIELDS = (
    "f_zz_zz",
    "f_xx_xx",
    "f_xz_yy",
    "f_p",
    "f_avg",
    "eta_t",
    "eta_c",
    "eta_ct",
    "entanglement_capable",
)


@dataclass(frozen=True)
class FidelityReport:
    f_zz_zz: float
    f_xx_xx: float
    f_xz_yy: float
    f_p: float
    f_avg: float
    eta_t: float
    eta_c: float
    eta_ct: float
    entanglement_capable: bool
    uncertainties: dict = field(default_factory=dict)
    count_weighted: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in REPORT_FIELDS}
        d = {k: (v if isinstance(v, bool) else _sig(v)) for k, v in d.items()}
        d["uncertainties"] = {k: _sig(v) for k, v in self.uncertainties.items()}
        if self.count_weighted:
            d["count_weighted"] = {k: _sig(v) for k, v in self.count_weighted.items()}
        return d


def _sig(x: float, digits: int = 12) -> float:
    return float(f"{float(x):.{digits}g}")


def _fidelities(tables, ideals) -> tuple[float, float, float]:
    return tuple(classical_fidelity(t, i) for t, i in zip(tables, ideals))


def fidelity_report(
    tables: Sequence[TruthTable],
    ideals: Sequence[TruthTable],
    resamples: int = 1000,
    seed=0,
) -> FidelityReport:
    """Report for the three standard settings, in ZZ, XX, XZ->YY order.

    When every table carries counts the uncertainties are standard
    deviations over multinomial resamples of each row.
    """
    if len(tables) != 3 or len(ideals) != 3:
        raise ValueError("need ZZ->ZZ, XX->XX and XZ->YY tables")
    f = _fidelities(tables, ideals)
    # clip into the model's domain so that a tiny negative weight from
    # floating point does not abort the report
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        f_p = process_fidelity(*f)
    etas = [fi - f_p for fi in f]
    unc: dict = {}
    weighted: dict = {}
    if all(t.counts is not None for t in tables):
        weighted = {
            name: classical_fidelity(t, i, "counts")
            for name, t, i in zip(REPORT_FIELDS[:3], tables, ideals)
        }
        if resamples > 0:
            unc = _bootstrap(tables, ideals, resamples, seed)
    return FidelityReport(
        *f,
        f_p,
        average_gate_fidelity(f_p),
        *etas,
        entanglement_capable=f_p >= 0.5,
        uncertainties=unc,
        count_weighted=weighted,
    )


def _bootstrap(tables, ideals, resamples, seed) -> dict:
    rng = np.random.default_rng(seed)
    samples = np.zeros((resamples, 5))
    for k in range(resamples):
        fake = []
        for t in tables:
            c = np.asarray(t.counts, dtype=float)
            rows = [rng.multinomial(int(round(r.sum())), r / r.sum()) for r in c]
            fake.append(TruthTable(t.in_basis, t.out_basis, np.array(rows, dtype=float)))
        f = _fidelities(fake, ideals)
        f_p = (sum(f) - 1.0) / 2.0
        samples[k] = (*f, f_p, average_gate_fidelity(f_p))
    std = samples.std(axis=0, ddof=1)
    return dict(zip(("f_zz_zz", "f_xx_xx", "f_xz_yy", "f_p", "f_avg"), std))


def standard_tables(bundle: GateBundle, **kw) -> tuple[list[TruthTable], list[TruthTable]]:
    """Simulated and ideal tables for the three standard settings."""
    sims, ideals = [], []
    seed = kw.pop("seed", None)
    for k, (bi, bo) in enumerate(STANDARD_SETTINGS):
        s = None if seed is None else [seed, k]
        sims.append(truth_table(bundle, bi, bo, seed=s, **kw))
        ideals.append(ideal_truth_table(bi, bo, bundle.encoding))
    return sims, ideals


# --------------------------------------------------------------------------
# serialization


def format_number(x) -> str:
    """12 significant digits, '.' decimal separator."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    v = float(x)
    if v == 0.0:
        v = 0.0  # drop negative zero
    return f"{v:.12g}"


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(x) for x in row])
    return buf.getvalue()


def table_csv(table: TruthTable) -> str:
    header = [f"{table.setting}"] + table.labels("out")
    rows = [[lab, *table.probabilities[i]] for i, lab in enumerate(table.labels("in"))]
    return csv_text(header, rows)


def write_text(path: Path | str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def report_json(report: FidelityReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"
