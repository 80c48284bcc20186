"""Imperfection models: partial distinguishability, parameter errors, loop
phase drift and the double-pair background.

Distinguishability is purified: every photon gets an internal wavefunction
spread over orthogonal "slots", and detectors sum over slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import exp, sqrt
from typing import Mapping, Sequence

import numpy as np

from .circuit import BS, Circuit, CircuitError, Element
from .evolve import evolve
from .fock import ModeLayout, StateVector, create_photons
from .measure import HeraldRule, analyzed_probability, outcome_probability


class OverlapError(ValueError):
    pass


def delay_to_overlap(tau: float, tau_c: float) -> float:
    """Gaussian wavepacket overlap for a relative delay ``tau``."""
    if tau_c <= 0:
        raise ValueError(f"coherence time must be positive, got {tau_c}")
    return exp(-0.5 * (tau / tau_c) ** 2)


@dataclass(frozen=True)
class OverlapSpec:
    """Pairwise wavepacket overlaps between named photons.

    Pairs that are not listed overlap perfectly. ``delays`` entries of the
    form ``(tau, tau_c)`` override the overlap of their pair.
    """

    photons: tuple[str, ...]
    overlaps: Mapping[tuple[str, str], float] = field(default_factory=dict)
    delays: Mapping[tuple[str, str], tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "photons", tuple(self.photons))
        names = set(self.photons)
        for table in (self.overlaps, self.delays):
            for a, b in table:
                if a not in names or b not in names:
                    raise OverlapError(f"overlap pair ({a}, {b}) names an unknown photon")
        for pair, o in self.overlaps.items():
            if not 0.0 <= o <= 1.0:
                raise OverlapError(f"overlap {pair} = {o} outside [0, 1]")

    @classmethod
    def two_source(cls, o: float, signal=("C", "T"), ancilla=("A1", "A2")) -> "OverlapSpec":
        """Signal pair and ancilla pair each internally identical, overlap ``o`` across."""
        pairs = {(s, a): o for s in signal for a in ancilla}
        return cls(tuple(signal) + tuple(ancilla), pairs)

    def overlap(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        for key in ((a, b), (b, a)):
            if key in self.delays:
                return delay_to_overlap(*self.delays[key])
        for key in ((a, b), (b, a)):
            if key in self.overlaps:
                return float(self.overlaps[key])
        return 1.0

    def gram(self) -> np.ndarray:
        n = len(self.photons)
        return np.array(
            [[self.overlap(self.photons[i], self.photons[j]) for j in range(n)] for i in range(n)]
        )

    def slot_vectors(self, tol: float = 1e-12) -> np.ndarray:
        """Internal-state vectors, one row per photon, by incremental Gram-Schmidt.

        Each photon reuses the slots of earlier photons as far as the
        overlaps require and opens one new slot for the remainder.
        """
        G = self.gram()
        n = len(G)
        vecs = np.zeros((n, n))
        k = 0
        for j in range(n):
            coeffs = np.zeros(n)
            basis = vecs[:j, :k]
            if j and k:
                # component inside the span of the slots opened so far
                c, *_ = np.linalg.lstsq(basis, G[:j, j], rcond=None)
                if np.max(np.abs(basis @ c - G[:j, j]), initial=0.0) > 1e-9:
                    raise OverlapError(self._inconsistent(j))
                coeffs[:k] = c
            rest = 1.0 - float(coeffs[:k] @ coeffs[:k])
            if rest < -1e-9:
                raise OverlapError(self._inconsistent(j))
            if rest > tol:
                coeffs[k] = sqrt(rest)
                k += 1
            vecs[j] = coeffs
        return vecs[:, : max(k, 1)]

    def _inconsistent(self, j: int) -> str:
        return (
            f"overlaps involving photon {self.photons[j]!r} cannot come from pure "
            "wavepackets (Gram matrix not positive semidefinite)"
        )

    def to_dict(self) -> dict:
        return {
            "photons": list(self.photons),
            "overlaps": [[a, b, o] for (a, b), o in sorted(self.overlaps.items())],
            "delays": [[a, b, t, tc] for (a, b), (t, tc) in sorted(self.delays.items())],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "OverlapSpec":
        return cls(
            tuple(d["photons"]),
            {(a, b): float(o) for a, b, o in d.get("overlaps", [])},
            {(a, b): (float(t), float(tc)) for a, b, t, tc in d.get("delays", [])},
        )


def _slot_photon(layout: ModeLayout, placement: Mapping[str, complex], vec: np.ndarray):
    photon = {}
    for port, c in placement.items():
        path, _, pol = port.partition(":")
        for s, w in enumerate(vec):
            if w != 0:
                photon[layout.index((path, pol or None, s))] = c * w
    return photon


def distinguishable_input(
    layout: ModeLayout,
    placements: Sequence[Mapping[str, complex]],
    overlaps: OverlapSpec,
) -> StateVector:
    """Multi-photon input with partial distinguishability.

    ``placements[j]`` is the spatial/polarization state of photon
    ``overlaps.photons[j]``. The returned state lives on ``layout`` widened
    to as many internal slots as the overlaps need.
    """
    if len(placements) != len(overlaps.photons):
        raise OverlapError("need one placement per photon named in the overlap spec")
    vecs = overlaps.slot_vectors()
    slotted = layout.with_slots(vecs.shape[1])
    return create_photons(
        slotted, [_slot_photon(slotted, p, v) for p, v in zip(placements, vecs)]
    )


def hom_coincidence(R: float, overlap: float, method: str = "permanent") -> float:
    """Simulated coincidence probability for one photon per input of BS(R)."""
    layout = ModeLayout.from_ports(["a", "b"])
    spec = OverlapSpec(("p", "q"), {("p", "q"): overlap})
    psi = distinguishable_input(layout, [{"a": 1.0}, {"b": 1.0}], spec)
    circuit = Circuit(psi.layout, [BS("a", "b", R)])
    out = evolve(circuit, psi, method)
    return outcome_probability(out, HeraldRule({"a": 1, "b": 1}))


@dataclass(frozen=True)
class PerturbationSpec:
    """Parameter offsets addressed as ``"<element name prefix>.<param>"``.

    ``offsets`` add to reflectivities/transmissions (``r``, ``r_h``, ``r_v``,
    ``t``) or to PHASE angles (``phi``). ``jitter`` adds seeded Gaussian
    noise of that standard deviation to every reflectivity.
    """

    offsets: Mapping[str, float] = field(default_factory=dict)
    jitter: float = 0.0
    seed: int | None = None

    def to_dict(self) -> dict:
        return {"offsets": dict(sorted(self.offsets.items())), "jitter": self.jitter, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PerturbationSpec":
        return cls(dict(d.get("offsets", {})), float(d.get("jitter", 0.0)), d.get("seed"))


def _matches(element: Element, key: str) -> tuple[bool, str]:
    prefix, _, param = key.rpartition(".")
    if not prefix:
        raise CircuitError(f"parameter key {key!r} must look like '<element>.<param>'")
    return bool(element.name and element.name.startswith(prefix)), param


def set_params(circuit: Circuit, values: Mapping[str, float], add: bool = False) -> Circuit:
    """Set (or shift, with ``add=True``) named element parameters."""
    hit = {k: False for k in values}
    elements = []
    for e in circuit.elements:
        params = dict(e.params)
        for key, v in values.items():
            ok, param = _matches(e, key)
            if ok and param in params:
                params[param] = params[param] + v if add else v
                hit[key] = True
        try:
            elements.append(Element(e.kind, e.ports, params, e.orientation, e.name))
        except CircuitError as exc:
            raise CircuitError(f"perturbing {e.name}: {exc}") from None
    missing = [k for k, ok in hit.items() if not ok]
    if missing:
        raise CircuitError(f"no element parameter matches {missing}")
    return Circuit(circuit.base_layout, elements)


_REFLECTIVITIES = ("r", "r_h", "r_v")


def perturb_circuit(circuit: Circuit, spec: PerturbationSpec) -> Circuit:
    out = set_params(circuit, spec.offsets, add=True) if spec.offsets else circuit
    if spec.jitter:
        rng = np.random.default_rng(spec.seed)
        elements = []
        for e in out.elements:
            params = dict(e.params)
            for p in _REFLECTIVITIES:
                # only partially reflecting parameters; mirrors stay mirrors
                if p in params and 0.0 < params[p] < 1.0:
                    params[p] = float(np.clip(params[p] + rng.normal(0.0, spec.jitter), 0.0, 1.0))
            elements.append(Element(e.kind, e.ports, params, e.orientation, e.name))
        out = Circuit(out.base_layout, elements)
    return out


def double_pair_background(
    circuit: Circuit,
    herald: HeraldRule,
    analyzer_settings: Sequence[Mapping[str, Sequence[complex]]],
    overlaps: OverlapSpec | None = None,
    ancilla_ports: tuple[str, str] = ("A1:H", "A2:H"),
    method: str = "sequential",
) -> np.ndarray:
    """Fourfold coincidence probability from a double pair in the ancilla inputs.

    Input is two photons in each ancilla port and vacuum in the signal
    inputs; one probability per analyzer setting.
    """
    a1, a2 = ancilla_ports
    placements = [{a1: 1.0}, {a1: 1.0}, {a2: 1.0}, {a2: 1.0}]
    if overlaps is None:
        rows = [np.ones(1)] * 4
    else:
        vecs = dict(zip(overlaps.photons, overlaps.slot_vectors()))
        try:
            rows = [vecs[p.partition(":")[0]] for p in (a1, a1, a2, a2)]
        except KeyError as exc:
            raise OverlapError(f"overlap spec lacks ancilla photon {exc}") from None
    circ = circuit.with_slots(len(rows[0]))
    lay = circ.base_layout
    psi = create_photons(lay, [_slot_photon(lay, p, v) for p, v in zip(placements, rows)])
    out = evolve(circ, psi, method)
    return np.array([analyzed_probability(out, a, herald) for a in analyzer_settings])
