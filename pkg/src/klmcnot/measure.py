"""Detectors, heralding and the logical map a heralded circuit implements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import LOSS, LOSS_PREFIX, Circuit, Element
from .evolve import evolve, rotate_modes
from .fock import LayoutError, ModeLayout, StateVector, inner_product

DETECTOR_KINDS = ("threshold", "number_resolving")


class AmbiguousHeraldError(ValueError):
    """The heralded state would be a mixture, not a pure conditional state."""


@dataclass(frozen=True)
class DetectorModel:
    kind: str = "number_resolving"
    efficiency: float = 1.0

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(f"detector kind must be one of {DETECTOR_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"detector efficiency must lie in [0, 1], got {self.efficiency}")

    def accepts(self, count: int, required: int) -> bool:
        if self.kind == "number_resolving":
            return count == required
        return (count > 0) == (required > 0)


@dataclass(frozen=True)
class HeraldRule:
    """Required outcome per detector port.

    ``outcomes`` maps a port (``"A1"`` or ``"A1:H"``) to a photon count. For
    threshold detectors any positive count means "click".
    """

    outcomes: tuple[tuple[str, int], ...]
    detector: DetectorModel = field(default_factory=DetectorModel)

    def __post_init__(self):
        items = self.outcomes.items() if isinstance(self.outcomes, Mapping) else self.outcomes
        items = tuple((str(p), int(n)) for p, n in items)
        if any(n < 0 for _, n in items):
            raise ValueError("required counts must be non-negative")
        object.__setattr__(self, "outcomes", items)

    @property
    def ports(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.outcomes)

    def merged(self, other: "HeraldRule | Mapping[str, int]") -> "HeraldRule":
        extra = other.outcomes if isinstance(other, HeraldRule) else tuple(other.items())
        return HeraldRule(self.outcomes + tuple(extra), self.detector)

    def with_detector(self, detector: DetectorModel) -> "HeraldRule":
        return HeraldRule(self.outcomes, detector)


def _resolve(layout: ModeLayout, rule: HeraldRule) -> list[tuple[tuple[int, ...], int]]:
    try:
        return [(layout.select(p), n) for p, n in rule.outcomes]
    except LayoutError as exc:
        raise LayoutError(f"herald rule: {exc}") from None


def outcome_probability(psi: StateVector, rule: HeraldRule) -> float:
    """Probability of the detection pattern in ``rule``.

    Unmonitored modes, loss modes and internal slots are traced out.
    """
    groups = _resolve(psi.layout, rule)
    det = rule.detector
    total = 0.0
    for occ, a in psi.amplitudes.items():
        if all(det.accepts(sum(occ[i] for i in idx), n) for idx, n in groups):
            total += abs(a) ** 2
    return total


def _is_loss(mode) -> bool:
    return mode.path.startswith(LOSS_PREFIX)


def herald(psi: StateVector, rule: HeraldRule) -> StateVector:
    """Unnormalized state of the retained modes given the herald outcome.

    Loss modes are projected onto vacuum, i.e. the result is the branch in
    which no photon leaked. Without loss its squared norm is the herald
    probability. If more than one herald-mode configuration is consistent
    with the rule (threshold detectors seeing different photon numbers, or
    photons in distinguishable slots) the conditional state is mixed and
    :class:`AmbiguousHeraldError` is raised.
    """
    groups = _resolve(psi.layout, rule)
    det = rule.detector
    herald_idx = sorted({i for idx, _ in groups for i in idx})
    loss_idx = [i for i, m in enumerate(psi.layout) if _is_loss(m)]
    if set(herald_idx) & set(loss_idx):
        raise LayoutError("herald ports may not include loss modes")
    drop = set(herald_idx) | set(loss_idx)
    keep = [i for i in range(len(psi.layout)) if i not in drop]
    out_layout = ModeLayout(tuple(psi.layout.label(i) for i in keep))

    branches: dict[tuple[int, ...], dict[tuple[int, ...], complex]] = {}
    for occ, a in psi.amplitudes.items():
        if any(occ[i] for i in loss_idx):
            continue
        if not all(det.accepts(sum(occ[i] for i in idx), n) for idx, n in groups):
            continue
        h = tuple(occ[i] for i in herald_idx)
        branch = branches.setdefault(h, {})
        k = tuple(occ[i] for i in keep)
        branch[k] = branch.get(k, 0) + a

    live = {h: b for h, b in branches.items() if sum(abs(x) ** 2 for x in b.values()) > 1e-24}
    if len(live) > 1:
        raise AmbiguousHeraldError(
            f"{len(live)} distinct herald-mode configurations match the rule; the "
            "conditional state is mixed. Use number-resolving detectors on single "
            "modes, or query outcome_probability instead."
        )
    amps = next(iter(live.values())) if live else {}
    return StateVector(out_layout, amps, psi.max_photons)


@dataclass(frozen=True)
class ConditionalMap:
    """Heralded action on the 4-dim logical space (columns = logical inputs)."""

    matrix: np.ndarray
    success: np.ndarray
    leakage: np.ndarray
    rule: HeraldRule


def conditional_map(
    circuit: Circuit,
    rule: HeraldRule,
    encoding,
    method: str = "permanent",
) -> ConditionalMap:
    """Heralded logical map of ``circuit``.

    ``encoding`` supplies ``input_state(k)`` (logical input ``k`` plus ancilla
    photons) and ``output_state(k)`` (logical basis state ``k`` on the output
    modes) for ``k = 0..3``. The global phase is fixed so that the
    ``|00> -> |00>`` entry is real and positive.
    """
    dim = 4
    M = np.zeros((dim, dim), dtype=complex)
    norms = np.zeros(dim)
    outs = None
    for k in range(dim):
        out = herald(evolve(circuit, encoding.input_state(k), method), rule)
        if outs is None:
            outs = [encoding.output_state(l).embed(out.layout) for l in range(dim)]
        for l in range(dim):
            M[l, k] = inner_product(outs[l], out)
        norms[k] = out.norm() ** 2
    success = np.sum(np.abs(M) ** 2, axis=0)
    leakage = np.clip(norms - success, 0.0, None)
    return ConditionalMap(_fix_phase(M), success, leakage, rule)


def _fix_phase(M: np.ndarray) -> np.ndarray:
    ref = M[0, 0]
    if abs(ref) < 1e-12:
        ref = M.flat[np.argmax(np.abs(M))]
    if abs(ref) < 1e-15:
        return M
    return M * (abs(ref) / ref)


def proportionality_check(cmap, target) -> tuple[complex, float]:
    """Best scale ``alpha = Tr(target^dagger M) / d`` and max entrywise residual."""
    M = cmap.matrix if isinstance(cmap, ConditionalMap) else np.asarray(cmap)
    target = np.asarray(target, dtype=complex)
    alpha = np.trace(target.conj().T @ M) / target.shape[0]
    deviation = float(np.max(np.abs(M - alpha * target)))
    return complex(alpha), deviation


def detector_loss(ports: Sequence[str], efficiency: float) -> list[Element]:
    """LOSS elements modelling finite detector efficiency in front of ``ports``."""
    if efficiency >= 1.0:
        return []
    return [LOSS(p, efficiency, name=f"detector:{p}") for p in ports]


def sample_counts(probabilities, trials: int, seed) -> np.ndarray:
    """Multinomial draw of ``trials`` events; probabilities are renormalized."""
    p = np.asarray(probabilities, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    if trials < 1:
        raise ValueError("trials must be positive")
    total = p.sum()
    if total <= 0:
        raise ValueError("probabilities sum to zero")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.multinomial(trials, p / total)


def analyzer_matrix(pol_state) -> np.ndarray:
    """Rotation whose first output mode is the projection onto ``pol_state``.

    ``pol_state`` is ``(h, v)`` amplitudes of a normalized polarization.
    """
    h, v = (complex(x) for x in pol_state)
    n = np.sqrt(abs(h) ** 2 + abs(v) ** 2)
    h, v = h / n, v / n
    return np.array([[h.conjugate(), v.conjugate()], [-v, h]])


def analyzed_probability(
    psi: StateVector,
    analyzers: Mapping[str, Sequence[complex]],
    rule: HeraldRule,
) -> float:
    """Probability that each analyzed path fires once and ``rule`` holds.

    ``analyzers`` maps a path (with H and V modes) to the polarization that
    its analyzer passes. The detector behind each analyzer is required to
    see exactly one photon (number-resolving) or to click (threshold).
    """
    lay = psi.layout
    pairs = []
    extra = []
    for path, pol_state in analyzers.items():
        W = analyzer_matrix(pol_state)
        for slot in range(lay.n_slots):
            h, v = (path, "H", slot), (path, "V", slot)
            if h in lay:
                pairs.append((lay.index(h), lay.index(v), W))
        # after rotation the H-labelled modes carry the analyzed polarization
        extra.append((f"{path}:H", 1))
    rotated = rotate_modes(psi, pairs)
    return outcome_probability(rotated, rule.merged(dict(extra)))
