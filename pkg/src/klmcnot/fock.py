"""Multi-mode bosonic Fock states.

Occupation vectors are plain tuples of ints. A :class:`StateVector` keeps a
sparse ``{occupation: amplitude}`` mapping tied to a :class:`ModeLayout` that
names every mode by ``(path, polarization, slot)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, sqrt
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

NORM_TOL = 1e-12
PRUNE_TOL = 1e-14
DEFAULT_MAX_PHOTONS = 6
DEFAULT_MAX_BASIS = 250_000

Occupation = tuple[int, ...]


class StateSpaceTooLarge(ValueError):
    """Raised when a basis or a state exceeds the configured size caps."""


class LayoutError(ValueError):
    pass


class Mode(NamedTuple):
    path: str
    pol: str | None = None
    slot: int = 0

    def __str__(self) -> str:
        s = self.path if self.pol is None else f"{self.path}:{self.pol}"
        return s if self.slot == 0 else f"{s}#{self.slot}"


def parse_port(text: str) -> tuple[str, str | None]:
    """Split ``"C:H"`` into ``("C", "H")``; a bare path gets ``None``."""
    path, _, pol = text.partition(":")
    if not path:
        raise LayoutError(f"empty port name in {text!r}")
    if pol and pol not in ("H", "V"):
        raise LayoutError(f"polarization must be H or V, got {pol!r}")
    return path, (pol or None)


@dataclass(frozen=True)
class ModeLayout:
    """Ordered, bijective list of modes."""

    modes: tuple[Mode, ...]
    _index: Mapping[Mode, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = tuple(Mode(*m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        index = {m: i for i, m in enumerate(modes)}
        if len(index) != len(modes):
            raise LayoutError("duplicate mode labels in layout")
        object.__setattr__(self, "_index", MappingProxyType(index))

    @classmethod
    def from_ports(cls, ports: Iterable[str], slots: int = 1) -> "ModeLayout":
        """Build a layout from ``"path"`` / ``"path:pol"`` strings."""
        modes = []
        for p in ports:
            path, pol = parse_port(p)
            modes.extend(Mode(path, pol, s) for s in range(slots))
        return cls(tuple(modes))

    @classmethod
    def polarized(cls, paths: Iterable[str], slots: int = 1) -> "ModeLayout":
        return cls.from_ports(
            [f"{p}:{pol}" for p in paths for pol in ("H", "V")], slots=slots
        )

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __contains__(self, mode) -> bool:
        return Mode(*mode) in self._index

    def index(self, mode) -> int:
        try:
            return self._index[Mode(*mode)]
        except KeyError:
            raise LayoutError(f"unknown mode {mode!r}") from None

    def label(self, i: int) -> Mode:
        return self.modes[i]

    @property
    def n_slots(self) -> int:
        return max(m.slot for m in self.modes) + 1 if self.modes else 0

    @property
    def paths(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for m in self.modes:
            seen.setdefault(m.path, None)
        return tuple(seen)

    def select(self, port: str) -> tuple[int, ...]:
        """Indices of every mode matched by ``"path"`` or ``"path:pol"``.

        Internal slots are always included; detectors cannot resolve them.
        """
        path, pol = parse_port(port)
        idx = tuple(
            i
            for i, m in enumerate(self.modes)
            if m.path == path and (pol is None or m.pol == pol)
        )
        if not idx:
            raise LayoutError(f"port {port!r} matches no mode in the layout")
        return idx

    def concat(self, other: "ModeLayout") -> "ModeLayout":
        overlap = set(self.modes) & set(other.modes)
        if overlap:
            names = ", ".join(sorted(map(str, overlap)))
            raise LayoutError(f"layouts share mode labels: {names}")
        return ModeLayout(self.modes + other.modes)

    def with_slots(self, slots: int) -> "ModeLayout":
        """Replicate every ``(path, pol)`` over ``slots`` internal slots."""
        base = []
        for m in self.modes:
            key = (m.path, m.pol)
            if key not in base:
                base.append(key)
        return ModeLayout(
            tuple(Mode(p, pol, s) for p, pol in base for s in range(slots))
        )


@lru_cache(maxsize=256)
def _enumerate(m: int, n: int) -> tuple[Occupation, ...]:
    if m == 1:
        return ((n,),)
    out = []
    for k in range(n, -1, -1):
        out.extend((k,) + rest for rest in _enumerate(m - 1, n - k))
    return tuple(out)


def basis_size(mode_count: int, photons: int) -> int:
    return comb(photons + mode_count - 1, photons)


def enumerate_basis(
    mode_count: int, photons: int, max_size: int = DEFAULT_MAX_BASIS
) -> tuple[Occupation, ...]:
    """All occupation vectors of ``photons`` in ``mode_count`` modes.

    Ordered lexicographically descending, so ``(n, 0, ..., 0)`` comes first.
    """
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    if photons < 0:
        raise ValueError("photons must be non-negative")
    size = basis_size(mode_count, photons)
    if size > max_size:
        raise StateSpaceTooLarge(
            f"state space too large: {size} basis states for {photons} photons "
            f"in {mode_count} modes (cap {max_size})"
        )
    return _enumerate(mode_count, photons)


@lru_cache(maxsize=256)
def basis_index(mode_count: int, photons: int) -> Mapping[Occupation, int]:
    return MappingProxyType(
        {occ: i for i, occ in enumerate(enumerate_basis(mode_count, photons))}
    )


@dataclass(frozen=True)
class StateVector:
    """Sparse pure state over a :class:`ModeLayout`.

    Amplitudes may span several photon-number sectors (e.g. a signal in
    ``a|0> + b|1> + c|2>``); most operations treat each sector separately.
    """

    layout: ModeLayout
    amplitudes: Mapping[Occupation, complex]
    max_photons: int = DEFAULT_MAX_PHOTONS

    def __post_init__(self):
        m = len(self.layout)
        clean = {}
        for occ, a in self.amplitudes.items():
            occ = tuple(int(k) for k in occ)
            if len(occ) != m:
                raise LayoutError(
                    f"occupation {occ} has {len(occ)} entries, layout has {m} modes"
                )
            if any(k < 0 for k in occ):
                raise ValueError(f"negative occupation in {occ}")
            if sum(occ) > self.max_photons:
                raise StateSpaceTooLarge(
                    f"state space too large: {sum(occ)} photons exceeds cap "
                    f"{self.max_photons}"
                )
            a = complex(a)
            if abs(a) > PRUNE_TOL:
                clean[occ] = clean.get(occ, 0) + a
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))

    @classmethod
    def basis(cls, layout: ModeLayout, occupation: Sequence[int], **kw) -> "StateVector":
        return cls(layout, {tuple(occupation): 1.0}, **kw)

    @classmethod
    def vacuum(cls, layout: ModeLayout, **kw) -> "StateVector":
        return cls(layout, {(0,) * len(layout): 1.0}, **kw)

    @property
    def sectors(self) -> tuple[int, ...]:
        return tuple(sorted({sum(occ) for occ in self.amplitudes}))

    @property
    def sector(self) -> int | None:
        """Total photon number, or ``None`` for a mixed-sector superposition."""
        s = self.sectors
        return s[0] if len(s) == 1 else None

    def __getitem__(self, occ) -> complex:
        return self.amplitudes.get(tuple(occ), 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return self.scaled(1 / n)

    def scaled(self, c: complex) -> "StateVector":
        return StateVector(
            self.layout,
            {k: c * a for k, a in self.amplitudes.items()},
            self.max_photons,
        )

    def __add__(self, other: "StateVector") -> "StateVector":
        if other.layout != self.layout:
            raise LayoutError("cannot add states on different layouts")
        amps = dict(self.amplitudes)
        for k, a in other.amplitudes.items():
            amps[k] = amps.get(k, 0) + a
        return StateVector(self.layout, amps, self.max_photons)

    def to_dense(self, photons: int | None = None) -> np.ndarray:
        """Dense amplitude vector in the canonical basis of one sector."""
        if photons is None:
            photons = self.sector
            if photons is None:
                raise ValueError("state spans several sectors; pass photons=")
        index = basis_index(len(self.layout), photons)
        vec = np.zeros(len(index), dtype=complex)
        for occ, a in self.amplitudes.items():
            if sum(occ) == photons:
                vec[index[occ]] = a
        return vec

    @classmethod
    def from_dense(
        cls, layout: ModeLayout, photons: int, vec: np.ndarray, **kw
    ) -> "StateVector":
        basis = enumerate_basis(len(layout), photons)
        return cls(layout, {occ: a for occ, a in zip(basis, vec) if a != 0}, **kw)

    def embed(self, layout: ModeLayout) -> "StateVector":
        """Re-express on a larger (or reordered) layout; extra modes are vacuum."""
        positions = [layout.index(m) for m in self.layout]
        amps = {}
        for occ, a in self.amplitudes.items():
            new = [0] * len(layout)
            for pos, k in zip(positions, occ):
                new[pos] = k
            amps[tuple(new)] = a
        return StateVector(layout, amps, self.max_photons)

    def allclose(self, other: "StateVector", atol: float = 1e-10) -> bool:
        if other.layout != self.layout:
            return False
        keys = set(self.amplitudes) | set(other.amplitudes)
        return all(abs(self[k] - other[k]) <= atol for k in keys)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Product state on the concatenated layout of ``a`` then ``b``."""
    layout = a.layout.concat(b.layout)
    amps = {
        oa + ob: x * y
        for oa, x in a.amplitudes.items()
        for ob, y in b.amplitudes.items()
    }
    return StateVector(layout, amps, max(a.max_photons, b.max_photons))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if a.layout != b.layout:
        raise LayoutError("inner product needs identical layouts")
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ in small.amplitudes:
        if occ in big.amplitudes:
            total += a.amplitudes[occ].conjugate() * b.amplitudes[occ]
    return total


def create_photons(
    layout: ModeLayout,
    photons: Sequence[Mapping[int, complex]],
    max_photons: int = DEFAULT_MAX_PHOTONS,
) -> StateVector:
    """Apply one creation operator per photon to the vacuum.

    Each photon is a ``{mode index: coefficient}`` map, i.e. the operator
    ``sum_i c_i a_i^dagger``. Coefficients are used as given (no
    normalization), so overlapping photons produce the usual bosonic
    sqrt(n+1) enhancement.
    """
    state: dict[Occupation, complex] = {(0,) * len(layout): 1.0 + 0j}
    for photon in photons:
        nxt: dict[Occupation, complex] = {}
        for occ, amp in state.items():
            for i, c in photon.items():
                if c == 0:
                    continue
                new = list(occ)
                new[i] += 1
                key = tuple(new)
                nxt[key] = nxt.get(key, 0) + amp * c * sqrt(new[i])
        state = nxt
    return StateVector(layout, state, max_photons)
