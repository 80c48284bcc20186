"""Linear-optical elements and their compilation to a mode unitary.

Convention: a mode unitary ``U`` maps creation operators as
``a_i^dagger -> sum_j U[j, i] a_j^dagger``. For a two-port element the
self-reflection keeps a photon in its own mode and transmission swaps it to
the other port. One port's self-reflection carries a minus sign; which one is
set by ``orientation`` (0 = first port, 1 = second port).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator, Sequence

import numpy as np

from .fock import LayoutError, Mode, ModeLayout, parse_port

KINDS = ("BS", "PPBS", "PHASE", "LOSS")
LOSS_PREFIX = "~loss"


class CircuitError(ValueError):
    pass


def _check_unit(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise CircuitError(f"{name} must lie in [0, 1], got {x}")
    return x


def beamsplitter_matrix(R: float, orientation: int = 0) -> np.ndarray:
    """Real 2x2 beamsplitter with reflectivity ``R``.

    ``orientation=0`` gives ``[[-sqrt(R), sqrt(T)], [sqrt(T), sqrt(R)]]``;
    ``orientation=1`` moves the minus sign to the second port.
    """
    R = _check_unit("reflectivity", R)
    r, t = np.sqrt(R), np.sqrt(1.0 - R)
    if orientation == 0:
        return np.array([[-r, t], [t, r]])
    if orientation == 1:
        return np.array([[r, t], [t, -r]])
    raise CircuitError(f"orientation must be 0 or 1, got {orientation!r}")


def _pol_orientations(orientation) -> tuple[int, int]:
    if isinstance(orientation, (tuple, list)):
        o_h, o_v = orientation
        return int(o_h), int(o_v)
    return int(orientation), int(orientation)


def ppbs_matrix(R_H: float, R_V: float, orientation=0) -> np.ndarray:
    """4x4 partially polarizing beamsplitter.

    Mode order is ``(a:H, b:H, a:V, b:V)`` so the result is block diagonal.
    ``orientation`` is either one int for both polarizations or an
    ``(H, V)`` pair; a real coating imprints different reflection phases on
    the two polarizations, so the pair form is allowed.
    """
    o_h, o_v = _pol_orientations(orientation)
    out = np.zeros((4, 4))
    out[:2, :2] = beamsplitter_matrix(R_H, o_h)
    out[2:, 2:] = beamsplitter_matrix(R_V, o_v)
    return out


def loss_matrix(T: float) -> np.ndarray:
    """Coupler on ``(port, loss mode)`` that keeps amplitude sqrt(T) in the port."""
    return beamsplitter_matrix(_check_unit("transmissivity", T), orientation=1)


@dataclass(frozen=True)
class Element:
    kind: str
    ports: tuple[str, ...]
    params: dict[str, Any] = field(default_factory=dict)
    orientation: Any = 0
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown element kind {self.kind!r}; expected one of {KINDS}")
        ports = tuple(self.ports)
        object.__setattr__(self, "ports", ports)
        n_ports = 1 if self.kind in ("PHASE", "LOSS") else 2
        if len(ports) != n_ports:
            raise CircuitError(f"{self.kind} needs {n_ports} port(s), got {ports}")
        if len(set(ports)) != len(ports):
            raise CircuitError(f"{self.kind} ports must be distinct, got {ports}")
        for p in ports:
            parse_port(p)
        p = dict(self.params)
        if self.kind == "BS":
            _check_unit("r", p["r"])
        elif self.kind == "PPBS":
            _check_unit("r_h", p["r_h"])
            _check_unit("r_v", p["r_v"])
            if any(parse_port(x)[1] for x in ports):
                raise CircuitError("PPBS ports are path names without polarization")
        elif self.kind == "PHASE":
            p["phi"] = float(p.get("phi", 0.0))
        elif self.kind == "LOSS":
            _check_unit("t", p["t"])
        object.__setattr__(self, "params", p)

    def replace(self, **params) -> "Element":
        return Element(self.kind, self.ports, {**self.params, **params}, self.orientation, self.name)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "ports": list(self.ports), "params": dict(self.params)}
        orient = self.orientation
        d["orientation"] = list(orient) if isinstance(orient, (tuple, list)) else orient
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Element":
        orient = d.get("orientation", 0)
        if isinstance(orient, list):
            orient = tuple(orient)
        return cls(d["kind"], tuple(d["ports"]), dict(d.get("params", {})), orient, d.get("name"))


def BS(a: str, b: str, r: float, orientation: int = 0, name: str | None = None) -> Element:
    return Element("BS", (a, b), {"r": r}, orientation, name)


def PPBS(a: str, b: str, r_h: float, r_v: float, orientation=0, name: str | None = None) -> Element:
    return Element("PPBS", (a, b), {"r_h": r_h, "r_v": r_v}, orientation, name)


def PHASE(port: str, phi: float = 0.0, name: str | None = None) -> Element:
    return Element("PHASE", (port,), {"phi": phi}, 0, name)


def LOSS(port: str, t: float, name: str | None = None) -> Element:
    return Element("LOSS", (port,), {"t": t}, 0, name)


def _pair_modes(layout: ModeLayout, a: str, b: str) -> list[tuple[int, int]]:
    """Match the modes of two ports pol-by-pol and slot-by-slot."""
    ia, ib = layout.select(a), layout.select(b)
    key = lambda i: (layout.label(i).pol, layout.label(i).slot)
    ka = {key(i): i for i in ia}
    kb = {key(i): i for i in ib}
    if set(ka) != set(kb):
        raise CircuitError(f"ports {a!r} and {b!r} do not carry matching modes")
    return [(ka[k], kb[k]) for k in sorted(ka, key=lambda k: (str(k[0]), k[1]))]


@dataclass(frozen=True)
class Circuit:
    """Ordered optical network.

    ``base_layout`` holds the signal and ancilla modes. Every LOSS element
    gets its own vacuum environment mode(s), appended in :attr:`layout`.
    """

    base_layout: ModeLayout
    elements: tuple[Element, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for m in self.base_layout:
            if m.path.startswith(LOSS_PREFIX):
                raise CircuitError(f"mode {m} uses the reserved loss prefix")
        for e in self.elements:
            for p in e.ports:
                try:
                    self.base_layout.select(p)
                except LayoutError as exc:
                    raise CircuitError(f"element {e.name or e.kind}: {exc}") from None

    @cached_property
    def _loss_map(self) -> dict[int, list[tuple[int, Mode]]]:
        out: dict[int, list[tuple[int, Mode]]] = {}
        for k, e in enumerate(self.elements):
            if e.kind != "LOSS":
                continue
            pairs = []
            for i in self.base_layout.select(e.ports[0]):
                m = self.base_layout.label(i)
                pairs.append((i, Mode(f"{LOSS_PREFIX}{k}", m.pol, m.slot)))
            out[k] = pairs
        return out

    @cached_property
    def loss_modes(self) -> tuple[Mode, ...]:
        return tuple(m for pairs in self._loss_map.values() for _, m in pairs)

    @cached_property
    def layout(self) -> ModeLayout:
        return ModeLayout(self.base_layout.modes + self.loss_modes)

    def blocks(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        """Yield ``(mode indices, small unitary)`` for every element, in order."""
        lay = self.layout
        for k, e in enumerate(self.elements):
            if e.kind == "BS":
                m = beamsplitter_matrix(e.params["r"], e.orientation)
                for pair in _pair_modes(lay, *e.ports):
                    yield pair, m
            elif e.kind == "PPBS":
                o_h, o_v = _pol_orientations(e.orientation)
                mats = {
                    "H": beamsplitter_matrix(e.params["r_h"], o_h),
                    "V": beamsplitter_matrix(e.params["r_v"], o_v),
                }
                for pol in ("H", "V"):
                    for pair in _pair_modes(lay, f"{e.ports[0]}:{pol}", f"{e.ports[1]}:{pol}"):
                        yield pair, mats[pol]
            elif e.kind == "PHASE":
                m = np.array([[np.exp(1j * e.params["phi"])]])
                for i in lay.select(e.ports[0]):
                    yield (i,), m
            elif e.kind == "LOSS":
                m = loss_matrix(e.params["t"])
                for i, loss_mode in self._loss_map[k]:
                    yield (i, lay.index(loss_mode)), m

    def with_slots(self, slots: int) -> "Circuit":
        return Circuit(self.base_layout.with_slots(slots), self.elements)

    def extended(self, elements: Sequence[Element]) -> "Circuit":
        return Circuit(self.base_layout, self.elements + tuple(elements))

    def element(self, name: str) -> Element:
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        ports = []
        for m in self.base_layout:
            if m.slot == 0:
                ports.append(m.path if m.pol is None else f"{m.path}:{m.pol}")
        return {
            "modes": ports,
            "slots": self.base_layout.n_slots,
            "elements": [e.to_dict() for e in self.elements],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        layout = ModeLayout.from_ports(d["modes"], slots=int(d.get("slots", 1)))
        return cls(layout, tuple(Element.from_dict(e) for e in d.get("elements", ())))


@dataclass(frozen=True)
class ModeUnitary:
    matrix: np.ndarray
    layout: ModeLayout

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise CircuitError(f"mode unitary must be square, got shape {m.shape}")
        if m.shape[0] != len(self.layout):
            raise CircuitError("matrix size does not match layout")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @cached_property
    def key(self) -> bytes:
        return self.matrix.tobytes()


def embed(indices: Sequence[int], small: np.ndarray, size: int) -> np.ndarray:
    full = np.eye(size, dtype=complex)
    idx = list(indices)
    full[np.ix_(idx, idx)] = small
    return full


def compile_circuit(circuit: Circuit) -> ModeUnitary:
    """Multiply all element blocks, in element order, on the full layout."""
    size = len(circuit.layout)
    U = np.eye(size, dtype=complex)
    for idx, small in circuit.blocks():
        U = embed(idx, small, size) @ U
    return ModeUnitary(U, circuit.layout)


def validate_unitary(U, tol: float = 1e-10) -> bool:
    m = U.matrix if isinstance(U, ModeUnitary) else np.asarray(U)
    dev = m.conj().T @ m - np.eye(m.shape[0])
    return bool(np.max(np.abs(dev), initial=0.0) <= tol)
