"""Builders for nonlinear sign gates and the two KLM CNOT layouts.

Orientation choices (which port's self-reflection carries the minus sign)
are fixed here; the proportionality tests pin them down:

* NS gates: the signal port carries the sign, giving heralded amplitudes
  ``(sqrt(R), 1 - 2R, sqrt(R)(3R - 2))`` for ``|0>, |1>, |2>``.
* Beamsplitter pairs that open and close an interferometer share an
  orientation, so the pair multiplies to the identity.
* PPBS2 uses orientation ``(0, 1)``: signal port for H, auxiliary port for
  V. With ``R_V = 1`` the V light is only mirrored, and putting its sign on
  the (empty) auxiliary port keeps the V components phase-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import least_squares

from .circuit import BS, LOSS, PHASE, PPBS, Circuit
from .evolve import compiled, fock_amplitude
from .fock import ModeLayout, StateVector, create_photons
from .measure import DetectorModel, HeraldRule

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

R_STAR = (3 - sqrt(2)) / 7
ETA_STAR = 1 / (2 - 3 * R_STAR)

PRESETS = {
    "exact": {"r": R_STAR, "loss_t": ETA_STAR},
    "rounded": {"r": 0.23, "loss_t": 0.76},
}


def ns_component_amplitudes(R: float) -> tuple[float, float, float]:
    """Heralded amplitudes of the one-beamsplitter NS gate for |0>, |1>, |2>."""
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"R must lie in [0, 1], got {R}")
    r = sqrt(R)
    return r, 1 - 2 * R, r * (3 * R - 2)


def solve_ns_balance() -> tuple[float, float]:
    """Reflectivity and loss transmission that equalize the NS amplitudes.

    Requires ``sqrt(R) = (1 - 2R) sqrt(eta)`` and ``(2 - 3R) eta = 1``,
    i.e. the smaller root of ``7R^2 - 6R + 1 = 0``. The results are
    0.22654 and 0.75693, which round to 23% and 76%.
    """
    roots = np.roots([7.0, -6.0, 1.0])
    R = float(min(r.real for r in roots if 0 < r.real < 0.5))
    return R, 1 / (2 - 3 * R)


@dataclass(frozen=True)
class NsParameters:
    R: float = R_STAR
    loss_t: float | None = None
    R1: float | None = None
    R2: float | None = None
    R3: float | None = None

    def __post_init__(self):
        for name in ("R", "loss_t", "R1", "R2", "R3"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class CnotEncoding:
    """Logical basis of a two-qubit photonic gate.

    ``control`` and ``target`` hold the single-photon states of logical 0
    and 1 as ``{port: amplitude}``. ``ancilla`` lists ports that each get
    one auxiliary photon.
    """

    control: tuple[Mapping[str, complex], Mapping[str, complex]]
    target: tuple[Mapping[str, complex], Mapping[str, complex]]
    ancilla: tuple[str, ...] = ()
    # optional physical eigenstates per (qubit, basis), e.g. ("control", "Y");
    # bases not listed are built from the logical states
    bases: Mapping[tuple[str, str], tuple[Mapping[str, complex], Mapping[str, complex]]] | None = None

    @property
    def qubit_ports(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for state in (*self.control, *self.target):
            for p in state:
                seen.setdefault(p, None)
        return tuple(seen)

    def _state(self, photons, ports) -> StateVector:
        layout = ModeLayout.from_ports(ports)
        return create_photons(
            layout,
            [{layout.index(_mode(p)): c for p, c in ph.items()} for ph in photons],
        )

    def output_state(self, k: int) -> StateVector:
        c, t = divmod(k, 2)
        return self._state([self.control[c], self.target[t]], self.qubit_ports)

    def input_state(self, k: int) -> StateVector:
        c, t = divmod(k, 2)
        photons = [self.control[c], self.target[t]] + [{p: 1.0} for p in self.ancilla]
        return self._state(photons, self.qubit_ports + self.ancilla)

    def product_input(self, control_state, target_state) -> StateVector:
        """Arbitrary single-photon states on each qubit, plus the ancillas."""
        photons = [control_state, target_state] + [{p: 1.0} for p in self.ancilla]
        return self._state(photons, self.qubit_ports + self.ancilla)


def _mode(port: str):
    path, _, pol = port.partition(":")
    return (path, pol or None, 0)


@dataclass(frozen=True)
class GateBundle:
    """A circuit together with what is needed to run it as a heralded gate."""

    name: str
    circuit: Circuit
    herald: HeraldRule
    ancilla: StateVector
    encoding: CnotEncoding | None = None
    signal: str | None = None
    params: dict = field(default_factory=dict)

    def input_with_ancilla(self, signal_state: StateVector) -> StateVector:
        from .fock import tensor

        return tensor(signal_state, self.ancilla)


def build_ns_simplified(params: NsParameters | float = NsParameters()) -> GateBundle:
    """One beamsplitter, one auxiliary photon, herald = one photon back in ``a``."""
    if not isinstance(params, NsParameters):
        params = NsParameters(R=float(params))
    layout = ModeLayout.from_ports(["s", "a"])
    elements = [BS("s", "a", params.R, orientation=0, name="ns")]
    if params.loss_t is not None:
        elements.append(LOSS("s", params.loss_t, name="ns_loss"))
    return GateBundle(
        name="ns-simplified",
        circuit=Circuit(layout, elements),
        herald=HeraldRule({"a": 1}),
        ancilla=StateVector.basis(ModeLayout.from_ports(["a"]), (1,)),
        signal="s",
        params={"r": params.R, "loss_t": params.loss_t},
    )


def _ns_original_elements(s: str, a: str, b: str, R1: float, R2: float, R3: float, tag: str):
    return [
        BS(a, b, R1, name=f"{tag}.bs_a"),
        BS(s, a, R2, name=f"{tag}.bs_s"),
        BS(a, b, R3, name=f"{tag}.bs_b"),
    ]


def build_ns_original(R1: float, R2: float, R3: float) -> GateBundle:
    """Three-beamsplitter NS gate: photon in ``a``, vacuum in ``b``.

    Success is one photon at ``a`` and none at ``b``.
    """
    layout = ModeLayout.from_ports(["s", "a", "b"])
    return GateBundle(
        name="ns-original",
        circuit=Circuit(layout, _ns_original_elements("s", "a", "b", R1, R2, R3, "ns")),
        herald=HeraldRule({"a": 1, "b": 0}),
        ancilla=StateVector.basis(ModeLayout.from_ports(["a", "b"]), (1, 0)),
        signal="s",
        params={"r1": R1, "r2": R2, "r3": R3},
    )


def ns_heralded_amplitudes(bundle: GateBundle, max_n: int = 2) -> np.ndarray:
    """Heralded amplitude ``<k| ... |k>`` on the signal for k = 0..max_n.

    Only meaningful for single-signal NS bundles whose heralds fix every
    ancilla mode (both builders above).
    """
    U = compiled(bundle.circuit)
    lay = bundle.circuit.layout
    herald = dict(bundle.herald.outcomes)
    s = lay.index(_mode(bundle.signal))
    amps = []
    for k in range(max_n + 1):
        occ = [0] * len(lay)
        occ[s] = k
        anc = next(iter(bundle.ancilla.amplitudes))
        for m, n in zip(bundle.ancilla.layout, anc):
            occ[lay.index(m)] = n
        out = [0] * len(lay)
        out[s] = k
        for port, n in herald.items():
            out[lay.index(_mode(port))] = n
        amps.append(fock_amplitude(U, tuple(occ), tuple(out)))
    return np.array(amps)


NS_ORIGINAL_GUESS = (0.85, 0.17, 0.85)


def solve_ns_original(tol: float = 1e-9) -> tuple[float, float, float]:
    """Find reflectivities making the three-BS gate act as diag(1, 1, -1) / 2.

    Root-finding runs on the simulated heralded amplitudes. Raises
    ``RuntimeError`` with the residual if it does not converge below ``tol``.
    """

    def residual(x):
        a = ns_heralded_amplitudes(build_ns_original(*x)).real
        return a - np.array([0.5, 0.5, -0.5])

    fit = least_squares(residual, NS_ORIGINAL_GUESS, bounds=(0, 1), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    worst = float(np.max(np.abs(residual(fit.x))))
    if worst > tol:
        raise RuntimeError(f"NS solver did not converge: residual {worst:.3e}")
    return tuple(float(v) for v in fit.x)


def _simplified_ns_elements(signal: str, aux: str, R: float, tag: str, orientation=0):
    return [BS(signal, aux, R, orientation=orientation, name=tag)]


def build_klm_cnot_dualrail(variant: str = "original", preset: str = "exact") -> GateBundle:
    """Dual-rail KLM CNOT: target MZ (BS3/BS4) around an NS-gated control MZ."""
    ports = ["C0", "C1", "T0", "T1"]
    if variant == "original":
        R1, R2, R3 = solve_ns_original()
        ns_c = _ns_original_elements("C1", "N1a", "N1b", R1, R2, R3, "ns_c")
        ns_t = _ns_original_elements("T0", "N2a", "N2b", R1, R2, R3, "ns_t")
        anc_ports = ("N1a", "N1b", "N2a", "N2b")
        anc_occ = (1, 0, 1, 0)
        herald = HeraldRule({"N1a": 1, "N1b": 0, "N2a": 1, "N2b": 0})
        tail = []
        params = {"r1": R1, "r2": R2, "r3": R3}
    elif variant == "simplified":
        p = PRESETS[preset]
        ns_c = _simplified_ns_elements("C1", "A1", p["r"], "bs7")
        ns_t = _simplified_ns_elements("T0", "A2", p["r"], "bs8")
        anc_ports = ("A1", "A2")
        anc_occ = (1, 1)
        herald = HeraldRule({"A1": 1, "A2": 1})
        tail = [LOSS("C1", p["loss_t"], name="bs9"), LOSS("T0", p["loss_t"], name="bs10")]
        params = dict(p)
    else:
        raise ValueError(f"unknown variant {variant!r}; expected 'original' or 'simplified'")
    layout = ModeLayout.from_ports(ports + list(anc_ports))
    elements = [
        BS("T0", "T1", 0.5, name="bs3"),
        BS("C1", "T0", 0.5, name="bs1"),
        *ns_c,
        *ns_t,
        BS("C1", "T0", 0.5, name="bs2"),
        *tail,
        BS("T0", "T1", 0.5, name="bs4"),
    ]
    encoding = CnotEncoding(
        control=({"C0": 1.0}, {"C1": 1.0}),
        target=({"T0": 1.0}, {"T1": 1.0}),
        ancilla=tuple(p for p, n in zip(anc_ports, anc_occ) if n),
    )
    return GateBundle(
        name="klm-cnot-dualrail",
        circuit=Circuit(layout, elements),
        herald=herald,
        ancilla=StateVector.basis(ModeLayout.from_ports(list(anc_ports)), anc_occ),
        encoding=encoding,
        params={"variant": variant, **params},
    )


H = 1 / sqrt(2)

# Target logical 1 is (V - H)/sqrt2: the same ray as (H - V)/sqrt2, with the
# sign that makes the heralded map proportional to CNOT rather than Z_C CNOT.
#
# The measurement bases are the physical ones used in the laboratory. Control
# Y is labelled (H + iV) for 0, which is the opposite labelling to the
# logical construction (V + iH ~ H - iV); ideal tables are computed from the
# same states, so the labelling only permutes columns.
POLARIZATION_ENCODING = CnotEncoding(
    control=({"C:V": 1.0}, {"C:H": 1.0}),
    target=({"T:H": H, "T:V": H}, {"T:H": -H, "T:V": H}),
    ancilla=("A1:H", "A2:H"),
    bases={
        ("control", "Z"): ({"C:V": 1.0}, {"C:H": 1.0}),
        ("control", "X"): ({"C:H": H, "C:V": H}, {"C:H": H, "C:V": -H}),
        ("control", "Y"): ({"C:H": H, "C:V": 1j * H}, {"C:H": H, "C:V": -1j * H}),
        ("target", "Z"): ({"T:H": H, "T:V": H}, {"T:H": H, "T:V": -H}),
        ("target", "X"): ({"T:V": 1.0}, {"T:H": 1.0}),
        ("target", "Y"): ({"T:H": H, "T:V": 1j * H}, {"T:H": H, "T:V": -1j * H}),
    },
)


def build_klm_cnot_polarization(
    preset: str = "exact",
    r_h: float | None = None,
    loss_t: float | None = None,
    detector: DetectorModel | None = None,
) -> GateBundle:
    """PPBS version of the simplified-NS KLM CNOT.

    Element order: PPBS1 (first pass), PPBS2 on (C, A1) and (T, A2), the
    two Sagnac loop phases (zero unless perturbed), PPBS1 (second pass),
    PPBS3 as an H-only loss on each output. The target's Hadamard pair is
    folded into the encoding, so the core is a controlled phase on the
    H components of C and T.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
    p = PRESETS[preset]
    r = p["r"] if r_h is None else r_h
    t = p["loss_t"] if loss_t is None else loss_t
    layout = ModeLayout.polarized(["C", "T", "A1", "A2"])
    elements = [
        PPBS("C", "T", 0.5, 1.0, orientation=0, name="ppbs1_in"),
        PPBS("C", "A1", r, 1.0, orientation=(0, 1), name="ppbs2_c"),
        PPBS("T", "A2", r, 1.0, orientation=(0, 1), name="ppbs2_t"),
        PHASE("C:H", 0.0, name="loop_c"),
        PHASE("T:H", 0.0, name="loop_t"),
        PPBS("C", "T", 0.5, 1.0, orientation=0, name="ppbs1_out"),
        LOSS("C:H", t, name="ppbs3_c"),
        LOSS("T:H", t, name="ppbs3_t"),
    ]
    detector = detector or DetectorModel()
    return GateBundle(
        name="klm-cnot-ppbs",
        circuit=Circuit(layout, elements),
        herald=HeraldRule({"A1": 1, "A2": 1}, detector),
        ancilla=StateVector.basis(ModeLayout.from_ports(["A1:H", "A2:H"]), (1, 1)),
        encoding=POLARIZATION_ENCODING,
        params={"preset": preset, "r_h": r, "loss_t": t},
    )


def _ns_simplified_named(preset: str = "exact", **kw) -> GateBundle:
    p = PRESETS[preset]
    return build_ns_simplified(NsParameters(R=kw.get("r", p["r"]), loss_t=kw.get("loss_t", p["loss_t"])))


def _ns_original_named(**kw) -> GateBundle:
    return build_ns_original(*solve_ns_original())


BUILDERS: dict[str, Callable[..., GateBundle]] = {
    "ns-simplified": _ns_simplified_named,
    "ns-original": _ns_original_named,
    "klm-cnot-dualrail": build_klm_cnot_dualrail,
    "klm-cnot-ppbs": build_klm_cnot_polarization,
}


def build(name: str, **kw) -> GateBundle:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown gate {name!r}; expected one of {sorted(BUILDERS)}") from None
    return builder(**kw)
