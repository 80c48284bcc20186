import numpy as np
import pytest
from hypothesis import given, strategies as st

from klmcnot.circuit import BS, LOSS, PHASE, PPBS, Circuit, ModeUnitary
from klmcnot.evolve import (
    apply_sequential,
    apply_unitary,
    compiled,
    evolve,
    fock_amplitude,
    permanent,
    permanents,
)
from klmcnot.fock import ModeLayout, StateVector, enumerate_basis

from oracles import naive_permanent, random_unitary


@pytest.mark.parametrize("n", range(0, 6))
def test_ryser_matches_naive_permanent(n):
    rng = np.random.default_rng(n)
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert abs(permanent(M) - (naive_permanent(M) if n else 1)) < 1e-10


def test_permanent_known_values():
    assert permanent(np.ones((3, 3))) == pytest.approx(6)
    assert permanent(np.eye(4)) == pytest.approx(1)
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))


def test_stacked_permanents():
    rng = np.random.default_rng(0)
    stack = rng.normal(size=(5, 4, 4))
    assert np.allclose(permanents(stack), [permanent(m) for m in stack])


def test_hom_bunching_amplitude():
    U = ModeUnitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2), ModeLayout.from_ports(["a", "b"]))
    assert abs(fock_amplitude(U, (1, 1), (1, 1))) < 1e-15
    assert abs(fock_amplitude(U, (1, 1), (2, 0))) ** 2 == pytest.approx(0.5)
    assert fock_amplitude(U, (1, 1), (1, 0)) == 0


def _random_circuit(rng, n_modes, depth):
    lay = ModeLayout.from_ports([f"m{i}" for i in range(n_modes)])
    els = []
    for _ in range(depth):
        i, j = rng.choice(n_modes, 2, replace=False)
        els.append(BS(f"m{i}", f"m{j}", rng.uniform(), int(rng.integers(2))))
        els.append(PHASE(f"m{rng.integers(n_modes)}", rng.uniform(-np.pi, np.pi)))
    return Circuit(lay, els)


def _random_state(rng, n_modes, photons):
    lay = ModeLayout.from_ports([f"m{i}" for i in range(n_modes)])
    basis = enumerate_basis(n_modes, photons)
    picks = rng.choice(len(basis), size=min(3, len(basis)), replace=False)
    return StateVector(lay, {basis[k]: rng.normal() + 1j * rng.normal() for k in picks}).normalized()


@given(st.integers(2, 6), st.integers(1, 4), st.integers(1, 8), st.integers(0, 2**31))
def test_sequential_matches_permanent(n_modes, photons, depth, seed):
    rng = np.random.default_rng(seed)
    c = _random_circuit(rng, n_modes, depth)
    psi = _random_state(rng, n_modes, photons)
    a = apply_unitary(compiled(c), psi)
    b = apply_sequential(c, psi)
    assert a.allclose(b, atol=1e-9)


@given(st.integers(0, 2**31))
def test_evolution_preserves_norm_with_loss(seed):
    rng = np.random.default_rng(seed)
    lay = ModeLayout.polarized(["a", "b"])
    c = Circuit(lay, [PPBS("a", "b", rng.uniform(), rng.uniform()), LOSS("a:H", rng.uniform())])
    psi = StateVector.basis(lay, (1, 1, 0, 1))
    for method in ("permanent", "sequential"):
        assert evolve(c, psi, method).norm() == pytest.approx(1.0, abs=1e-12)


def test_dense_transfer_matrix_is_unitary_on_sector():
    rng = np.random.default_rng(3)
    lay = ModeLayout.from_ports(["a", "b", "c"])
    U = ModeUnitary(random_unitary(3, rng), lay)
    basis = enumerate_basis(3, 2)
    T = np.array([[fock_amplitude(U, i, o) for i in basis] for o in basis])
    assert np.allclose(T.conj().T @ T, np.eye(len(basis)), atol=1e-12)


def test_unknown_method():
    c = Circuit(ModeLayout.from_ports(["a"]), [])
    with pytest.raises(ValueError, match="sequential"):
        evolve(c, StateVector.vacuum(c.layout), "magic")
