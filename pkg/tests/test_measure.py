import numpy as np
import pytest

from klmcnot.circuit import BS, LOSS, Circuit
from klmcnot.evolve import evolve
from klmcnot.fock import ModeLayout, StateVector
from klmcnot.gates import CNOT, build_klm_cnot_polarization
from klmcnot.measure import (
    AmbiguousHeraldError,
    DetectorModel,
    HeraldRule,
    analyzed_probability,
    analyzer_matrix,
    conditional_map,
    herald,
    outcome_probability,
    proportionality_check,
    sample_counts,
)


def test_detector_validation():
    with pytest.raises(ValueError):
        DetectorModel("avalanche")
    with pytest.raises(ValueError):
        DetectorModel(efficiency=1.2)
    assert DetectorModel("threshold").accepts(3, 1)
    assert not DetectorModel().accepts(2, 1)


def test_outcome_probability_of_hom():
    lay = ModeLayout.from_ports(["a", "b"])
    out = evolve(Circuit(lay, [BS("a", "b", 0.5)]), StateVector.basis(lay, (1, 1)))
    assert outcome_probability(out, HeraldRule({"a": 1, "b": 1})) == pytest.approx(0, abs=1e-15)
    assert outcome_probability(out, HeraldRule({"a": 2})) == pytest.approx(0.5)
    assert outcome_probability(out, HeraldRule({"a": 1}, DetectorModel("threshold"))) == pytest.approx(0.5)


def test_herald_drops_modes_and_keeps_norm_as_probability():
    lay = ModeLayout.from_ports(["s", "a"])
    psi = evolve(Circuit(lay, [BS("s", "a", 0.3)]), StateVector.basis(lay, (1, 1)))
    h = herald(psi, HeraldRule({"a": 1}))
    assert h.layout.paths == ("s",)
    assert h.norm() ** 2 == pytest.approx(outcome_probability(psi, HeraldRule({"a": 1})))


def test_threshold_herald_with_mixed_counts_is_ambiguous():
    lay = ModeLayout.from_ports(["s", "a"])
    psi = evolve(Circuit(lay, [BS("s", "a", 0.3)]), StateVector.basis(lay, (1, 1)))
    with pytest.raises(AmbiguousHeraldError):
        herald(psi, HeraldRule({"a": 1}, DetectorModel("threshold")))


def test_herald_projects_loss_modes_on_vacuum():
    lay = ModeLayout.from_ports(["s"])
    psi = evolve(Circuit(lay, [LOSS("s", 0.25)]), StateVector.basis(lay, (1,)))
    h = herald(psi, HeraldRule({}))
    assert h.norm() ** 2 == pytest.approx(0.25)


def test_analyzer_matrix_first_row_projects():
    W = analyzer_matrix((1 / np.sqrt(2), 1j / np.sqrt(2)))
    assert np.allclose(W @ W.conj().T, np.eye(2))
    assert W[0] @ np.array([1, 1j]) / np.sqrt(2) == pytest.approx(1)


def test_analyzed_probability_single_photon():
    lay = ModeLayout.polarized(["C"])
    psi = StateVector.basis(lay, (1, 0))  # H
    diag = (1 / np.sqrt(2), 1 / np.sqrt(2))
    assert analyzed_probability(psi, {"C": diag}, HeraldRule({})) == pytest.approx(0.5)
    assert analyzed_probability(psi, {"C": (0, 1)}, HeraldRule({})) == pytest.approx(0)


def test_conditional_map_of_ppbs_gate():
    b = build_klm_cnot_polarization()
    m = conditional_map(b.circuit, b.herald, b.encoding)
    alpha, dev = proportionality_check(m, CNOT)
    assert dev < 1e-9
    assert np.allclose(m.success, abs(alpha) ** 2)
    assert np.all(m.leakage < 1e-12)


def test_sample_counts_is_seeded():
    p = [0.1, 0.2, 0.3, 0.4]
    a = sample_counts(p, 1000, 5)
    assert a.sum() == 1000
    assert np.array_equal(a, sample_counts(p, 1000, 5))
    with pytest.raises(ValueError):
        sample_counts([0, 0], 10, 1)
