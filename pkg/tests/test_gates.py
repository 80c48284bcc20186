from math import sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from klmcnot.gates import (
    CNOT,
    ETA_STAR,
    R_STAR,
    NsParameters,
    build,
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

from oracles import ns_simplified_success


@given(st.floats(0.0, 1.0))
def test_simplified_ns_matches_closed_form(R):
    amps = ns_heralded_amplitudes(build_ns_simplified(R))
    assert np.allclose(amps, ns_component_amplitudes(R), atol=1e-12)


def test_two_photon_sign_flips_at_two_thirds():
    assert ns_component_amplitudes(0.66)[2] < 0
    assert ns_component_amplitudes(2 / 3)[2] == pytest.approx(0, abs=1e-15)
    assert ns_component_amplitudes(0.67)[2] > 0


def test_balance_closed_form():
    R, eta = solve_ns_balance()
    assert R == pytest.approx((3 - sqrt(2)) / 7, abs=1e-15)
    assert eta == pytest.approx(5 - 3 * sqrt(2), abs=1e-14)
    assert (R, eta) == pytest.approx((R_STAR, ETA_STAR))
    assert round(R, 2) == 0.23 and round(eta, 2) == 0.76


def test_balanced_ns_with_loss_is_sign_gate():
    amps = ns_heralded_amplitudes(build_ns_simplified(NsParameters(R_STAR, ETA_STAR)))
    a = amps[0]
    assert np.allclose(amps / a, [1, 1, -1], atol=1e-12)
    assert abs(a) ** 2 == pytest.approx(R_STAR, abs=1e-12)
    assert abs(amps[1]) ** 2 == pytest.approx(ns_simplified_success(R_STAR, ETA_STAR), abs=1e-12)


def test_original_ns_solution():
    R1, R2, R3 = solve_ns_original()
    assert R1 == pytest.approx((2 + sqrt(2)) / 4, abs=1e-7) or R1 == pytest.approx((2 - sqrt(2)) / 4, abs=1e-7)
    assert R2 == pytest.approx(3 - 2 * sqrt(2), abs=1e-7)
    amps = ns_heralded_amplitudes(build_ns_original(R1, R2, R3))
    assert np.allclose(amps, [0.5, 0.5, -0.5], atol=1e-9)


@pytest.mark.parametrize("variant,alpha2", [("original", 1 / 16), ("simplified", R_STAR**2)])
def test_dualrail_cnot(variant, alpha2):
    b = build_klm_cnot_dualrail(variant)
    m = conditional_map(b.circuit, b.herald, b.encoding)
    alpha, dev = proportionality_check(m, CNOT)
    assert dev < 1e-9
    assert np.allclose(m.success, alpha2, atol=1e-10)


def test_ppbs_rounded_is_approximately_cnot():
    b = build_klm_cnot_polarization("rounded")
    m = conditional_map(b.circuit, b.herald, b.encoding)
    alpha, dev = proportionality_check(m, CNOT)
    assert dev / abs(alpha) < 0.02
    assert np.all(np.abs(m.success - 0.0519) < 0.002)


def test_registry_and_errors():
    assert build("klm-cnot-ppbs").name == "klm-cnot-ppbs"
    with pytest.raises(ValueError, match="klm-cnot-ppbs"):
        build("toffoli")
    with pytest.raises(ValueError):
        build_klm_cnot_polarization("optimistic")
    with pytest.raises(ValueError):
        NsParameters(R=1.5)
