import math

import numpy as np
import pytest
from scipy.integrate import quad

from aeq.certificates import TailCertificate
from aeq.errors import BoundViolationError, InputError
from aeq.odes import MatrixExponential, integrate
from aeq.quasilinear import (Forcing, ForcingTerm, asymptotic_representation,
                             c_u_limit, check_C4, check_C5, check_yakubovich,
                             compare_yakubovich, integrate_u, spectral_data)
from aeq.scenario import builtin
from aeq.terms import Term

E_E1_1 = 0.5963473623231946   # int_0^inf e^{-t}/(1+t) dt, frozen from quadrature

UNIT_CERT = TailCertificate(K=1.0, m=0, lam=1.0, t_star=0.0)


def scalar_forcing(terms):
    return Forcing([ForcingTerm(terms, np.array([[1.0]]))], 1)


def witness_pieces():
    spec = spectral_data(np.array([[1.0]]))
    forcing = scalar_forcing((Term(1.0, power=-1, rate=-1.0),))
    return spec, forcing


# ------------------------------------------------------------- spectral data

def test_spectral_zero_matrix():
    spec = spectral_data(np.zeros((3, 3)))
    assert spec.alpha == spec.beta == 0.0
    assert spec.m_alpha == spec.m_beta == 1


def test_spectral_jordan_block():
    spec = spectral_data(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert spec.alpha == spec.beta == 0.0
    assert spec.m_alpha == spec.m_beta == 2


def test_spectral_example2():
    beta = 0.1
    A = builtin("example2", beta=beta).A.constant_value()
    spec = spectral_data(A)
    assert spec.alpha == pytest.approx(0.0, abs=1e-10)
    assert spec.beta == pytest.approx(beta, abs=1e-10)
    assert spec.m_alpha == spec.m_beta == 1


def test_kappa_bounds_hold():
    C = np.array([[0.0, 1.0], [-2.0, -0.3]])
    spec = spectral_data(C)
    E = MatrixExponential(C)
    for t in np.linspace(0, 15, 40):
        assert np.linalg.norm(E(t), "fro") <= \
            spec.kappa1 * (1 + t) ** (spec.m_beta - 1) * math.exp(spec.beta * t) + 1e-9
        assert np.linalg.norm(E(-t), "fro") <= \
            spec.kappa2 * (1 + t) ** (spec.m_alpha - 1) * math.exp(-spec.alpha * t) + 1e-9


# ----------------------------------------------------------------- integrate_u

def test_integrate_u_zero_forcing():
    forcing = Forcing([], 2)
    state = integrate_u(np.array([[0.0, 1.0], [-1.0, 0.0]]), forcing,
                        [1.0, -2.0], 10.0, 1e-10, UNIT_CERT)
    assert np.allclose(state.u(10.0), [1.0, -2.0], atol=1e-9)


def test_integrate_u_scalar_closed_form():
    # C = 0, f = e^{-t} y: u(t) = exp(1 - e^{-t})
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    state = integrate_u(np.zeros((1, 1)), forcing, [1.0], 20.0, 1e-11, UNIT_CERT)
    for t in (0.0, 1.0, 5.0, 20.0):
        assert state.u(t)[0] == pytest.approx(math.exp(1 - math.exp(-t)), abs=1e-8)


def test_gronwall_bound_from_proof():
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    state = integrate_u(np.zeros((1, 1)), forcing, [1.0], 25.0, 1e-11, UNIT_CERT)
    # k1 = 1, L = 1, so the bound is |u0| e and u approaches it from below
    assert state.gronwall_bound == pytest.approx(math.e, rel=1e-9)
    assert state.max_norm <= 1.01 * state.gronwall_bound


def test_wrong_certificate_trips_bound_check():
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    lying = TailCertificate(K=0.05, m=0, lam=5.0, t_star=0.0)
    with pytest.raises(BoundViolationError):
        integrate_u(np.zeros((1, 1)), forcing, [1.0], 25.0, 1e-10, lying)


# ------------------------------------------------------------------ c_u limit

def test_c_u_zero_forcing():
    state = integrate_u(np.zeros((2, 2)), Forcing([], 2), [2.0, 3.0], 10.0,
                        1e-10, UNIT_CERT)
    c_u, tail = c_u_limit(state, UNIT_CERT)
    assert np.allclose(c_u, [2.0, 3.0], atol=1e-9)


def test_c_u_scalar_limit_is_e():
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    state = integrate_u(np.zeros((1, 1)), forcing, [1.0], 25.0, 1e-11, UNIT_CERT)
    c_u, tail = c_u_limit(state, UNIT_CERT)
    assert abs(c_u[0] - math.e) <= 1e-8
    # the certified remainder covers the true distance to the limit
    assert abs(c_u[0] - math.e) <= tail + 1e-12


def test_c_u_consistency_under_longer_horizon():
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    s1 = integrate_u(np.zeros((1, 1)), forcing, [1.0], 12.0, 1e-11, UNIT_CERT)
    c1, tail1 = c_u_limit(s1, UNIT_CERT)
    s2 = integrate_u(np.zeros((1, 1)), forcing, [1.0], 24.0, 1e-11, UNIT_CERT)
    c2, _ = c_u_limit(s2, UNIT_CERT)
    assert abs(c1[0] - c2[0]) <= tail1


def test_c_u_refuses_divergent_envelope():
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    state = integrate_u(np.array([[0.0]]), forcing, [1.0], 5.0, 1e-9, UNIT_CERT)
    bad_spec = spectral_data(np.array([[0.0, 0.0], [0.0, 2.0]]))  # beta - alpha = 2
    with pytest.raises(InputError):
        c_u_limit(state, UNIT_CERT, spec=bad_spec)


# ------------------------------------------------- asymptotic representation

def test_representation_zero_forcing():
    rep = asymptotic_representation(np.array([[0.0, 1.0], [-1.0, 0.0]]),
                                    Forcing([], 2), [1.0, 0.0], 10.0, 1e-10,
                                    UNIT_CERT)
    assert np.allclose(rep.c, [1.0, 0.0], atol=1e-9)
    assert rep.remainder_norms().max() < 1e-9


def test_representation_scalar():
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    rep = asymptotic_representation(np.zeros((1, 1)), forcing, [1.0], 25.0,
                                    1e-11, UNIT_CERT)
    assert rep.c[0] == pytest.approx(math.e, abs=1e-8)
    norms = rep.remainder_norms()
    # |u(t) - e| = e(e^{-t} + O(e^{-2t})) drops below 1e-6 past t ~ 14.9
    late = norms[rep.times >= 16.0]
    assert late.max() < 1e-6
    assert np.all(np.diff(late) <= 1e-9)


def test_theorem3_identity_against_direct_integration():
    # y' = C y + f(t, y) integrated directly must match e^{Ct}[c + r(t)]
    C = np.array([[1.0]])
    forcing = scalar_forcing((Term(1.0, power=-1, rate=-1.0),))
    rep = asymptotic_representation(C, forcing, [1.0], 12.0, 1e-11, UNIT_CERT)
    E = MatrixExponential(C)

    def rhs(t, y):
        return C @ y + forcing(t, y)

    y = integrate(None, [1.0], (0.0, 12.0), 1e-11, forcing=rhs)
    for i in range(0, len(rep.times), 40):
        t = rep.times[i]
        recon = E(t) @ (rep.c + rep.remainder[i])
        assert np.allclose(y(t), recon, rtol=1e-7, atol=1e-9)


def test_theorem4_pairing_gap_decays():
    # x(t) = e^{Ct} c_u vs y(t) = e^{Ct} u(t); gap ~ c_u / (1 + t)
    C = np.array([[1.0]])
    forcing = scalar_forcing((Term(1.0, power=-1, rate=-1.0),))
    rep = asymptotic_representation(C, forcing, [1.0], 40.0, 1e-11, UNIT_CERT)
    E = MatrixExponential(C)
    ts = rep.times
    gap = np.array([abs((E(t) @ rep.remainder[i])[0]) for i, t in enumerate(ts)])
    i12 = int(np.argmin(np.abs(ts - 12.0)))
    t_ref = ts[i12]
    # gap(t) = e^t int_t^inf e^{-s} u(s) / (1+s) ds with u(s) ~ c_u there
    expect = math.exp(t_ref) * rep.c[0] * quad(
        lambda s: math.exp(-s) / (1 + s), t_ref, 80.0, limit=200)[0]
    assert gap[i12] == pytest.approx(expect, rel=1e-4)
    assert gap[i12] < gap[i12 // 2] < gap[i12 // 4]


# ------------------------------------------------------------------ conditions

def test_check_C4_trivial_unit():
    spec = spectral_data(np.zeros((1, 1)))
    forcing = scalar_forcing((Term(1.0, rate=-1.0),))
    v = check_C4(spec, forcing.eta_terms(), UNIT_CERT)
    assert v.passed
    assert v.extra["L"] == pytest.approx(1.0, abs=1e-10)


def test_check_C4_divergent():
    spec = spectral_data(np.array([[0.0, 0.0], [0.0, 2.0]]))   # beta - alpha = 2
    forcing = Forcing([ForcingTerm((Term(1.0, rate=-1.0),), np.eye(2))], 2)
    v = check_C4(spec, forcing.eta_terms(), UNIT_CERT)
    assert not v.passed
    assert v.extra["divergent"]


def test_check_C4_witness_value():
    spec, forcing = witness_pieces()
    v = check_C4(spec, forcing.eta_terms(), UNIT_CERT)
    assert v.passed
    assert v.extra["L"] == pytest.approx(E_E1_1, abs=1e-4)
    ref, _ = quad(lambda s: math.exp(-s) / (1 + s), 0, 60, limit=300)
    assert v.extra["L"] == pytest.approx(ref, abs=1e-8)


def test_check_C5_and_eq14_elementary():
    # alpha = beta = 0, eta = e^{-t}: both curves equal e^{-t}
    spec = spectral_data(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    forcing = Forcing([ForcingTerm((Term(0.5, rate=-1.0),), np.eye(2) * np.sqrt(2) / 1)], 2)
    eta_terms = forcing.eta_terms()
    scale = eta_terms[0].coeff
    grid = np.linspace(0.0, 10.0, 41)
    cert = TailCertificate(K=scale, m=0, lam=1.0, t_star=0.0)
    v5 = check_C5(spec, eta_terms, cert, grid, tol=1e-3)
    v14 = check_yakubovich(spec, eta_terms, cert, grid, tol=1e-3)
    for v in (v5, v14):
        assert not v.extra["divergent"]
        # values carry a one-sided certified tail below tol * 1e-3
        assert np.allclose(v.extra["curve"]["value"], scale * np.exp(-grid),
                           rtol=1e-8, atol=2e-6)
        assert np.all(v.extra["curve"]["value"] >= scale * np.exp(-grid) - 1e-12)


def test_witness_separates_conditions():
    spec, forcing = witness_pieces()
    grid = np.linspace(0.0, 2000.0, 201)
    v5, v14 = compare_yakubovich(spec, forcing.eta_terms(), UNIT_CERT, grid,
                                 tol=1e-3)
    assert v5.passed
    assert not v14.passed
    assert v14.extra["divergent"]
    # C5 curve behaves like 1/(1+t)
    curve = v5.extra["curve"]["value"]
    i = int(np.argmin(np.abs(grid - 100.0)))
    assert curve[i] == pytest.approx(1.0 / 101.0, rel=0.05)


def test_zero_eta_passes_everything():
    spec = spectral_data(np.zeros((1, 1)))
    forcing = scalar_forcing((Term(0.0),))
    grid = np.linspace(0.0, 10.0, 21)
    v5, v14 = compare_yakubovich(spec, forcing.eta_terms(), UNIT_CERT, grid,
                                 tol=1e-6)
    assert v5.passed and v14.passed
