import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from aeq.certificates import (TailCertificate, find_smallness_point, fit_K,
                              resolve, tail_integral, validate_certificate)
from aeq.errors import InputError


def test_validate_pass_trivial():
    cert = TailCertificate(K=1.0, m=0, lam=1.0, t_star=0.0)
    result = validate_certificate(lambda t: np.exp(-2 * t), cert,
                                  np.linspace(0, 10, 101))
    assert result.passed
    assert result.worst_excess <= 0


def test_validate_fail_trivial():
    cert = TailCertificate(K=1.0, m=0, lam=2.0, t_star=0.0)
    result = validate_certificate(lambda t: np.exp(-t), cert,
                                  np.linspace(0.1, 5, 50))
    assert not result.passed
    assert result.worst_excess > 0


def test_fit_then_revalidate():
    # envelope shaped like the first built-in's coupling norm
    env = lambda t: np.exp(-3 * t) * (1 + t) ** 2
    ts = np.linspace(0, 20, 400)
    cert = fit_K(ts, env(ts), m=0, lam=2.5, t_star=0.0)
    assert cert.K > 0
    assert validate_certificate(env, cert, ts).passed


def test_resolve_keeps_explicit_K():
    cert = TailCertificate(K=2.0, m=0, lam=1.0)
    assert resolve(cert, [0, 1], [1, 1]) is cert


def test_tail_integral_closed_forms():
    assert tail_integral(TailCertificate(K=1.0, m=0, lam=1.0), 0.0) == pytest.approx(1.0)
    # Gamma(2) = 1, cross-checked by quadrature below
    assert tail_integral(TailCertificate(K=1.0, m=1, lam=1.0), 0.0) == pytest.approx(1.0)
    val = tail_integral(TailCertificate(K=2.0, m=0, lam=3.0), 1.0)
    assert val == pytest.approx((2.0 / 3.0) * math.exp(-3), rel=1e-14)


@pytest.mark.parametrize("K,m,lam,t", [
    (1.0, 0, 1.0, 0.0),
    (1.0, 1, 1.0, 0.0),
    (2.0, 0, 3.0, 1.0),
    (0.7, 3, 0.9, 2.5),
])
def test_tail_integral_vs_quadrature(K, m, lam, t):
    cert = TailCertificate(K=K, m=m, lam=lam, t_star=0.0)
    horizon = t + 50.0 / lam
    ref, _ = quad(lambda s: K * s ** m * np.exp(-lam * s), t, horizon, limit=300)
    assert tail_integral(cert, t) == pytest.approx(ref, rel=1e-10, abs=1e-14)


@given(st.floats(min_value=0.2, max_value=5.0),
       st.integers(min_value=0, max_value=4),
       st.floats(min_value=0.3, max_value=4.0))
@settings(max_examples=40, deadline=None)
def test_tail_integral_decreasing_to_zero(K, m, lam):
    cert = TailCertificate(K=K, m=m, lam=lam, t_star=0.0)
    ts = np.linspace(0, 40 / lam, 30)
    vals = [tail_integral(cert, t) for t in ts]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-8 * vals[0]


def test_find_smallness_point_exact():
    cert = TailCertificate(K=1.0, m=0, lam=1.0)
    t1 = find_smallness_point(cert, math.exp(-1))
    assert t1 == pytest.approx(1.0, abs=1e-8)


def test_find_smallness_point_near_zero():
    cert = TailCertificate(K=1.0, m=0, lam=1.0)
    t1 = find_smallness_point(cert, 0.999)
    assert 0 < t1 < 0.01
    assert tail_integral(cert, t1) < 0.999


def test_find_smallness_point_formula():
    # tail of K e^{-lam t} is (K/lam) e^{-lam t}; solving for eps gives
    # t1 = log(K / (lam * eps)) / lam
    K, lam, eps = 7.0, 2.5, 0.25
    cert = TailCertificate(K=K, m=0, lam=lam)
    t1 = find_smallness_point(cert, eps)
    assert t1 == pytest.approx(math.log(K / (lam * eps)) / lam, abs=1e-8)


def test_find_smallness_point_bracket():
    cert = TailCertificate(K=3.0, m=2, lam=0.8)
    eps = 0.01
    delta = 1e-9
    t1 = find_smallness_point(cert, eps, resolution=delta)
    assert tail_integral(cert, t1) < eps
    assert tail_integral(cert, t1 - 2 * delta) >= eps


def test_certificate_validation_errors():
    with pytest.raises(InputError):
        TailCertificate(K=-1.0, m=0, lam=1.0)
    with pytest.raises(InputError):
        TailCertificate(K=1.0, m=-1, lam=1.0)
    with pytest.raises(InputError):
        TailCertificate(K=1.0, m=0, lam=0.0)
    unresolved = TailCertificate(K=None, m=0, lam=1.0)
    with pytest.raises(InputError):
        tail_integral(unresolved, 0.0)
    with pytest.raises(InputError):
        tail_integral(TailCertificate(K=1.0, m=0, lam=1.0, t_star=2.0), 1.0)
