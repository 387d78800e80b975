import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aeq.certificates import TailCertificate
from aeq.equivalence import (build_map, check_C2, equivalence_report,
                             map_solution)
from aeq.matrixfn import MatrixFunction, fro
from aeq.odes import fundamental_matrix, integrate
from aeq.psi import build_P, psi_series
from aeq.scenario import builtin
from aeq.terms import Term


def scalar_setup(rate=-1.0, horizon=25.0, tol=1e-10):
    A = MatrixFunction.zero(1)
    B = MatrixFunction.from_terms([[(Term(1.0, rate=rate),)]])
    X = fundamental_matrix(A, horizon, tol)
    P = build_P(X, B)
    cert = TailCertificate(K=1.0, m=0, lam=-rate, t_star=0.0)
    psi = psi_series(P, cert, T=horizon, tol=tol)
    return A, B, X, psi


def test_identity_map_for_zero_B():
    A = MatrixFunction.zero(2)
    B = MatrixFunction.zero(2)
    X = fundamental_matrix(A, 6.0, 1e-10)
    cert = TailCertificate(K=1e-12, m=0, lam=1.0)
    psi = psi_series(build_P(X, B), cert, T=6.0, tol=1e-10)
    emap = build_map(X, psi)
    assert np.allclose(emap.M, np.eye(2), atol=1e-12)
    v = np.array([0.3, -2.0])
    assert np.allclose(map_solution(emap, v, "x_to_y"), v)


def test_scalar_map_closed_form():
    A, B, X, psi = scalar_setup()
    emap = build_map(X, psi)
    # X = 1, so M = 1 + Psi(t2) = exp(-e^{-t2})
    assert emap.M[0, 0] == pytest.approx(math.exp(-math.exp(-emap.t2)), abs=1e-9)
    y0 = map_solution(emap, [1.0], "x_to_y")
    assert y0[0] == pytest.approx(math.exp(-math.exp(-emap.t2)), abs=1e-9)


def test_roundtrip_identity():
    _, _, X, psi = scalar_setup()
    emap = build_map(X, psi)
    v = np.array([3.7])
    back = map_solution(emap, map_solution(emap, v, "x_to_y"), "y_to_x")
    assert np.allclose(back, v, atol=1e-10)
    assert emap.roundtrip_defect() <= 1e-10 * max(emap.cond, 1.0)


@given(st.floats(min_value=-5, max_value=5), st.floats(min_value=-5, max_value=5))
@settings(max_examples=25, deadline=None)
def test_map_linearity(ex1_map_cache, a, b):
    emap, _ = ex1_map_cache
    u = np.array([1.0, -0.5])
    v = np.array([0.25, 2.0])
    lhs = map_solution(emap, a * u + b * v, "x_to_y")
    rhs = a * map_solution(emap, u, "x_to_y") + b * map_solution(emap, v, "x_to_y")
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + abs(a) + abs(b)))


@pytest.fixture(scope="module")
def ex1_map_cache(ex1_ctx):
    return ex1_ctx.emap, ex1_ctx


def test_check_C2_zero_B():
    A = MatrixFunction.zero(1)
    B = MatrixFunction.zero(1)
    X = fundamental_matrix(A, 6.0, 1e-10)
    psi = psi_series(build_P(X, B), TailCertificate(K=1e-12, m=0, lam=1.0),
                     T=6.0, tol=1e-10)
    verdict = check_C2(X, psi, tol=1e-4)
    assert verdict.passed
    assert verdict.worst_value == pytest.approx(0.0, abs=1e-15)


def test_check_C2_example1(ex1_ctx):
    verdict = check_C2(ex1_ctx.X, ex1_ctx.psi, tol=1e-4)
    assert verdict.passed
    assert verdict.worst_value < 1e-4


def test_check_C2_fails_for_growing_product():
    # X grows like e^{t/2} while Psi only decays like e^{-0.3 t}
    A = MatrixFunction.constant([[0.5]])
    B = MatrixFunction.from_terms([[(Term(1.0, rate=-0.3),)]])
    X = fundamental_matrix(A, 30.0, 1e-10)
    P = build_P(X, B)
    cert = TailCertificate(K=1.0, m=0, lam=0.3, t_star=0.0)
    psi = psi_series(P, cert, T=30.0, tol=1e-9)
    verdict = check_C2(X, psi, tol=1e-4)
    assert not verdict.passed


def test_difference_identity_example1(ex1_ctx):
    # y(t) - x(t) = X(t) Psi(t) c with c recovered from the anchored pair
    ctx = ex1_ctx
    emap, X, psi = ctx.emap, ctx.X, ctx.psi
    A, B = ctx.scenario.A, ctx.scenario.B
    t2 = emap.t2
    x0 = np.array([1.0, 2.0])
    y0 = map_solution(emap, x0, "x_to_y")
    n = 2
    c = np.linalg.solve(np.eye(n) + psi.value_at_t2(),
                        np.linalg.solve(X(t2), y0))
    tol = 1e-10
    x = integrate(A, x0, (t2, 15.0), tol)
    y = integrate(A + B, y0, (t2, 15.0), tol)
    for t in np.linspace(t2, 15.0, 12):
        defect = y(t) - x(t) - X(t) @ psi.at(t) @ c
        assert np.linalg.norm(defect) < 5e-7


def test_family_transport_rank(ex1_ctx):
    emap = ex1_ctx.emap
    X = ex1_ctx.X
    basis = np.column_stack([
        map_solution(emap, X(emap.t2) @ e, "x_to_y") for e in np.eye(2)])
    assert np.linalg.matrix_rank(basis, tol=1e-10) == 2


def test_equivalence_report_zero_B():
    A = MatrixFunction.zero(1)
    B = MatrixFunction.zero(1)
    X = fundamental_matrix(A, 6.0, 1e-10)
    psi = psi_series(build_P(X, B), TailCertificate(K=1e-12, m=0, lam=1.0),
                     T=6.0, tol=1e-10)
    emap = build_map(X, psi)
    report = equivalence_report(A, B, emap, [[1.0]], 6.0, tol=1e-6)
    assert report.passed
    assert np.allclose(report.gaps, 0.0, atol=1e-9)


def test_equivalence_report_scalar_decay_curve():
    A, B, X, psi = scalar_setup()
    emap = build_map(X, psi)
    report = equivalence_report(A, B, emap, [[1.0]], 20.0, tol=1e-4,
                                integrator_tol=1e-11)
    # x0 = 1 at t2 gives the family parameter c = X(t2)^-1 x0 = 1, so the
    # gap is |Psi(t) c| = 1 - exp(-e^{-t})
    step = len(report.times) // 8
    for i in range(0, len(report.times), step):
        t = report.times[i]
        expect = abs(math.exp(-math.exp(-t)) - 1.0)
        assert report.gaps[0][i] == pytest.approx(expect, abs=1e-7)
    assert report.passed


def test_equivalence_report_example1(ex1_ctx):
    report = equivalence_report(ex1_ctx.scenario.A, ex1_ctx.scenario.B,
                                ex1_ctx.emap, [[1.0, 0.0], [0.0, 1.0], [1.0, 2.0]],
                                20.0, tol=1e-4, integrator_tol=1e-8)
    assert report.passed
    assert report.sup_late.max() < 1e-4
