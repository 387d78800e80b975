import math

import numpy as np
import pytest
from scipy.integrate import quad

from aeq.errors import InputError, IntegrationFailure
from aeq.matrixfn import MatrixFunction, fro
from aeq.odes import (MatrixExponential, fundamental_matrix, integrate,
                      inverse_at, mat_exp)
from aeq.scenario import builtin
from aeq.terms import Term

ROTATION = MatrixFunction.constant([[0.0, 1.0], [-1.0, 0.0]])


def example1_A():
    return builtin("example1").A


def test_zero_field_constant_trajectory():
    traj = integrate(MatrixFunction.zero(2), [1.0, 2.0], (0.0, 5.0), 1e-10)
    ts = np.linspace(0, 5, 20)
    assert np.allclose(traj(ts), [1.0, 2.0], atol=1e-12)


def test_rotation_by_pi():
    traj = integrate(ROTATION, [1.0, 0.0], (0.0, math.pi), 1e-10)
    assert np.allclose(traj(math.pi), [-1.0, 0.0], atol=1e-8)


def test_example1_closed_form_solution():
    # (1, 2) is the value of ((t+1)^2, ((t+1)^2)') at t = 0
    traj = integrate(example1_A(), [1.0, 2.0], (0.0, 1.0), 1e-10)
    assert np.allclose(traj(1.0), [4.0, 4.0], atol=1e-8)


def test_trajectory_grid_and_dense_consistency():
    traj = integrate(ROTATION, [1.0, 0.0], (0.0, 3.0), 1e-9)
    assert np.all(np.diff(traj.times) > 0)
    assert np.allclose(traj(traj.times), traj.states, atol=1e-12)
    assert traj.order >= 3


def test_backward_integration_and_roundtrip():
    tol = 1e-10
    fwd = integrate(example1_A(), [0.3, -0.7], (0.0, 6.0), tol)
    end = fwd(6.0)
    back = integrate(example1_A(), end, (6.0, 0.0), tol)
    assert np.all(np.diff(back.times) > 0)
    assert np.allclose(back(0.0), [0.3, -0.7], atol=10 * tol * 100)


def test_integration_failure_reports_last_t():
    # second component of the first built-in blows up at t = -1
    with pytest.raises(IntegrationFailure) as err:
        integrate(example1_A(), [1.0, 1.0], (0.0, -2.0), 1e-8)
    assert err.value.last_t is not None


def test_fundamental_matrix_identity_for_zero_field():
    X = fundamental_matrix(MatrixFunction.zero(3), 4.0, 1e-10)
    for t in (0.0, 1.3, 4.0):
        assert np.allclose(X(t), np.eye(3), atol=1e-12)


def test_fundamental_matrix_example1_entry():
    # combine the closed-form solutions (t+1)^2 and (t+1)^-1 with X(0) = I
    X = fundamental_matrix(example1_A(), 2.0, 1e-11)
    assert X(1.0)[0, 0] == pytest.approx(5.0 / 3.0, abs=1e-9)
    ts = np.linspace(0, 2, 9)
    expect = ((ts + 1) ** 2 + 2 / (ts + 1)) / 3
    assert np.allclose(X(ts)[:, 0, 0], expect, atol=1e-9)


def test_fundamental_matrix_example3_diagonal():
    X = fundamental_matrix(builtin("example3").A, 5.0, 1e-11, two_sided=True)
    for t in (-4.0, -1.5, 0.0, 2.5, 5.0):
        assert X(t)[0, 0] == pytest.approx(math.exp((1 - math.cos(math.pi * t)) / math.pi),
                                           abs=1e-9)
        assert X(t)[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_one_sided_rejects_negative_time():
    X = fundamental_matrix(MatrixFunction.zero(2), 2.0, 1e-8)
    with pytest.raises(InputError):
        X(-1.0)


def test_inverse_at_normalization_and_rotation():
    X = fundamental_matrix(ROTATION, 4.0, 1e-11)
    assert np.allclose(inverse_at(X, 0.0), np.eye(2), atol=1e-12)
    inv = inverse_at(X, math.pi / 2)
    expect = np.array([[math.cos(-math.pi / 2), math.sin(-math.pi / 2)],
                       [-math.sin(-math.pi / 2), math.cos(-math.pi / 2)]])
    assert np.allclose(inv, expect, atol=1e-9)


def test_inverse_at_diagonal_reciprocal():
    X = fundamental_matrix(builtin("example3").A, 3.0, 1e-11)
    inv = inverse_at(X, 2.0)
    direct = X(2.0)
    assert inv[0, 0] == pytest.approx(1.0 / direct[0, 0], rel=1e-10)
    assert inv[1, 1] == pytest.approx(1.0 / direct[1, 1], rel=1e-10)


def test_mat_exp_cases():
    assert np.allclose(mat_exp(np.zeros((3, 3)), 0.0), np.eye(3))
    C = np.array([[0.0, 1.0], [-1.0, 0.0]])
    for t in (0.3, 2.0):
        expect = [[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]]
        assert np.allclose(mat_exp(C, t), expect, atol=1e-14)


def test_mat_exp_example2_fifth_diagonal():
    beta = 0.1
    A = builtin("example2", beta=beta).A.constant_value()
    for t in (0.5, 3.0, 10.0):
        assert mat_exp(A, t)[4, 4] == pytest.approx(math.exp(beta * t), rel=1e-12)


def test_matrix_exponential_cache_matches_expm():
    rng = np.random.default_rng(5)
    C = rng.normal(size=(4, 4))
    E = MatrixExponential(C)
    for t in (-2.0, 0.0, 1.7):
        assert np.allclose(E(t), mat_exp(C, t), atol=1e-11)
    # defective matrix falls back to scaling-and-squaring
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    EN = MatrixExponential(N)
    assert np.allclose(EN(3.0), [[1.0, 3.0], [0.0, 1.0]], atol=1e-13)


def test_liouville_identity():
    # trace A = 0 for the first built-in, so det X(t) must stay 1
    X = fundamental_matrix(example1_A(), 10.0, 1e-11)
    for t in np.linspace(0, 10, 21):
        assert np.linalg.det(X(t)) == pytest.approx(1.0, abs=1e-8)


def test_liouville_identity_nonzero_trace():
    A = builtin("example3").A
    X = fundamental_matrix(A, 6.0, 1e-11)
    for t in np.linspace(0.5, 6, 12):
        trace_int, _ = quad(lambda s: np.trace(A(s)), 0, t, limit=200)
        assert math.log(np.linalg.det(X(t))) == pytest.approx(trace_int, abs=1e-8)


def test_group_property_restart():
    tol = 1e-11
    A = example1_A()
    X = fundamental_matrix(A, 8.0, tol)
    s, t = 3.0, 8.0
    n = A.dim

    def rhs(u, y):
        return (A(u) @ y.reshape(n, n)).reshape(-1)

    restarted = integrate(None, X(s).reshape(-1), (s, t), tol, forcing=rhs)
    assert fro(restarted(t).reshape(n, n) - X(t)) <= 10 * tol * fro(X(t)) + 1e-9


def test_mat_exp_vs_integration_for_constant_A():
    C = np.array([[0.0, 1.0], [-1.0, -0.5]])
    A = MatrixFunction.constant(C)
    tol = 1e-11
    X = fundamental_matrix(A, 5.0, tol)
    for t in np.linspace(0, 5, 11):
        assert fro(X(t) - mat_exp(C, t)) <= 10 * tol + 1e-9
