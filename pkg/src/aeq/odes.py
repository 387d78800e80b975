"""Time-varying linear ODE integration with dense output.

Adaptive Dormand-Prince 5(4) stepping (scipy's RK45) with its quartic dense
interpolant; the right-hand sides in this package are smooth and non-stiff.
Fundamental matrices are integrated as one flattened matrix system, and
their inverses are obtained by LU solve at the queried time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import InputError, IntegrationFailure, SingularMatrixError
from .matrixfn import MatrixFunction, fro

#: dense interpolant order of the RK45 pair
INTERP_ORDER = 4


@dataclass
class Trajectory:
    """Solution samples plus the integrator's dense interpolant."""

    times: np.ndarray      # strictly increasing grid
    states: np.ndarray     # (len(times), n)
    order: int             # polynomial order of the dense interpolant
    _dense: object = field(repr=False, default=None)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InputError("trajectory grid must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise InputError("trajectory contains non-finite states")

    @property
    def dim(self):
        return self.states.shape[1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        vals = self._dense(t.reshape(-1))
        vals = np.asarray(vals).T.reshape(t.shape + (self.dim,))
        return vals


def integrate(A, x0, span, tol, forcing=None, max_step=np.inf) -> Trajectory:
    """Integrate x' = A(t) x (+ forcing(t, x)) over span, either direction.

    ``span`` may run backward (t_a > t_b); the returned Trajectory always
    stores its grid in increasing time order.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    t_a, t_b = float(span[0]), float(span[1])
    if t_a == t_b:
        raise InputError("degenerate integration span")
    x0 = np.asarray(x0, dtype=float)

    if isinstance(A, MatrixFunction):
        A_eval = A
    elif A is None:
        A_eval = None
    else:
        A_eval = A  # any callable t -> (n, n)

    def rhs(t, x):
        dx = A_eval(t) @ x if A_eval is not None else np.zeros_like(x)
        if forcing is not None:
            dx = dx + forcing(t, x)
        return dx

    sol = solve_ivp(rhs, (t_a, t_b), x0, method="RK45", rtol=tol, atol=tol,
                    dense_output=True, max_step=max_step)
    if not sol.success:
        raise IntegrationFailure(
            f"integration stalled at t={sol.t[-1]:g}: {sol.message}",
            last_t=float(sol.t[-1]))
    times, states = sol.t, sol.y.T
    if times[0] > times[-1]:
        times, states = times[::-1], states[::-1]
    return Trajectory(times=times.copy(), states=states.copy(),
                      order=INTERP_ORDER, _dense=sol.sol)


@dataclass
class FundamentalMatrix:
    """Matrix solution X of X' = A(t) X with X(0) = I."""

    A: MatrixFunction
    horizon: float
    two_sided: bool
    _forward: Trajectory = field(repr=False, default=None)
    _backward: Trajectory = field(repr=False, default=None)

    @property
    def dim(self):
        return self.A.dim

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        n = self.dim
        if t.shape == ():
            traj = self._pick(float(t))
            return traj(t).reshape(n, n)
        out = np.empty(t.shape + (n, n))
        neg = t < 0
        if neg.any():
            out[neg] = self._pick(-1.0)(t[neg]).reshape((-1, n, n))
        if (~neg).any():
            out[~neg] = self._pick(1.0)(t[~neg]).reshape((-1, n, n))
        return out

    def _pick(self, t):
        if t < 0:
            if self._backward is None:
                raise InputError("negative time requested from a one-sided fundamental matrix")
            return self._backward
        return self._forward


def fundamental_matrix(A: MatrixFunction, horizon, tol, two_sided=False) -> FundamentalMatrix:
    """Columns are the solutions starting from the unit vectors at t = 0."""
    n = A.dim
    eye = np.eye(n).reshape(-1)

    def mat_rhs(t, y):
        return (A(t) @ y.reshape(n, n)).reshape(-1)

    fwd = integrate(None, eye, (0.0, horizon), tol, forcing=mat_rhs)
    bwd = None
    if two_sided:
        bwd = integrate(None, eye, (0.0, -horizon), tol, forcing=mat_rhs)
    return FundamentalMatrix(A=A, horizon=horizon, two_sided=two_sided,
                             _forward=fwd, _backward=bwd)


def inverse_at(X: FundamentalMatrix, t) -> np.ndarray:
    """X(t)^-1 by direct linear solve, with a residual sanity check."""
    M = X(float(t))
    n = M.shape[0]
    try:
        inv = np.linalg.solve(M, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"fundamental matrix singular at t={t:g}") from exc
    cond = np.linalg.cond(M)
    residual = fro(M @ inv - np.eye(n))
    if not np.isfinite(cond) or residual > 10 * np.finfo(float).eps * max(cond, 1.0) * n:
        raise SingularMatrixError(
            f"fundamental matrix numerically singular at t={t:g} "
            f"(cond={cond:.3e}, residual={residual:.3e})")
    return inv


def mat_exp(C, t) -> np.ndarray:
    """Matrix exponential e^{C t}."""
    C = np.asarray(C, dtype=float)
    return expm(C * float(t))


class MatrixExponential:
    """Cached t -> e^{Ct}, using an eigenbasis when C is safely diagonalizable.

    Falls back to scaling-and-squaring per call otherwise; the fast path is
    verified against it at construction.
    """

    def __init__(self, C):
        self.C = np.asarray(C, dtype=float)
        self._eig = None
        try:
            lam, V = np.linalg.eig(self.C)
            Vinv = np.linalg.inv(V)
            if np.linalg.cond(V) < 1e6:
                ok = all(
                    fro(np.real(V @ np.diag(np.exp(lam * s)) @ Vinv) - mat_exp(self.C, s))
                    <= 1e-12 * max(1.0, fro(mat_exp(self.C, s)))
                    for s in (0.7, -0.7))
                if ok:
                    self._eig = (lam, V, Vinv)
        except np.linalg.LinAlgError:
            pass

    def __call__(self, t):
        if self._eig is None:
            return mat_exp(self.C, t)
        lam, V, Vinv = self._eig
        return np.real(V @ np.diag(np.exp(lam * t)) @ Vinv)
