"""Construction of the decay matrix Psi.

Psi solves the matrix equation Psi' = P(t)(Psi + I) with Psi -> 0 at +inf,
equivalently the integral equation

    Psi(t) = - int_t^inf P(s) [I + Psi(s)] ds.

Two independent routes are provided: the successive-approximation series

    Psi_0 = I,   Psi_k(t) = - int_t^inf P(s) Psi_{k-1}(s) ds,
    Psi = sum_{k>=1} Psi_k,

evaluated by composite Gauss-Legendre quadrature with the [T, inf) tail
certified by a decay envelope of ||P||, and a backward ODE integration from
the truncated terminal condition Psi(T) = 0.  Their agreement is the main
self-check of the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificates import TailCertificate, find_smallness_point, tail_integral
from .errors import InputError, NonConvergenceError
from .matrixfn import MatrixFunction, fro
from .odes import FundamentalMatrix, integrate
from .quadrature import PanelGrid, _reference

DEFAULT_PANEL = 0.25
DEFAULT_GL = 8


class PFunction:
    """P(t) = X(t)^-1 B(t) X(t), the coupling matrix of the perturbation."""

    def __init__(self, X: FundamentalMatrix, B: MatrixFunction):
        if B.dim != X.dim:
            raise InputError("B dimension does not match the fundamental matrix")
        self.X = X
        self.B = B
        self.dim = X.dim

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        Xt = self.X(t)
        Bt = self.B(t)
        return np.linalg.solve(Xt, Bt @ Xt)

    def envelope(self, ts):
        """||P(t)||_F samples for certificate fitting."""
        ts = np.asarray(ts, dtype=float)
        vals = self(ts.reshape(-1))
        return np.linalg.norm(vals, axis=(1, 2)).reshape(ts.shape)


def build_P(X: FundamentalMatrix, B: MatrixFunction) -> PFunction:
    return PFunction(X, B)


class _PanelInterp:
    """Barycentric evaluation of per-panel Gauss-node samples."""

    def __init__(self, pg: PanelGrid, node_vals):
        self.pg = pg
        self.vals = node_vals  # (N, g, n, n)
        x = _reference(pg.g)[0]
        w = np.empty_like(x)
        for q in range(pg.g):
            w[q] = 1.0 / np.prod(x[q] - np.delete(x, q))
        self._x, self._w = x, w

    def __call__(self, t):
        t = float(t)
        edges = self.pg.edges
        i = int(np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(edges) - 2))
        a, b = edges[i], edges[i + 1]
        x = 2.0 * (t - a) / (b - a) - 1.0
        diff = x - self._x
        hit = np.isclose(diff, 0.0, atol=1e-14)
        if hit.any():
            return self.vals[i, int(np.argmax(hit))]
        c = self._w / diff
        return np.einsum("q,q...->...", c, self.vals[i]) / c.sum()


@dataclass
class PsiSolution:
    """Psi on a time grid, with the bookkeeping the theory asks for.

    ``t1`` is the smallness point (certified tail of ||P|| below eps) and
    ``t2`` the first grid point with ||Psi||_F < 1/2, which certifies
    invertibility of I + Psi(t2) via the Neumann series.
    """

    grid: np.ndarray
    values: np.ndarray          # (len(grid), n, n)
    horizon: float
    eps: float | None
    t1: float
    t2: float | None
    k_used: int | None = None
    residual: float | None = None
    tail_bound: float = 0.0
    truncation: float = 0.0
    level_sups: list = field(default_factory=list)
    level_sups_beyond_t1: list = field(default_factory=list)
    levels: list = field(default_factory=list, repr=False)
    levels_minus: list = field(default_factory=list, repr=False)
    glue_mismatch: float = 0.0
    interp: object = field(default=None, repr=False)

    @property
    def dim(self):
        return self.values.shape[1]

    def norm_curve(self):
        return self.grid, np.linalg.norm(self.values, axis=(1, 2))

    def at(self, t):
        return self.interp(t)

    def value_at_t2(self):
        if self.t2 is None:
            raise InputError("no grid point with ||Psi|| < 1/2; extend the horizon")
        i = int(np.searchsorted(self.grid, self.t2))
        return self.values[i]


def _first_small_point(grid, norms, lower=None):
    mask = norms < 0.5
    if lower is not None:
        mask &= grid >= lower - 1e-12
    idx = np.flatnonzero(mask)
    return float(grid[idx[0]]) if idx.size else None


def _series_levels(P_nodes, pg, sign, side, eps, tol, k_max, grid_mask_t1):
    """Run the successive approximations on shared Gauss nodes.

    side "plus":  level_k = -int_t^T  P level_{k-1},  cumulative from right
    side "minus": level_k = +int_{lo}^t P level_{k-1}, cumulative from left
    Returns (edge partial sum, node partial sum, per-level edge values,
    level sups, level sups beyond t1, k_used).
    """
    n = P_nodes.shape[-1]
    node_level = np.broadcast_to(np.eye(n), P_nodes.shape).copy()
    edge_sum = np.zeros((pg.n_panels + 1, n, n))
    node_sum = np.zeros_like(P_nodes)
    levels, sups, sups_t1 = [], [], []
    k_used = 0
    for k in range(1, k_max + 1):
        f = P_nodes @ node_level
        if side == "plus":
            edge_k, node_k = pg.cumulative_from_right(f)
        else:
            edge_k, node_k = pg.cumulative_from_left(f)
        edge_k = sign * edge_k
        node_k = sign * node_k
        edge_sum += edge_k
        node_sum += node_k
        node_level = node_k
        levels.append(edge_k)
        sup = float(np.linalg.norm(edge_k, axis=(1, 2)).max())
        sups.append(sup)
        if grid_mask_t1.any():
            sups_t1.append(float(np.linalg.norm(edge_k[grid_mask_t1], axis=(1, 2)).max()))
        else:
            sups_t1.append(sup)
        k_used = k
        if sup < tol:
            break
    else:
        recent = sups[-3:]
        if len(recent) >= 2 and recent[-1] >= 0.95 * min(recent[:-1]):
            raise NonConvergenceError(
                f"series level {k_used} still at {sups[-1]:.3e} and not contracting; "
                f"eps={eps:g} is too close to 1 for this window, restart from a larger t1")
    truncation = 0.0
    if sups[-1] >= tol and len(sups) >= 2 and sups[-2] > 0:
        r = min(sups[-1] / sups[-2], 0.99)
        truncation = sups[-1] * r / (1.0 - r)
    return edge_sum, node_sum, levels, sups, sups_t1, k_used, truncation


def psi_series(P, cert: TailCertificate, eps=0.5, t_start=0.0, T=None,
               k_max=80, tol=1e-8, max_panel=DEFAULT_PANEL, gl=DEFAULT_GL) -> PsiSolution:
    """Build Psi on [t_start, T] by the successive-approximation series.

    The upper limit of every integral is truncated at T; the neglected tail
    is bounded through the certificate and T defaults to the point where
    that bound drops below tol/2.
    """
    if not (0 < eps < 1):
        raise InputError("eps must lie in (0, 1)")
    if k_max < 1:
        raise InputError("k_max must be >= 1")
    t1 = find_smallness_point(cert, eps)
    if T is None:
        T = max(find_smallness_point(cert, tol / 2), t_start + 1.0)
    if T <= t_start:
        raise InputError("horizon T must exceed the grid start")
    if t1 > T:
        raise InputError(f"smallness point t1={t1:g} beyond horizon T={T:g}")

    pg = PanelGrid.uniform(t_start, T, max_panel, g=gl)
    P_nodes = P(pg.flat_nodes()).reshape(pg.n_panels, gl, P.dim, P.dim)
    mask_t1 = pg.edges >= t1 - 1e-12
    edge_sum, node_sum, levels, sups, sups_t1, k_used, truncation = _series_levels(
        P_nodes, pg, sign=-1.0, side="plus", eps=eps, tol=tol, k_max=k_max,
        grid_mask_t1=mask_t1)

    tail = tail_integral(cert, T)
    norms = np.linalg.norm(edge_sum, axis=(1, 2))
    psi = PsiSolution(
        grid=pg.edges.copy(), values=edge_sum, horizon=T, eps=eps,
        t1=t1, t2=_first_small_point(pg.edges, norms),
        k_used=k_used, tail_bound=float(np.expm1(tail)), truncation=truncation,
        level_sups=sups, level_sups_beyond_t1=sups_t1, levels=levels,
        interp=_PanelInterp(pg, node_sum))
    psi.residual = psi_residual(psi, P, cert, gl=gl)
    return psi


def psi_backward(P, T, tol, t_start=0.0, max_panel=DEFAULT_PANEL) -> PsiSolution:
    """Independent oracle: integrate Psi' = P(Psi + I) backward from Psi(T) = 0.

    The terminal condition truncates Psi(inf) = 0, so the result carries an
    O(tail(T)) bias in addition to the integrator tolerance.
    """
    n = P.dim

    def rhs(t, y):
        Pt = P(t)
        return (Pt @ (y.reshape(n, n) + np.eye(n))).reshape(-1)

    traj = integrate(None, np.zeros(n * n), (float(T), float(t_start)), tol, forcing=rhs)
    grid = PanelGrid.uniform(t_start, T, max_panel).edges
    values = traj(grid).reshape(len(grid), n, n)
    norms = np.linalg.norm(values, axis=(1, 2))

    def interp(t):
        return traj(float(t)).reshape(n, n)

    return PsiSolution(grid=grid, values=values, horizon=float(T), eps=None,
                       t1=float(t_start), t2=_first_small_point(grid, norms),
                       interp=interp)


def psi_residual(psi: PsiSolution, P, cert: TailCertificate | None, gl=DEFAULT_GL) -> float:
    """Max grid defect of Psi(t) + int_t^inf P (I + Psi) ds.

    The [T, inf) part is bounded through the certificate; without one only
    the truncated defect is reported.
    """
    pg = PanelGrid(psi.grid, g=gl)
    nodes = pg.flat_nodes()
    n = psi.dim
    P_nodes = P(nodes).reshape(pg.n_panels, gl, n, n)
    psi_nodes = np.stack([psi.at(t) for t in nodes]).reshape(pg.n_panels, gl, n, n)
    f = P_nodes @ (psi_nodes + np.eye(n))
    edge_int, _ = pg.cumulative_from_right(f)
    defect = np.linalg.norm(psi.values + edge_int, axis=(1, 2)).max()
    tail = 0.0
    if cert is not None:
        near_end = np.linalg.norm(psi.values[-1], axis=(0, 1))
        tail = tail_integral(cert, psi.grid[-1]) * (1.0 + float(near_end))
    return float(defect + tail)


def agreement(a: PsiSolution, b: PsiSolution, lo=None, hi=None, samples=512) -> float:
    """sup ||a - b||_F over the overlap of the two solutions."""
    lo = max(a.grid[0], b.grid[0]) if lo is None else lo
    hi = min(a.grid[-1], b.grid[-1]) if hi is None else hi
    if hi <= lo:
        raise InputError("solutions do not overlap")
    ts = np.linspace(lo, hi, samples)
    return max(fro(a.at(t) - b.at(t)) for t in ts)
