"""Two-sided constructions: parity checks, the symmetric Psi, and
biasymptotic equivalence reports.

The mirrored series on the negative axis,

    Psi~_0 = I,   Psi~_k(t) = + int_{-inf}^t P(s) Psi~_{k-1}(s) ds,

matches the positive-axis series through Psi_k(-t) = Psi~_k(t) precisely
when P is odd.  With A odd and B even the coupling P = X^-1 B X comes out
even (X is even, and conjugating an even matrix by an even matrix preserves
parity), so the mirror identity fails and the glue check below reports the
mismatch instead of papering over it; see the README's known-limitations
note.  Genuinely odd P (for instance A odd with B odd) glues cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import TailCertificate, find_smallness_point, tail_integral
from .equivalence import EquivalenceMap, map_solution
from .errors import GlueMismatchError, InputError
from .matrixfn import MatrixFunction, fro
from .odes import FundamentalMatrix, integrate
from .psi import (DEFAULT_GL, DEFAULT_PANEL, PsiSolution, _PanelInterp,
                  _series_levels, psi_series)
from .quadrature import PanelGrid
from .reports import Verdict, decay_verdict

#: relative tolerance of the parity sampling checks
PARITY_RTOL = 1e-9


@dataclass(frozen=True)
class ParityCheck:
    passed: bool
    worst: float
    scale: float


@dataclass(frozen=True)
class ParityReport:
    """Sampled parity of the four objects the two-sided theory cares about."""

    a_odd: ParityCheck
    b_even: ParityCheck
    x_even: ParityCheck
    p_odd: ParityCheck

    @property
    def all_passed(self):
        return all(c.passed for c in (self.a_odd, self.b_even, self.x_even, self.p_odd))

    def to_json(self):
        def block(c):
            return {"pass": c.passed, "worst_deviation": c.worst, "scale": c.scale}
        return {"A_odd": block(self.a_odd), "B_even": block(self.b_even),
                "X_even": block(self.x_even), "P_odd": block(self.p_odd)}


def _parity_check(values_plus, values_minus, sign):
    dev = float(np.linalg.norm(values_minus + sign * values_plus, axis=(1, 2)).max())
    scale = max(1.0, float(np.linalg.norm(values_plus, axis=(1, 2)).max()))
    return ParityCheck(passed=dev <= PARITY_RTOL * scale, worst=dev, scale=scale)


def check_parity(A: MatrixFunction, B: MatrixFunction, X: FundamentalMatrix,
                 P, grid) -> ParityReport:
    """Sample A(-t)=-A(t), B(-t)=B(t), X(-t)=X(t) and P(-t)=-P(t)."""
    ts = np.asarray(grid, dtype=float)
    ts = ts[ts > 0]
    if ts.size == 0:
        raise InputError("parity grid needs strictly positive sample times")
    return ParityReport(
        a_odd=_parity_check(A(ts), A(-ts), +1.0),
        b_even=_parity_check(B(ts), B(-ts), -1.0),
        x_even=_parity_check(X(ts), X(-ts), -1.0),
        p_odd=_parity_check(P(ts), P(-ts), +1.0),
    )


def _piecewise_interp(minus_series, minus_cont, plus_cont, plus_series, t1):
    def interp(t):
        t = float(t)
        if t <= -t1:
            return minus_series.at(t)
        if t < 0.0:
            return minus_cont(t)
        if t < t1:
            return plus_cont(t)
        return plus_series.at(t)
    return interp


def psi_two_sided(P, cert: TailCertificate, eps=0.5, T=None, tol=1e-8,
                  glue_tol=None, max_panel=DEFAULT_PANEL, gl=DEFAULT_GL) -> PsiSolution:
    """Symmetric Psi on [-T, T]: half-axis series glued through the middle.

    The positive series runs on [t1, T]; its mirror runs on [-T, -t1]; both
    are continued as solutions of Psi' = P(Psi + I) across [-t1, t1] by ODE
    integration.  The continued halves must agree under reflection; a
    mismatch above ``glue_tol`` raises GlueMismatchError (broken parity of P
    or an overly tight tolerance).
    """
    if glue_tol is None:
        glue_tol = 50 * tol
    t1 = find_smallness_point(cert, eps)
    if T is None:
        T = max(find_smallness_point(cert, tol / 2), t1 + 1.0)
    if t1 >= T:
        raise InputError(f"smallness point t1={t1:g} beyond horizon T={T:g}")
    n = P.dim

    plus = psi_series(P, cert, eps=eps, t_start=t1, T=T, tol=tol,
                      max_panel=max_panel, gl=gl)

    minus_edges = -plus.grid[::-1]
    pg_minus = PanelGrid(minus_edges, g=gl)
    P_nodes = P(pg_minus.flat_nodes()).reshape(pg_minus.n_panels, gl, n, n)
    edge_sum, node_sum, levels_m, sups_m, _, k_minus, _ = _series_levels(
        P_nodes, pg_minus, sign=+1.0, side="minus", eps=eps, tol=tol,
        k_max=80, grid_mask_t1=np.ones(len(minus_edges), dtype=bool))
    minus = PsiSolution(grid=minus_edges.copy(), values=edge_sum, horizon=T,
                        eps=eps, t1=t1, t2=None, k_used=k_minus,
                        levels=levels_m, level_sups=sups_m,
                        interp=_PanelInterp(pg_minus, node_sum))

    def ode_continue(start, stop, init):
        def rhs(t, y):
            return (P(t) @ (y.reshape(n, n) + np.eye(n))).reshape(-1)
        traj = integrate(None, init.reshape(-1), (start, stop), tol, forcing=rhs)
        return lambda t: traj(float(t)).reshape(n, n)

    plus_cont = ode_continue(t1, -t1, plus.at(t1))
    minus_cont = ode_continue(-t1, t1, minus.at(-t1))

    def plus_ext(t):
        return plus.at(t) if t >= t1 else plus_cont(t)

    def minus_ext(t):
        return minus.at(t) if t <= -t1 else minus_cont(t)

    mismatch = 0.0
    for u in np.linspace(-T, 0.0, 257):
        mismatch = max(mismatch, fro(plus_ext(-u) - minus_ext(u)))
    if mismatch > glue_tol:
        raise GlueMismatchError(
            f"half-axis constructions disagree by {mismatch:.3e} "
            f"(glue tolerance {glue_tol:.3e}); P is not odd or the tolerance "
            "is too tight for the horizon", mismatch=mismatch)

    inner = np.linspace(-t1, t1, max(2, int(math.ceil(2 * t1 / max_panel)) + 1))[1:-1]
    grid = np.concatenate([minus_edges, inner, plus.grid])
    values = np.empty((len(grid), n, n))
    values[:len(minus_edges)] = minus.values
    for i, t in enumerate(inner):
        values[len(minus_edges) + i] = minus_cont(t) if t < 0 else plus_cont(t)
    values[len(minus_edges) + len(inner):] = plus.values

    norms = np.linalg.norm(values, axis=(1, 2))
    mask = (grid >= t1 - 1e-12) & (norms < 0.5)
    idx = np.flatnonzero(mask)
    t2 = float(grid[idx[0]]) if idx.size else None

    return PsiSolution(
        grid=grid, values=values, horizon=T, eps=eps, t1=t1, t2=t2,
        k_used=max(plus.k_used, k_minus), residual=plus.residual,
        tail_bound=float(np.expm1(tail_integral(cert, T))),
        level_sups=plus.level_sups, level_sups_beyond_t1=plus.level_sups_beyond_t1,
        levels=plus.levels, levels_minus=levels_m, glue_mismatch=mismatch,
        interp=_piecewise_interp(minus, minus_cont, plus_cont, plus, t1))


def symmetry_deviation(psi: PsiSolution, samples=257) -> float:
    """max over sampled t of ||Psi(-t) - Psi(t)||_F."""
    T = float(psi.grid[-1])
    ts = np.linspace(0.0, T, samples)
    return max(fro(psi.at(-t) - psi.at(t)) for t in ts)


def check_C2_two_sided(X: FundamentalMatrix, psi: PsiSolution, tol) -> list:
    """Decay of ||X(t) Psi(t)|| toward both ends, as two verdicts."""
    grid = psi.grid
    vals = np.array([fro(X(t) @ psi.at(t)) for t in grid])
    pos = grid >= 0
    neg = grid <= 0
    v_pos = decay_verdict("C2", grid[pos], vals[pos], tol, extra={"end": "+"})
    v_neg = decay_verdict("C2", -grid[neg][::-1], vals[neg][::-1], tol,
                          extra={"end": "-"})
    v_pos.extra["curve"] = {"t": grid[pos], "value": vals[pos]}
    v_neg.extra["curve"] = {"t": grid[neg], "value": vals[neg]}
    return [v_pos, v_neg]


@dataclass
class BiequivalenceReport:
    times: np.ndarray
    gaps: np.ndarray
    initial: list
    sup_neg: np.ndarray
    sup_pos: np.ndarray
    tol: float
    t2: float
    passed: bool

    def verdicts(self):
        i_n = int(np.argmax(self.sup_neg))
        i_p = int(np.argmax(self.sup_pos))
        return [
            Verdict("equivalence", bool((self.sup_pos < self.tol).all()),
                    float(self.sup_pos[i_p]), float(self.times[-1]),
                    extra={"end": "+", "tol": self.tol}),
            Verdict("equivalence", bool((self.sup_neg < self.tol).all()),
                    float(self.sup_neg[i_n]), float(self.times[0]),
                    extra={"end": "-", "tol": self.tol}),
        ]


def biequivalence_report(A: MatrixFunction, B: MatrixFunction, emap: EquivalenceMap,
                         initial_set, T, tol=1e-3, integrator_tol=1e-8,
                         samples=801) -> BiequivalenceReport:
    """Gap decay of paired solutions toward both t = -T and t = +T.

    Pairs are anchored at t2 exactly as in the one-sided report; PASS needs
    the gap sup over [-T, -T/2] and over [T/2, T] below tol for every pair.
    """
    if not (-T < emap.t2 < T):
        raise InputError("t2 must lie inside the two-sided horizon")
    AB = A + B
    ts = np.linspace(-T, T, samples)
    gaps, sup_neg, sup_pos = [], [], []
    for x0 in initial_set:
        x0 = np.asarray(x0, dtype=float)
        y0 = map_solution(emap, x0, "x_to_y")
        x_f = integrate(A, x0, (emap.t2, T), integrator_tol)
        x_b = integrate(A, x0, (emap.t2, -T), integrator_tol)
        y_f = integrate(AB, y0, (emap.t2, T), integrator_tol)
        y_b = integrate(AB, y0, (emap.t2, -T), integrator_tol)
        fwd = ts >= emap.t2
        gap = np.empty((len(ts), A.dim))
        gap[fwd] = x_f(ts[fwd]) - y_f(ts[fwd])
        gap[~fwd] = x_b(ts[~fwd]) - y_b(ts[~fwd])
        gap = np.linalg.norm(gap, axis=1)
        gaps.append(gap)
        sup_neg.append(gap[ts <= -T / 2].max())
        sup_pos.append(gap[ts >= T / 2].max())
    gaps = np.array(gaps)
    return BiequivalenceReport(times=ts, gaps=gaps, initial=list(initial_set),
                               sup_neg=np.array(sup_neg), sup_pos=np.array(sup_pos),
                               tol=tol, t2=emap.t2,
                               passed=bool((np.array(sup_neg) < tol).all()
                                           and (np.array(sup_pos) < tol).all()))
