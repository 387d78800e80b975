"""The solution-space homeomorphism between the perturbed and free systems.

The map is represented by the constant matrix M = X(t2)[I + Psi(t2)]X(t2)^-1:
solutions are identified with their values at t2, and M sends the initial
value of a free solution to the initial value of its asymptotic partner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SingularMatrixError
from .matrixfn import MatrixFunction, fro
from .odes import FundamentalMatrix, integrate, inverse_at
from .psi import PsiSolution
from .reports import DEFAULT_CHECK_TOL, Verdict, decay_verdict

#: round-trip identity budget relative to cond(M)
ROUNDTRIP_RTOL = 1e-10

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class EquivalenceMap:
    """Constant-matrix realization of the solution pairing at time t2."""

    t2: float
    M: np.ndarray
    M_inv: np.ndarray
    cond: float
    psi_norm_t2: float

    @property
    def dim(self):
        return self.M.shape[0]

    def roundtrip_defect(self):
        return fro(self.M @ self.M_inv - np.eye(self.dim))


def build_map(X: FundamentalMatrix, psi: PsiSolution) -> EquivalenceMap:
    if psi.t2 is None:
        raise InputError("Psi never drops below 1/2 on the grid; extend the horizon")
    t2 = psi.t2
    if t2 > X.horizon:
        raise InputError(f"t2={t2:g} lies outside the fundamental-matrix horizon")
    psi_t2 = psi.value_at_t2()
    norm_t2 = fro(psi_t2)
    if norm_t2 >= 1.0:
        raise InputError(f"||Psi(t2)|| = {norm_t2:g} >= 1; I + Psi(t2) not certified invertible")
    Xt2 = X(t2)
    cond = float(np.linalg.cond(Xt2))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularMatrixError(
            f"fundamental matrix at t2={t2:g} is ill-conditioned (cond={cond:.3e})")
    n = X.dim
    Xinv = inverse_at(X, t2)
    M = Xt2 @ (np.eye(n) + psi_t2) @ Xinv
    M_inv = Xt2 @ np.linalg.solve(np.eye(n) + psi_t2, Xinv)
    emap = EquivalenceMap(t2=float(t2), M=M, M_inv=M_inv,
                          cond=float(np.linalg.cond(M)), psi_norm_t2=norm_t2)
    if emap.roundtrip_defect() > ROUNDTRIP_RTOL * max(emap.cond, 1.0):
        raise SingularMatrixError("map inverse failed its round-trip check")
    return emap


def map_solution(emap: EquivalenceMap, v, direction="x_to_y") -> np.ndarray:
    """Transport an initial value at t2 across the equivalence.

    "x_to_y" sends a free-system value to the perturbed system, "y_to_x"
    is its inverse; the round trip is the identity to within ROUNDTRIP_RTOL.
    """
    v = np.asarray(v, dtype=float)
    if direction == "x_to_y":
        return emap.M @ v
    if direction == "y_to_x":
        return emap.M_inv @ v
    raise InputError(f"unknown direction {direction!r}")


def check_C2(X: FundamentalMatrix, psi: PsiSolution, grid=None,
             tol=DEFAULT_CHECK_TOL) -> Verdict:
    """Sample ||X(t) Psi(t)||_F and test decay toward the horizon."""
    grid = psi.grid if grid is None else np.asarray(grid, dtype=float)
    vals = np.array([fro(X(t) @ psi.at(t)) for t in grid])
    verdict = decay_verdict("C2", grid, vals, tol)
    verdict.extra["curve"] = {"t": grid, "value": vals}
    return verdict


@dataclass
class EquivalenceReport:
    times: np.ndarray
    gaps: np.ndarray        # (n_initial, len(times))
    initial: list
    sup_late: np.ndarray
    tol: float
    t2: float
    passed: bool

    def verdict(self) -> Verdict:
        i = int(np.argmax(self.sup_late))
        return Verdict(condition="equivalence", passed=self.passed,
                       worst_value=float(self.sup_late[i]), at_t=float(self.times[-1]),
                       extra={"tol": self.tol, "worst_initial_index": i})


def equivalence_report(A: MatrixFunction, B: MatrixFunction, emap: EquivalenceMap,
                       initial_set, T, tol=DEFAULT_CHECK_TOL, integrator_tol=1e-8,
                       samples=400, tail_fraction=0.1) -> EquivalenceReport:
    """Integrate paired solutions from t2 and report the gap decay.

    Each x0 starts the free system at t2; its partner starts the perturbed
    system at M x0.  PASS requires the gap sup over the trailing window
    [T - tail_fraction*(T - t2), T] to fall below tol for every pair.
    """
    if T <= emap.t2:
        raise InputError("report horizon must exceed t2")
    AB = A + B
    ts = np.linspace(emap.t2, T, samples)
    window = ts >= T - tail_fraction * (T - emap.t2)
    gaps, sup_late = [], []
    for x0 in initial_set:
        x0 = np.asarray(x0, dtype=float)
        y0 = map_solution(emap, x0, "x_to_y")
        x = integrate(A, x0, (emap.t2, T), integrator_tol)
        y = integrate(AB, y0, (emap.t2, T), integrator_tol)
        gap = np.linalg.norm(x(ts) - y(ts), axis=-1)
        gaps.append(gap)
        sup_late.append(gap[window].max())
    gaps = np.array(gaps)
    sup_late = np.array(sup_late)
    return EquivalenceReport(times=ts, gaps=gaps, initial=list(initial_set),
                             sup_late=sup_late, tol=tol, t2=emap.t2,
                             passed=bool((sup_late < tol).all()))
