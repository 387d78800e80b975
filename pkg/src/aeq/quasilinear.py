"""Spectral data, the transformed equation u' = e^{-Ct} f(t, e^{Ct} u),
limit vectors, and the integral conditions governing quasilinear perturbations.

The perturbation f is restricted to sums of (scalar grammar term) x (constant
gain matrix) acting on the state, which makes the Lipschitz envelope eta an
explicit term-grammar expression rather than something to be guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import (TailCertificate, find_smallness_point,
                           log_tail_integral, tail_integral,
                           validate_certificate)
from .errors import BoundViolationError, InputError
from .matrixfn import fro
from .odes import MatrixExponential, Trajectory, integrate
from .quadrature import PanelGrid
from .reports import DEFAULT_CHECK_TOL, Verdict, decay_verdict
from .terms import Term, evaluate, magnitude_envelope

#: rank decisions closer than this to the cutoff are reported as ambiguous
RANK_TOL_FACTOR = 1e-8


@dataclass
class SpectralData:
    """Extremal real parts of the spectrum and their elementary-divisor data.

    kappa1 and kappa2 are fitted so that on the sampled window
    ||e^{Ct}||_F  <= kappa1 (1+t)^{m_beta-1}  e^{beta t}  and
    ||e^{-Ct}||_F <= kappa2 (1+t)^{m_alpha-1} e^{-alpha t}.
    The (1+t) form avoids the t=0 degeneracy of the bare power law and is
    equivalent up to a constant on the half line.
    """

    alpha: float
    beta: float
    m_alpha: int
    m_beta: int
    kappa1: float
    kappa2: float
    eigenvalues: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def k1(self):
        """Constant of the a-priori bound; product of the two fitted kappas."""
        return self.kappa1 * self.kappa2

    @property
    def power(self):
        """Combined polynomial degree m_alpha + m_beta - 2 of the conditions."""
        return self.m_alpha + self.m_beta - 2


def _eigen_index(C, lam, rank_tol, warnings):
    """Largest Jordan block size at lam via ranks of (C - lam I)^k."""
    n = C.shape[0]
    M = C - lam * np.eye(n)
    prev = n
    power = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        power = power @ M
        svals = np.linalg.svd(power, compute_uv=False)
        close = (svals > rank_tol / 10) & (svals < rank_tol * 10)
        if close.any():
            warnings.append(
                f"rank decision at eigenvalue {lam:.6g}, power {k} is within "
                f"10x of the cutoff {rank_tol:.3e}")
        rank = int((svals > rank_tol).sum())
        if rank == prev:
            return k - 1 if k > 1 else 1
        prev = rank
    return n


def spectral_data(C, fit_horizon=20.0, fit_samples=256) -> SpectralData:
    """Eigen-structure of a constant matrix plus fitted norm constants."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InputError("C must be a square matrix")
    n = C.shape[0]
    eigs = np.linalg.eigvals(C)
    scale = max(fro(C), 1.0)
    rank_tol = RANK_TOL_FACTOR * scale
    warnings: list = []

    distinct = []
    for lam in eigs:
        if not any(abs(lam - mu) <= 100 * rank_tol for mu in distinct):
            distinct.append(lam)

    re = eigs.real
    alpha = float(re.min())
    beta = float(re.max())
    eig_tol = 100 * rank_tol
    m_alpha = max(_eigen_index(C, lam, rank_tol, warnings)
                  for lam in distinct if lam.real <= alpha + eig_tol)
    m_beta = max(_eigen_index(C, lam, rank_tol, warnings)
                 for lam in distinct if lam.real >= beta - eig_tol)

    E = MatrixExponential(C)
    ts = np.linspace(0.0, fit_horizon, fit_samples)
    k1 = k2 = 0.0
    for t in ts:
        k1 = max(k1, fro(E(t)) / ((1 + t) ** (m_beta - 1) * math.exp(beta * t)))
        k2 = max(k2, fro(E(-t)) / ((1 + t) ** (m_alpha - 1) * math.exp(-alpha * t)))
    return SpectralData(alpha=alpha, beta=beta, m_alpha=m_alpha, m_beta=m_beta,
                        kappa1=float(k1), kappa2=float(k2),
                        eigenvalues=eigs, warnings=warnings)


@dataclass(frozen=True)
class ForcingTerm:
    scalar: tuple          # tuple[Term, ...], the scalar coefficient in t
    gain: np.ndarray       # constant gain applied to the state


class Forcing:
    """f(t, y) = sum_i s_i(t) * (G_i y); the grammar guarantees f(t, 0) = 0."""

    def __init__(self, terms, dim):
        self.terms = [ForcingTerm(tuple(ft.scalar), np.asarray(ft.gain, dtype=float))
                      if not isinstance(ft, ForcingTerm) else ft for ft in terms]
        self.dim = dim
        for ft in self.terms:
            if ft.gain.shape != (dim, dim):
                raise InputError("forcing gain dimensions do not match the system")

    def __call__(self, t, y):
        out = np.zeros_like(np.asarray(y, dtype=float))
        for ft in self.terms:
            out = out + evaluate(ft.scalar, t) * (ft.gain @ y)
        return out

    def eta_terms(self):
        """Term-grammar envelope of the Lipschitz bound eta(t)."""
        out = []
        for ft in self.terms:
            g = fro(ft.gain)
            for term in ft.scalar:
                out.append(Term(abs(term.coeff) * g, term.power, term.rate,
                                term.rate_abs, term.trig, term.freq))
        return tuple(out)

    def eta(self, t):
        return magnitude_envelope(self.eta_terms(), t)


@dataclass
class QuasiState:
    """Trajectory of the transformed equation plus its certified limit data."""

    u: Trajectory
    spec: SpectralData
    gronwall_bound: float
    max_norm: float
    c_u: np.ndarray | None = None
    tail_estimate: float | None = None


def check_C3(forcing: Forcing, cert: TailCertificate, grid) -> Verdict:
    """Echo the Lipschitz certificate: eta(t) <= bound(t) on the sample grid."""
    result = validate_certificate(forcing.eta, cert, grid)
    return Verdict(condition="C3", passed=result.passed,
                   worst_value=result.worst_excess, at_t=result.at_t,
                   extra={"certificate": {"K": cert.K, "m": cert.m,
                                          "lambda": cert.lam, "t_star": cert.t_star}})


def _condition_quad(eta_terms, power, extra_rate, a, b, max_panel=0.1, gl=8,
                    shift=None):
    """int_a^b s^power * eta(s) * exp(extra_rate * s + const) ds.

    ``shift`` adds a per-node exponent offset (used by C5 where the factor
    exp(alpha*(t-s)) depends on the left endpoint); exponents are combined
    before exponentiation so nothing overflows when the product is moderate.
    """
    if b <= a:
        return 0.0
    pg = PanelGrid.uniform(a, b, max_panel, g=gl)
    s = pg.flat_nodes()
    extra = extra_rate * s + (shift(s) if shift is not None else 0.0)
    vals = magnitude_envelope(eta_terms, s, extra)
    if power:
        vals = vals * s ** power
    return float(pg.integrate(vals.reshape(pg.n_panels, gl)))


def check_C4(spec: SpectralData, eta_terms, cert: TailCertificate,
             quad_tol=1e-10) -> Verdict:
    """Summability of t^(m_a+m_b-2) e^{(beta-alpha)t} eta(t) over the half line.

    The envelope converges iff lambda_eta + alpha - beta > 0; when it does,
    the value L is quadrature on [0, T] plus the certified tail.
    """
    lam_eff = cert.lam + spec.alpha - spec.beta
    m_eff = cert.m + spec.power
    if lam_eff <= 0:
        return Verdict(condition="C4", passed=False, worst_value=math.inf,
                       at_t=math.inf, extra={"divergent": True, "L": "inf"})
    adjusted = TailCertificate(K=cert.K, m=m_eff, lam=lam_eff, t_star=cert.t_star)
    T = max(find_smallness_point(adjusted, quad_tol / 2), cert.t_star + 1.0, 1.0)
    L = _condition_quad(eta_terms, spec.power, spec.beta - spec.alpha, 0.0, T)
    L += tail_integral(adjusted, T)
    return Verdict(condition="C4", passed=True, worst_value=L, at_t=T,
                   extra={"divergent": False, "L": L})


def _tail_window(adjusted: TailCertificate, alpha, t, budget_log):
    """Window width W with exp(alpha*t) * tail(t + W) below the log budget."""
    W = 10.0
    for _ in range(60):
        if alpha * t + log_tail_integral(adjusted, t + W) <= budget_log:
            return W
        W *= 2.0
    raise InputError("could not certify the integral tail; decay rate too weak")


def check_C5(spec: SpectralData, eta_terms, cert: TailCertificate, grid,
             tol=DEFAULT_CHECK_TOL) -> Verdict:
    """Decay of int_t^inf (s-t)^(m_a-1) s^(m_b-1) e^{alpha(t-s)} e^{beta s} eta(s) ds."""
    lam_eff = cert.lam + spec.alpha - spec.beta
    if lam_eff <= 0:
        return Verdict(condition="C5", passed=False, worst_value=math.inf,
                       at_t=math.inf, extra={"divergent": True})
    adjusted = TailCertificate(K=cert.K, m=cert.m + spec.power, lam=lam_eff,
                               t_star=cert.t_star)
    grid = np.asarray(grid, dtype=float)
    budget_log = math.log(max(tol, 1e-300)) + math.log(1e-3)
    values = np.empty_like(grid)
    for i, t in enumerate(grid):
        W = _tail_window(adjusted, spec.alpha, t, budget_log)
        pg = PanelGrid.uniform(t, t + W, max_panel=max(W / 256, 0.05))
        s = pg.flat_nodes()
        extra = spec.alpha * (t - s) + spec.beta * s
        vals = magnitude_envelope(eta_terms, s, extra)
        if spec.m_alpha > 1:
            vals = vals * (s - t) ** (spec.m_alpha - 1)
        if spec.m_beta > 1:
            vals = vals * s ** (spec.m_beta - 1)
        tail = math.exp(min(spec.alpha * t + log_tail_integral(adjusted, t + W), 700.0))
        values[i] = pg.integrate(vals.reshape(pg.n_panels, -1)) + tail
    verdict = decay_verdict("C5", grid, values, tol)
    verdict.extra["divergent"] = False
    verdict.extra["curve"] = {"t": grid, "value": values}
    return verdict


def check_yakubovich(spec: SpectralData, eta_terms, cert: TailCertificate, grid,
                     tol=DEFAULT_CHECK_TOL) -> Verdict:
    """The classical comparison: decay of int_t^inf s^(m_a+m_b-2) e^{beta s} eta(s) ds.

    When the certified envelope has no decay left after the e^{beta s}
    factor the integral is divergent and the verdict fails outright; a
    truncated curve is still reported for inspection.
    """
    lam_eff = cert.lam - spec.beta
    grid = np.asarray(grid, dtype=float)
    if lam_eff <= 0:
        T_display = grid[-1] + 10.0
        values = np.array([
            _condition_quad(eta_terms, spec.power, spec.beta, t, T_display,
                            max_panel=max((T_display - t) / 256, 0.05))
            for t in grid])
        return Verdict(condition="Eq14", passed=False,
                       worst_value=float(values[-1]), at_t=float(grid[-1]),
                       extra={"divergent": True,
                              "curve": {"t": grid, "value": values},
                              "truncated_at": T_display})
    adjusted = TailCertificate(K=cert.K, m=cert.m + spec.power, lam=lam_eff,
                               t_star=cert.t_star)
    budget_log = math.log(max(tol, 1e-300)) + math.log(1e-3)
    values = np.empty_like(grid)
    for i, t in enumerate(grid):
        W = _tail_window(adjusted, 0.0, t, budget_log)
        values[i] = _condition_quad(eta_terms, spec.power, spec.beta, t, t + W,
                                    max_panel=max(W / 256, 0.05))
        values[i] += math.exp(min(log_tail_integral(adjusted, t + W), 700.0))
    verdict = decay_verdict("Eq14", grid, values, tol)
    verdict.extra["divergent"] = False
    verdict.extra["curve"] = {"t": grid, "value": values}
    return verdict


def compare_yakubovich(spec: SpectralData, eta_terms, cert: TailCertificate,
                       grid, tol=DEFAULT_CHECK_TOL):
    """Evaluate the two competing decay conditions on the same grid."""
    return (check_C5(spec, eta_terms, cert, grid, tol),
            check_yakubovich(spec, eta_terms, cert, grid, tol))


def _gronwall_exponent(spec: SpectralData, forcing: Forcing, cert: TailCertificate):
    """k1 * int_0^inf (1+s)^power e^{(beta-alpha)s} eta(s) ds, certified.

    The inside-window part uses the exact eta; the tail uses the certificate
    with (1+s)^q <= (2s)^q merged into the envelope (s >= 1 there).
    """
    lam_eff = cert.lam + spec.alpha - spec.beta
    if lam_eff <= 0:
        raise InputError("C4 envelope divergent; no a-priori bound available")
    m_eff = cert.m + spec.power
    adjusted = TailCertificate(K=cert.K * 2 ** spec.power, m=m_eff, lam=lam_eff,
                               t_star=cert.t_star)
    T = max(find_smallness_point(adjusted, 1e-10), cert.t_star + 1.0, 1.0)
    eta_terms = forcing.eta_terms()
    pg = PanelGrid.uniform(0.0, T, 0.1)
    s = pg.flat_nodes()
    exact = magnitude_envelope(eta_terms, s, (spec.beta - spec.alpha) * s)
    exact = exact * (1 + s) ** spec.power
    # where the certificate applies, the tighter of exact and certified
    # integrand is used; a too-small certificate then shrinks the bound,
    # which is what lets the trajectory check expose it
    certified = (cert.K * s ** cert.m
                 * np.exp((spec.beta - spec.alpha - cert.lam) * s)
                 * (1 + s) ** spec.power)
    certified[s < cert.t_star] = np.inf
    vals = np.minimum(exact, certified)
    L = float(pg.integrate(vals.reshape(pg.n_panels, -1)))
    return spec.k1 * (L + tail_integral(adjusted, T))


def integrate_u(C, forcing: Forcing, u0, T, tol, eta_cert: TailCertificate,
                spec: SpectralData | None = None) -> QuasiState:
    """Integrate u' = e^{-Ct} f(t, e^{Ct} u) on [0, T].

    The result is cross-checked against the a-priori bound |u0| e^{k1 L};
    exceeding it by more than 10% raises, which almost always means the
    supplied certificate does not bound eta.
    """
    spec = spec or spectral_data(np.asarray(C, dtype=float))
    E = MatrixExponential(C)
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))

    def rhs(t, u):
        return E(-t) @ forcing(t, E(t) @ u)

    traj = integrate(None, u0, (0.0, float(T)), tol, forcing=rhs)
    bound = float(np.linalg.norm(u0)) * math.exp(_gronwall_exponent(spec, forcing, eta_cert))
    max_norm = float(np.linalg.norm(traj.states, axis=1).max())
    if max_norm > 1.1 * bound:
        raise BoundViolationError(
            f"|u| reached {max_norm:.6g}, exceeding the certified bound {bound:.6g} "
            "by more than 10%; the eta certificate is inconsistent with the forcing")
    return QuasiState(u=traj, spec=spec, gronwall_bound=bound, max_norm=max_norm)


def c_u_limit(state: QuasiState, eta_cert: TailCertificate,
              spec: SpectralData | None = None):
    """Limit vector of u plus a certified bound on |u(T) - limit|.

    Returns (c_u, tail_bound) and records both on the state.
    """
    spec = spec or state.spec
    lam_eff = eta_cert.lam + spec.alpha - spec.beta
    if lam_eff <= 0:
        raise InputError("C4 envelope divergent; the limit vector is not certified")
    T = float(state.u.times[-1])
    adjusted = TailCertificate(K=eta_cert.K * 2 ** spec.power,
                               m=eta_cert.m + spec.power, lam=lam_eff,
                               t_star=eta_cert.t_star)
    M = max(state.max_norm, state.gronwall_bound)
    tail = M * spec.k1 * tail_integral(adjusted, max(T, adjusted.t_star))
    c_u = state.u(T)
    state.c_u = c_u
    state.tail_estimate = float(tail)
    return c_u, float(tail)


@dataclass
class Representation:
    """y(t) = e^{Ct}[c + r(t)] with r -> 0; r is the sampled remainder."""

    c: np.ndarray
    times: np.ndarray
    remainder: np.ndarray      # (len(times), n)
    state: QuasiState

    def remainder_norms(self):
        return np.linalg.norm(self.remainder, axis=1)


def asymptotic_representation(C, forcing: Forcing, y0, T, tol,
                              eta_cert: TailCertificate, samples=400) -> Representation:
    """Compute the limit coordinates of a quasilinear solution.

    y and u share their value at t = 0, so u is integrated from y0 and the
    remainder curve is u(t) - c_u.
    """
    state = integrate_u(C, forcing, y0, T, tol, eta_cert)
    c_u, _ = c_u_limit(state, eta_cert)
    ts = np.linspace(0.0, float(T), samples)
    remainder = state.u(ts) - c_u
    return Representation(c=c_u, times=ts, remainder=remainder, state=state)
