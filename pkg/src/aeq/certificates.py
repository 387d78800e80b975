"""Analytic decay envelopes and certified evaluation of tail integrals.

A tail certificate asserts env(t) <= K * t^m * exp(-lam*t) for t >= t_star.
Improper integrals over [T, inf) of certified envelopes have a closed form,
which is what turns a finite quadrature into a verdict about behaviour at
infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError

#: slack added to the pointwise envelope comparison
VALIDATION_SLACK = 1e-12


@dataclass(frozen=True)
class TailCertificate:
    """Envelope bound K * t^m * exp(-lam*t), valid for t >= t_star.

    ``K`` may be None in scenario input ("K = fit"), in which case the
    pipeline fits it from envelope samples before use.
    """

    K: float | None
    m: int
    lam: float
    t_star: float = 0.0

    def __post_init__(self):
        if self.K is not None and self.K <= 0:
            raise InputError("certificate constant K must be > 0")
        if self.m < 0:
            raise InputError("certificate power m must be >= 0")
        if self.lam <= 0:
            raise InputError("certificate rate lambda must be > 0")
        if self.t_star < 0:
            raise InputError("certificate threshold t_star must be >= 0")

    @property
    def resolved(self):
        return self.K is not None

    def _require_resolved(self):
        if self.K is None:
            raise InputError("certificate constant K is unresolved (K = fit)")

    def bound(self, t):
        self._require_resolved()
        t = np.asarray(t, dtype=float)
        out = self.K * np.exp(-self.lam * t)
        if self.m:
            out = out * t ** self.m
        return out if out.shape else float(out)

    def scaled(self, factor=1.0, dm=0, dlam=0.0):
        """Certificate for factor * t^dm * exp(dlam*t) * env(t)."""
        self._require_resolved()
        if self.lam - dlam <= 0:
            raise InputError("scaled certificate has non-positive decay rate")
        return replace(self, K=self.K * factor, m=self.m + dm, lam=self.lam - dlam)


@dataclass(frozen=True)
class CertificateValidation:
    passed: bool
    worst_excess: float   # max over samples of env - bound (negative margin if PASS)
    at_t: float
    samples: int


def validate_certificate(env, cert: TailCertificate, grid) -> CertificateValidation:
    """Check env(t) <= bound(t) at every sample of grid (within slack)."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InputError("empty validation grid")
    if np.any(grid < cert.t_star):
        raise InputError("validation grid extends below the certificate threshold")
    env_vals = _eval_envelope(env, grid)
    excess = env_vals - cert.bound(grid)
    i = int(np.argmax(excess))
    return CertificateValidation(
        passed=bool(excess[i] <= VALIDATION_SLACK),
        worst_excess=float(excess[i]),
        at_t=float(grid[i]),
        samples=len(grid),
    )


def _eval_envelope(env, grid):
    try:
        vals = np.asarray(env(grid), dtype=float)
        if vals.shape == grid.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.asarray([float(env(t)) for t in grid])


def tail_integral(cert: TailCertificate, t) -> float:
    """int_t^inf K s^m exp(-lam*s) ds, exactly.

    Repeated integration by parts: I_m(t) = t^m e^{-lam t}/lam + (m/lam) I_{m-1}(t).
    """
    cert._require_resolved()
    if t < cert.t_star:
        raise InputError(f"tail_integral queried at t={t:g} below t_star={cert.t_star:g}")
    lam = cert.lam
    value = math.exp(-lam * t) / lam
    for k in range(1, cert.m + 1):
        value = t ** k * math.exp(-lam * t) / lam + (k / lam) * value
    return cert.K * value


def log_tail_integral(cert: TailCertificate, t) -> float:
    """log of tail_integral, stable for large t."""
    cert._require_resolved()
    lam = cert.lam
    value = 1.0 / lam
    for k in range(1, cert.m + 1):
        value = t ** k / lam + (k / lam) * value
    return math.log(cert.K) - lam * t + math.log(value)


def find_smallness_point(cert: TailCertificate, eps, resolution=1e-9) -> float:
    """Smallest t1 >= t_star with tail_integral(cert, t1) < eps.

    Monotone bisection on the closed form; the returned point satisfies the
    strict inequality, and tail_integral(t1 - resolution) >= eps whenever
    t1 > t_star.
    """
    if not (0 < eps):
        raise InputError("eps must be positive")
    if tail_integral(cert, cert.t_star) < eps:
        return cert.t_star
    lo = cert.t_star
    hi = max(cert.t_star + 1.0, 1.0)
    while tail_integral(cert, hi) >= eps:
        hi = cert.t_star + 2 * (hi - cert.t_star)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if tail_integral(cert, mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


def fit_K(ts, env_vals, m, lam, t_star=0.0, headroom=1.01) -> TailCertificate:
    """Resolve K by maximizing env(t) * exp(lam*t) / t^m over the samples."""
    ts = np.asarray(ts, dtype=float)
    env_vals = np.asarray(env_vals, dtype=float)
    mask = ts >= max(t_star, 1e-12 if m else t_star)
    if not mask.any():
        raise InputError("no samples at or above t_star to fit K")
    t = ts[mask]
    ratio = env_vals[mask] * np.exp(lam * t)
    if m:
        ratio = ratio / t ** m
    K = float(ratio.max()) * headroom
    if K <= 0:
        K = VALIDATION_SLACK
    return TailCertificate(K=K, m=m, lam=lam, t_star=t_star)


def resolve(cert: TailCertificate, ts, env_vals, headroom=1.01) -> TailCertificate:
    """Return cert unchanged if resolved, else fit K from the samples."""
    if cert.resolved:
        return cert
    return fit_K(ts, env_vals, cert.m, cert.lam, cert.t_star, headroom)
