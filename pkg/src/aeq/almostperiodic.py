"""Almost periodic signals, translation numbers, and trajectory classification.

Signals are finite trigonometric polynomials; verdicts are always about a
*supplied* decomposition f = g + phi.  The tool never infers frequencies
from data, and it reports the largest observed gap between translation
numbers instead of pretending a finite scan can prove relative density.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .reports import decade_windows


@dataclass(frozen=True)
class APComponent:
    omega: float
    a: tuple    # cosine coefficients, dim n
    b: tuple    # sine coefficients, dim n


@dataclass(frozen=True)
class APSignal:
    """g(t) = sum_w a_w cos(w t) + b_w sin(w t), evaluated exactly."""

    dim: int
    components: tuple

    def __post_init__(self):
        for comp in self.components:
            if comp.omega < 0:
                raise InputError("signal frequencies must be >= 0")
            if len(comp.a) != self.dim or len(comp.b) != self.dim:
                raise InputError("signal coefficient vectors do not match dim")

    @staticmethod
    def build(dim, parts):
        comps = tuple(APComponent(float(w), tuple(map(float, a)), tuple(map(float, b)))
                      for w, a, b in parts)
        return APSignal(dim=dim, components=comps)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.dim,))
        for comp in self.components:
            wt = comp.omega * t
            out += np.cos(wt)[..., None] * np.asarray(comp.a)
            out += np.sin(wt)[..., None] * np.asarray(comp.b)
        return out

    @property
    def frequencies(self):
        return tuple(c.omega for c in self.components)


def translation_error(f, tau, window, samples=2048) -> float:
    """sup over the sampled window of ||f(t + tau) - f(t)||."""
    a, b = float(window[0]), float(window[1])
    if b <= a:
        raise InputError("empty scan window")
    ts = np.linspace(a, b, samples)
    diff = np.asarray(f(ts + tau)) - np.asarray(f(ts))
    if diff.ndim == 1:
        return float(np.abs(diff).max())
    return float(np.linalg.norm(diff, axis=-1).max())


@dataclass
class TranslationCensus:
    eps: float
    step: float
    hits: np.ndarray
    max_gap: float | None    # None when fewer than two hits

    def to_json(self):
        return {"eps": self.eps, "step": self.step, "n_hits": int(len(self.hits)),
                "max_gap": self.max_gap}


def find_translation_numbers(g, eps, upto, step=None, window=(0.0, 50.0),
                             samples=512) -> TranslationCensus:
    """Scan tau in [0, upto] for eps-translation numbers of g.

    The largest gap between consecutive hits is the finite-scan witness of
    relative density (smaller is better; the scan step is its floor).
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    if step is None:
        step = upto / 4096
    taus = np.arange(0.0, upto + 0.5 * step, step)
    ts = np.linspace(window[0], window[1], samples)
    base = np.asarray(g(ts))
    hits = []
    chunk = max(1, int(2e6 / max(len(ts), 1)))
    for start in range(0, len(taus), chunk):
        block = taus[start:start + chunk]
        shifted = np.asarray(g((block[:, None] + ts[None, :]).reshape(-1)))
        shifted = shifted.reshape(len(block), len(ts), -1)
        err = np.linalg.norm(shifted - base[None, :, :], axis=-1).max(axis=1)
        hits.extend(block[err < eps])
    hits = np.asarray(hits)
    max_gap = float(np.diff(hits).max()) if len(hits) >= 2 else None
    return TranslationCensus(eps=eps, step=step, hits=hits, max_gap=max_gap)


@dataclass
class DecompositionReport:
    """Outcome of testing a supplied decomposition f = g + phi."""

    classification: str      # AP | asymptotically-AP | biasymptotically-AP | unclassified
    tol: float
    times_pos: np.ndarray
    residual_pos: np.ndarray
    times_neg: np.ndarray | None = None
    residual_neg: np.ndarray | None = None
    census: TranslationCensus | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        out = {"classification": self.classification, "tol": self.tol,
               "residual_end_pos": float(self.residual_pos[-1])}
        if self.residual_neg is not None:
            out["residual_end_neg"] = float(self.residual_neg[0])
        if self.census is not None:
            out["census"] = self.census.to_json()
        out.update(self.extra)
        return out


def _end_decays(times, values, tol):
    late, mid, _ = decade_windows(times, values)
    return late < tol and late < mid


def classify(f, g: APSignal, tol, horizon, two_sided=False, samples=1024,
             census_eps=0.1, census_upto=None) -> DecompositionReport:
    """Classify f against the supplied almost periodic part g.

    phi = f - g is sampled on [0, horizon] (and its mirror when two sided);
    an end "decays" when the final-decade max of ||phi|| is below tol and
    strictly below the mid-window max.  If ||phi|| is below tol everywhere
    the decomposition is already almost periodic.
    """
    ts_pos = np.linspace(0.0, float(horizon), samples)
    phi_pos = np.linalg.norm(np.asarray(f(ts_pos)) - g(ts_pos), axis=-1)
    ts_neg = phi_neg = None
    if two_sided:
        ts_neg = np.linspace(-float(horizon), 0.0, samples)
        phi_neg = np.linalg.norm(np.asarray(f(ts_neg)) - g(ts_neg), axis=-1)

    everywhere = phi_pos.max() if phi_neg is None else max(phi_pos.max(), phi_neg.max())
    if everywhere < tol:
        label = "AP"
    else:
        pos_ok = _end_decays(ts_pos, phi_pos, tol)
        if two_sided:
            neg_ok = _end_decays(-ts_neg[::-1], phi_neg[::-1], tol)
            if pos_ok and neg_ok:
                label = "biasymptotically-AP"
            elif pos_ok:
                label = "asymptotically-AP"
            else:
                label = "unclassified"
        else:
            label = "asymptotically-AP" if pos_ok else "unclassified"

    census = None
    if g.components:
        census = find_translation_numbers(
            g, census_eps, census_upto if census_upto is not None else float(horizon))
    return DecompositionReport(classification=label, tol=tol,
                               times_pos=ts_pos, residual_pos=phi_pos,
                               times_neg=ts_neg, residual_neg=phi_neg,
                               census=census,
                               extra={"max_residual": float(everywhere)})
