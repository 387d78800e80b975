"""Term grammar for time-dependent coefficients.

Every scalar coefficient handled by the toolkit is a finite sum of terms

    coeff * (t+1)^p * exp(a*t) * trig(omega*t)

where ``trig`` is absent, ``sin`` or ``cos``, and the exponential may act on
``|t|`` instead of ``t``.  The family is closed under the evaluations the
pipelines need and covers every coefficient of the built-in systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_TRIGS = ("", "sin", "cos")


@dataclass(frozen=True)
class Term:
    """One multiplicative term of the coefficient grammar."""

    coeff: float
    power: int = 0          # exponent of (t+1)
    rate: float = 0.0       # a in exp(a*t) or exp(a*|t|)
    rate_abs: bool = False  # exponential acts on |t|
    trig: str = ""          # "", "sin" or "cos"
    freq: float = 0.0       # omega in trig(omega*t), >= 0

    def __post_init__(self):
        if self.trig not in _TRIGS:
            raise ValueError(f"unknown trig factor {self.trig!r}")
        if self.freq < 0:
            raise ValueError("trig frequency must be >= 0")
        if self.trig == "" and self.freq != 0.0:
            raise ValueError("frequency given without sin/cos factor")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        arg = np.abs(t) if self.rate_abs else t
        out = self.coeff * np.exp(self.rate * arg)
        if self.power:
            out = out * (t + 1.0) ** self.power
        if self.trig == "sin":
            out = out * np.sin(self.freq * t)
        elif self.trig == "cos":
            out = out * np.cos(self.freq * t)
        return out if out.shape else float(out)

    def magnitude_scaled(self, t, extra_exponent=0.0):
        """|term(t)| * exp(extra_exponent), exponents combined before exp.

        Combining the exponents keeps products like exp(beta*t)*eta(t)
        finite when the individual factors would overflow.  Only defined
        for t >= 0.
        """
        t = np.asarray(t, dtype=float)
        out = abs(self.coeff) * np.exp(self.rate * t + extra_exponent)
        if self.power:
            out = out * (t + 1.0) ** self.power
        if self.trig == "sin":
            out = out * np.abs(np.sin(self.freq * t))
        elif self.trig == "cos":
            out = out * np.abs(np.cos(self.freq * t))
        return out if out.shape else float(out)

    def is_constant(self):
        return self.power == 0 and self.rate == 0.0 and self.trig == ""


def evaluate(terms, t):
    """Sum of a term tuple at time(s) t."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    for term in terms:
        out = out + term(t)
    return out if out.shape else float(out)


def magnitude_envelope(terms, t, extra_exponent=0.0):
    """Sum of per-term magnitudes, each scaled by exp(extra_exponent)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    for term in terms:
        out = out + term.magnitude_scaled(t, extra_exponent)
    return out if out.shape else float(out)


def _fmt_real(x):
    return repr(float(x))


def term_to_str(term: Term) -> str:
    """Canonical text form, parseable by the scenario grammar."""
    parts = [_fmt_real(term.coeff)]
    if term.power:
        parts.append(f"(t+1)^{term.power}")
    if term.rate != 0.0:
        var = "abs(t)" if term.rate_abs else "t"
        parts.append(f"exp({_fmt_real(term.rate)}*{var})")
    if term.trig:
        parts.append(f"{term.trig}({_fmt_real(term.freq)}*t)")
    return "*".join(parts)


def terms_to_str(terms) -> str:
    if not terms:
        return "0.0"
    out = term_to_str(terms[0])
    for term in terms[1:]:
        if term.coeff < 0:
            flipped = Term(-term.coeff, term.power, term.rate,
                           term.rate_abs, term.trig, term.freq)
            out += " - " + term_to_str(flipped)
        else:
            out += " + " + term_to_str(term)
    return out
