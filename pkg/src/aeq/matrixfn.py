"""Time-dependent square matrices built from the term grammar."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .terms import Term, evaluate

PARITIES = ("even", "odd", "none")

#: relative tolerance for the declared-parity sampling check
PARITY_RTOL = 1e-9
#: number of symmetric sample points used to validate declared parity
PARITY_SAMPLES = 64


@dataclass(frozen=True)
class MatrixFunction:
    """n x n matrix whose entries are term-grammar expressions of t.

    ``parity`` is declared metadata ("even", "odd" or "none"); a declared
    parity is validated by symmetric sampling and a violation is an input
    error, never silently ignored.
    """

    dim: int
    entries: tuple  # entries[i][j] -> tuple[Term, ...]
    parity: str = "none"

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("matrix dimension must be positive")
        if self.parity not in PARITIES:
            raise InputError(f"unknown parity {self.parity!r}")
        if len(self.entries) != self.dim or any(len(r) != self.dim for r in self.entries):
            raise InputError("entry table does not match declared dimension")

    @staticmethod
    def from_terms(rows, parity="none"):
        rows = tuple(tuple(tuple(entry) for entry in row) for row in rows)
        return MatrixFunction(dim=len(rows), entries=rows, parity=parity)

    @staticmethod
    def constant(M, parity="none"):
        M = np.asarray(M, dtype=float)
        rows = [[(Term(float(M[i, j])),) if M[i, j] != 0.0 else ()
                 for j in range(M.shape[1])] for i in range(M.shape[0])]
        return MatrixFunction.from_terms(rows, parity=parity)

    @staticmethod
    def zero(n):
        return MatrixFunction.from_terms([[() for _ in range(n)] for _ in range(n)],
                                         parity="even")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (self.dim, self.dim))
        for i in range(self.dim):
            for j in range(self.dim):
                if self.entries[i][j]:
                    out[..., i, j] = evaluate(self.entries[i][j], t)
        return out

    def __add__(self, other):
        if not isinstance(other, MatrixFunction) or other.dim != self.dim:
            return NotImplemented
        rows = [[self.entries[i][j] + other.entries[i][j]
                 for j in range(self.dim)] for i in range(self.dim)]
        return MatrixFunction.from_terms(rows)

    def is_constant(self):
        return all(term.is_constant()
                   for row in self.entries for entry in row for term in entry)

    def constant_value(self):
        if not self.is_constant():
            raise InputError("matrix is time dependent")
        return self(0.0)

    def check_finite(self, t_lo, t_hi, samples=257):
        """Raise InputError if any entry is non-finite on [t_lo, t_hi]."""
        ts = np.linspace(t_lo, t_hi, samples)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = self(ts)
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            raise InputError(
                f"entry ({bad[1]},{bad[2]}) is not finite near t={ts[bad[0]]:g}")

    def parity_deviation(self, t_max, samples=PARITY_SAMPLES):
        """(worst deviation, scale) of the declared parity over +-t samples.

        For parity "odd" the deviation is max ||F(-t)+F(t)||_F, for "even"
        max ||F(-t)-F(t)||_F; scale is max(1, max ||F||_F).
        """
        if self.parity == "none":
            return 0.0, 1.0
        ts = np.linspace(t_max / samples, t_max, samples)
        plus = self(ts)
        minus = self(-ts)
        sign = 1.0 if self.parity == "odd" else -1.0
        dev = np.linalg.norm(minus + sign * plus, axis=(1, 2)).max()
        scale = max(1.0, np.linalg.norm(plus, axis=(1, 2)).max())
        return float(dev), float(scale)

    def validate_parity(self, t_max, samples=PARITY_SAMPLES):
        dev, scale = self.parity_deviation(t_max, samples)
        if dev > PARITY_RTOL * scale:
            raise InputError(
                f"declared parity {self.parity!r} violated: deviation {dev:.3e} "
                f"exceeds {PARITY_RTOL:g} * scale {scale:.3e}")


def fro(M):
    """Frobenius norm, the default matrix norm of the toolkit.

    It upper-bounds the spectral norm, so every analytic inequality checked
    with it remains a valid certificate.
    """
    return float(np.linalg.norm(M, "fro"))
