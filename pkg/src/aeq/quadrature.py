"""Composite Gauss-Legendre quadrature with cumulative variants.

The successive-approximation solver needs, per recursion level, the values
of F(t) = int_t^T f(s) ds (or int_{-T}^t) both at panel edges and at the
Gauss nodes inside every panel, while evaluating f only at those shared
nodes.  Partial-range integrals inside a panel are obtained by integrating
the Lagrange interpolant through the panel's nodes; the corresponding
node-to-edge weight matrices are precomputed on the reference interval.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _reference(g):
    """Nodes, weights and partial-integral matrices on [-1, 1].

    R[q, p] = int_{x_q}^{1} l_p(x) dx and L[q, p] = int_{-1}^{x_q} l_p(x) dx
    for the Lagrange basis l_p over the g Gauss-Legendre nodes.
    """
    x, w = np.polynomial.legendre.leggauss(g)
    R = np.empty((g, g))
    L = np.empty((g, g))
    for p in range(g):
        others = np.delete(x, p)
        coeffs = np.poly(others)              # monic with roots at the others
        denom = np.polyval(coeffs, x[p])
        anti = np.polyint(coeffs / denom)
        at_nodes = np.polyval(anti, x)
        R[:, p] = np.polyval(anti, 1.0) - at_nodes
        L[:, p] = at_nodes - np.polyval(anti, -1.0)
    return x, w, R, L


class PanelGrid:
    """Panels over [edges[0], edges[-1]] sharing g Gauss nodes per panel."""

    def __init__(self, edges, g=8):
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing, length >= 2")
        self.edges = edges
        self.g = g
        x, w, R, L = _reference(g)
        self._x, self._w, self._R, self._L = x, w, R, L
        self.half = 0.5 * np.diff(edges)                       # (N,)
        mid = 0.5 * (edges[:-1] + edges[1:])
        self.nodes = mid[:, None] + self.half[:, None] * x[None, :]  # (N, g)

    @staticmethod
    def uniform(a, b, max_panel, g=8):
        n = max(1, int(np.ceil((b - a) / max_panel)))
        return PanelGrid(np.linspace(a, b, n + 1), g=g)

    @property
    def n_panels(self):
        return len(self.edges) - 1

    def flat_nodes(self):
        return self.nodes.reshape(-1)

    def panel_integrals(self, values):
        """Per-panel integrals of samples with shape (N, g, ...)."""
        return np.einsum("q,nq...->n...", self._w, values) * _col(self.half, values)

    def integrate(self, values):
        return self.panel_integrals(values).sum(axis=0)

    def cumulative_from_right(self, values):
        """F(t) = int_t^{edges[-1]} f ds at edges and at the Gauss nodes.

        Returns (edge_vals, node_vals) with shapes (N+1, ...) and (N, g, ...).
        """
        seg = self.panel_integrals(values)
        edge = np.zeros((len(self.edges),) + values.shape[2:])
        edge[:-1] = seg[::-1].cumsum(axis=0)[::-1]
        partial = np.einsum("qp,np...->nq...", self._R, values) * _col2(self.half, values)
        node = partial + edge[1:, None]
        return edge, node

    def cumulative_from_left(self, values):
        """G(t) = int_{edges[0]}^t f ds at edges and at the Gauss nodes."""
        seg = self.panel_integrals(values)
        edge = np.zeros((len(self.edges),) + values.shape[2:])
        edge[1:] = seg.cumsum(axis=0)
        partial = np.einsum("qp,np...->nq...", self._L, values) * _col2(self.half, values)
        node = partial + edge[:-1, None]
        return edge, node


def _col(half, values):
    return half.reshape((-1,) + (1,) * (values.ndim - 2))


def _col2(half, values):
    return half.reshape((-1, 1) + (1,) * (values.ndim - 2))
