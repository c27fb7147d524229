"""Composite Gauss-Legendre panel quadrature, internal.

Shared engine: callers build a panel-edge array (uniform, frequency-driven,
or geometric), the engine evaluates a vectorized integrand on mapped
Gauss-Legendre nodes and reports a two-resolution error difference.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def uniform_edges(a: float, b: float, panels: int) -> np.ndarray:
    return np.linspace(a, b, panels + 1)


def osc_edges(a: float, b: float, freq: float, per_period: int = 4,
              min_panels: int = 4, max_panels: int | None = None) -> np.ndarray:
    """Edges with panel width <= 1/(per_period*freq); freq in cycles/unit."""
    n = min_panels
    if freq > 0:
        n = max(n, int(np.ceil((b - a) * freq * per_period)))
    if max_panels is not None and n > max_panels:
        n = max_panels
    return uniform_edges(a, b, n)


def refine_edges(edges: np.ndarray) -> np.ndarray:
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def composite_gl(f, edges: np.ndarray, order: int = 8,
                 with_abs: bool = False):
    """Integral of f over the panels. f must accept an ndarray of nodes.

    When with_abs is set, also returns the integral of |f| (for roundoff
    bookkeeping in error estimates).
    """
    x, w = _gl_rule(order)
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = np.asarray(f(nodes)).reshape(len(a), order)
    total = float(np.real(np.sum((vals * w[None, :]).sum(axis=1) * half))) \
        if np.isrealobj(vals) else complex(np.sum((vals * w[None, :]).sum(axis=1) * half))
    if not with_abs:
        return total
    l1 = float(np.sum((np.abs(vals) * w[None, :]).sum(axis=1) * half))
    return total, l1


def two_resolution(f, edges: np.ndarray, order: int = 8):
    """(value at refined edges, |refined - coarse|, integral of |f|)."""
    coarse = composite_gl(f, edges, order)
    fine, l1 = composite_gl(f, refine_edges(edges), order, with_abs=True)
    return fine, abs(fine - coarse), l1
