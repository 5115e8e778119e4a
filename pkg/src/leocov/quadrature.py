"""Globally adaptive Gauss-Kronrod (7/15) quadrature.

The integrand receives a 1-D array of abscissae and returns either an array
of the same length or a 2-D array ``(m, len(x))`` for ``m`` simultaneous
integrands sharing one partition. The interval with the largest error is
bisected until the summed error meets the tolerance or the subdivision
budget runs out.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full symmetric 15-point rule
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadResult:
    value: float | np.ndarray
    error: float | np.ndarray
    converged: bool
    intervals: int


def _rule(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES), dtype=float)
    k = half * (fx @ _KRONROD)
    g = half * (fx @ _GAUSS)
    return k, np.abs(k - g)


def integrate(
    f,
    a: float,
    b: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-12,
    max_subdivisions: int = 200,
    breakpoints=(),
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]``.

    ``breakpoints`` seed the initial partition, e.g. where the integrand
    has a kink.
    """
    if b == a:
        probe = np.asarray(f(np.array([a])))
        zero = np.zeros(probe.shape[:-1]) if probe.ndim > 1 else 0.0
        return QuadResult(zero, np.zeros_like(zero), True, 0)
    edges = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    heap = []
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        k, e = _rule(f, lo, hi)
        heap.append((-float(np.max(e)), i, lo, hi, k, e))
    heapq.heapify(heap)
    counter = len(heap)
    total = sum(item[4] for item in heap)
    err = sum(item[5] for item in heap)

    def done() -> bool:
        return bool(np.all(err <= np.maximum(abs_tol, rel_tol * np.abs(total))))

    while not done() and len(heap) < max_subdivisions:
        _, _, lo, hi, k, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = _rule(f, lo, mid)
        k2, e2 = _rule(f, mid, hi)
        total = total - k + k1 + k2
        err = err - e + e1 + e2
        heapq.heappush(heap, (-float(np.max(e1)), counter, lo, mid, k1, e1))
        heapq.heappush(heap, (-float(np.max(e2)), counter + 1, mid, hi, k2, e2))
        counter += 2
    # re-sum to shed the drift of incremental updates
    total = sum(item[4] for item in heap)
    err = sum(item[5] for item in heap)
    return QuadResult(total, err, done(), len(heap))
