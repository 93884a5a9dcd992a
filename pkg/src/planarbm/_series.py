"""Shared summation helpers for slowly converging lattice and alternating sums.

Every series in the catalog is written as a sum of *groups* ``g(n)``, n = 0, 1, ...,
chosen so that ``g`` is a smooth function of ``n`` for large ``n`` (alternating
terms are paired).  The partial sums then obey ``S(N) - S = c1/N + c2/N**2 + ...``
and repeated Richardson extrapolation over N, 2N, 4N, ... removes the leading
orders.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

GroupFn = Callable[[np.ndarray], np.ndarray]


def richardson(sums: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Richardson table for partial sums taken at N, 2N, 4N, ...

    Returns the most extrapolated value and the difference to the previous
    diagonal entry, used as the error estimate.
    """
    levels = sums.shape[0]
    table = [sums[j] for j in range(levels)]
    prev_diag = table[-1]
    for order in range(1, levels):
        f = 2.0**order
        new = [(f * table[j] - table[j - 1]) / (f - 1.0) for j in range(1, len(table))]
        prev_diag = table[-1]
        table = new
    value = table[-1]
    err = np.abs(value - prev_diag)
    return value, err


def extrapolated_sum(groups: GroupFn, n0: int = 128, levels: int = 5, extra_ndim: int = 1):
    """Extrapolated infinite sum of ``groups``.

    ``groups`` receives a column of group indices shaped ``(M, 1, ...)`` with
    ``extra_ndim`` trailing singleton axes, and must broadcast against the
    caller's evaluation points.
    """
    counts = [n0 * 2**j for j in range(levels)]
    top = counts[-1]
    n = np.arange(top, dtype=float).reshape((top,) + (1,) * extra_ndim)
    cs = np.cumsum(groups(n), axis=0)
    sums = np.stack([cs[c - 1] for c in counts])
    return richardson(sums)


def chunked(fn: Callable[[np.ndarray], np.ndarray], x, size: int = 4096) -> np.ndarray:
    """Apply a vectorized ``fn`` to ``x`` in slices to bound memory."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    flat = x.ravel()
    if flat.size <= size:
        return np.asarray(fn(flat)).reshape(shape)
    out = np.empty(flat.size)
    for lo in range(0, flat.size, size):
        out[lo : lo + size] = fn(flat[lo : lo + size])
    return out.reshape(shape)
