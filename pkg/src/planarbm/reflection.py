"""Stopping sequences and alternating reflection series.

``tau(b_1, ..., b_n)`` is the first time ``Re B`` has visited the levels
``b_1, ..., b_n`` in order.  Its hitting density on the last line is a Cauchy
kernel whose scale is the total distance travelled (:func:`collapse`).
Alternating sums of such kernels give the exit densities of strips,
half-strips and rectangles; consecutive partial sums bracket the limit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .densities import cauchy_pdf, halfstrip_bottom_pdf, strip_line_pdf

PI = math.pi

KINDS = ("strip_right", "strip_left", "halfstrip_bottom", "rectangle_vertical", "rectangle_horizontal")


class ReflectionError(ValueError):
    pass


@dataclass(frozen=True)
class StoppingSequence:
    start: float
    levels: tuple

    def __post_init__(self):
        lv = tuple(float(b) for b in self.levels)
        if not lv:
            raise ReflectionError("levels must be nonempty")
        chain = (float(self.start),) + lv
        if any(x == y for x, y in zip(chain[:-1], chain[1:])):
            raise ReflectionError("consecutive levels must differ")
        object.__setattr__(self, "levels", lv)


def collapse(seq: StoppingSequence) -> float:
    """Cauchy scale of the hitting density at ``tau(b_1, ..., b_n)``."""
    chain = (seq.start,) + seq.levels
    return float(sum(abs(b - a) for a, b in zip(chain[:-1], chain[1:])))


def strip_levels(a: float, j: int, side: int = 1) -> StoppingSequence:
    """The ``j``-th sequence of the strip series: ``j`` alternating visits to
    ``-1`` and ``1`` ending on the line ``Re z = side``.  Its collapse is ``D_j``."""
    lv = [side * (-1) ** (j - i) for i in range(1, j + 1)]
    return StoppingSequence(a, tuple(lv))


@dataclass(frozen=True)
class Term:
    """``sign * sum over centers of kernel(point - center)``; ``scale`` orders the terms."""

    sign: int
    scale: float
    centers: tuple
    kernel: Callable

    def __call__(self, point):
        p = np.asarray(point, dtype=float)
        return self.sign * sum(self.kernel(p - c) for c in self.centers)


@dataclass(frozen=True)
class ReflectionSeries:
    kind: str
    params: dict
    _factory: Callable

    def terms(self) -> Iterator[Term]:
        """Fresh lazy iterator over the terms."""
        return self._factory()

    def head(self, n: int) -> list:
        return list(itertools.islice(self.terms(), n))


def _cauchy_kernel(width):
    return lambda d: cauchy_pdf(d, 0.0, width)


def _strip_terms(a: float):
    def gen():
        for j in itertools.count(1):
            D = (2 * j - 1) + (-1) ** j * a
            yield Term(1 if j % 2 else -1, D, (0.0,), _cauchy_kernel(D))

    return gen


def _halfstrip_terms(alpha: float, beta: float):
    # images x_m = 2m + (-1)^m x; as kernels in x they sit at c_m = (-1)^m (alpha - 2m)
    ker = _cauchy_kernel(beta)

    def gen():
        yield Term(1, 0.0, (alpha,), ker)
        for n in itertools.count(1):
            cs = tuple((-1) ** (m % 2) * (alpha - 2 * m) for m in (n, -n))
            yield Term(-1 if n % 2 else 1, 2.0 * n, cs, ker)

    return gen


def _rect_vertical_terms(alpha: float, beta: float, k: float):
    # strip densities at heights 2mk + (-1)^m y - beta, which are even in the height
    ker = lambda d: strip_line_pdf(alpha, d)

    def gen():
        yield Term(1, 0.0, (beta,), ker)
        for n in itertools.count(1):
            cs = tuple((-1) ** (m % 2) * (beta - 2 * m * k) for m in (n, -n))
            yield Term(-1 if n % 2 else 1, 2.0 * n * k, cs, ker)

    return gen


def _rect_horizontal_terms(alpha: float, beta: float, k: float):
    def gen():
        for j in itertools.count(1):
            b = (-1) ** (j + 1) * (2 * j - 1)
            if b > alpha:
                al, be, flip = beta / k, (b - alpha) / k, 1.0
            else:
                al, be, flip = -beta / k, (alpha - b) / k, -1.0
            ker = lambda y, al=al, be=be, flip=flip: halfstrip_bottom_pdf(al, be, flip * y / k) / k
            yield Term(1 if j % 2 else -1, abs(b - alpha), (0.0,), ker)

    return gen


def build_series(kind: str, **params) -> ReflectionSeries:
    """Alternating series for the exit density on one boundary piece.

    kinds and parameters:
      ``strip_right(a)``, ``strip_left(a)``: heights y on ``Re z = +-1``;
      ``halfstrip_bottom(alpha, beta)``: x on the bottom edge;
      ``rectangle_vertical(alpha, beta, k)``, ``rectangle_horizontal(alpha, beta, k)``:
      heights y on the right side ``Re z = 1``.
    """
    if kind in ("strip_right", "strip_left"):
        a = float(params["a"])
        if not -1 < a < 1:
            raise ReflectionError("need -1 < a < 1")
        return ReflectionSeries(kind, {"a": a}, _strip_terms(a if kind == "strip_right" else -a))
    if kind == "halfstrip_bottom":
        al, be = float(params["alpha"]), float(params["beta"])
        if not (-1 < al < 1 and be > 0):
            raise ReflectionError("need -1 < alpha < 1, beta > 0")
        return ReflectionSeries(kind, {"alpha": al, "beta": be}, _halfstrip_terms(al, be))
    if kind in ("rectangle_vertical", "rectangle_horizontal"):
        al, be, k = float(params["alpha"]), float(params["beta"]), float(params.get("k", 1.0))
        if not (abs(al) < 1 and abs(be) < k):
            raise ReflectionError("need |alpha| < 1, |beta| < k")
        f = _rect_vertical_terms if kind == "rectangle_vertical" else _rect_horizontal_terms
        return ReflectionSeries(kind, {"alpha": al, "beta": be, "k": k}, f(al, be, k))
    if kind.startswith("annulus"):
        raise ReflectionError(
            "the annulus reflection sequence has terms that do not vanish; "
            "use identities.coco_diagnostic instead"
        )
    raise ReflectionError(f"unsupported kind {kind!r}")


def eval_series(series: ReflectionSeries, point, N: int):
    """Partial sum of the first ``N`` terms with bounds from the partial sum of ``N + 1``."""
    if N < 2:
        raise ReflectionError("N must be at least 2")
    p = np.asarray(point, dtype=float)
    total = np.zeros(p.shape)
    it = series.terms()
    for _ in range(N):
        total = total + next(it)(p)
    nxt = total + next(it)(p)
    lo, hi = np.minimum(total, nxt), np.maximum(total, nxt)
    if p.ndim == 0:
        return float(total), float(lo), float(hi)
    return total, lo, hi


def partial_sums(series: ReflectionSeries, point, N: int) -> np.ndarray:
    """``S_1, ..., S_N`` at ``point``."""
    p = np.asarray(point, dtype=float)
    out = []
    total = np.zeros(p.shape)
    for t in itertools.islice(series.terms(), N):
        total = total + t(p)
        out.append(total)
    return np.array(out)
