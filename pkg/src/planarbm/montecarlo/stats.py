"""Comparing samples with analytic distributions."""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
from scipy import stats as sps

KS_ALPHA01 = 1.628


class StatsError(ValueError):
    pass


def ks_statistic(values, cdf) -> float:
    """Sup distance between the empirical CDF of ``values`` and ``cdf``."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 100:
        raise StatsError("need at least 100 samples")
    return float(sps.kstest(v, lambda t: np.asarray(cdf(t), dtype=float)).statistic)


def ks_threshold(n: int, inflate: float = 1.0) -> float:
    """Asymptotic 1% critical value, optionally inflated for discretization bias."""
    return inflate * KS_ALPHA01 / math.sqrt(n)


def conditional_cdf(density, curve_id):
    """CDF on one curve, normalized by that curve's mass."""
    lo = density.domain.curve(curve_id).s_range[0]
    base = float(density.cdf(curve_id, lo)) if math.isfinite(lo) else 0.0
    mass = density.curve_mass(curve_id)
    return lambda s: (np.asarray(density.cdf(curve_id, s)) - base) / mass


def winding_class_frequencies(samples, K: int | None = None) -> dict:
    """Relative frequency of each winding class; with ``K`` only classes ``|k| <= K`` are listed."""
    idx = samples.winding_index() if hasattr(samples, "winding_index") else np.array([s.winding_index for s in samples])
    n = len(idx)
    if n == 0:
        return {}
    c = Counter(int(k) for k in idx)
    keys = sorted(c) if K is None else range(-K, K + 1)
    return {k: c.get(k, 0) / n for k in keys}


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)
