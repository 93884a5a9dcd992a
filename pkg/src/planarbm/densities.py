"""Closed-form boundary densities of planar Brownian motion at stopping times.

Each :class:`Density` is a density with respect to arclength on the boundary
curves of its domain.  Series-defined densities take a truncation: an integer
gives the raw partial sum, and ``None`` gives the limit obtained by Richardson
extrapolation of grouped partial sums (see ``_series``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import geometry as geo
from ._series import chunked, extrapolated_sum

PI = math.pi


class DensityError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


# ---------------------------------------------------------------- building blocks


def cauchy_pdf(x, u, v):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        return v / (PI * (v * v + (x - u) ** 2))


def cauchy_cdf(x, u, v):
    x = np.asarray(x, dtype=float)
    return 0.5 + np.arctan((x - u) / v) / PI


def _sech(x):
    e = np.exp(-np.abs(x))
    return 2 * e / (1 + e * e)


def strip_line_pdf(a, y):
    """Density on the right line of ``{|Re z| < 1}`` for a real start ``a``.

    The left line is obtained with ``-a``.
    """
    y = np.asarray(y, dtype=float)
    t = math.tan(PI * a / 4)
    sech = _sech(PI * y / 2)
    tanh = np.tanh(PI * y / 2)
    return sech * (1 - t * t) / (4 * ((1 - t * sech) ** 2 + (t * tanh) ** 2))


def strip_line_cdf(a, y):
    """Mass on the right line below height ``y``; total ``(1 + a) / 2``."""
    y = np.asarray(y, dtype=float)
    e = np.exp(-PI * np.clip(y, -450.0, None) / 2)
    return 0.5 + np.arctan((math.sin(PI * a / 2) - e) / math.cos(PI * a / 2)) / PI


def _hs_uv(alpha, beta):
    """Half-plane start ``sin(pi (alpha + i beta) / 2)`` as ``(u, v)``."""
    A = PI * alpha / 2
    B = PI * beta / 2
    return math.cosh(B) * math.sin(A), math.sinh(B) * math.cos(A)


def halfstrip_bottom_pdf(alpha, beta, x):
    x = np.asarray(x, dtype=float)
    S = math.sinh(PI * beta / 2)
    C = math.cosh(PI * beta / 2)
    sA, cA = math.sin(PI * alpha / 2), math.cos(PI * alpha / 2)
    sX, cX = np.sin(PI * x / 2), np.cos(PI * x / 2)
    return 0.5 * S * cA * cX / (S * S + sA * sA + sX * sX - 2 * C * sA * sX)


def halfstrip_side_pdf(alpha, beta, y, side):
    """Side rays ``side * 1 + i y`` (``side = +1`` right, ``-1`` left)."""
    y = np.asarray(y, dtype=float)
    S = math.sinh(PI * beta / 2)
    C = math.cosh(PI * beta / 2)
    sA, cA = math.sin(PI * alpha / 2), math.cos(PI * alpha / 2)
    # divide through by cosh^2 so large heights do not overflow
    sech, tanh = _sech(PI * y / 2), np.tanh(PI * y / 2)
    return 0.5 * S * cA * tanh * sech / (1 + (S * S + sA * sA) * sech * sech - 2 * side * C * sA * sech)


def halfstrip_bottom_cdf(alpha, beta, x):
    u, v = _hs_uv(alpha, beta)
    return cauchy_cdf(np.sin(PI * np.asarray(x, dtype=float) / 2), u, v) - cauchy_cdf(-1.0, u, v)


def _upper_sqrt(p: complex) -> complex:
    th = cmath.phase(p)
    if th < 0:
        th += 2 * PI
    return math.sqrt(abs(p)) * cmath.exp(0.5j * th)


def _lift_to_upper(omega: complex) -> complex:
    """A point ``alpha + i beta`` with ``beta > 0`` and ``sin(pi z / 2) = omega``."""
    z0 = (2 / PI) * cmath.asin(omega)
    if z0.imag < 0:
        z0 = 2 - z0
    return z0


def _lattice(groups: Callable, s, n0: int = 128, levels: int = 5):
    """Extrapolated sum of ``groups(n, s)`` over n, for an array of points ``s``."""

    def one(chunk):
        val, _ = extrapolated_sum(lambda n: groups(n, chunk), n0=n0, levels=levels)
        return val

    return chunked(one, s, size=2048)


def _lattice_err(groups: Callable, s, n0: int = 128, levels: int = 5):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    val, err = extrapolated_sum(lambda n: groups(n, s), n0=n0, levels=levels)
    return val, err


# ---------------------------------------------------------------- base class


class Density:
    """Boundary density with respect to arclength.

    Subclasses implement ``_value(i, s)`` and optionally ``_cdf(i, s)`` for the
    curve with index ``i`` in ``self.domain.curves``.  ``cdf`` is the mass on
    that curve below ``s``.
    """

    tag = "density"
    has_cdf = True

    def __init__(self, domain: geo.Domain, start, params: dict, truncation=None, curves=None):
        self.domain = domain
        self.start = complex(start)
        self.params = dict(params)
        self.truncation = truncation
        names = [c.curve_id for c in domain.curves] if curves is None else list(curves)
        self.curve_ids = tuple(names)

    # -- evaluation
    def _index(self, curve_id) -> int:
        i = self.domain.curve_index(curve_id)
        if self.domain.curves[i].curve_id not in self.curve_ids:
            return -1
        return i

    def value(self, curve_id, s):
        i = self._index(curve_id)
        scalar = np.ndim(s) == 0
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape) if i < 0 else np.asarray(self._value(i, s), dtype=float)
        return float(out) if scalar else out

    def cdf(self, curve_id, s):
        if not self.has_cdf:
            raise DensityError(f"{self.tag}: no closed-form cdf")
        i = self._index(curve_id)
        scalar = np.ndim(s) == 0
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape) if i < 0 else np.asarray(self._cdf(i, s), dtype=float)
        return float(out) if scalar else out

    def _value(self, i, s):
        raise NotImplementedError

    def _cdf(self, i, s):
        raise NotImplementedError

    def at(self, z, tol: float = 1e-9) -> float:
        """Density at a boundary point given as a complex number."""
        for cid in self.curve_ids:
            s = self.domain.curve(cid).locate(complex(z), tol)
            if s is not None:
                return self.value(cid, s)
        raise DensityError(f"{z!r} is not on the support of {self.tag}")

    # -- masses
    def curve_mass(self, curve_id) -> float:
        c = self.domain.curve(curve_id)
        if self._index(curve_id) < 0:
            return 0.0
        lo, hi = c.s_range
        if self.has_cdf:
            return float(self.cdf(curve_id, hi) - self.cdf(curve_id, lo))
        return quad_curve(lambda s: self.value(curve_id, s), lo, hi)[0]

    def total_mass(self) -> float:
        return sum(self.curve_mass(c) for c in self.curve_ids)

    def quad_mass(self, epsabs: float = 1e-12) -> float:
        """Total mass by adaptive quadrature of ``value`` (ignores the cdf)."""
        tot = 0.0
        for cid in self.curve_ids:
            lo, hi = self.domain.curve(cid).s_range
            tot += quad_curve(lambda s, cid=cid: self.value(cid, s), lo, hi, epsabs=epsabs)[0]
        return tot

    def to_json(self) -> dict:
        return {
            "equation_tag": self.tag,
            "domain": self.domain.to_json(),
            "start": [self.start.real, self.start.imag],
            "params": {k: (v if not isinstance(v, complex) else [v.real, v.imag]) for k, v in self.params.items()},
            "truncation": self.truncation,
        }

    def __repr__(self):
        return f"<{self.tag} start={self.start} params={self.params}>"


def quad_curve(f, lo, hi, epsabs=1e-12, epsrel=1e-12, points=None, limit=400):
    """scipy quad over an arclength range.

    Infinite ranges are mapped to the whole t-line (``s = sinh t`` for a full
    line, ``s = lo + e^t`` for a ray) so that heavy algebraic tails become
    exponentially decaying.
    """
    if math.isinf(lo) or math.isinf(hi):
        if math.isinf(lo) and math.isinf(hi):
            g = lambda t: f(math.sinh(t)) * math.cosh(t)
        elif math.isinf(hi):
            g = lambda t: f(lo + math.exp(t)) * math.exp(t)
        else:
            g = lambda t: f(hi - math.exp(t)) * math.exp(t)

        def safe(t):
            try:
                v = g(t)
            except OverflowError:
                return 0.0
            return v if math.isfinite(v) else 0.0

        t_lo = -700.0 if math.isinf(lo) and math.isinf(hi) else -740.0
        a = integrate.quad(safe, t_lo, 0.0, epsabs=epsabs, epsrel=epsrel, limit=limit)
        b = integrate.quad(safe, 0.0, 700.0, epsabs=epsabs, epsrel=epsrel, limit=limit)
        return a[0] + b[0], a[1] + b[1]
    if points:
        pts = sorted(p for p in points if lo < p < hi)
        edges = [lo] + pts + [hi]
        tot = err = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v, e = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
            tot += v
            err += e
        return tot, err
    return integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit)


# ---------------------------------------------------------------- disk family


def _unit_disk_angle_cdf(b: complex, theta):
    """Harmonic measure of the arc ``[-pi, theta]`` seen from ``b`` in the unit disk."""
    theta = np.asarray(theta, dtype=float)

    def big_theta(t):
        return t - 2 * np.angle(1 - np.conj(b) * np.exp(1j * t))

    return (big_theta(theta) - big_theta(-PI)) / (2 * PI)


class DiskDensity(Density):
    tag = "disk_poisson"

    def __init__(self, a, m: float = 1.0):
        a = complex(a)
        m = float(m)
        if m <= 0:
            raise DensityError("radius must be positive")
        if abs(a) == m:
            raise DensityError("start lies on the circle")
        self.m = m
        self.exterior = abs(a) > m
        dom = geo.exterior_disk(m) if self.exterior else geo.disk(m)
        super().__init__(dom, a, {"a": a, "m": m})
        # conformal equivalent start in the unit disk
        self._b = m / a.conjugate() if self.exterior else a / m

    def _value(self, i, s):
        th = s / self.m
        a, m = self.start, self.m
        e = np.exp(1j * th)
        if self.exterior:
            return (abs(a) ** 2 - m * m) / (2 * PI * m * np.abs(a - m * e) ** 2)
        return (m * m - abs(a) ** 2) / (2 * PI * m * np.abs(m - np.conj(a) * e) ** 2)

    def _cdf(self, i, s):
        th = np.clip(s / self.m, -PI, PI)
        return _unit_disk_angle_cdf(self._b, th)


def disk_density(a, m: float = 1.0) -> DiskDensity:
    return DiskDensity(a, m)


class HalfPlaneDensity(Density):
    tag = "halfplane_poisson"

    def __init__(self, a):
        a = complex(a)
        if a.imag <= 0:
            raise DensityError("start must have positive imaginary part")
        super().__init__(geo.half_plane(), a, {"a": a})

    def _value(self, i, s):
        return cauchy_pdf(s, self.start.real, self.start.imag)

    def _cdf(self, i, s):
        return cauchy_cdf(s, self.start.real, self.start.imag)


def halfplane_density(a) -> HalfPlaneDensity:
    return HalfPlaneDensity(a)


class PuncturedDiskDensity(Density):
    """Exit density of the punctured unit disk as a sum over winding classes ``k``."""

    tag = "punctured_covering"

    def __init__(self, a, K=None):
        a = complex(a)
        if not 0 < abs(a) < 1:
            raise DensityError("need 0 < |a| < 1")
        if K is not None and K < 0:
            raise DensityError("K must be nonnegative")
        super().__init__(geo.punctured_disk(), a, {"a": a}, truncation=K, curves=("circle",))
        self.L = -math.log(abs(a))
        self.phase = cmath.phase(a)

    def term(self, k, theta):
        theta = np.asarray(theta, dtype=float)
        d = self.phase - (theta + 2 * PI * k)
        return self.L / (PI * (self.L**2 + d * d))

    def term_cdf(self, k, theta):
        """Integral of ``term(k, .)`` over ``[-pi, theta]``."""
        theta = np.asarray(theta, dtype=float)
        L, ph = self.L, self.phase
        return (np.arctan((theta + 2 * PI * k - ph) / L) - np.arctan((-PI + 2 * PI * k - ph) / L)) / PI

    def class_mass(self, k) -> float:
        return float(self.term_cdf(k, PI))

    def _sum(self, fn, s):
        if self.truncation is not None:
            return sum(fn(k, s) for k in range(-self.truncation, self.truncation + 1))

        def groups(n, pts):
            return np.where(n == 0, fn(0, pts), fn(n, pts) + fn(-n, pts))

        return _lattice(groups, s)

    def _value(self, i, s):
        return self._sum(self.term, s)

    def _cdf(self, i, s):
        return self._sum(self.term_cdf, np.clip(s, -PI, PI))


def punctured_disk_density(a, K=None) -> PuncturedDiskDensity:
    return PuncturedDiskDensity(a, K)


# ---------------------------------------------------------------- strip


def _check_strip_start(a):
    if isinstance(a, complex) and a.imag != 0:
        raise DensityError("strip start must be real")
    a = float(np.real(a))
    if not -1 < a < 1:
        raise DensityError("need -1 < a < 1")
    return a


# Euler-Maclaurin weights -B_{2k}/(2k)! for the derivatives of orders 1, 3, 5, 7
_EM_WEIGHTS = (-1 / 12, 1 / 720, -1 / 30240, 1 / 1209600)


def _strip_pairs_em(a, y, cdf, M: int = 64):
    """Reflection series on the right line, summed in pairs ``n = 0, 1, ...``.

    Pair ``n`` has scales ``d1 = 4n + 1 - a`` and ``d2 = 4n + 3 + a``.  The first
    ``M`` pairs are added directly; the rest by Euler-Maclaurin, where the pair
    is ``phi(d1) - phi(d2)`` with ``phi(D) = Re 1/(D + iy) / pi`` (density) or
    ``Im log(D + iy) / pi`` (cdf).  With all scales past ``4M`` the remainder
    is below 1e-16 for every ``y``.
    """
    y = np.asarray(y, dtype=float)
    n = np.arange(M, dtype=float)[:, None]
    d1, d2 = 4 * n + 1 - a, 4 * n + 3 + a
    D1, D2 = 4 * M + 1 - a, 4 * M + 3 + a
    with np.errstate(over="ignore"):
        gap = np.log1p((D2 * D2 - D1 * D1) / (D1 * D1 + y * y))
        if cdf:
            head = np.sum(np.arctan(y / d1) - np.arctan(y / d2), axis=0) / PI
            integral = (D2 * np.arctan(y / D2) - D1 * np.arctan(y / D1) + 0.5 * y * gap) / (4 * PI)
            g0 = (np.arctan(y / D1) - np.arctan(y / D2)) / PI
        else:
            head = np.sum(d1 / (d1 * d1 + y * y) - d2 / (d2 * d2 + y * y), axis=0) / PI
            integral = gap / (8 * PI)
            g0 = (D1 / (D1 * D1 + y * y) - D2 / (D2 * D2 + y * y)) / PI
    yc = np.clip(y, -1e100, 1e100)
    w1, w2 = 1 / (D1 + 1j * yc), 1 / (D2 + 1j * yc)
    tail = integral + 0.5 * g0
    for j, c in enumerate(_EM_WEIGHTS):
        k = 2 * j + 1
        if cdf:
            # k-th derivative of Im log(D + iy) is Im (-1)^(k-1) (k-1)! w^k
            dk = math.factorial(k - 1) * np.imag(w1**k - w2**k)
        else:
            # k-th derivative of Re w is Re (-1)^k k! w^(k+1)
            dk = -math.factorial(k) * np.real(w1 ** (k + 1) - w2 ** (k + 1))
        tail = tail + c * 4.0**k * dk / PI
    return head + tail


class StripDensity(Density):
    """Exit density of ``{|Re z| < 1}`` on the lines ``Re z = -1`` and ``Re z = 1``.

    ``form`` is ``"conformal"`` (closed form) or ``"reflection"`` (alternating
    Cauchy series with scales ``D_j``).
    """

    def __init__(self, a, form: str = "conformal", N=None):
        a = _check_strip_start(a)
        if form not in ("conformal", "reflection"):
            raise DensityError(f"unknown strip form {form!r}")
        if form == "reflection" and N is not None and N < 1:
            raise DensityError("N must be at least 1")
        self.form = form
        self.tag = "strip_conformal" if form == "conformal" else "strip_reflection"
        super().__init__(geo.strip(1.0), a, {"a": a, "form": form}, truncation=N if form == "reflection" else None)
        self.a = a

    def _signed_a(self, i):
        return self.a if i == 1 else -self.a

    @staticmethod
    def scales(a, count):
        """``D_j = (2j - 1) + (-1)^j a`` for ``j = 1..count`` (right line)."""
        j = np.arange(1, count + 1)
        return (2 * j - 1) + (-1.0) ** j * a

    def _value(self, i, s):
        a = self._signed_a(i)
        if self.form == "conformal":
            return strip_line_pdf(a, s)
        N = self.truncation
        if N is not None:
            D = self.scales(a, N)
            sg = (-1.0) ** np.arange(N)
            return np.tensordot(sg, D[:, None] / (PI * (D[:, None] ** 2 + np.ravel(s)[None, :] ** 2)), 1).reshape(np.shape(s))

        return chunked(lambda y: _strip_pairs_em(a, y, False), s)

    def _cdf(self, i, s):
        a = self._signed_a(i)
        if self.form == "conformal":
            return strip_line_cdf(a, s)
        N = self.truncation
        if N is not None:
            D = self.scales(a, N)
            sg = (-1.0) ** np.arange(N)
            y = np.ravel(s)[None, :]
            return np.tensordot(sg, 0.5 + np.arctan(y / D[:, None]) / PI, 1).reshape(np.shape(s))

        s = np.asarray(s, dtype=float)
        inf = np.isinf(s)
        out = (1 + a) / 4 + chunked(lambda y: _strip_pairs_em(a, y, True), np.where(inf, 0.0, s))
        return np.where(inf, np.where(s > 0, (1 + a) / 2, 0.0), out)

    def tail_bound(self, i, s):
        """First omitted term of the truncated reflection series."""
        if self.form != "reflection" or self.truncation is None:
            return 0.0
        D = self.scales(self._signed_a(i), self.truncation + 1)[-1]
        return D / (PI * (D * D + np.asarray(s, dtype=float) ** 2))


def strip_density(a, form: str = "conformal", N=None) -> StripDensity:
    return StripDensity(a, form, N)


# ---------------------------------------------------------------- half strip


class HalfStripDensity(Density):
    """Exit density of ``{|Re z| < 1, Im z > 0}`` started at ``alpha + i beta``."""

    tag = "halfstrip_conformal"

    def __init__(self, alpha, beta):
        alpha, beta = float(alpha), float(beta)
        if not (-1 < alpha < 1 and beta > 0):
            raise DensityError("need -1 < alpha < 1 and beta > 0")
        super().__init__(geo.half_strip(), complex(alpha, beta), {"alpha": alpha, "beta": beta})
        self.alpha, self.beta = alpha, beta
        self._u, self._v = _hs_uv(alpha, beta)

    def _value(self, i, s):
        if i == 0:
            return halfstrip_bottom_pdf(self.alpha, self.beta, s)
        side = 1 if i == 2 else -1
        return np.where(s > 0, halfstrip_side_pdf(self.alpha, self.beta, s, side), 0.0)

    def _cdf(self, i, s):
        u, v = self._u, self._v
        if i == 0:
            return cauchy_cdf(np.sin(PI * np.clip(s, -1, 1) / 2), u, v) - cauchy_cdf(-1.0, u, v)
        ch = np.cosh(PI * np.clip(s, 0, 450) / 2)
        if i == 2:
            return cauchy_cdf(ch, u, v) - cauchy_cdf(1.0, u, v)
        return cauchy_cdf(-1.0, u, v) - cauchy_cdf(-ch, u, v)

    def reflection_bottom(self, x, N=None):
        """Bottom density as the alternating sum of half-plane kernels at
        ``x_m = 2m + (-1)^m x``, over ``|m| <= N`` (``None``: extrapolated limit)."""
        al, be = self.alpha, self.beta

        def G(n, xx):
            xp = 2 * n + (-1.0) ** (n % 2) * xx
            xm = -2 * n + (-1.0) ** (n % 2) * xx
            both = cauchy_pdf(xp, al, be) + cauchy_pdf(xm, al, be)
            return (-1.0) ** (n % 2) * np.where(n == 0, 0.5 * both, both)

        if N is not None:
            x = np.asarray(x, dtype=float)
            return sum(G(np.float64(n), x) for n in range(N + 1))

        def pairs(p, xx):
            return G(2 * p + 1, xx) + G(2 * p + 2, xx)

        return cauchy_pdf(x, al, be) + _lattice(pairs, x)


def halfstrip_density(alpha, beta) -> HalfStripDensity:
    return HalfStripDensity(alpha, beta)


# ---------------------------------------------------------------- segment


class SegmentDensity(Density):
    """Density of ``B`` at the hitting time of ``[-1, 1]``, as a function of ``x`` on it.

    ``form = "closed"`` pushes the hitting density of ``[0, inf)`` through
    ``phi``; ``form = "covering"`` sums half-plane kernels over the preimages
    under ``sin(pi z / 2)``.
    """

    def __init__(self, omega, form: str = "closed", K=None):
        omega = complex(omega)
        if omega.imag == 0 and abs(omega.real) <= 1:
            raise DensityError("start lies on the segment")
        if form not in ("closed", "covering"):
            raise DensityError(f"unknown segment form {form!r}")
        self.form = form
        self.tag = "segment_closed" if form == "closed" else "segment_covering"
        super().__init__(geo.segment(), omega, {"omega": omega, "form": form}, truncation=K if form == "covering" else None)
        p = (1 + omega) / (1 - omega) if omega != 1 else None
        self._q = _upper_sqrt(p)
        self._lift = _lift_to_upper(omega)

    # closed chain
    def _closed_value(self, xb):
        t = (1 + xb) / (1 - xb)
        rt = np.sqrt(t)
        qr, qi = self._q.real, self._q.imag
        ray = (cauchy_pdf(rt, qr, qi) + cauchy_pdf(-rt, qr, qi)) / (2 * rt)
        return 2 / (1 - xb) ** 2 * ray

    def _closed_cdf(self, xb):
        xb = np.clip(xb, -1, 1)
        with np.errstate(divide="ignore"):
            t = np.where(xb < 1, (1 + xb) / np.where(xb < 1, 1 - xb, 1.0), np.inf)
        rt = np.sqrt(t)
        qr, qi = self._q.real, self._q.imag
        return cauchy_cdf(rt, qr, qi) - cauchy_cdf(-rt, qr, qi)

    # covering sum
    def _cover_groups(self, fn):
        def G(n, x):
            xp = 2 * n + (-1.0) ** (n % 2) * x
            xm = -2 * n + (-1.0) ** (n % 2) * x
            both = fn(xp) + fn(xm)
            return np.where(n == 0, 0.5 * both, both)

        return G

    def _cover_sum(self, fn, x):
        G = self._cover_groups(fn)
        if self.truncation is not None:
            return sum(G(np.float64(n), x) for n in range(self.truncation + 1))
        return _lattice(G, x)

    def _covering_value(self, xb):
        al, be = self._lift.real, self._lift.imag
        x = (2 / PI) * np.arcsin(xb)
        tot = self._cover_sum(lambda xm: cauchy_pdf(xm, al, be), x)
        return tot / ((PI / 2) * np.cos(PI * x / 2))

    def _covering_cdf(self, xb):
        al, be = self._lift.real, self._lift.imag
        x = (2 / PI) * np.arcsin(np.clip(xb, -1, 1))

        def piece(n, xx):
            sg = (-1.0) ** (n % 2)
            # images 2n + sg * x' for x' in [-1, x]
            lo_p, hi_p = 2 * n - sg, 2 * n + sg * xx
            lo_m, hi_m = -2 * n - sg, -2 * n + sg * xx
            f = lambda z: cauchy_cdf(z, al, be)
            both = sg * ((f(hi_p) - f(lo_p)) + (f(hi_m) - f(lo_m)))
            return np.where(n == 0, 0.5 * both, both)

        if self.truncation is not None:
            return sum(piece(np.float64(n), x) for n in range(self.truncation + 1))
        return _lattice(piece, x)

    def _value(self, i, s):
        if self.form == "closed":
            return self._closed_value(s)
        return self._covering_value(s)

    def _cdf(self, i, s):
        if self.form == "closed":
            return self._closed_cdf(s)
        return self._covering_cdf(s)


def segment_density(omega, form: str = "closed", K=None) -> SegmentDensity:
    return SegmentDensity(omega, form, K)


class DoubleRayDensity(Density):
    """Hitting density of ``(-inf, -1] U [1, inf)`` from 0: ``1/(pi |w| sqrt(w^2 - 1))``."""

    tag = "double_ray_origin"

    def __init__(self):
        super().__init__(geo.double_ray(), 0j, {})

    def _value(self, i, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            v = 1.0 / (PI * s * np.sqrt(s * s - 1))
        return np.where(s > 1, v, 0.0)

    def _cdf(self, i, s):
        s = np.maximum(np.asarray(s, dtype=float), 1.0)
        return np.arccos(1.0 / s) / PI


def double_ray_density() -> DoubleRayDensity:
    return DoubleRayDensity()


# ---------------------------------------------------------------- rectangle


def _rect_default_N(k, form):
    if form == "vertical":
        return int(39.2 / (PI * k)) + 2
    return int(12.5 * k) + 3


def _rect_right_vertical(alpha, beta, k, y, N, cdf=False):
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    for m in range(-N, N + 1):
        sg = -1.0 if m % 2 else 1.0
        if not cdf:
            out += sg * strip_line_pdf(alpha, 2 * m * k + sg * y - beta)
        else:
            out += strip_line_cdf(alpha, 2 * m * k + sg * y - beta) - strip_line_cdf(alpha, 2 * m * k - sg * k - beta)
    return out


def _rect_right_horizontal(alpha, beta, k, y, N, cdf=False):
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    for j in range(1, N + 1):
        b = (-1) ** (j + 1) * (2 * j - 1)
        sg = 1.0 if j % 2 else -1.0
        if b > alpha:
            al, be, x = beta / k, (b - alpha) / k, y / k
        else:
            al, be, x = -beta / k, (alpha - b) / k, -y / k
        if not cdf:
            out += sg * halfstrip_bottom_pdf(al, be, x) / k
        elif b > alpha:
            out += sg * halfstrip_bottom_cdf(al, be, x)
        else:
            out += sg * (halfstrip_bottom_cdf(al, be, 1.0) - halfstrip_bottom_cdf(al, be, x))
    return out


class RectangleDensity(Density):
    """Exit density of ``{|Re z| < 1, |Im z| < k}`` from ``alpha + i beta``.

    ``form`` picks the series used on each side: ``"vertical"`` (reflected strip
    densities) or ``"horizontal"`` (reflected half-strip densities).
    """

    def __init__(self, alpha, beta, k: float = 1.0, form: str = "vertical", N=None):
        alpha, beta, k = float(alpha), float(beta), float(k)
        if not (abs(alpha) < 1 and abs(beta) < k and k > 0):
            raise DensityError("need |alpha| < 1, |beta| < k")
        if form not in ("vertical", "horizontal"):
            raise DensityError(f"unknown rectangle form {form!r}")
        if N is not None and N < 1:
            raise DensityError("N must be at least 1")
        self.form = form
        self.tag = f"rectangle_{form}"
        super().__init__(geo.rectangle(k), complex(alpha, beta), {"alpha": alpha, "beta": beta, "k": k, "form": form}, truncation=N)
        self.alpha, self.beta, self.k = alpha, beta, k

    def _right(self, alpha, beta, k, y, cdf=False):
        N = self.truncation if self.truncation is not None else _rect_default_N(k, self.form)
        f = _rect_right_vertical if self.form == "vertical" else _rect_right_horizontal
        return f(alpha, beta, k, y, N, cdf)

    def _side(self, i, s, cdf):
        al, be, k = self.alpha, self.beta, self.k
        s = np.asarray(s, dtype=float)
        if i == 1:
            return self._right(al, be, k, np.clip(s, -k, k), cdf)
        if i == 3:
            return self._right(-al, be, k, np.clip(s, -k, k), cdf)
        # top (i == 2) and bottom (i == 0): rotate so the side becomes a right side
        bb = be if i == 2 else -be
        kk = 1.0 / k
        Y = -np.clip(s, -1, 1) / k
        if not cdf:
            return self._right(bb / k, -al / k, kk, Y) / k
        return self._right(bb / k, -al / k, kk, kk, True) - self._right(bb / k, -al / k, kk, Y, True)

    def _value(self, i, s):
        return self._side(i, s, False)

    def _cdf(self, i, s):
        return self._side(i, s, True)


def rectangle_density(alpha, beta, k: float = 1.0, form: str = "vertical", N=None) -> RectangleDensity:
    return RectangleDensity(alpha, beta, k, form, N)


# ---------------------------------------------------------------- annulus


class AnnulusDensity(Density):
    """Exit density of ``{e^{-r} < |z| < e^{r}}`` from a real start ``a``.

    Lifted through ``z -> e^{rz}`` to the strip; each circle carries the sum
    over preimages ``+-1 + i (theta + 2 pi k) / r``.
    """

    tag = "annulus_covering"

    def __init__(self, a, r: float = 1.0, K=None):
        a, r = float(np.real(a)), float(r)
        if r <= 0 or not math.exp(-r) < a < math.exp(r):
            raise DensityError("need r > 0 and e^-r < a < e^r")
        if K is None:
            K = int(math.ceil(4 * r)) + 2
        if K < 0:
            raise DensityError("K must be nonnegative")
        super().__init__(geo.annulus(r), a, {"a": a, "r": r}, truncation=K)
        self.r = r
        self.lift = math.log(a) / r

    def _circle(self, i):
        sign = 1.0 if i == 1 else -1.0
        radius = math.exp(sign * self.r)
        return sign, radius

    def _value(self, i, s):
        sign, R = self._circle(i)
        th = np.asarray(s, dtype=float) / R
        a = sign * self.lift
        tot = sum(strip_line_pdf(a, (th + 2 * PI * k) / self.r) for k in range(-self.truncation, self.truncation + 1))
        return tot / (self.r * R)

    def _cdf(self, i, s):
        sign, R = self._circle(i)
        th = np.clip(np.asarray(s, dtype=float) / R, -PI, PI)
        a = sign * self.lift
        return sum(
            strip_line_cdf(a, (th + 2 * PI * k) / self.r) - strip_line_cdf(a, (-PI + 2 * PI * k) / self.r)
            for k in range(-self.truncation, self.truncation + 1)
        )


def annulus_density(a, r: float = 1.0, K=None) -> AnnulusDensity:
    return AnnulusDensity(a, r, K)


# ---------------------------------------------------------------- winding stopping times


def _ray_domain(up: float, down: float, merged: bool) -> geo.Domain:
    curves = [geo.BoundaryCurve("upper", "line", (0.0, math.inf), 0j, cmath.exp(1j * up))]
    if not merged:
        curves.append(geo.BoundaryCurve("lower", "line", (0.0, math.inf), 0j, cmath.exp(1j * down)))
    return geo.Domain("rays", (up, down), tuple(curves))


def _is_int(x, tol=1e-12) -> bool:
    return abs(x - round(x)) < tol


class WindingDensity(Density):
    """Density of ``B`` started at 1 when its continuous argument first hits a target.

    kinds:
      ``symmetric(r)``: argument reaches ``+r pi`` or ``-r pi``;
      ``asymmetric(r1, r2)``: argument reaches ``r1 pi`` or ``-r2 pi``;
      ``prescribed(r)``: argument reaches ``r`` (radians, r > 0).
    Values are per unit length along the ray(s), in the radial coordinate ``y``.
    When both targets fall on the same ray in the plane the densities add.
    """

    def __init__(self, kind: str, r=None, r1=None, r2=None):
        if kind == "symmetric":
            if r is None or r <= 0:
                raise DensityError("r must be positive")
            r1 = r2 = float(r)
        elif kind == "asymmetric":
            if r1 is None or r2 is None or r1 <= 0 or r2 <= 0:
                raise DensityError("r1, r2 must be positive")
            r1, r2 = float(r1), float(r2)
        elif kind == "prescribed":
            if r is None or r <= 0:
                raise DensityError("r must be positive")
        else:
            raise DensityError(f"unknown winding kind {kind!r}")
        self.kind = kind
        self.tag = f"winding_{kind}"
        if kind == "prescribed":
            self.r = float(r)
            self.merged = False
            dom = _ray_domain(self.r, self.r, True)
            params = {"r": self.r}
        else:
            self.r1, self.r2 = r1, r2
            self.R = r1 + r2
            self.theta = 0.5 * PI * (r2 - r1) / self.R
            self.merged = _is_int(self.R / 2)
            dom = _ray_domain(r1 * PI, -r2 * PI, self.merged)
            params = {"r": r1} if kind == "symmetric" else {"r1": r1, "r2": r2}
        super().__init__(dom, 1.0, params)

    def _one(self, upper: bool, y, cdf):
        with np.errstate(over="ignore", divide="ignore"):
            return self._one_raw(upper, y, cdf)

    def _one_raw(self, upper: bool, y, cdf):
        y = np.asarray(y, dtype=float)
        if self.kind == "prescribed":
            r = self.r
            with np.errstate(divide="ignore"):
                ly = np.log(np.where(y > 0, y, 1.0))
            if cdf:
                return np.where(y > 0, 0.5 + np.arctan(ly / r) / PI, 0.0)
            return np.where(y > 0, r / (PI * np.where(y > 0, y, 1.0) * (r * r + ly * ly)), 0.0)
        R, th = self.R, self.theta
        sg = 1.0 if upper else -1.0
        yy = np.where(y > 0, y, 1.0)
        t = yy ** (1.0 / R)
        if cdf:
            return np.where(y > 0, (np.arctan((t - sg * math.sin(th)) / math.cos(th)) + sg * th) / PI, 0.0)
        dens = math.cos(th) / (PI * R * yy ** (1 - 1 / R) * (math.cos(th) ** 2 + (sg * t - math.sin(th)) ** 2))
        return np.where(y > 0, dens, 0.0)

    def _value(self, i, s):
        if self.kind == "prescribed":
            return self._one(True, s, False)
        if self.merged:
            return self._one(True, s, False) + self._one(False, s, False)
        return self._one(i == 0, s, False)

    def _cdf(self, i, s):
        if self.kind == "prescribed":
            return self._one(True, s, True)
        if self.merged:
            return self._one(True, s, True) + self._one(False, s, True)
        return self._one(i == 0, s, True)

    def log_value(self, curve_id, t):
        """Density of ``log |B|`` on a ray: ``y * value(y)`` at ``y = e^t``, overflow-free."""
        t = np.asarray(t, dtype=float)
        if self.kind == "prescribed":
            with np.errstate(over="ignore"):
                return self.r / (PI * (self.r**2 + t * t))
        R, th = self.R, self.theta
        c, sn = math.cos(th), math.sin(th)
        e = np.exp(-np.abs(t) / R)  # t^(1/R) or its reciprocal

        def one(sg):
            # y rho(y) = c q / (pi R (c^2 + (sg q - sn)^2)) with q = e^{t/R}
            big = c * e / (PI * R * (c * c * e * e + (sg - sn * e) ** 2))
            small = c * e / (PI * R * (c * c + (sg * e - sn) ** 2))
            return np.where(t > 0, big, small)

        if self.merged:
            return one(1.0) + one(-1.0)
        return one(1.0 if self.domain.curve_index(curve_id) == 0 else -1.0)

    def quad_mass(self, epsabs: float = 1e-12) -> float:
        tot = 0.0
        for cid in self.curve_ids:
            tot += quad_curve(lambda t, cid=cid: float(self.log_value(cid, t)), -math.inf, math.inf, epsabs=epsabs)[0]
        return tot

    def modulus_cdf(self, y):
        """``P(|B| <= y)`` summed over the target rays."""
        return sum(self.cdf(c, y) for c in self.curve_ids)


def winding_density(kind: str, r=None, r1=None, r2=None) -> WindingDensity:
    return WindingDensity(kind, r=r, r1=r1, r2=r2)


# ---------------------------------------------------------------- homotopy stopping time


class HomotopySegmentDensity(Density):
    """Density on ``(-1, 1)`` of ``B`` from 0 at the first return to the segment
    along a path that is not null-homotopic; classes ``n != 0``."""

    tag = "homotopy_segment"

    def __init__(self, K=None):
        if K is not None and K < 1:
            raise DensityError("K must be at least 1")
        super().__init__(geo.segment(), 0j, {}, truncation=K)

    @staticmethod
    def _u(w):
        return (2 / PI) * np.arcsin(np.clip(np.asarray(w, dtype=float), -1, 1))

    def term(self, n, w):
        """Contribution of class ``n``."""
        w = np.asarray(w, dtype=float)
        v = self._u(w) + 2 * n
        with np.errstate(divide="ignore", invalid="ignore"):
            return 2 / (PI**2 * np.sqrt(1 - w * w) * np.abs(v) * np.sqrt(v * v - 1))

    @staticmethod
    def _anti(v):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -np.sign(v) * np.arctan(1 / np.sqrt(np.maximum(v * v - 1, 0.0))) / PI

    def term_cdf(self, n, w):
        u = self._u(w)
        return self._anti(u + 2 * n) - self._anti(-1 + 2 * n)

    def _sum(self, fn, w):
        if self.truncation is not None:
            n = np.arange(1, self.truncation + 1, dtype=float)[:, None]

            def block(pts):
                return np.sum(fn(n, pts) + fn(-n, pts), axis=0)

            return chunked(block, w, size=max(1, 2**22 // self.truncation))
        return _lattice(lambda n, pts: fn(n + 1, pts) + fn(-(n + 1), pts), w)

    def _value(self, i, s):
        return self._sum(self.term, s)

    def _cdf(self, i, s):
        return self._sum(self.term_cdf, s)

    def quad_mass(self, epsabs: float = 1e-13) -> float:
        # In u = (2/pi) asin w the class-n term becomes 1/(pi |v| sqrt(v^2 - 1)),
        # v = u + 2n.  Only the n = +-1 classes are singular (at u = -+1).
        def per_class(n, u):
            v = u + 2 * n
            return 1 / (PI * np.abs(v) * np.sqrt(v * v - 1))

        K = self.truncation

        def rest(u):
            uu = np.array([u])
            if K is not None:
                n = np.arange(2, K + 1, dtype=float)
                return float(np.sum(per_class(n, u) + per_class(-n, u))) if K >= 2 else 0.0
            return float(_lattice(lambda n, pts: per_class(n + 2, pts) + per_class(-(n + 2), pts), uu)[0])


        # class n = 1 without its (1 + u)^(-1/2) factor; n = -1 is its mirror image
        near = lambda u: 1 / (PI * (2 + u) * math.sqrt(3 + u))
        v1, _ = integrate.quad(near, -1, 1, weight="alg", wvar=(-0.5, 0.0), epsabs=epsabs, limit=400)
        v2, _ = integrate.quad(rest, -1, 1, epsabs=epsabs, epsrel=1e-13, limit=400)
        return 2 * v1 + v2

    def partial_mass(self, K: int) -> float:
        """Mass of the classes ``0 < |n| <= K`` (telescoped)."""
        return 1 - (2 / PI) * math.atan(1 / math.sqrt((2 * K + 1) ** 2 - 1))


def homotopy_segment_density(K=None) -> HomotopySegmentDensity:
    return HomotopySegmentDensity(K)


# ---------------------------------------------------------------- harmonic test functions


@dataclass(frozen=True)
class HarmonicTestFn:
    label: str
    h: Callable

    def __call__(self, z):
        # quadrature probes far along unbounded curves, where the density underflows first
        with np.errstate(over="ignore", invalid="ignore"):
            return self.h(z)


def _re_pow(q):
    return HarmonicTestFn(f"re_z{q}", lambda z: np.real(np.asarray(z, dtype=complex) ** q))


def _im_pow(q):
    return HarmonicTestFn(f"im_z{q}", lambda z: np.imag(np.asarray(z, dtype=complex) ** q))


HARMONIC = {"one": HarmonicTestFn("one", lambda z: np.ones(np.shape(z)) if np.ndim(z) else 1.0)}
for _q in range(1, 7):
    HARMONIC[f"re_z{_q}"] = _re_pow(_q)
    HARMONIC[f"im_z{_q}"] = _im_pow(_q)
HARMONIC["log_abs"] = HarmonicTestFn("log_abs", lambda z: np.log(np.abs(z)))


def harmonic(label: str) -> HarmonicTestFn:
    try:
        return HARMONIC[label]
    except KeyError:
        raise DensityError(f"unknown harmonic function {label!r}") from None


def discrete_laplacian(h: HarmonicTestFn, z, step: float = 1e-3) -> float:
    """Fourth-order five-point-per-axis Laplacian."""
    z = complex(z)
    tot = -60 * float(h(z))
    for d in (step, 1j * step):
        tot += 16 * (float(h(z + d)) + float(h(z - d))) - float(h(z + 2 * d)) - float(h(z - 2 * d))
    return tot / (12 * step**2)


def integrate_against(d: Density, fn: Callable, epsabs: float = 1e-13):
    """``sum over curves of int fn(point(s)) value(s) ds`` with the summed error estimate."""
    tot = err = 0.0
    for cid in d.curve_ids:
        c = d.domain.curve(cid)
        lo, hi = c.s_range
        pts = None
        if c.shape == "arc" and d.start != 0:
            # density peaks at the angle of the start point
            pts = [c.radius * cmath.phase(d.start)]

        def f(s, c=c, cid=cid):
            return float(np.real(fn(c.point_at(s)))) * d.value(cid, s)

        v, e = quad_curve(f, lo, hi, epsabs=epsabs, epsrel=1e-13, points=pts)
        tot += v
        err += e
    return tot, err


def dynkin_check(d: Density, h: HarmonicTestFn, max_err: float = 1e-9) -> float:
    """``|int h d(rho) - h(start)|`` by adaptive quadrature."""
    if h.label == "one":
        return abs(d.total_mass() - 1.0) if d.has_cdf else abs(d.quad_mass() - 1.0)
    val, err = integrate_against(d, h)
    if not math.isfinite(val) or err > max_err:
        raise ConvergenceError(f"quadrature did not converge (error estimate {err:.3g})", err)
    return abs(val - float(np.real(h(d.start))))


# ---------------------------------------------------------------- catalog

CATALOG = {
    "disk": (disk_density, {"a": 0.5, "m": 1.0}),
    "halfplane": (halfplane_density, {"a": 1j}),
    "punctured_disk": (punctured_disk_density, {"a": math.exp(-1)}),
    "strip": (strip_density, {"a": 0.3}),
    "strip_reflection": (lambda a: strip_density(a, "reflection"), {"a": 0.3}),
    "halfstrip": (halfstrip_density, {"alpha": 0.3, "beta": 0.7}),
    "segment": (segment_density, {"omega": 2j}),
    "segment_covering": (lambda omega: segment_density(omega, "covering"), {"omega": 2j}),
    "double_ray": (double_ray_density, {}),
    "rectangle": (rectangle_density, {"alpha": 0.0, "beta": 0.0, "k": 1.0}),
    "rectangle_horizontal": (lambda alpha, beta, k: rectangle_density(alpha, beta, k, "horizontal"), {"alpha": 0.0, "beta": 0.0, "k": 1.0}),
    "annulus": (annulus_density, {"a": 1.0, "r": 1.0}),
    "winding_sym": (lambda r: winding_density("symmetric", r=r), {"r": 1.0}),
    "winding_asym": (lambda r1, r2: winding_density("asymmetric", r1=r1, r2=r2), {"r1": 0.5, "r2": 1.5}),
    "prescribed_arg": (lambda r: winding_density("prescribed", r=r), {"r": 1.0}),
    "homotopy_segment": (homotopy_segment_density, {}),
}


def make_density(name: str, **params) -> Density:
    if name not in CATALOG:
        raise DensityError(f"unknown density {name!r}")
    factory, defaults = CATALOG[name]
    kw = dict(defaults)
    kw.update({k: v for k, v in params.items() if v is not None})
    return factory(**kw)
