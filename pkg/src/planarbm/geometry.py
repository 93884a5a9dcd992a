"""Domains, their boundary curves, and nearest-boundary queries.

Complex numbers are Python's builtin ``complex`` (and numpy ``complex128`` for
arrays).  Each domain's boundary is split into curves parameterized by
arclength ``s``.  Curves are listed in a fixed order, and that order is also
the tie-break order in :func:`nearest_boundary`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

KIND_CODES = {
    "disk": 0,
    "exterior_disk": 1,
    "half_plane": 2,
    "strip": 3,
    "half_strip": 4,
    "rectangle": 5,
    "annulus": 6,
    "punctured_disk": 7,
    "segment": 8,
    "double_ray": 9,
}


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------- complex helpers


def sqrt_branch(z: complex, cut: float = math.pi) -> complex:
    """Square root whose branch cut is the ray at angle ``cut``.

    The argument of ``z`` is taken in ``(cut - 2pi, cut]``; ``cut = pi`` gives
    the principal root.
    """
    z = complex(z)
    if z == 0:
        return 0j
    th = math.atan2(z.imag, z.real)
    while th > cut:
        th -= 2 * math.pi
    while th <= cut - 2 * math.pi:
        th += 2 * math.pi
    return math.sqrt(abs(z)) * cmath.exp(0.5j * th)


def log_branch(z: complex, theta0: float = -math.pi) -> complex:
    """Logarithm with imaginary part in ``(theta0, theta0 + 2pi]``."""
    z = complex(z)
    if z == 0:
        raise DomainError("log of zero")
    th = math.atan2(z.imag, z.real)
    while th > theta0 + 2 * math.pi:
        th -= 2 * math.pi
    while th <= theta0:
        th += 2 * math.pi
    return complex(math.log(abs(z)), th)


def wrap_angle(th):
    """Map angles into ``[-pi, pi)``."""
    return (np.asarray(th) + np.pi) % (2 * np.pi) - np.pi


# ---------------------------------------------------------------- curves


@dataclass(frozen=True)
class BoundaryCurve:
    """A line piece ``origin + s * direction`` or a circle ``center + R e^{i s/R}``."""

    curve_id: str
    shape: str  # "line" | "arc" | "point"
    s_range: tuple[float, float]
    origin: complex = 0j
    direction: complex = 1 + 0j
    radius: float = 0.0

    def point_at(self, s):
        s = np.asarray(s, dtype=float)
        if self.shape == "line":
            out = self.origin + s * self.direction
        elif self.shape == "arc":
            out = self.origin + self.radius * np.exp(1j * s / self.radius)
        else:
            out = self.origin + np.zeros_like(s)
        out = np.asarray(out)
        return complex(out) if out.ndim == 0 else out

    def tangent(self, s) -> complex:
        if self.shape == "line":
            return self.direction
        if self.shape == "arc":
            return 1j * cmath.exp(1j * s / self.radius)
        return 0j

    def locate(self, z: complex, tol: float = 1e-9):
        """Arclength of ``z`` on this curve, or None if ``z`` is not on it."""
        lo, hi = self.s_range
        if self.shape == "line":
            d = (complex(z) - self.origin) / self.direction
            if abs(d.imag) > tol * max(1.0, abs(d.real)):
                return None
            s = d.real
        elif self.shape == "arc":
            d = complex(z) - self.origin
            if abs(abs(d) - self.radius) > tol * max(1.0, self.radius):
                return None
            s = self.radius * cmath.phase(d)
            if s < lo - tol:
                s += 2 * math.pi * self.radius
            if s >= hi:
                s -= 2 * math.pi * self.radius
        else:
            return 0.0 if abs(complex(z) - self.origin) <= tol else None
        pad = tol * max(1.0, abs(s))
        if s < lo - pad or s > hi + pad:
            return None
        return float(s)

    @property
    def length(self) -> float:
        return self.s_range[1] - self.s_range[0]


def _circle(cid: str, radius: float) -> BoundaryCurve:
    return BoundaryCurve(cid, "arc", (-math.pi * radius, math.pi * radius), 0j, 1 + 0j, radius)


def _line(cid, origin, direction, lo, hi) -> BoundaryCurve:
    return BoundaryCurve(cid, "line", (lo, hi), complex(origin), complex(direction))


INF = math.inf


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class Domain:
    kind: str
    params: tuple = ()
    curves: tuple = field(default=(), compare=False, repr=False)

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def param_array(self) -> np.ndarray:
        p = list(self.params) + [0.0] * (2 - len(self.params))
        return np.asarray(p, dtype=float)

    def curve(self, curve_id) -> BoundaryCurve:
        if isinstance(curve_id, (int, np.integer)):
            return self.curves[int(curve_id)]
        for c in self.curves:
            if c.curve_id == curve_id:
                return c
        raise KeyError(f"{self.kind} has no curve {curve_id!r}")

    def curve_index(self, curve_id) -> int:
        if isinstance(curve_id, (int, np.integer)):
            return int(curve_id)
        return [c.curve_id for c in self.curves].index(curve_id)

    def contains(self, z) -> bool:
        return contains(self, z)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def disk(m: float = 1.0) -> Domain:
    if m <= 0:
        raise DomainError("radius must be positive")
    return Domain("disk", (float(m),), (_circle("circle", m),))


def exterior_disk(m: float = 1.0) -> Domain:
    if m <= 0:
        raise DomainError("radius must be positive")
    return Domain("exterior_disk", (float(m),), (_circle("circle", m),))


def half_plane(orientation: float = 0.0) -> Domain:
    """Half plane to the left of the line through 0 with direction ``e^{i orientation}``.

    The default is the upper half plane.
    """
    d = cmath.exp(1j * orientation)
    return Domain("half_plane", (float(orientation),), (_line("line", 0, d, -INF, INF),))


def strip(half_width: float = 1.0) -> Domain:
    w = float(half_width)
    if w <= 0:
        raise DomainError("half width must be positive")
    return Domain(
        "strip", (w,), (_line("left", -w, 1j, -INF, INF), _line("right", w, 1j, -INF, INF))
    )


def half_strip() -> Domain:
    """``{|Re z| < 1, Im z > 0}``."""
    return Domain(
        "half_strip",
        (),
        (
            _line("bottom", 0, 1, -1.0, 1.0),
            _line("left", -1, 1j, 0.0, INF),
            _line("right", 1, 1j, 0.0, INF),
        ),
    )


def rectangle(k: float = 1.0) -> Domain:
    """``{|Re z| < 1, |Im z| < k}``."""
    k = float(k)
    if k <= 0:
        raise DomainError("half height must be positive")
    return Domain(
        "rectangle",
        (k,),
        (
            _line("bottom", -1j * k, 1, -1.0, 1.0),
            _line("right", 1, 1j, -k, k),
            _line("top", 1j * k, 1, -1.0, 1.0),
            _line("left", -1, 1j, -k, k),
        ),
    )


def annulus(r: float = 1.0) -> Domain:
    """``{e^{-r} < |z| < e^{r}}``."""
    r = float(r)
    if r <= 0:
        raise DomainError("log radius must be positive")
    return Domain(
        "annulus", (r,), (_circle("inner", math.exp(-r)), _circle("outer", math.exp(r)))
    )


def punctured_disk() -> Domain:
    return Domain(
        "punctured_disk",
        (),
        (_circle("circle", 1.0), BoundaryCurve("puncture", "point", (0.0, 0.0))),
    )


def segment() -> Domain:
    """Complement of ``[-1, 1]``; the segment is the target set."""
    return Domain("segment", (), (_line("segment", 0, 1, -1.0, 1.0),))


def double_ray() -> Domain:
    """Complement of ``(-inf, -1] U [1, inf)``."""
    return Domain(
        "double_ray", (), (_line("left", 0, -1, 1.0, INF), _line("right", 0, 1, 1.0, INF))
    )


CONSTRUCTORS = {
    "disk": disk,
    "exterior_disk": exterior_disk,
    "half_plane": half_plane,
    "strip": strip,
    "half_strip": half_strip,
    "rectangle": rectangle,
    "annulus": annulus,
    "punctured_disk": punctured_disk,
    "segment": segment,
    "double_ray": double_ray,
}


def make_domain(kind: str, *params) -> Domain:
    return CONSTRUCTORS[kind](*params)


# ---------------------------------------------------------------- kernels
# These are shared with the walk-on-spheres code, so they work on plain floats.


@nb.njit(cache=True)
def _seg(x, y, ax, ay, bx, by):
    """Nearest point on segment a-b; returns (t, dist) with t in [0, 1]."""
    dx = bx - ax
    dy = by - ay
    t = ((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    px = ax + t * dx - x
    py = ay + t * dy - y
    return t, math.sqrt(px * px + py * py)


@nb.njit(cache=True)
def _arc_s(x, y, radius):
    if x == 0.0 and y == 0.0:
        return -math.pi * radius
    th = math.atan2(y, x)
    if th >= math.pi:
        th -= 2.0 * math.pi
    return radius * th


@nb.njit(cache=True)
def nearest_kernel(code, p, x, y):
    """Nearest boundary point as (curve index, s, distance)."""
    if code == 0 or code == 1:
        m = p[0]
        rho = math.hypot(x, y)
        return 0, _arc_s(x, y, m), abs(rho - m)
    if code == 2:
        c = math.cos(p[0])
        sn = math.sin(p[0])
        return 0, x * c + y * sn, abs(-x * sn + y * c)
    if code == 3:
        w = p[0]
        dl = abs(x + w)
        dr = abs(x - w)
        if dl <= dr:
            return 0, y, dl
        return 1, y, dr
    if code == 4:
        best_i = 0
        t, best_d = _seg(x, y, -1.0, 0.0, 1.0, 0.0)
        best_s = -1.0 + 2.0 * t
        yy = y if y > 0.0 else 0.0
        d = math.hypot(x + 1.0, y - yy)
        if d < best_d:
            best_i, best_s, best_d = 1, yy, d
        d = math.hypot(x - 1.0, y - yy)
        if d < best_d:
            best_i, best_s, best_d = 2, yy, d
        return best_i, best_s, best_d
    if code == 5:
        k = p[0]
        t, best_d = _seg(x, y, -1.0, -k, 1.0, -k)
        best_i = 0
        best_s = -1.0 + 2.0 * t
        t, d = _seg(x, y, 1.0, -k, 1.0, k)
        if d < best_d:
            best_i, best_s, best_d = 1, -k + 2.0 * k * t, d
        t, d = _seg(x, y, -1.0, k, 1.0, k)
        if d < best_d:
            best_i, best_s, best_d = 2, -1.0 + 2.0 * t, d
        t, d = _seg(x, y, -1.0, -k, -1.0, k)
        if d < best_d:
            best_i, best_s, best_d = 3, -k + 2.0 * k * t, d
        return best_i, best_s, best_d
    if code == 6:
        ri = math.exp(-p[0])
        ro = math.exp(p[0])
        rho = math.hypot(x, y)
        di = abs(rho - ri)
        do = abs(ro - rho)
        if di <= do:
            return 0, _arc_s(x, y, ri), di
        return 1, _arc_s(x, y, ro), do
    if code == 7:
        rho = math.hypot(x, y)
        dc = abs(1.0 - rho)
        if dc <= rho:
            return 0, _arc_s(x, y, 1.0), dc
        return 1, 0.0, rho
    if code == 8:
        t, d = _seg(x, y, -1.0, 0.0, 1.0, 0.0)
        return 0, -1.0 + 2.0 * t, d
    # double ray
    sl = -x if x < -1.0 else 1.0
    dl = math.hypot(x + sl, y)
    sr = x if x > 1.0 else 1.0
    dr = math.hypot(x - sr, y)
    if dl <= dr:
        return 0, sl, dl
    return 1, sr, dr


@nb.njit(cache=True)
def contains_kernel(code, p, x, y):
    if code == 0:
        return math.hypot(x, y) < p[0]
    if code == 1:
        return math.hypot(x, y) > p[0]
    if code == 2:
        return -x * math.sin(p[0]) + y * math.cos(p[0]) > 0.0
    if code == 3:
        return abs(x) < p[0]
    if code == 4:
        return abs(x) < 1.0 and y > 0.0
    if code == 5:
        return abs(x) < 1.0 and abs(y) < p[0]
    if code == 6:
        rho = math.hypot(x, y)
        return math.exp(-p[0]) < rho < math.exp(p[0])
    if code == 7:
        rho = math.hypot(x, y)
        return 0.0 < rho < 1.0
    if code == 8:
        return not (y == 0.0 and abs(x) <= 1.0)
    return not (y == 0.0 and abs(x) >= 1.0)


# ---------------------------------------------------------------- public ops


def _check_finite(z: complex):
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError("point must be finite")


def contains(d: Domain, z) -> bool:
    z = complex(z)
    _check_finite(z)
    return bool(contains_kernel(d.code, d.param_array, z.real, z.imag))


def nearest_boundary(d: Domain, z) -> tuple[str, float, float]:
    """Closest boundary point as ``(curve_id, s, distance)``.

    Ties go to the earlier curve in ``d.curves``, then to the lower ``s``.
    """
    z = complex(z)
    _check_finite(z)
    i, s, dist = nearest_kernel(d.code, d.param_array, z.real, z.imag)
    return d.curves[i].curve_id, float(s), float(dist)


def inradius(d: Domain, z) -> float:
    """Distance from an interior point to the boundary."""
    if not contains(d, z):
        raise DomainError(f"{z!r} is not interior to {d.kind}")
    return nearest_boundary(d, z)[2]
