"""Analytic maps with derivatives and closed-form inverse branches.

Every map enumerates preimages analytically.  Periodic or multi-sheeted maps
list one candidate per integer index ``k`` with ``|k| <= index_bound``;
:meth:`AnalyticMap.preimages_on` then keeps the candidates lying on a given
boundary curve.  No root finding is used anywhere.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .geometry import BoundaryCurve

PI = math.pi


class MapError(ValueError):
    """Evaluation at a pole or branch point."""


def _is_scalar(z) -> bool:
    return np.ndim(z) == 0


class AnalyticMap:
    label = "map"
    injective = False

    def eval(self, z):
        raise NotImplementedError

    def deriv(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.eval(z)

    def preimages(self, w: complex, index_bound: int = 0) -> list[complex]:
        """All candidate preimages of ``w`` with branch index ``|k| <= index_bound``."""
        raise NotImplementedError

    def inverse(self) -> "AnalyticMap | None":
        return None

    def preimages_on(self, w, curve: BoundaryCurve, index_bound: int = 0, tol: float = 1e-9):
        """Preimages of ``w`` that lie on ``curve`` as ``(z, s)`` pairs, sorted by ``s``."""
        out = []
        for z in self.preimages(complex(w), index_bound):
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                continue
            s = curve.locate(z, tol)
            if s is None:
                continue
            if any(abs(s - t) <= 1e-12 * max(1.0, abs(s)) for _, t in out):
                continue
            out.append((z, s))
        out.sort(key=lambda p: p[1])
        return out

    def __repr__(self):
        return f"<{self.label}>"


# ---------------------------------------------------------------- Mobius family


class Mobius(AnalyticMap):
    injective = True

    def __init__(self, a, b, c, d, label: str | None = None):
        self.a, self.b, self.c, self.d = (complex(x) for x in (a, b, c, d))
        if self.a * self.d - self.b * self.c == 0:
            raise MapError("degenerate Mobius map")
        self.label = label or f"mobius({a},{b},{c},{d})"

    def _den(self, z):
        den = self.c * z + self.d
        if _is_scalar(z) and den == 0:
            raise MapError(f"{self.label}: pole at {z!r}")
        return den

    def eval(self, z):
        return (self.a * z + self.b) / self._den(z)

    def deriv(self, z):
        return (self.a * self.d - self.b * self.c) / self._den(z) ** 2

    def inverse(self):
        return Mobius(self.d, -self.b, -self.c, self.a, label=f"inverse({self.label})")

    def preimages(self, w, index_bound=0):
        if self.a - self.c * w == 0:
            return []
        return [complex(self.inverse().eval(w))]


def mobius(a, b, c, d) -> Mobius:
    return Mobius(a, b, c, d)


def disk_automorphism(a) -> Mobius:
    """``psi_a(z) = (z - a) / (1 - conj(a) z)``, a self-map of the unit disk with ``psi_a(a) = 0``."""
    a = complex(a)
    return Mobius(1, -a, -a.conjugate(), 1, label=f"psi[{a}]")


def scale_translate(u, v) -> Mobius:
    """``z -> u + v z``."""
    return Mobius(v, u, 0, 1, label=f"affine[{complex(u)},{complex(v)}]")


def cayley() -> Mobius:
    """``z -> (z - i) / (z + i)``, upper half plane onto the unit disk."""
    return Mobius(1, -1j, 1, 1j, label="cayley")


def phi() -> Mobius:
    """``z -> (1 + z) / (1 - z)``."""
    return Mobius(1, 1, -1, 1, label="phi")


# ---------------------------------------------------------------- exponentials


class ExpI(AnalyticMap):
    """``z -> e^{iz}``; preimages ``z0 + 2 pi k``."""

    label = "exp_i"

    def eval(self, z):
        return np.exp(1j * np.asarray(z)) if not _is_scalar(z) else cmath.exp(1j * z)

    def deriv(self, z):
        return 1j * self.eval(z)

    def preimages(self, w, index_bound=0):
        if w == 0:
            return []
        z0 = -1j * cmath.log(w)
        return [z0 + 2 * PI * k for k in range(-index_bound, index_bound + 1)]


class ExpR(AnalyticMap):
    """``z -> e^{rz}``; preimages ``(log w + 2 pi i k) / r``."""

    def __init__(self, r: float):
        if r == 0:
            raise MapError("r must be nonzero")
        self.r = float(r)
        self.label = f"exp_r[{r}]"

    def eval(self, z):
        return np.exp(self.r * np.asarray(z)) if not _is_scalar(z) else cmath.exp(self.r * z)

    def deriv(self, z):
        return self.r * self.eval(z)

    def preimages(self, w, index_bound=0):
        if w == 0:
            return []
        lw = cmath.log(w)
        return [(lw + 2j * PI * k) / self.r for k in range(-index_bound, index_bound + 1)]


def exp_i() -> ExpI:
    return ExpI()


def exp_r(r: float) -> ExpR:
    return ExpR(r)


# ---------------------------------------------------------------- trigonometric


class TanQuarter(AnalyticMap):
    """``z -> tan(pi z / 4)``: the strip ``|Re z| < 1`` onto the unit disk."""

    label = "tan_quarter"

    def eval(self, z):
        return np.tan(PI * np.asarray(z) / 4) if not _is_scalar(z) else cmath.tan(PI * z / 4)

    def deriv(self, z):
        c = np.cos(PI * np.asarray(z) / 4)
        if _is_scalar(z) and c == 0:
            raise MapError("tan_quarter: pole")
        return (PI / 4) / c**2

    def preimages(self, w, index_bound=0):
        if w in (1j, -1j):
            return []
        z0 = (4 / PI) * cmath.atan(w)
        return [z0 + 4 * k for k in range(-index_bound, index_bound + 1)]

    def inverse(self):
        return _AtanQuarter()


class _AtanQuarter(AnalyticMap):
    """``w -> (4/pi) atan(w)``: the unit disk onto the strip ``|Re z| < 1``."""

    label = "atan_quarter"
    injective = True

    def eval(self, w):
        return (4 / PI) * (np.arctan(np.asarray(w)) if not _is_scalar(w) else cmath.atan(w))

    def deriv(self, w):
        return (4 / PI) / (1 + np.asarray(w) ** 2)

    def preimages(self, z, index_bound=0):
        return [complex(cmath.tan(PI * z / 4))]

    def inverse(self):
        return TanQuarter()


class SinHalf(AnalyticMap):
    """``z -> sin(pi z / 2)``.

    Preimages of ``w`` are ``2m + (-1)^m z0`` with ``z0 = (2/pi) asin(w)``; for
    real ``z0 = x`` these are ``x, 2 - x, -2 - x, 4 + x, -4 + x, ...``.
    """

    label = "sin_half"

    def eval(self, z):
        return np.sin(PI * np.asarray(z) / 2) if not _is_scalar(z) else cmath.sin(PI * z / 2)

    def deriv(self, z):
        return (PI / 2) * (np.cos(PI * np.asarray(z) / 2) if not _is_scalar(z) else cmath.cos(PI * z / 2))

    def preimages(self, w, index_bound=0):
        z0 = (2 / PI) * cmath.asin(w)
        return [2 * m + (-1) ** (m % 2) * z0 for m in _sym_range(index_bound)]

    def inverse(self):
        return _AsinHalf()


class _AsinHalf(AnalyticMap):
    """``w -> (2/pi) asin(w)``: the upper half plane onto the half strip."""

    label = "asin_half"
    injective = True

    def eval(self, w):
        if _is_scalar(w):
            return (2 / PI) * cmath.asin(w)
        return (2 / PI) * np.arcsin(np.asarray(w, dtype=complex))

    def deriv(self, w):
        w = np.asarray(w, dtype=complex) if not _is_scalar(w) else complex(w)
        if _is_scalar(w) and w * w == 1:
            raise MapError("asin_half: branch point")
        return (2 / PI) / np.sqrt(1 - w * w)

    def preimages(self, z, index_bound=0):
        return [complex(cmath.sin(PI * z / 2))]

    def inverse(self):
        return SinHalf()


def tan_quarter() -> TanQuarter:
    return TanQuarter()


def sin_half() -> SinHalf:
    return SinHalf()


def _sym_range(bound: int):
    """``0, 1, -1, 2, -2, ...`` up to ``|k| <= bound``."""
    yield 0
    for k in range(1, bound + 1):
        yield k
        yield -k


# ---------------------------------------------------------------- powers and roots


class Power(AnalyticMap):
    """Principal ``z -> z^p = exp(p Log z)``.

    Preimages ``|w|^{1/p} e^{i (Arg w + 2 pi k)/p}`` are kept only when their
    argument lies in ``(-pi, pi]``, where the principal power returns ``w``.
    """

    def __init__(self, p: float):
        if p == 0:
            raise MapError("p must be nonzero")
        self.p = float(p)
        self.label = f"power[{p}]"

    def eval(self, z):
        if _is_scalar(z):
            if z == 0:
                if self.p > 0:
                    return 0j
                raise MapError("power: pole at 0")
            return cmath.exp(self.p * cmath.log(z))
        z = np.asarray(z, dtype=complex)
        return np.exp(self.p * np.log(z))

    def deriv(self, z):
        if _is_scalar(z) and z == 0:
            raise MapError("power: branch point at 0")
        return self.p * self.eval(z) / z

    def preimages(self, w, index_bound=0):
        if w == 0:
            return [0j] if self.p > 0 else []
        rad = abs(w) ** (1 / self.p)
        th = cmath.phase(w)
        out = []
        for k in _sym_range(index_bound):
            a = (th + 2 * PI * k) / self.p
            if -PI < a <= PI:
                out.append(rad * cmath.exp(1j * a))
        return out


def power(p: float) -> Power:
    return Power(p)


class Square(AnalyticMap):
    label = "square"

    def eval(self, z):
        return z * z

    def deriv(self, z):
        return 2 * z

    def preimages(self, w, index_bound=0):
        r = cmath.sqrt(w)
        return [r] if r == 0 else [r, -r]


def square() -> Square:
    return Square()


class SqrtUpper(AnalyticMap):
    """Square root with values in the upper half plane together with ``[0, inf)``.

    The argument of ``w`` is taken in ``[0, 2 pi)``.
    """

    label = "sqrt_upper"
    injective = True

    def eval(self, w):
        if _is_scalar(w):
            w = complex(w)
            if w == 0:
                return 0j
            th = cmath.phase(w)
            if th < 0:
                th += 2 * PI
            return math.sqrt(abs(w)) * cmath.exp(0.5j * th)
        w = np.asarray(w, dtype=complex)
        th = np.angle(w)
        th = np.where(th < 0, th + 2 * PI, th)
        return np.sqrt(np.abs(w)) * np.exp(0.5j * th)

    def deriv(self, w):
        if _is_scalar(w) and w == 0:
            raise MapError("sqrt_upper: branch point at 0")
        return 0.5 / self.eval(w)

    def preimages(self, z, index_bound=0):
        return [complex(z) * complex(z)]

    def inverse(self):
        return Square()


def sqrt_upper() -> SqrtUpper:
    return SqrtUpper()


# ---------------------------------------------------------------- composition


class Composed(AnalyticMap):
    """``outer(inner(z))``."""

    def __init__(self, outer: AnalyticMap, inner: AnalyticMap):
        self.outer = outer
        self.inner = inner
        self.label = f"{outer.label}*{inner.label}"
        self.injective = outer.injective and inner.injective

    def eval(self, z):
        return self.outer.eval(self.inner.eval(z))

    def deriv(self, z):
        return self.outer.deriv(self.inner.eval(z)) * self.inner.deriv(z)

    def preimages(self, w, index_bound=0):
        out = []
        for u in self.outer.preimages(w, index_bound):
            out.extend(self.inner.preimages(u, index_bound))
        return out

    def inverse(self):
        gi, fi = self.inner.inverse(), self.outer.inverse()
        if gi is None or fi is None:
            return None
        return Composed(gi, fi)


def compose(outer: AnalyticMap, inner: AnalyticMap) -> Composed:
    """The map ``z -> outer(inner(z))``."""
    return Composed(outer, inner)


CATALOG = {
    "mobius": mobius,
    "disk_automorphism": disk_automorphism,
    "scale_translate": scale_translate,
    "cayley": cayley,
    "exp_i": exp_i,
    "exp_r": exp_r,
    "tan_quarter": tan_quarter,
    "sin_half": sin_half,
    "power": power,
    "square": square,
    "phi": phi,
    "sqrt_upper": sqrt_upper,
    "compose": compose,
}
