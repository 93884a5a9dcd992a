"""Pushing boundary densities forward through analytic maps.

If ``f`` sends the source stopping time to the target one, the target density
at ``w`` is the sum of ``rho(z) / |f'(z)|`` over the preimages ``z`` of ``w``
on the source curves.  For injective maps with an explicit inverse ``g`` this
is ``rho(g(w)) |g'(w)|``.  The source is only ever evaluated at preimages; no
integration happens in source space.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import densities as dens
from . import maps as mp
from .geometry import BoundaryCurve

PI = math.pi


class ProjectionError(ValueError):
    pass


def _source_curves(src):
    if isinstance(src, Pushforward):
        return [src.target_curve]
    return [src.domain.curve(c) for c in src.curve_ids]


def _source_at(src, z, tol=1e-9):
    return src.at(z, tol)


@dataclass
class Pushforward:
    source: object  # Density or Pushforward
    map: mp.AnalyticMap
    target_curve: BoundaryCurve
    index_bound: int = 0
    tol: float = 1e-9
    last_tail: float = field(default=0.0, repr=False)

    def preimages(self, w: complex):
        out = []
        for c in _source_curves(self.source):
            out.extend(self.map.preimages_on(w, c, self.index_bound, self.tol))
        return out

    def push(self, s: float) -> float:
        """Target density at arclength ``s`` on the target curve."""
        w = complex(self.target_curve.point_at(float(s)))
        return self.push_at(w)

    def push_at(self, w: complex) -> float:
        inv = self.map.inverse() if self.map.injective else None
        if inv is not None:
            z = complex(inv.eval(w))
            try:
                val = _source_at(self.source, z, self.tol)
            except dens.DensityError:
                return 0.0
            self.last_tail = 0.0
            return float(val) * abs(complex(inv.deriv(w)))
        total, tail = 0.0, 0.0
        for c in _source_curves(self.source):
            contribs = []
            for z, _ in self.map.preimages_on(w, c, self.index_bound, self.tol):
                d = abs(complex(self.map.deriv(z)))
                if d == 0:
                    raise ProjectionError(f"f' vanishes at preimage {z!r}")
                contribs.append(float(_source_at(self.source, z, self.tol)) / d)
            total += sum(contribs)
            tail += self._tail(contribs)
        self.last_tail = tail
        return float(total)

    def _tail(self, contribs) -> float:
        # preimages come sorted along the curve, so the ends are the outermost
        # branches; terms decay at least like 1/k^2, whose tail past K is about
        # K times the last term.  Doubled for slack.
        if self.index_bound <= 0 or len(contribs) < 3:
            return 0.0
        return 2.0 * self.index_bound * (contribs[0] + contribs[-1])

    def push_with_tail(self, s: float):
        v = self.push(s)
        return v, self.last_tail

    # lets a pushforward serve as the source of another one
    def at(self, z, tol: float = 1e-9) -> float:
        s = self.target_curve.locate(complex(z), tol)
        if s is None:
            raise dens.DensityError(f"{z!r} is not on the target curve")
        return self.push(s)

    @property
    def curve_ids(self):
        return (self.target_curve.curve_id,)


def push(p: Pushforward, w_s: float) -> float:
    return p.push(w_s)


def push_mass_check(p: Pushforward, points=None) -> tuple[float, float]:
    """Total mass of the pushed density on the target curve, with the quad error estimate."""
    lo, hi = p.target_curve.s_range
    return dens.quad_curve(lambda s: p.push(s), lo, hi, epsabs=1e-11, epsrel=1e-11, points=points)


# ---------------------------------------------------------------- catalog reproductions


@dataclass
class Case:
    name: str
    pushforward: Pushforward
    density: dens.Density
    curve_id: str
    s_points: np.ndarray

    def max_error(self) -> float:
        got = np.array([self.pushforward.push(s) for s in self.s_points])
        want = self.density.value(self.curve_id, self.s_points)
        return float(np.max(np.abs(got - want)))


def reproduction_cases(n: int = 50, seed: int = 7) -> list[Case]:
    """Every catalog density paired with the push of its source."""
    rng = np.random.default_rng(seed)
    cases = []

    # disk from a: uniform density from 0 pushed by psi_{-a}
    a = 0.35 - 0.4j
    d = dens.disk_density(a)
    src = dens.disk_density(0)
    c = d.domain.curve("circle")
    cases.append(Case("disk_psi", Pushforward(src, mp.disk_automorphism(-a), c), d, "circle", rng.uniform(-PI, PI, n)))

    # half plane: i pushed by z -> u + v z, and the Cayley map onto the disk
    u, v = -0.7, 1.8
    d = dens.halfplane_density(complex(u, v))
    c = d.domain.curve("line")
    cases.append(Case("halfplane_affine", Pushforward(dens.halfplane_density(1j), mp.scale_translate(u, v), c), d, "line", rng.uniform(-8, 8, n)))
    d = dens.disk_density(0)
    cases.append(Case("halfplane_cayley", Pushforward(dens.halfplane_density(1j), mp.cayley(), d.domain.curve("circle")), d, "circle", rng.uniform(-PI, PI, n)))

    # punctured disk: half plane from arg a - i log|a| through e^{iz}, class by class
    a = 0.3 * cmath.exp(0.8j)
    K = 6
    d = dens.punctured_disk_density(a, K)
    src = dens.halfplane_density(complex(cmath.phase(a), -math.log(abs(a))))
    cases.append(Case("punctured_exp_i", Pushforward(src, mp.exp_i(), d.domain.curve("circle"), K), d, "circle", rng.uniform(-PI, PI, n)))

    # strip: disk from tan(pi a / 4) through (4/pi) atan
    a = 0.45
    d = dens.strip_density(a)
    src = dens.disk_density(math.tan(PI * a / 4))
    for cid in ("right", "left"):
        cases.append(Case(f"strip_tan_{cid}", Pushforward(src, mp.tan_quarter().inverse(), d.domain.curve(cid)), d, cid, rng.uniform(-6, 6, n)))

    # half strip: half plane from sin(pi (alpha + i beta) / 2) through (2/pi) asin
    al, be = -0.25, 0.6
    d = dens.halfstrip_density(al, be)
    src = dens.halfplane_density(cmath.sin(PI * complex(al, be) / 2))
    inv = mp.sin_half().inverse()
    cases.append(Case("halfstrip_bottom", Pushforward(src, inv, d.domain.curve("bottom")), d, "bottom", rng.uniform(-0.99, 0.99, n)))
    for cid in ("right", "left"):
        cases.append(Case(f"halfstrip_{cid}", Pushforward(src, inv, d.domain.curve(cid)), d, cid, rng.uniform(0.01, 4, n)))

    # segment: covering sum through sin(pi z / 2), and the closed chain through z^2 then phi^{-1}
    omega = 0.4 + 0.9j
    K = 8
    d = dens.segment_density(omega, "covering", K)
    lift = dens._lift_to_upper(omega)
    src = dens.halfplane_density(lift)
    seg = d.domain.curve("segment")
    xs = rng.uniform(-0.99, 0.99, n)
    cases.append(Case("segment_sin_half", Pushforward(src, mp.sin_half(), seg, K), d, "segment", xs))
    d = dens.segment_density(omega, "closed")
    q = mp.sqrt_upper().eval((1 + omega) / (1 - omega))
    chain = mp.compose(mp.phi().inverse(), mp.square())
    cases.append(Case("segment_chain", Pushforward(dens.halfplane_density(q), chain, seg), d, "segment", xs))

    # annulus: strip from log(a)/r through e^{rz}
    a, r, K = 1.3, 0.8, 5
    d = dens.annulus_density(a, r, K)
    src = dens.strip_density(math.log(a) / r)
    for cid in ("outer", "inner"):
        R = d.domain.curve(cid).radius
        cases.append(Case(f"annulus_{cid}", Pushforward(src, mp.exp_r(r), d.domain.curve(cid), K), d, cid, rng.uniform(-PI * R, PI * R, n)))

    # winding: half plane from i through z -> (-iz)^{2r}
    for r in (0.75, 2.0):
        d = dens.winding_density("symmetric", r=r)
        f = mp.compose(mp.power(2 * r), mp.scale_translate(0, -1j))
        for cid in d.curve_ids:
            p = Pushforward(dens.halfplane_density(1j), f, d.domain.curve(cid), int(math.ceil(r)) + 1)
            cases.append(Case(f"winding_r{r}_{cid}", p, d, cid, np.exp(rng.uniform(-4, 4, n))))

    # prescribed argument: half plane from ir through z -> exp(ir - z)
    r = 1.3
    d = dens.winding_density("prescribed", r=r)
    f = mp.compose(mp.exp_r(1.0), mp.scale_translate(1j * r, -1))
    cases.append(Case("prescribed_exp", Pushforward(dens.halfplane_density(1j * r), f, d.domain.curve("upper"), 2), d, "upper", np.exp(rng.uniform(-4, 4, n))))

    # double ray from 0: half plane from i through z^2 then phi
    d = dens.double_ray_density()
    f = mp.compose(mp.phi(), mp.square())
    for cid in ("right", "left"):
        cases.append(Case(f"double_ray_{cid}", Pushforward(dens.halfplane_density(1j), f, d.domain.curve(cid)), d, cid, 1 + np.exp(rng.uniform(-5, 4, n))))

    # homotopy: double ray density through sin(pi z / 2), classes m != 0
    K = 10
    d = dens.homotopy_segment_density(K)
    p = Pushforward(dens.double_ray_density(), mp.sin_half(), d.domain.curve("segment"), K)
    cases.append(Case("homotopy_sin_half", p, d, "segment", rng.uniform(-0.99, 0.99, n)))
    return cases
