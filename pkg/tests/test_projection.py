import cmath
import math

import numpy as np
import pytest

from planarbm import densities as dens
from planarbm import geometry as geo
from planarbm import maps as mp
from planarbm import projection as pj

PI = math.pi


@pytest.fixture(scope="module")
def cases():
    return pj.reproduction_cases(n=20, seed=3)


def test_every_catalog_family_is_reproduced(cases):
    tags = {c.density.tag for c in cases}
    for want in ("disk_poisson", "halfplane_poisson", "punctured_covering", "strip_conformal",
                 "halfstrip_conformal", "segment_covering", "segment_closed", "annulus_covering",
                 "winding_symmetric", "winding_prescribed", "double_ray_origin", "homotopy_segment"):
        assert want in tags


def test_cases_agree(cases):
    for c in cases:
        assert c.max_error() <= 1e-9, c.name


def test_cayley_push_is_uniform():
    circ = geo.disk().curve("circle")
    p = pj.Pushforward(dens.halfplane_density(1j), mp.cayley(), circ)
    for s in np.linspace(-3, 3, 12):  # skips s = 0, the pole of the inverse
        assert p.push(s) == pytest.approx(1 / (2 * PI), rel=1e-13)


def test_exp_i_push_matches_punctured_terms():
    a = 0.4 * cmath.exp(-0.9j)
    K = 4
    d = dens.punctured_disk_density(a, K)
    src = dens.halfplane_density(complex(cmath.phase(a), -math.log(abs(a))))
    p = pj.Pushforward(src, mp.exp_i(), d.domain.curve("circle"), K)
    for th in np.linspace(-3, 3, 7):
        # one preimage per winding class
        pre = p.preimages(cmath.exp(1j * th))
        assert len(pre) == 2 * K + 1
        terms = sorted(float(d.term(k, th)) for k in range(-K, K + 1))
        contrib = sorted(src.at(z) / abs(mp.exp_i().deriv(z)) for z, _ in pre)
        np.testing.assert_allclose(contrib, terms, rtol=1e-12)


def test_double_ray_chain_at_two():
    d = dens.double_ray_density()
    p = pj.Pushforward(dens.halfplane_density(1j), mp.compose(mp.phi(), mp.square()), d.domain.curve("right"))
    assert p.push(2.0) == pytest.approx(1 / (2 * PI * math.sqrt(3)), rel=1e-13)


def test_mass_checks():
    # disk onto disk by an automorphism
    p = pj.Pushforward(dens.disk_density(0.3), mp.disk_automorphism(-0.5j), geo.disk().curve("circle"))
    m, _ = pj.push_mass_check(p)
    assert m == pytest.approx(1.0, abs=1e-9)
    # strip onto the annulus, both circles
    src = dens.strip_density(0.2)
    tot = 0.0
    for cid in ("outer", "inner"):
        c = geo.annulus(1.0).curve(cid)
        tot += pj.push_mass_check(pj.Pushforward(src, mp.exp_r(1.0), c, 6))[0]
    assert tot == pytest.approx(1.0, abs=1e-9)
    # half plane onto the winding rays
    r = 0.75
    wd = dens.winding_density("symmetric", r=r)
    f = mp.compose(mp.power(2 * r), mp.scale_translate(0, -1j))
    tot = sum(pj.push_mass_check(pj.Pushforward(dens.halfplane_density(1j), f, wd.domain.curve(c), 2))[0]
              for c in wd.curve_ids)
    assert tot == pytest.approx(1.0, abs=1e-8)


def test_composition_coherence():
    # push through square, then through phi, versus one push through the composite
    src = dens.halfplane_density(0.3 + 1.2j)
    ray = geo.BoundaryCurve("ray", "line", (0.0, math.inf))
    right = dens.double_ray_density().domain.curve("right")
    step1 = pj.Pushforward(src, mp.square(), ray)
    step2 = pj.Pushforward(step1, mp.phi(), right)
    direct = pj.Pushforward(src, mp.compose(mp.phi(), mp.square()), right)
    for s in 1 + np.exp(np.linspace(-4, 4, 15)):
        assert step2.push(s) == pytest.approx(direct.push(s), abs=1e-10)


def test_preimages_lie_on_source_curves():
    d = dens.segment_density(0.4 + 0.9j, "covering", 6)
    src = dens.halfplane_density(dens._lift_to_upper(0.4 + 0.9j))
    p = pj.Pushforward(src, mp.sin_half(), d.domain.curve("segment"), 6)
    for x in np.linspace(-0.9, 0.9, 7):
        pre = p.preimages(complex(x))
        assert len(pre) == 13
        for z, s in pre:
            assert abs(z.imag) < 1e-12
            assert abs(mp.sin_half()(z) - x) < 1e-12


def test_zero_derivative_is_an_error():
    ray = geo.BoundaryCurve("ray", "line", (0.0, math.inf))
    p = pj.Pushforward(dens.halfplane_density(1j), mp.square(), ray)
    with pytest.raises(pj.ProjectionError):
        p.push(0.0)


def test_tail_estimate_covers_truncation():
    a = math.exp(-1)
    d = dens.punctured_disk_density(a)
    src = dens.halfplane_density(complex(0.0, 1.0))
    for K in (2, 4, 8):
        p = pj.Pushforward(src, mp.exp_i(), d.domain.curve("circle"), K)
        for th in (-2.0, 0.0, 1.5):
            v, tail = p.push_with_tail(th)
            assert abs(v - d.value("circle", th)) <= tail
