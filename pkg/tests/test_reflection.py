import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from planarbm import densities as dens
from planarbm import reflection as rf

PI = math.pi


# ---------------------------------------------------------------- collapse


def test_collapse_examples():
    assert rf.collapse(rf.StoppingSequence(0, (1,))) == 1
    assert rf.collapse(rf.StoppingSequence(0, (-1, 1))) == 3
    assert rf.collapse(rf.StoppingSequence(0, (1, -1, 1))) == 5


def test_collapse_insertion_between_neighbors():
    assert rf.collapse(rf.StoppingSequence(0, (1,))) == rf.collapse(rf.StoppingSequence(0, (0.5, 1)))


@given(st.floats(-0.99, 0.99), st.integers(1, 40))
def test_strip_levels_collapse_to_scales(a, j):
    D = (2 * j - 1) + (-1) ** j * a
    assert rf.collapse(rf.strip_levels(a, j)) == pytest.approx(D)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=8), st.floats(0.01, 0.99))
def test_collapse_monotone_insertion(levels, t):
    # inserting a level strictly between two neighbours never changes the total distance
    chain = [0.0] + levels
    if any(x == y for x, y in zip(chain[:-1], chain[1:])):
        return
    seq = rf.StoppingSequence(0.0, tuple(levels))
    mid = chain[0] + t * (chain[1] - chain[0])
    if mid in (chain[0], chain[1]):
        return
    seq2 = rf.StoppingSequence(0.0, (mid,) + tuple(levels))
    assert rf.collapse(seq2) == pytest.approx(rf.collapse(seq), rel=1e-12)


def test_sequence_validation():
    with pytest.raises(rf.ReflectionError):
        rf.StoppingSequence(0, ())
    with pytest.raises(rf.ReflectionError):
        rf.StoppingSequence(0, (1, 1))
    with pytest.raises(rf.ReflectionError):
        rf.StoppingSequence(1, (1,))


# ---------------------------------------------------------------- series structure


def test_strip_scales_and_signs():
    terms = rf.build_series("strip_right", a=0.0).head(6)
    assert [t.scale for t in terms] == [1, 3, 5, 7, 9, 11]
    assert [t.sign for t in terms] == [1, -1, 1, -1, 1, -1]


@given(st.floats(-0.99, 0.99))
def test_strip_scales_strictly_increase(a):
    for kind in ("strip_right", "strip_left"):
        terms = rf.build_series(kind, a=a).head(50)
        sc = [t.scale for t in terms]
        assert all(x < y for x, y in zip(sc[:-1], sc[1:]))
        sg = [t.sign for t in terms]
        assert all(x == -y for x, y in zip(sg[:-1], sg[1:]))


def test_halfstrip_image_points():
    x, al, be = 0.3, 0.1, 0.8
    terms = rf.build_series("halfstrip_bottom", alpha=al, beta=be).head(3)
    assert [t.sign for t in terms] == [1, -1, 1]
    # images x, 2 - x, -2 - x, 4 + x, -4 + x, each a Cauchy kernel about alpha
    k = lambda u: dens.cauchy_pdf(u, al, be)
    assert terms[0](x) == pytest.approx(k(x))
    assert terms[1](x) == pytest.approx(-(k(2 - x) + k(-2 - x)))
    assert terms[2](x) == pytest.approx(k(4 + x) + k(-4 + x))


def test_rectangle_vertical_image_points():
    y, al, be, k = 0.2, 0.1, 0.3, 1.0
    terms = rf.build_series("rectangle_vertical", alpha=al, beta=be, k=k).head(3)
    s = lambda h: dens.strip_line_pdf(al, h)
    assert terms[0](y) == pytest.approx(s(y - be))
    assert terms[1](y) == pytest.approx(-(s(2 * k - y - be) + s(-2 * k - y - be)))
    assert terms[2](y) == pytest.approx(s(4 * k + y - be) + s(-4 * k + y - be))


def test_series_is_lazy_and_restartable():
    ser = rf.build_series("strip_right", a=0.2)
    it1, it2 = ser.terms(), ser.terms()
    assert next(it1).scale == next(it2).scale
    assert next(it1).scale != ser.head(1)[0].scale


def test_annulus_is_refused():
    with pytest.raises(rf.ReflectionError, match="do not vanish"):
        rf.build_series("annulus_outer", a=1.0, r=1.0)


@pytest.mark.parametrize("kind,params", [
    ("strip_right", {"a": 1.0}),
    ("halfstrip_bottom", {"alpha": 0.1, "beta": 0.0}),
    ("rectangle_vertical", {"alpha": 0.1, "beta": 2.0, "k": 1.0}),
    ("nope", {}),
])
def test_bad_series(kind, params):
    with pytest.raises(rf.ReflectionError):
        rf.build_series(kind, **params)


def test_eval_needs_two_terms():
    with pytest.raises(rf.ReflectionError):
        rf.eval_series(rf.build_series("strip_right", a=0.0), 0.0, 1)


# ---------------------------------------------------------------- values


def test_leibniz_value():
    v, lo, hi = rf.eval_series(rf.build_series("strip_right", a=0.0), 0.0, 20000)
    assert v == pytest.approx(0.25, abs=1e-4)
    assert lo <= 0.25 <= hi


def _limit(kind, params, pts):
    if kind.startswith("strip"):
        d = dens.strip_density(params["a"])
        return d.value("right" if kind == "strip_right" else "left", pts)
    if kind == "halfstrip_bottom":
        return dens.halfstrip_density(params["alpha"], params["beta"]).value("bottom", pts)
    form = kind.split("_")[1]
    return dens.rectangle_density(params["alpha"], params["beta"], params["k"], form).value("right", pts)


CASES = [
    ("strip_right", {"a": 0.3}, np.linspace(-4, 4, 9)),
    ("strip_left", {"a": -0.6}, np.linspace(-4, 4, 9)),
    ("halfstrip_bottom", {"alpha": 0.3, "beta": 0.7}, np.linspace(-0.9, 0.9, 9)),
    ("halfstrip_bottom", {"alpha": -0.5, "beta": 0.2}, np.linspace(-0.9, 0.9, 9)),
    ("rectangle_vertical", {"alpha": 0.2, "beta": -0.1, "k": 0.8}, np.linspace(-0.75, 0.75, 9)),
    ("rectangle_horizontal", {"alpha": 0.2, "beta": -0.1, "k": 0.8}, np.linspace(-0.75, 0.75, 9)),
]


@pytest.mark.parametrize("kind,params,pts", CASES, ids=[c[0] for c in CASES])
def test_bracketing(kind, params, pts):
    ser = rf.build_series(kind, **params)
    exact = _limit(kind, params, pts)
    ps = rf.partial_sums(ser, pts, 60)
    for N in range(8, 59):
        lo, hi = np.minimum(ps[N - 1], ps[N]), np.maximum(ps[N - 1], ps[N])
        assert np.all(lo - 1e-13 <= exact) and np.all(exact <= hi + 1e-13)


@pytest.mark.parametrize("kind,params,pts", CASES, ids=[c[0] for c in CASES])
def test_bounds_contain_limit(kind, params, pts):
    v, lo, hi = rf.eval_series(rf.build_series(kind, **params), pts, 40)
    exact = _limit(kind, params, pts)
    assert np.all(lo - 1e-14 <= exact) and np.all(exact <= hi + 1e-14)


@pytest.mark.parametrize("kind,params,pts", CASES[4:], ids=[c[0] for c in CASES[4:]])
def test_rectangle_series_converge_fast(kind, params, pts):
    # reflected strip/half-strip kernels decay exponentially in the image distance
    v, lo, hi = rf.eval_series(rf.build_series(kind, **params), pts, 40)
    np.testing.assert_allclose(v, _limit(kind, params, pts), atol=1e-9)
    assert np.all(hi - lo <= 1e-9)


@given(st.floats(-0.9, 0.9), st.floats(0.05, 3), st.floats(-0.99, 0.99))
def test_halfstrip_series_limit(alpha, beta, x):
    # the extrapolated image sum matches the closed form
    d = dens.halfstrip_density(alpha, beta)
    assert d.reflection_bottom(x) == pytest.approx(d.value("bottom", x), abs=1e-9)


@given(st.floats(-0.95, 0.95), st.floats(-6, 6))
def test_strip_series_brackets_everywhere(a, y):
    ps = rf.partial_sums(rf.build_series("strip_right", a=a), y, 40)
    exact = dens.strip_line_pdf(a, y)
    for N in range(1, 39):
        assert min(ps[N - 1], ps[N]) - 1e-14 <= exact <= max(ps[N - 1], ps[N]) + 1e-14


def test_strip_right_mass_half():
    # each Cauchy term carries unit mass, so integrate the closed limit instead
    d = dens.strip_density(0.0, "reflection")
    assert d.curve_mass("right") == pytest.approx(0.5, abs=1e-14)
    assert d.quad_mass() == pytest.approx(1.0, abs=1e-10)
