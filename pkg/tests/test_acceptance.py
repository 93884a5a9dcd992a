"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected in ``RESULTS`` and repeated in the terminal
summary by ``conftest.py`` so they survive output capture.
"""

import math
import time

import numpy as np
import pytest

from planarbm import densities as dens
from planarbm import geometry as geo
from planarbm import identities as ids
from planarbm import projection as pj
from planarbm.montecarlo import gates
from planarbm.montecarlo import rules as R
from planarbm.montecarlo import stats as S
from planarbm.montecarlo.simulate import simulate

PI = math.pi
RESULTS: dict[int, str] = {}


def report(k, ok, detail):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    return ok


def _boundary_grid(curve, n=20):
    lo, hi = curve.s_range
    if math.isfinite(lo) and math.isfinite(hi):
        return np.linspace(lo, hi, n + 2)[1:-1]
    if math.isfinite(lo):
        return lo + np.exp(np.linspace(-4, 3, n))
    return 5 * np.sinh(np.linspace(-2.5, 2.5, n))


# ---------------------------------------------------------------- 1

SQ2 = math.sqrt(2)
IDENTITY_TARGETS = [
    ("basel", {}, PI**2 / 6, 1e-7),
    ("leibniz", {}, PI / 4, 1e-7),
    ("mapleton_1", {}, 0.5 / math.tanh(0.5), 1e-9),
    ("mapleton_2", {}, 0.5 * math.tanh(0.5), 1e-9),
    ("mapleton_3", {}, 1 / math.tanh(1.0), 1e-9),
    ("odd_blocks", {"q": 2, "r": 1}, PI * SQ2 / 4, 1e-9),
    ("odd_blocks", {"q": 3, "r": 1}, 5 * PI / 12, 1e-9),
    ("odd_blocks", {"q": 2, "r": 3}, 3 * PI**3 * SQ2 / 128, 1e-9),
    ("odd_blocks", {"q": 3, "r": 3}, 29 * PI**3 / 864, 1e-9),
    ("odd_blocks", {"q": 2, "r": 5}, 57 * SQ2 * PI**5 / 24576, 1e-9),
    ("odd_blocks", {"q": 3, "r": 5}, 1225 * PI**5 / 373248, 1e-9),
    ("all_blocks", {"q": 2, "r": 1}, PI / 4 + math.log(2) / 2, 1e-9),
    ("all_blocks", {"q": 3, "r": 1}, 2 * PI / (3 * math.sqrt(3)) + math.log(2) / 3, 1e-9),
    ("all_blocks", {"q": 4, "r": 1}, PI * (1 + 2 * SQ2) / 8 + math.log(2) / 4, 1e-9),
]
MEI_TARGETS = [PI / 4, PI**2 / 8, PI**3 / 32, PI**4 / 96]


def test_criterion_1_identities():
    t0 = time.perf_counter()
    worst = []
    for id, p, want, tol in IDENTITY_TARGETS:
        rep = ids.evaluate(id, p, tol=tol)
        # both the series and the closed form must hit the stated constant
        err = max(abs(rep["lhs"] - want), abs(rep["rhs"] - want))
        worst.append((err / tol, id, p, err))
    for r, want in enumerate(MEI_TARGETS, start=1):
        ident = ids.mei_deriv(0.0, r)
        f = math.factorial(r - 1)
        err = max(abs(ident.lhs() / f - want), abs(ident.rhs() / f - want))
        worst.append((err / 1e-10, "mei_deriv", {"r": r}, err))
    dt = time.perf_counter() - t0
    bad = [w for w in worst if w[0] > 1]
    ok = not bad and dt < 30
    report(1, ok, f"{len(worst)} constants, worst {max(worst)[1]} {max(worst)[2]} err {max(worst)[3]:.2e}, {dt:.1f}s")
    assert not bad, bad
    assert dt < 30


# ---------------------------------------------------------------- 2


def test_criterion_2_sech_fourier():
    t0 = time.perf_counter()
    errs = {}
    for r in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        ident = ids.sech_fourier(r)
        errs[r] = abs(ident.lhs() - 2 / math.cosh(r))
    dt = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-8 and dt < 5
    report(2, ok, f"max abs error {max(errs.values()):.2e}, {dt:.2f}s")
    assert max(errs.values()) <= 1e-8, errs
    assert dt < 5


# ---------------------------------------------------------------- 3


def _pair_diff(left, right, curves):
    worst = 0.0
    for cid in curves:
        s = _boundary_grid(left.domain.curve(cid))
        worst = max(worst, float(np.max(np.abs(np.asarray(left.value(cid, s)) - np.asarray(right.value(cid, s))))))
    return worst


def _cross_forms():
    out = {}
    rho = np.linspace(0.05, 0.95, 20)
    starts = rho * np.exp(1j * np.linspace(-3.0, 3.0, 20))
    out["punctured vs disk"] = max(
        _pair_diff(dens.punctured_disk_density(a), dens.disk_density(a), ["circle"]) for a in starts)

    out["strip conformal vs reflection"] = max(
        _pair_diff(dens.strip_density(a), dens.strip_density(a, "reflection"), ["left", "right"])
        for a in np.linspace(-0.95, 0.95, 20))

    w = 0.0
    for al, be in zip(np.linspace(-0.9, 0.9, 20), np.geomspace(0.1, 3.0, 20)):
        d = dens.halfstrip_density(al, be)
        x = _boundary_grid(d.domain.curve("bottom"))
        w = max(w, float(np.max(np.abs(d.value("bottom", x) - d.reflection_bottom(x)))))
    out["halfstrip vs reflection"] = w

    omegas = np.linspace(-1.5, 1.5, 20) + 1j * np.geomspace(0.2, 3.0, 20)
    out["segment closed vs covering"] = max(
        _pair_diff(dens.segment_density(o), dens.segment_density(o, "covering"), ["segment"]) for o in omegas)

    w = 0.0
    for al, be in zip(np.linspace(-0.9, 0.9, 20), np.linspace(0.85, -0.85, 20)):
        v = dens.rectangle_density(al, be, 1.0)
        h = dens.rectangle_density(al, be, 1.0, "horizontal")
        w = max(w, _pair_diff(v, h, v.curve_ids))
    out["rectangle vertical vs horizontal"] = w
    return out


def test_criterion_3_cross_forms():
    t0 = time.perf_counter()
    diffs = _cross_forms()
    dt = time.perf_counter() - t0
    ok = max(diffs.values()) <= 1e-8 and dt < 60
    detail = ", ".join(f"{k} {v:.1e}" for k, v in diffs.items())
    report(3, ok, f"{detail}; {dt:.1f}s")
    assert max(diffs.values()) <= 1e-8, diffs
    assert dt < 60


# ---------------------------------------------------------------- 4


def test_criterion_4_projection():
    t0 = time.perf_counter()
    cases = pj.reproduction_cases(n=50)
    errs = {c.name: c.max_error() for c in cases}
    dt = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    ok = errs[worst] <= 1e-9 and dt < 30
    report(4, ok, f"{len(cases)} cases, worst {worst} {errs[worst]:.1e}, {dt:.1f}s")
    assert errs[worst] <= 1e-9, errs
    assert dt < 30


# ---------------------------------------------------------------- 5

GATE_RUNS = [
    ("disk", None), ("halfplane", None), ("strip", None), ("rectangle", None), ("annulus", None),
    ("winding_sym", {"r": 0.5}), ("winding_sym", {"r": 1.0}), ("winding_sym", {"r": 2.0}),
    ("prescribed_arg", None), ("segment", None), ("homotopy_segment", None),
]


@pytest.mark.slow
def test_criterion_5_gates():
    t0 = time.perf_counter()
    reps = [gates.run_gate(g, params=p) for g, p in GATE_RUNS]
    dt = time.perf_counter() - t0
    failed = [r for r in reps if not r["pass"]]
    worst = max(reps, key=lambda r: r["ks"] / r["threshold"])
    report(5, not failed, f"{len(reps)} gates at N={gates.N_GATE}, worst {worst['id']} {worst['params']} "
                          f"KS {worst['ks']:.4f} / {worst['threshold']:.4f}, max abandoned "
                          f"{max(r['abandoned_fraction'] for r in reps):.1e}, {dt:.0f}s")
    assert not failed, failed


# ---------------------------------------------------------------- 6


@pytest.mark.slow
def test_criterion_6_winding_classes():
    a = math.exp(-1)
    n = 100_000
    ss = simulate(a, R.exit_rule(geo.punctured_disk()), R.PathConfig(seed=0), n)
    freq = S.winding_class_frequencies(ss, 2)
    d = dens.punctured_disk_density(a)
    z = {}
    for k in range(-2, 3):
        p = d.class_mass(k)
        z[k] = abs(freq[k] - p) / S.binomial_sigma(p, len(ss))
    ok = max(z.values()) <= 3 and ss.abandoned_fraction < 1e-3
    report(6, ok, "class z-scores " + ", ".join(f"{k}:{v:.2f}" for k, v in z.items()))
    assert ok, z


# ---------------------------------------------------------------- 7


@pytest.mark.slow
def test_criterion_7_mass_splitting():
    n = 100_000
    emp, z = {}, {}
    for r in (1, 2, 4, 8):
        ss = simulate(1.0, R.winding_sym(r), R.PathConfig(seed=0), n)
        p = 2 / PI * math.atan(0.1 ** (1 / (2 * r)))
        # the analytic modulus law agrees with the closed form
        assert dens.winding_density("symmetric", r=r).modulus_cdf(0.1) == pytest.approx(p, abs=1e-12)
        emp[r] = float(np.mean(np.abs(ss.points) < 0.1))
        z[r] = abs(emp[r] - p) / S.binomial_sigma(p, len(ss))
    vals = [emp[r] for r in (1, 2, 4, 8)]
    mono = all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] < 0.5
    ok = max(z.values()) <= 3 and mono
    report(7, ok, "P(|B|<0.1) " + ", ".join(f"r={r}: {emp[r]:.4f} (z {z[r]:.2f})" for r in emp))
    assert ok, (emp, z)


# ---------------------------------------------------------------- 8


@pytest.mark.xfail(strict=True, reason="partial sums grow linearly, so the ratio of the 10^4 and 10^2 "
                                       "partial sums is just under 100")
def test_criterion_8_divergence_certificate():
    d = ids.coco_diagnostic(1.0)
    checks = {
        "terms tend to a constant >= 1/(2 pi e)": d["divergent"] and d["term_limit"] >= 1 / (2 * PI * math.e) * (1 - 1e-15),
        "left side finite": math.isfinite(d["lhs_finite"]),
        "partial(1e4) > 100 partial(1e2)": d["partial_big"] > 100 * d["partial_small"],
    }
    ok = all(checks.values())
    report(8, ok, f"growth ratio {d['growth_ratio']:.2f}, " + ", ".join(f"{k}: {v}" for k, v in checks.items()))
    assert ok, checks


# ---------------------------------------------------------------- 9


def test_criterion_9_dynkin():
    worst = {}
    for name in ("disk", "strip", "rectangle", "annulus"):
        d = dens.make_density(name)
        labels = ["re_z1", "im_z1", "re_z2"] + (["log_abs"] if name == "annulus" else [])
        for lab in labels:
            worst[(name, lab)] = dens.dynkin_check(d, dens.harmonic(lab))
    key = max(worst, key=worst.get)
    ok = worst[key] <= 1e-7
    report(9, ok, f"{len(worst)} checks, worst {key} {worst[key]:.1e}")
    assert ok, worst
