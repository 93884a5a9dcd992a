"""Matched simulate + KS pipelines, one per analytic density.

Each gate fixes the start point, stopping rule, observed coordinate and the
reference CDF.  ``run_gate`` draws ``n`` paths and compares.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import densities as dens
from .. import geometry as geo
from .rules import (
    PathConfig,
    exit_rule,
    hit_double_ray,
    hit_segment,
    homotopy_segment,
    prescribed_arg,
    winding_asym,
    winding_sym,
)
from .simulate import simulate
from .stats import conditional_cdf, ks_statistic, ks_threshold

N_GATE = 100_000
INFLATE = 1.2
MAX_ABANDONED = 1e-3


@dataclass(frozen=True)
class Gate:
    id: str
    density: str
    params: dict
    build: Callable  # params -> (start, rule, values(SampleSet), cdf)
    seed: int = 0


def _curve_gate(domain_fn, start_fn, curve, conditional=False, track=False):
    def build(p):
        d = dens.make_density(p["_density"], **p["_dparams"])
        cdf = conditional_cdf(d, curve) if conditional else (lambda s: d.cdf(curve, s))
        return start_fn(p), exit_rule(domain_fn(p), track), (lambda S: S.on_curve(curve)), cdf

    return build


def _modulus_gate(rule_fn):
    def build(p):
        d = dens.make_density(p["_density"], **p["_dparams"])
        return 1.0, rule_fn(p), (lambda S: np.abs(S.points)), d.modulus_cdf

    return build


def _segment_gate(rule_fn, start):
    def build(p):
        d = dens.make_density(p["_density"], **p["_dparams"])
        return start(p), rule_fn(), (lambda S: S.on_curve("segment")), (lambda s: d.cdf("segment", s))

    return build


def _double_ray_gate(p):
    d = dens.double_ray_density()
    # both rays carry half the mass with the same profile in |x|
    return 0.0, hit_double_ray(), (lambda S: np.abs(S.points.real)), (lambda x: 2.0 * d.cdf("right", x))


GATES = {
    "disk": Gate("disk", "disk", {"a": 0.5},
                 _curve_gate(lambda p: geo.disk(), lambda p: p["a"], "circle")),
    "halfplane": Gate("halfplane", "halfplane", {"a": 1j},
                      _curve_gate(lambda p: geo.half_plane(), lambda p: p["a"], "line")),
    "strip": Gate("strip", "strip", {"a": 0.3},
                  _curve_gate(lambda p: geo.strip(), lambda p: p["a"], "right", conditional=True)),
    "rectangle": Gate("rectangle", "rectangle", {"alpha": 0.0, "beta": 0.0, "k": 1.0},
                      _curve_gate(lambda p: geo.rectangle(p["k"]), lambda p: complex(p["alpha"], p["beta"]),
                                  "right", conditional=True)),
    "annulus": Gate("annulus", "annulus", {"a": 1.0, "r": 1.0},
                    _curve_gate(lambda p: geo.annulus(p["r"]), lambda p: p["a"], "outer", conditional=True)),
    "halfstrip": Gate("halfstrip", "halfstrip", {"alpha": 0.3, "beta": 0.7},
                      _curve_gate(lambda p: geo.half_strip(), lambda p: complex(p["alpha"], p["beta"]),
                                  "bottom", conditional=True)),
    "punctured_disk": Gate("punctured_disk", "punctured_disk", {"a": float(np.exp(-1))},
                           _curve_gate(lambda p: geo.punctured_disk(), lambda p: p["a"], "circle")),
    "winding_sym": Gate("winding_sym", "winding_sym", {"r": 1.0}, _modulus_gate(lambda p: winding_sym(p["r"]))),
    "winding_asym": Gate("winding_asym", "winding_asym", {"r1": 0.5, "r2": 1.5},
                         _modulus_gate(lambda p: winding_asym(p["r1"], p["r2"]))),
    "prescribed_arg": Gate("prescribed_arg", "prescribed_arg", {"r": 1.0},
                           _modulus_gate(lambda p: prescribed_arg(p["r"]))),
    "segment": Gate("segment", "segment", {"omega": 2j}, _segment_gate(hit_segment, lambda p: p["omega"])),
    "double_ray": Gate("double_ray", "double_ray", {}, _double_ray_gate),
    "homotopy_segment": Gate("homotopy_segment", "homotopy_segment", {},
                             _segment_gate(homotopy_segment, lambda p: 0.0)),
}


def run_gate(gate_id: str, n: int = N_GATE, seed: int | None = None, params: dict | None = None,
             cfg: PathConfig | None = None) -> dict:
    """Simulate ``n`` paths for the gate and return the KS report."""
    g = GATES[gate_id]
    p = dict(g.params)
    p.update(params or {})
    # start point parameters double as density parameters
    p["_density"] = g.density
    p["_dparams"] = {k: v for k, v in p.items() if not k.startswith("_")}
    start, rule, values, cdf = g.build(p)
    if cfg is None:
        cfg = PathConfig(seed=g.seed if seed is None else seed)
    S = simulate(start, rule, cfg, n)
    v = values(S)
    ks = ks_statistic(v, cdf)
    thr = ks_threshold(len(v), INFLATE)
    ab = S.abandoned_fraction
    return {
        "id": gate_id,
        "params": {k: _jsonable(v) for k, v in p.items() if not k.startswith("_")},
        "n_paths": int(n),
        "n_used": int(len(v)),
        "seed": int(cfg.seed),
        "scheme": cfg.scheme,
        "ks": float(ks),
        "threshold": float(thr),
        "abandoned_fraction": float(ab),
        "mean_steps": float(np.mean(S.steps)),
        "pass": bool(ks <= thr and ab < MAX_ABANDONED),
    }


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v
