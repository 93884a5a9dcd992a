"""Running paths and holding the results."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .rules import PathConfig, StoppingRule, StopSample


@dataclass
class SampleSet:
    """Stop data for a batch of paths as parallel arrays.

    ``winding`` holds the continuous argument at the stop for exit rules that
    track it, the target argument for argument rules and the summed winding
    class for the homotopy rule.  Abandoned paths keep their last position.
    """

    rule: StoppingRule
    cfg: PathConfig
    start: complex
    x: np.ndarray
    y: np.ndarray
    curve: np.ndarray
    s: np.ndarray
    winding: np.ndarray
    steps: np.ndarray
    status: np.ndarray

    def __len__(self):
        return int(np.count_nonzero(self.ok))

    @property
    def ok(self) -> np.ndarray:
        return self.status == K.OK

    @property
    def n_paths(self) -> int:
        return self.status.size

    @property
    def abandoned(self) -> int:
        return int(np.count_nonzero(self.status == K.ABANDONED))

    @property
    def abandoned_fraction(self) -> float:
        return self.abandoned / max(self.n_paths, 1)

    @property
    def points(self) -> np.ndarray:
        z = np.empty(self.x.size, dtype=complex)
        z.real, z.imag = self.x, self.y
        return z[self.ok]

    def on_curve(self, curve_id) -> np.ndarray:
        """Arclength coordinates of the stops that landed on one curve."""
        i = list(self.rule.curve_ids()).index(curve_id)
        m = self.ok & (self.curve == i)
        return self.s[m]

    def winding_index(self) -> np.ndarray:
        """Integer class per completed path."""
        w = self.winding[self.ok]
        if self.rule.code == 0:
            # continuous argument minus the principal angle of the stop
            th = self.s[self.ok] / self._radius()
            return np.rint((w - th) / (2 * math.pi)).astype(np.int64)
        if self.rule.code == 1:
            return np.rint(w / (2 * math.pi)).astype(np.int64)
        return np.rint(w).astype(np.int64)

    def _radius(self) -> np.ndarray:
        cs = self.rule.domain.curves
        rad = np.array([c.radius if c.shape == "arc" else 1.0 for c in cs])
        return rad[self.curve[self.ok]]

    def samples(self) -> list:
        ids = self.rule.curve_ids()
        ok = np.flatnonzero(self.ok)
        wi = self.winding_index()
        return [
            StopSample(complex(self.x[j], self.y[j]), int(wi[k]), int(self.steps[j]), ids[self.curve[j]], float(self.s[j]))
            for k, j in enumerate(ok)
        ]

    def __iter__(self):
        return iter(self.samples())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "winding_index", "steps"])
        ok = np.flatnonzero(self.ok)
        wi = self.winding_index()
        for k, j in enumerate(ok):
            w.writerow([repr(float(self.x[j])), repr(float(self.y[j])), int(wi[k]), int(self.steps[j])])
        return buf.getvalue()

    def summary(self, ks: dict | None = None) -> dict:
        ids = self.rule.curve_ids()
        counts = {cid: int(np.count_nonzero(self.ok & (self.curve == i))) for i, cid in enumerate(ids)}
        out = {
            "schema": 1,
            "rule": self.rule.to_json(),
            "start": [self.start.real, self.start.imag],
            "scheme": self.cfg.scheme,
            "seed": int(self.cfg.seed),
            "n_paths": self.n_paths,
            "completed": len(self),
            "abandoned": self.abandoned,
            "abandonment_rate": self.abandoned_fraction,
            "counts": dict(sorted(counts.items())),
            "mean_steps": float(np.mean(self.steps[self.ok])) if len(self) else None,
        }
        if ks:
            out["ks"] = dict(sorted(ks.items()))
        return out

    def to_json(self, ks: dict | None = None) -> str:
        return json.dumps(self.summary(ks), sort_keys=True, indent=2)


def simulate(start, rule: StoppingRule, cfg: PathConfig, n_paths: int, first_path: int = 0) -> SampleSet:
    """Run ``n_paths`` paths with indices ``first_path, first_path + 1, ...``.

    Path ``i`` depends only on ``(cfg.seed, i)``, so batches can be split and
    concatenated freely.
    """
    start = complex(start)
    rule.check_start(start)
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n = int(n_paths)
    out = dict(
        out_x=np.empty(n), out_y=np.empty(n), out_idx=np.empty(n, np.int64), out_s=np.empty(n),
        out_w=np.empty(n), out_steps=np.empty(n, np.int64), out_status=np.empty(n, np.int64),
    )
    dcode = rule.domain.code if rule.domain is not None else -1
    dp = rule.domain.param_array if rule.domain is not None else np.zeros(2)
    args = (rule.code, dcode, dp, rule.rays, rule.track_winding, start.real, start.imag)
    tail = (int(cfg.max_steps), np.uint64(int(cfg.seed)), np.uint64(int(first_path)), n)
    if cfg.scheme == "walk_on_spheres":
        K.wos_paths(*args, float(cfg.boundary_tol), *tail, *out.values())
    else:
        K.euler_paths(*args, float(cfg.step), *tail, *out.values())
    return SampleSet(rule, cfg, start, out["out_x"], out["out_y"], out["out_idx"], out["out_s"],
                     out["out_w"], out["out_steps"], out["out_status"])


def concat(parts: list) -> SampleSet:
    """Merge batches run with the same rule and config."""
    a = parts[0]
    cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
    return SampleSet(a.rule, a.cfg, a.start, cat("x"), cat("y"), cat("curve"), cat("s"), cat("winding"),
                     cat("steps"), cat("status"))
