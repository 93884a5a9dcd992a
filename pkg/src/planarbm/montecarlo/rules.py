"""Simulation settings and executable stopping rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import geometry as geo

SCHEMES = ("euler", "walk_on_spheres")


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class PathConfig:
    step: float = 1e-4
    max_steps: int = 10**7
    boundary_tol: float = 1e-6
    seed: int = 0
    scheme: str = "walk_on_spheres"

    def __post_init__(self):
        if not self.step > 0:
            raise RuleError("step must be positive")
        if not self.boundary_tol > 0:
            raise RuleError("boundary_tol must be positive")
        if self.max_steps < 1:
            raise RuleError("max_steps must be >= 1")
        if self.scheme not in SCHEMES:
            raise RuleError(f"scheme must be one of {SCHEMES}")
        if not 0 <= int(self.seed) < 2**64:
            raise RuleError("seed must fit in 64 bits")


@dataclass(frozen=True)
class StoppingRule:
    """What ends a path.

    ``code`` selects the kernel branch; ``rays`` holds the continuous-argument
    targets for argument rules; ``domain`` is the exit domain for exit rules.
    """

    kind: str
    params: dict = field(default_factory=dict)
    domain: geo.Domain | None = None
    track_winding: bool = False

    @property
    def code(self) -> int:
        if self.domain is not None:
            return 0
        if self.kind == "homotopy_segment":
            return 2
        return 1

    @property
    def rays(self) -> np.ndarray:
        p = self.params
        if self.kind == "winding_sym":
            return np.array([p["r"] * math.pi, -p["r"] * math.pi])
        if self.kind == "winding_asym":
            return np.array([p["r1"] * math.pi, -p["r2"] * math.pi])
        if self.kind == "prescribed_arg":
            return np.array([p["r"], -math.inf])
        return np.zeros(2)

    def curve_ids(self) -> tuple:
        if self.domain is not None:
            return tuple(c.curve_id for c in self.domain.curves)
        if self.kind == "homotopy_segment":
            return ("segment",)
        return ("upper", "lower")

    def check_start(self, z: complex):
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise RuleError("start must be finite")
        if self.domain is not None:
            if not geo.contains(self.domain, z):
                raise RuleError(f"start {z!r} is not inside {self.domain.kind}")
        elif self.kind == "homotopy_segment":
            if abs(z - 1) == 0 or abs(z + 1) == 0 or (z.imag == 0 and abs(z.real) > 1):
                raise RuleError("start must avoid the rays (-inf, -1] and [1, inf)")
        else:
            if z == 0:
                raise RuleError("start must not be 0")
            a = math.atan2(z.imag, z.real)
            up, down = self.rays
            if not down < a < up:
                raise RuleError("start argument must lie strictly between the targets")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": dict(self.params)}
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        return out


def exit_rule(domain: geo.Domain, track_winding: bool = False) -> StoppingRule:
    if domain.kind == "punctured_disk":
        track_winding = True
    return StoppingRule("exit", {}, domain, bool(track_winding))


def winding_sym(r: float) -> StoppingRule:
    if not r > 0:
        raise RuleError("r must be positive")
    return StoppingRule("winding_sym", {"r": float(r)})


def winding_asym(r1: float, r2: float) -> StoppingRule:
    if not (r1 > 0 and r2 > 0):
        raise RuleError("r1, r2 must be positive")
    return StoppingRule("winding_asym", {"r1": float(r1), "r2": float(r2)})


def prescribed_arg(r: float) -> StoppingRule:
    if not r > 0:
        raise RuleError("r must be positive")
    return StoppingRule("prescribed_arg", {"r": float(r)})


def hit_segment() -> StoppingRule:
    return StoppingRule("hit_segment", {}, geo.segment())


def hit_double_ray() -> StoppingRule:
    return StoppingRule("hit_double_ray", {}, geo.double_ray())


def homotopy_segment() -> StoppingRule:
    return StoppingRule("homotopy_segment", {})


@dataclass(frozen=True)
class StopSample:
    stop_point: complex
    winding_index: int
    steps_used: int
    curve_id: str
    s: float
