from .rules import (
    PathConfig,
    RuleError,
    StoppingRule,
    StopSample,
    exit_rule,
    hit_double_ray,
    hit_segment,
    homotopy_segment,
    prescribed_arg,
    winding_asym,
    winding_sym,
)
from .simulate import SampleSet, concat, simulate
from .stats import conditional_cdf, ks_statistic, ks_threshold, winding_class_frequencies

__all__ = [
    "PathConfig", "RuleError", "StoppingRule", "StopSample", "SampleSet",
    "exit_rule", "winding_sym", "winding_asym", "prescribed_arg", "hit_segment",
    "hit_double_ray", "homotopy_segment", "simulate", "concat",
    "ks_statistic", "ks_threshold", "conditional_cdf", "winding_class_frequencies",
]
