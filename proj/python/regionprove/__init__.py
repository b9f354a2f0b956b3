"""Probabilistic enumeration of safe input regions for ReLU networks."""

from regionprove._core import (
    AugmentedNetwork,
    ClassifiedRegion,
    Hyperrectangle,
    LinearConstraint,
    Network,
    OracleReport,
    ParseError,
    ReachableEstimate,
    RegionKind,
    SafetyProperty,
    TimeoutError,
    ToleranceParams,
    VerificationOutcome,
    augment,
    classify_region,
    compute_reachable_set,
    confidence_joint,
    confidence_single,
    eps_align_shrink,
    estimate_from_points,
    grid_safe_rate,
    is_eps_aligned,
    is_eps_bounded,
    mc_safe_rate,
    read_outcome_json,
    region_violation_fraction,
    required_sample_size,
    run_eprove,
    split,
    volume,
)

__all__ = [
    "AugmentedNetwork",
    "ClassifiedRegion",
    "Hyperrectangle",
    "LinearConstraint",
    "Network",
    "OracleReport",
    "ParseError",
    "ReachableEstimate",
    "RegionKind",
    "SafetyProperty",
    "TimeoutError",
    "ToleranceParams",
    "VerificationOutcome",
    "augment",
    "classify_region",
    "compute_reachable_set",
    "confidence_joint",
    "confidence_single",
    "eps_align_shrink",
    "estimate_from_points",
    "grid_safe_rate",
    "is_eps_aligned",
    "is_eps_bounded",
    "mc_safe_rate",
    "read_outcome_json",
    "region_violation_fraction",
    "required_sample_size",
    "run_eprove",
    "split",
    "volume",
]
