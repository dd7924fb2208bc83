"""Evaluation protocol: splits, per-house pipeline, ranking and significance."""

from .pipeline import (
    COMBINED_METHODS,
    DEFAULT_PAIRS,
    METHODS,
    STRATEGY_OF,
    BaseForecasters,
    HouseFailure,
    HouseResult,
    LeakageDetected,
    PipelineConfig,
    check_leakage,
    clear_fit_cache,
    evaluate_house,
    evaluate_house_safe,
    pair_label,
    parse_pair,
)
from .report import EvaluationReport, SignificanceResult, aggregate_report, rank_methods
from .significance import mann_whitney_u
from .splits import Sample, SplitPlan, extract_samples, make_splits, sample_cutoffs

__all__ = [
    "BaseForecasters", "COMBINED_METHODS", "DEFAULT_PAIRS", "EvaluationReport", "HouseFailure",
    "HouseResult", "LeakageDetected", "METHODS", "PipelineConfig", "STRATEGY_OF", "Sample",
    "SignificanceResult", "SplitPlan", "aggregate_report", "check_leakage", "clear_fit_cache", "evaluate_house",
    "evaluate_house_safe", "extract_samples", "make_splits", "mann_whitney_u", "pair_label",
    "parse_pair", "rank_methods", "sample_cutoffs",
]
