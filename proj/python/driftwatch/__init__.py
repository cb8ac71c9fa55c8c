"""Sequential drift detection on model confidence streams."""

from ._driftwatch import (
    CalibrationError,
    DegenerateSample,
    Error,
    FormatError,
    InvalidArgument,
    MissingMoments,
    MissingThresholds,
    ThresholdTable,
    calibrate_thresholds,
    detect,
    find_outliers,
    hochberg_adjust,
    loss,
    naive_detect,
    peeking_simulation,
    scan_splits,
    schedule,
    significant_regions,
    synthesize_stream,
    two_sample_statistic,
)

__all__ = [
    "CalibrationError",
    "DegenerateSample",
    "Error",
    "FormatError",
    "InvalidArgument",
    "MissingMoments",
    "MissingThresholds",
    "ThresholdTable",
    "calibrate_thresholds",
    "detect",
    "find_outliers",
    "hochberg_adjust",
    "loss",
    "naive_detect",
    "peeking_simulation",
    "scan_splits",
    "schedule",
    "significant_regions",
    "synthesize_stream",
    "two_sample_statistic",
]
