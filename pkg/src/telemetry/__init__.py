"""
Telemetry package for the incident desk: data model, format adapters and loading
"""
from telemetry.model import (
    LogEntry,
    MetricSample,
    MetricSeries,
    SkippedRow,
    TelemetryBundle,
    TimeWindow,
    TraceSpan,
    slice_window,
)
from telemetry.loader import load_dataset

__all__ = [
    "LogEntry",
    "MetricSample",
    "MetricSeries",
    "SkippedRow",
    "TelemetryBundle",
    "TimeWindow",
    "TraceSpan",
    "load_dataset",
    "slice_window",
]
