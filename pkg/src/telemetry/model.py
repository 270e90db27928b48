"""
Canonical data model for metrics, logs and traces
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple


@dataclass(frozen=True)
class TimeWindow:
    """Closed analysis window [start, end] in unix seconds"""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"Window start {self.start} is after end {self.end}")

    def contains(self, timestamp):
        return self.start <= timestamp <= self.end

    def to_dict(self):
        return {"start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["start"]), int(data["end"]))


@dataclass(frozen=True)
class MetricSample:
    timestamp: int
    service_instance: str
    metric_name: str
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"Metric value must be finite, got {self.value}")


@dataclass(frozen=True)
class MetricSeries:
    """
    Samples of one metric on one service instance

    `samples` are the in-window samples; `warmup` holds up to W preceding samples
    kept only as history for the sliding-window detector.
    """

    service_instance: str
    metric_name: str
    samples: Tuple[MetricSample, ...]
    warmup: Tuple[MetricSample, ...] = ()

    def __post_init__(self):
        key = (self.service_instance, self.metric_name)
        ordered = self.warmup + self.samples
        for previous, current in zip(ordered, ordered[1:]):
            if current.timestamp <= previous.timestamp:
                raise ValueError(f"Series {key} is not strictly ascending at t={current.timestamp}")
        for sample in ordered:
            if (sample.service_instance, sample.metric_name) != key:
                raise ValueError(f"Sample {sample} does not belong to series {key}")

    @property
    def key(self):
        return (self.service_instance, self.metric_name)

    def history(self):
        """Warm-up samples followed by in-window samples"""
        return self.warmup + self.samples

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class LogEntry:
    timestamp: int
    service_instance: str
    message: str

    def __post_init__(self):
        if not self.message or not self.message.strip():
            raise ValueError("Log message must be non-empty")


@dataclass(frozen=True)
class TraceSpan:
    timestamp: int
    trace_id: str
    span_id: str
    parent_span_id: str
    caller: str
    callee: str
    call_type: str
    latency_ms: float

    def __post_init__(self):
        if not math.isfinite(self.latency_ms) or self.latency_ms < 0:
            raise ValueError(f"Span latency must be a finite value >= 0, got {self.latency_ms}")

    @property
    def key(self):
        return (self.trace_id, self.span_id)


@dataclass(frozen=True)
class SkippedRow:
    """One input row that was not loaded"""

    file: str
    line: int
    reason: str


@dataclass(frozen=True)
class TelemetryBundle:
    """X = (metrics, logs, traces), optionally bound to the window it was sliced to"""

    metrics: Tuple[MetricSeries, ...] = ()
    logs: Tuple[LogEntry, ...] = ()
    spans: Tuple[TraceSpan, ...] = ()
    window: Optional[TimeWindow] = None
    skipped: Tuple[SkippedRow, ...] = field(default=(), compare=False)

    def span_index(self):
        """Map (trace_id, span_id) to span for parent lookups"""
        return {span.key: span for span in self.spans}

    def time_range(self):
        """Smallest window covering every record, or None for an empty bundle"""
        stamps = [s.timestamp for series in self.metrics for s in series.history()]
        stamps.extend(entry.timestamp for entry in self.logs)
        stamps.extend(span.timestamp for span in self.spans)
        if not stamps:
            return None
        return TimeWindow(min(stamps), max(stamps))


def slice_window(bundle, window, warmup=60):
    """
    Restrict a bundle to the closed window [window.start, window.end]

    Each metric series also keeps up to `warmup` samples immediately preceding the
    window as detector history. Slicing an already sliced bundle with the same window
    returns an identical bundle.

    Args:
        bundle (TelemetryBundle): Source bundle
        window (TimeWindow): Analysis window
        warmup (int): Number of preceding samples kept per series (the detector's W)

    Returns:
        TelemetryBundle: The sliced bundle, bound to `window`
    """
    series_out = []
    for series in bundle.metrics:
        history = series.history()
        in_window = tuple(s for s in history if window.contains(s.timestamp))
        if not in_window:
            continue
        before = [s for s in history if s.timestamp < window.start]
        kept_warmup = tuple(before[-warmup:]) if warmup > 0 else ()
        series_out.append(replace(series, samples=in_window, warmup=kept_warmup))

    return TelemetryBundle(
        metrics=tuple(series_out),
        logs=tuple(e for e in bundle.logs if window.contains(e.timestamp)),
        spans=tuple(s for s in bundle.spans if window.contains(s.timestamp)),
        window=window,
        skipped=bundle.skipped,
    )
