"""
Traces Processor Module for the incident desk

Per-call-type percentile latency thresholds, 60 s callee aggregates and
grandparent -> caller -> callee path frequencies over the high-latency spans.
"""
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, Tuple

from utils.stats import nearest_rank


ROOT = "ROOT"
NO_SLOW_SPANS = "no high-latency spans"


@dataclass(frozen=True)
class TracesConfig:
    percentile: float = 95.0
    window_seconds: int = 60
    top_paths: int = 10

    def __post_init__(self):
        if not 0 < self.percentile <= 100:
            raise ValueError("traces.percentile must lie in (0, 100]")
        if self.window_seconds <= 0:
            raise ValueError("traces.window_seconds must be positive")


@dataclass(frozen=True)
class LatencyThresholds:
    thresholds: Mapping[str, float]

    def __getitem__(self, call_type):
        return self.thresholds[call_type]

    def __len__(self):
        return len(self.thresholds)


@dataclass(frozen=True)
class SpanAggregate:
    window_start: int
    window_end: int
    callee: str
    count: int
    max_latency_ms: float
    callers: Tuple[Tuple[str, int], ...]

    def render(self):
        callers = ", ".join(f"{name}: {count}" for name, count in self.callers)
        return (
            f"[{self.window_start}, {self.window_end}), {self.callee}, count = {self.count}, "
            f"max_latency = {self.max_latency_ms:.1f}ms, callers = {{{callers}}}"
        )


@dataclass(frozen=True)
class CallPath:
    grandparent: str
    caller: str
    callee: str
    frequency: int

    def render(self):
        return f"{self.grandparent} -> {self.caller} -> {self.callee}: {self.frequency}"


@dataclass(frozen=True)
class TraceDescription:
    thresholds: LatencyThresholds
    flagged: Tuple = ()
    aggregates: Tuple[SpanAggregate, ...] = ()
    paths: Tuple[CallPath, ...] = ()
    top_paths: int = 10

    def render(self):
        return render_traces(self.aggregates, self.paths, self.top_paths)


def _span_order(span):
    return (span.timestamp, span.trace_id, span.span_id)


def flag_high_latency(spans, p=95.0):
    """
    Flag spans slower than the nearest-rank p-th percentile of their call type

    Returns:
        tuple: (LatencyThresholds, flagged spans sorted by time)
    """
    by_type = defaultdict(list)
    for span in spans:
        by_type[span.call_type].append(span.latency_ms)
    thresholds = {call_type: float(nearest_rank(latencies, p)) for call_type, latencies in sorted(by_type.items())}
    flagged = sorted((s for s in spans if s.latency_ms > thresholds[s.call_type]), key=_span_order)
    return LatencyThresholds(thresholds), flagged


def aggregate_windows(flagged, window=60, origin=0):
    """
    Group flagged spans by fixed grid cell [origin + k*window, origin + (k+1)*window) and callee

    Returns:
        list: SpanAggregate sorted by (window, count desc, callee)
    """
    groups = defaultdict(list)
    for span in flagged:
        cell = (span.timestamp - origin) // window
        groups[(cell, span.callee)].append(span)

    aggregates = []
    for (cell, callee), members in groups.items():
        callers = Counter(span.caller for span in members)
        start = origin + cell * window
        aggregates.append(SpanAggregate(
            window_start=start,
            window_end=start + window,
            callee=callee,
            count=len(members),
            max_latency_ms=max(span.latency_ms for span in members),
            callers=tuple(sorted(callers.items(), key=lambda item: (-item[1], item[0]))),
        ))
    aggregates.sort(key=lambda a: (a.window_start, -a.count, a.callee))
    return aggregates


def extract_call_paths(flagged, all_spans):
    """
    Tally (grandparent, caller, callee) over flagged spans

    The grandparent is the caller of the span's parent, or ROOT when the parent
    is not in `all_spans`.

    Args:
        flagged (list): High-latency spans
        all_spans (dict): (trace_id, span_id) -> TraceSpan

    Returns:
        list: CallPath sorted by frequency desc, then lexicographically
    """
    tally = Counter()
    for span in flagged:
        parent = all_spans.get((span.trace_id, span.parent_span_id)) if span.parent_span_id else None
        grandparent = parent.caller if parent is not None else ROOT
        tally[(grandparent, span.caller, span.callee)] += 1
    return [
        CallPath(*triple, frequency)
        for triple, frequency in sorted(tally.items(), key=lambda item: (-item[1], item[0]))
    ]


def render_traces(aggregates, paths, top_paths=10):
    if not aggregates:
        return NO_SLOW_SPANS
    lines = [aggregate.render() for aggregate in aggregates]
    lines.append("frequent high-latency paths:")
    lines.extend(path.render() for path in paths[:top_paths])
    return "\n".join(lines)


class TracesProcessor:
    """Describes the latency evidence of a bundle's spans"""

    def __init__(self, config=None):
        self.config = config or TracesConfig()
        self.logger = logging.getLogger(__name__)

    def process(self, bundle):
        thresholds, flagged = flag_high_latency(bundle.spans, self.config.percentile)
        origin = bundle.window.start if bundle.window else 0
        aggregates = aggregate_windows(flagged, self.config.window_seconds, origin)
        paths = extract_call_paths(flagged, bundle.span_index())
        self.logger.info(
            f"Flagged {len(flagged)} of {len(bundle.spans)} spans over {len(thresholds)} call types"
        )
        return TraceDescription(thresholds, tuple(flagged), tuple(aggregates), tuple(paths), self.config.top_paths)
