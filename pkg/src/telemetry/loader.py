"""
Telemetry ingestion from a dataset directory
"""
import os
import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor

from telemetry.adapters import DEFAULT_ADAPTERS
from telemetry.model import (
    LogEntry,
    MetricSample,
    MetricSeries,
    SkippedRow,
    TelemetryBundle,
    TraceSpan,
)
from utils.errors import DatasetError


logger = logging.getLogger(__name__)

MAX_SKIP_RATIO = 0.10


def _timestamp(value):
    number = float(value)
    if number != int(number):
        raise ValueError(f"timestamp {value!r} is not whole seconds")
    return int(number)


def _text(row, field):
    value = row[field]
    if value is None:
        raise ValueError(f"field '{field}' is null")
    return str(value)


def record_from_row(modality, row):
    """
    Build a canonical record from a canonical row dict

    Raises:
        KeyError, TypeError, ValueError: For missing fields or values that break
            a record invariant (e.g. a non-finite metric value)
    """
    if modality == "metrics":
        return MetricSample(
            timestamp=_timestamp(row["ts"]),
            service_instance=_text(row, "instance"),
            metric_name=_text(row, "metric"),
            value=float(row["value"]),
        )
    if modality == "logs":
        return LogEntry(
            timestamp=_timestamp(row["ts"]),
            service_instance=_text(row, "instance"),
            message=_text(row, "message"),
        )
    if modality == "traces":
        return TraceSpan(
            timestamp=_timestamp(row["ts"]),
            trace_id=_text(row, "trace_id"),
            span_id=_text(row, "span_id"),
            parent_span_id=str(row.get("parent_span_id") or ""),
            caller=_text(row, "caller"),
            callee=_text(row, "callee"),
            call_type=_text(row, "call_type"),
            latency_ms=float(row["latency_ms"]),
        )
    raise ValueError(f"Unknown modality: {modality}")


def _load_file(adapter, modality, file_path, max_skip_ratio):
    records = []
    skipped = []
    total = 0
    for line_number, row in adapter.rows(modality, file_path):
        total += 1
        if isinstance(row, Exception):
            skipped.append(SkippedRow(file_path, line_number, str(row)))
            continue
        try:
            records.append((line_number, record_from_row(modality, row)))
        except (KeyError, TypeError, ValueError) as e:
            skipped.append(SkippedRow(file_path, line_number, f"{type(e).__name__}: {e}"))

    if total and len(skipped) / total > max_skip_ratio:
        raise DatasetError(
            f"{len(skipped)} of {total} rows in {file_path} could not be parsed "
            f"with the '{adapter.name}' adapter; is this the right format?"
        )
    if skipped:
        logger.warning(f"Skipped {len(skipped)} of {total} rows in {file_path}")
    return modality, records, skipped


def _group_series(samples, skipped):
    grouped = defaultdict(list)
    for (file_path, line_number), sample in samples:
        grouped[(sample.service_instance, sample.metric_name)].append((file_path, line_number, sample))

    series = []
    for key in sorted(grouped):
        members = sorted(grouped[key], key=lambda item: item[2].timestamp)
        kept = []
        for file_path, line_number, sample in members:
            if kept and kept[-1].timestamp == sample.timestamp:
                skipped.append(SkippedRow(file_path, line_number, f"duplicate timestamp {sample.timestamp} for {key}"))
                continue
            kept.append(sample)
        series.append(MetricSeries(key[0], key[1], tuple(kept)))
    return tuple(series)


def _unique_spans(located, skipped):
    """Keep the first occurrence of every (trace_id, span_id) in file order"""
    seen = set()
    spans = []
    for (file_path, line_number), span in sorted(located, key=lambda item: item[0]):
        key = (span.trace_id, span.span_id)
        if key in seen:
            skipped.append(SkippedRow(file_path, line_number, f"duplicate span_id {span.span_id} in trace {span.trace_id}"))
            continue
        seen.add(key)
        spans.append(span)
    return spans


def load_dataset(root_path, adapters=DEFAULT_ADAPTERS, max_skip_ratio=MAX_SKIP_RATIO, workers=4):
    """
    Load every telemetry file under a directory into one bundle

    Args:
        root_path (str): Dataset directory
        adapters (sequence): Format adapters to try; each claims the files it can read
        max_skip_ratio (float): Fraction of unparseable rows above which a file is fatal
        workers (int): Files parsed concurrently

    Returns:
        TelemetryBundle: Series grouped by (instance, metric) and sorted, logs and spans
            sorted by time; `skipped` lists every row that was not loaded

    Raises:
        DatasetError: Missing directory or a file with too many unparseable rows
    """
    if not os.path.isdir(root_path):
        raise DatasetError(f"Dataset directory not found: {root_path}")

    jobs = []
    for adapter in adapters:
        for modality, file_path in adapter.discover(root_path):
            jobs.append((adapter, modality, file_path))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda job: _load_file(*job, max_skip_ratio), jobs))

    samples, logs, spans, skipped = [], [], [], []
    for (_, _, file_path), (modality, records, file_skipped) in zip(jobs, results):
        skipped.extend(file_skipped)
        for line_number, record in records:
            if modality == "metrics":
                samples.append(((file_path, line_number), record))
            elif modality == "logs":
                logs.append(record)
            else:
                spans.append(((file_path, line_number), record))

    metrics = _group_series(samples, skipped)
    spans = _unique_spans(spans, skipped)
    logs.sort(key=lambda entry: (entry.timestamp, entry.service_instance))
    spans.sort(key=lambda span: (span.timestamp, span.trace_id, span.span_id))
    skipped.sort(key=lambda row: (row.file, row.line))

    logger.info(
        f"Loaded {len(metrics)} series, {len(logs)} log entries and {len(spans)} spans "
        f"from {root_path} ({len(skipped)} rows skipped)"
    )
    return TelemetryBundle(metrics=metrics, logs=tuple(logs), spans=tuple(spans), skipped=tuple(skipped))
