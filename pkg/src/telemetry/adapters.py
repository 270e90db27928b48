"""
Format adapters mapping on-disk telemetry files to canonical rows

Every adapter yields, per data file, `(line_number, row)` pairs where `row` is a
dict with the canonical field names of its modality or the exception raised while
decoding that line.
"""
import os
import json
import logging

import pandas as pd

from utils.errors import DatasetError
from utils.file_utils import get_file_type, iter_jsonl


CANONICAL_FIELDS = {
    "metrics": ("ts", "instance", "metric", "value"),
    "logs": ("ts", "instance", "message"),
    "traces": ("ts", "trace_id", "span_id", "parent_span_id", "caller", "callee", "call_type", "latency_ms"),
}

ROOT_CALLER = "ROOT"


class FormatAdapter:
    """Base class for telemetry format adapters"""

    name = "base"
    SUPPORTED_EXTENSIONS = set()

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def discover(self, root_path):
        """
        List the data files this adapter can read under a directory

        Args:
            root_path (str): Dataset directory

        Returns:
            list: Sorted (modality, file_path) pairs
        """
        found = []
        for current_dir, dir_names, file_names in os.walk(root_path):
            dir_names.sort()
            for file_name in sorted(file_names):
                extension = os.path.splitext(file_name)[1][1:].lower()
                if extension not in self.SUPPORTED_EXTENSIONS:
                    continue
                file_path = os.path.join(current_dir, file_name)
                modality = get_file_type(file_path)
                if modality != "unknown":
                    found.append((modality, file_path))
        return found

    def rows(self, modality, file_path):
        raise NotImplementedError


class JsonlAdapter(FormatAdapter):
    """Canonical metrics.jsonl / logs.jsonl / traces.jsonl files"""

    name = "jsonl"
    SUPPORTED_EXTENSIONS = {"jsonl"}

    def rows(self, modality, file_path):
        for line_number, line in iter_jsonl(file_path):
            try:
                row = json.loads(line.decode("utf-8"))
                if not isinstance(row, dict):
                    raise ValueError("row is not a JSON object")
                yield line_number, row
            except ValueError as e:
                yield line_number, e


class OpenRcaCsvAdapter(FormatAdapter):
    """
    OPENRCA-style CSV exports

    metric files: timestamp, cmdb_id, kpi_name, value
    log files:    timestamp, cmdb_id, value (the raw line)
    trace files:  timestamp, cmdb_id, span_id, trace_id, parent_span|parent_id, duration, type

    Millisecond timestamps are scaled to seconds. The caller of a span is the
    cmdb_id of its parent span, or ROOT for entry spans.
    """

    name = "openrca"
    SUPPORTED_EXTENSIONS = {"csv"}

    def __init__(self, duration_scale=1.0):
        super().__init__()
        self.duration_scale = duration_scale

    @staticmethod
    def _seconds(value):
        number = float(value)
        if abs(number) >= 1e11:
            number /= 1000.0
        return int(number // 1)

    def rows(self, modality, file_path):
        try:
            frame = pd.read_csv(file_path, dtype=str, keep_default_na=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise DatasetError(f"Cannot read {file_path} with the '{self.name}' adapter: {e}") from e
        if modality == "metrics":
            yield from self._metric_rows(frame)
        elif modality == "logs":
            yield from self._log_rows(frame)
        elif modality == "traces":
            yield from self._trace_rows(frame)

    def _metric_rows(self, frame):
        for index, record in enumerate(frame.to_dict("records")):
            try:
                yield index + 2, {
                    "ts": self._seconds(record["timestamp"]),
                    "instance": record["cmdb_id"],
                    "metric": record["kpi_name"],
                    "value": record["value"],
                }
            except (KeyError, ValueError) as e:
                yield index + 2, ValueError(f"bad metric row: {e}")

    def _log_rows(self, frame):
        message_column = "value" if "value" in frame.columns else "message"
        for index, record in enumerate(frame.to_dict("records")):
            try:
                yield index + 2, {
                    "ts": self._seconds(record["timestamp"]),
                    "instance": record["cmdb_id"],
                    "message": record[message_column],
                }
            except (KeyError, ValueError) as e:
                yield index + 2, ValueError(f"bad log row: {e}")

    def _trace_rows(self, frame):
        parent_column = "parent_span" if "parent_span" in frame.columns else "parent_id"
        owner_of_span = {}
        if "span_id" in frame.columns and "cmdb_id" in frame.columns:
            owner_of_span = dict(zip(frame["span_id"], frame["cmdb_id"]))

        for index, record in enumerate(frame.to_dict("records")):
            try:
                parent_id = record.get(parent_column, "") or ""
                yield index + 2, {
                    "ts": self._seconds(record["timestamp"]),
                    "trace_id": record["trace_id"],
                    "span_id": record["span_id"],
                    "parent_span_id": parent_id,
                    "caller": owner_of_span.get(parent_id, ROOT_CALLER) if parent_id else ROOT_CALLER,
                    "callee": record["cmdb_id"],
                    "call_type": record.get("type") or "default",
                    "latency_ms": float(record["duration"]) * self.duration_scale,
                }
            except (KeyError, ValueError) as e:
                yield index + 2, ValueError(f"bad trace row: {e}")


DEFAULT_ADAPTERS = (JsonlAdapter(), OpenRcaCsvAdapter())


def get_adapter(name):
    """Look up a registered adapter by name"""
    for adapter in DEFAULT_ADAPTERS:
        if adapter.name == name:
            return adapter
    raise KeyError(f"Unknown telemetry adapter: {name}")
