import pytest

from conftest import FAULT_TIME, INSTANCES, MINUTES, T0, WINDOW
from telemetry.adapters import OpenRcaCsvAdapter, get_adapter
from telemetry.loader import load_dataset
from telemetry.model import LogEntry, MetricSample, MetricSeries, TelemetryBundle, TimeWindow, TraceSpan, slice_window
from utils.errors import DatasetError
from utils.file_utils import write_jsonl


def _series(values, start=0, instance="pod-a", metric="cpu_usage"):
    samples = tuple(MetricSample(start + i * 60, instance, metric, float(v)) for i, v in enumerate(values))
    return MetricSeries(instance, metric, samples)


def test_load_groups_and_sorts(bundle):
    assert len(bundle.metrics) == len(INSTANCES) * 2
    keys = [series.key for series in bundle.metrics]
    assert keys == sorted(keys)
    assert all(len(series) == MINUTES for series in bundle.metrics)
    assert [e.timestamp for e in bundle.logs] == sorted(e.timestamp for e in bundle.logs)
    assert len(bundle.spans) == MINUTES * 2
    assert bundle.skipped == ()


def test_slice_window_keeps_warmup(bundle):
    sliced = slice_window(bundle, WINDOW, warmup=60)
    series = sliced.metrics[0]
    assert series.samples[0].timestamp == WINDOW.start
    assert series.samples[-1].timestamp == WINDOW.end
    assert len(series.warmup) == 60
    assert series.warmup[-1].timestamp == WINDOW.start - 60
    assert all(WINDOW.contains(e.timestamp) for e in sliced.logs)
    assert all(WINDOW.contains(s.timestamp) for s in sliced.spans)
    assert sliced.window == WINDOW


def test_slice_window_is_idempotent(bundle):
    once = slice_window(bundle, WINDOW)
    assert slice_window(once, WINDOW) == once


def test_window_edges_are_inclusive():
    window = TimeWindow(100, 200)
    assert window.contains(100) and window.contains(200)
    assert not window.contains(201)
    with pytest.raises(ValueError):
        TimeWindow(10, 5)


@pytest.mark.parametrize("value", [float("nan"), float("inf")])
def test_metric_sample_rejects_non_finite(value):
    with pytest.raises(ValueError):
        MetricSample(0, "pod-a", "cpu_usage", value)


def test_series_must_be_strictly_ascending():
    with pytest.raises(ValueError):
        MetricSeries("pod-a", "cpu", (MetricSample(60, "pod-a", "cpu", 1.0), MetricSample(60, "pod-a", "cpu", 2.0)))


def test_span_rejects_negative_latency():
    with pytest.raises(ValueError):
        TraceSpan(0, "t", "s", "", "a", "b", "http", -1.0)


def test_log_entry_needs_message():
    with pytest.raises(ValueError):
        LogEntry(0, "pod-a", "   ")


def test_bad_rows_are_skipped_and_reported(tmp_path):
    rows = [{"ts": i * 60, "instance": "pod-a", "metric": "cpu", "value": 1.0 + i} for i in range(20)]
    rows[3]["value"] = float("nan")
    write_jsonl(str(tmp_path / "metrics.jsonl"), rows)

    loaded = load_dataset(str(tmp_path))
    assert len(loaded.metrics[0]) == 19
    assert len(loaded.skipped) == 1
    assert loaded.skipped[0].line == 4


def test_duplicate_timestamps_are_skipped(tmp_path):
    rows = [{"ts": i * 60, "instance": "pod-a", "metric": "cpu", "value": 1.0} for i in range(20)]
    rows.append({"ts": 120, "instance": "pod-a", "metric": "cpu", "value": 9.0})
    write_jsonl(str(tmp_path / "metrics.jsonl"), rows)

    loaded = load_dataset(str(tmp_path))
    assert len(loaded.metrics[0]) == 20
    assert "duplicate timestamp" in loaded.skipped[0].reason


def test_mostly_broken_file_is_fatal(tmp_path):
    with open(tmp_path / "logs.jsonl", "w", encoding="utf-8") as fh:
        fh.write('{"ts": 1, "instance": "a", "message": "ok"}\n')
        fh.write("not json\n")
        fh.write("{broken\n")

    with pytest.raises(DatasetError):
        load_dataset(str(tmp_path))


def test_missing_directory_is_fatal(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(str(tmp_path / "nowhere"))


def test_openrca_csv_layout(tmp_path):
    with open(tmp_path / "metric_container.csv", "w", encoding="utf-8") as fh:
        fh.write("timestamp,cmdb_id,kpi_name,value\n")
        for i in range(12):
            fh.write(f"{(T0 + i * 60) * 1000},cart-0,cpu_usage,{30 + i}\n")
    with open(tmp_path / "trace_span.csv", "w", encoding="utf-8") as fh:
        fh.write("timestamp,cmdb_id,span_id,trace_id,duration,type,parent_span\n")
        fh.write(f"{T0},frontend,s1,t1,40,http,\n")
        fh.write(f"{T0 + 1},cart,s2,t1,900,rpc,s1\n")

    loaded = load_dataset(str(tmp_path))
    assert loaded.metrics[0].samples[0].timestamp == T0
    child = [span for span in loaded.spans if span.span_id == "s2"][0]
    assert child.caller == "frontend"
    assert child.callee == "cart"
    root = [span for span in loaded.spans if span.span_id == "s1"][0]
    assert root.caller == "ROOT"


def test_get_adapter_by_name():
    assert isinstance(get_adapter("openrca"), OpenRcaCsvAdapter)
    with pytest.raises(KeyError):
        get_adapter("parquet")


def test_time_range_covers_history():
    bundle = TelemetryBundle(metrics=(_series([1, 2, 3], start=FAULT_TIME),))
    assert bundle.time_range() == TimeWindow(FAULT_TIME, FAULT_TIME + 120)
    assert TelemetryBundle().time_range() is None


def test_invalid_utf8_row_is_skipped(tmp_path):
    rows = [{"ts": i * 60, "instance": "pod-a", "metric": "cpu", "value": 1.0 + i} for i in range(30)]
    write_jsonl(str(tmp_path / "metrics.jsonl"), rows)
    with open(tmp_path / "metrics.jsonl", "ab") as fh:
        fh.write(b'{"ts": 1800, "instance": "pod-\xff", "metric": "cpu", "value": 2.0}\n')

    loaded = load_dataset(str(tmp_path))
    assert len(loaded.metrics[0]) == 30
    assert len(loaded.skipped) == 1
    assert loaded.skipped[0].line == 31
    assert "utf-8" in loaded.skipped[0].reason


def test_malformed_csv_is_a_dataset_error(tmp_path):
    with open(tmp_path / "metric_container.csv", "w", encoding="utf-8") as fh:
        fh.write("timestamp,cmdb_id,kpi_name,value\n")
        for i in range(30):
            fh.write(f"{T0 + i * 60},cart-0,cpu_usage,{30 + i}\n")
        fh.write(f'{T0 + 1800},"cart-0,cpu_usage,1\n')

    with pytest.raises(DatasetError, match="openrca"):
        load_dataset(str(tmp_path))


def test_duplicate_span_ids_within_a_trace_are_skipped(tmp_path):
    rows = [
        {"ts": i, "trace_id": f"t{i}", "span_id": "s1", "parent_span_id": "",
         "caller": "frontend", "callee": "cart", "call_type": "http", "latency_ms": 10.0}
        for i in range(20)
    ]
    rows.append(dict(rows[4], ts=99, latency_ms=500.0))
    write_jsonl(str(tmp_path / "traces.jsonl"), rows)

    loaded = load_dataset(str(tmp_path))
    assert len(loaded.spans) == 20
    assert [s.latency_ms for s in loaded.spans if s.trace_id == "t4"] == [10.0]
    assert len(loaded.skipped) == 1
    assert loaded.skipped[0].line == 21
    assert "duplicate span_id s1 in trace t4" in loaded.skipped[0].reason
