import random

import numpy as np
import pytest

from conftest import FAULT_TIME, WINDOW
from processors.metrics_processor import (
    NO_METRIC_ANOMALIES,
    MetricAnomaly,
    MetricsConfig,
    MetricsProcessor,
    aggregate_and_render,
    classify_shape,
    detect_anomalies,
)
from processors.shape_classifier import RuleShapeClassifier, ShapePattern, sign_agreement
from telemetry.model import MetricSample, MetricSeries, TelemetryBundle, TimeWindow, slice_window


def _series(values, warmup=0, instance="pod-a", metric="cpu_usage"):
    samples = tuple(MetricSample(i * 60, instance, metric, float(v)) for i, v in enumerate(values))
    return MetricSeries(instance, metric, samples[warmup:], samples[:warmup])


def _brute_force(values, window=60, min_history=10, threshold=3.0, cap=99.0):
    flagged = {}
    for index in range(min_history, len(values)):
        history = values[max(0, index - window):index]
        mu = sum(history) / len(history)
        sigma = (sum((x - mu) ** 2 for x in history) / len(history)) ** 0.5
        sigma_eff = max(sigma, 1e-6 * max(abs(mu), 1.0))
        score = abs(values[index] - mu) / sigma_eff
        if score > threshold:
            flagged[index * 60] = min(score, cap)
    return flagged


def test_detector_matches_brute_force():
    rng = np.random.RandomState(3)
    values = list(rng.normal(50.0, 2.0, 400))
    for index in (40, 75, 200, 333):
        values[index] += 25.0

    found = detect_anomalies(_series(values))
    expected = _brute_force(values)
    assert [a.timestamp for a in found] == sorted(expected)
    for anomaly in found:
        assert anomaly.deviation_score == pytest.approx(expected[anomaly.timestamp])


def test_detector_matches_brute_force_across_seeds():
    for seed in range(100):
        rng = np.random.RandomState(seed)
        values = list(rng.normal(rng.uniform(-50.0, 50.0), rng.uniform(0.5, 5.0), 120))
        for index in rng.choice(np.arange(10, 120), size=3, replace=False):
            values[index] += rng.uniform(-30.0, 30.0)

        found = detect_anomalies(_series(values))
        expected = _brute_force(values)
        assert [a.timestamp for a in found] == sorted(expected), f"seed {seed}"
        for anomaly in found:
            assert anomaly.deviation_score == pytest.approx(expected[anomaly.timestamp])


def test_false_positive_rate_stays_low_for_every_seed():
    for seed in range(10):
        values = np.random.RandomState(seed).normal(0.0, 1.0, 3000)
        found = detect_anomalies(_series(values))
        assert len(found) / len(values) <= 0.01, f"seed {seed}"


def test_exactly_three_sigma_is_not_flagged():
    history = [0.0, 2.0] * 5
    assert detect_anomalies(_series(history + [4.0])) == []
    flagged = detect_anomalies(_series(history + [4.001]))
    assert [a.timestamp for a in flagged] == [600]


def test_constant_history_caps_score():
    found = detect_anomalies(_series([5.0] * 30 + [6.0]))
    assert len(found) == 1
    assert found[0].deviation_score == 99.0


def test_short_series_yields_nothing():
    assert detect_anomalies(_series([1.0] * 10)) == []


def test_warmup_samples_are_history_only():
    values = [1.0, 1.1] * 10 + [50.0] + [1.0, 1.1] * 10
    # the spike sits in the warm-up part
    found = detect_anomalies(_series(values, warmup=25))
    assert all(a.timestamp >= 25 * 60 for a in found)
    assert 20 * 60 not in [a.timestamp for a in found]


def test_incident_fault_is_detected(bundle):
    processor = MetricsProcessor()
    sliced = slice_window(bundle, WINDOW, warmup=processor.config.window)
    description = processor.process(sliced)
    top = description.anomalies[0]
    assert (top.service_instance, top.metric_name) == ("cart-0", "cpu_usage")
    assert top.timestamp == FAULT_TIME
    assert top.shape is ShapePattern.LEVEL_SHIFT_UP
    assert description.top_pods[0][0] == "cart-0"
    assert "deviation_score" in description.render()


def test_aggregation_is_order_independent():
    anomalies = [
        MetricAnomaly("pod-a", "cpu", 60, 10.0, 1.0, ShapePattern.SUDDEN_SPIKE_UP),
        MetricAnomaly("pod-b", "mem", 120, 4.5, 1.0, ShapePattern.FLUCTUATION),
        MetricAnomaly("pod-c", "disk", 180, 3.5, 1.0, ShapePattern.FLUCTUATION),
        MetricAnomaly("pod-a", "mem", 240, 6.0, 1.0, ShapePattern.LEVEL_SHIFT_UP),
    ]
    expected = aggregate_and_render(anomalies, k=1)
    shuffled = list(anomalies)
    random.Random(5).shuffle(shuffled)
    assert aggregate_and_render(shuffled, k=1) == expected

    assert expected.top_pods == (("pod-a", 16.0),)
    assert expected.top_metrics == (("mem", 10.5),)
    # pod-a's anomalies plus every mem anomaly
    assert [a.timestamp for a in expected.anomalies] == [60, 240, 120]


def test_empty_description_renders_placeholder():
    assert aggregate_and_render([]).render() == NO_METRIC_ANOMALIES


def test_config_validation():
    with pytest.raises(ValueError):
        MetricsConfig(window=5, min_history=10)
    with pytest.raises(ValueError):
        MetricsConfig(score_cap=2.0)


def _shape_case(pattern, rng):
    pre = list(10.0 + rng.normal(0.0, 0.5, 30))
    noise = rng.normal(0.0, 0.1, 11)
    if pattern is ShapePattern.SUDDEN_SPIKE_UP:
        tail = [20.0] + list(10.0 + rng.normal(0.0, 0.5, 10))
    elif pattern is ShapePattern.SUDDEN_SPIKE_DOWN:
        tail = [0.0] + list(10.0 + rng.normal(0.0, 0.5, 10))
    elif pattern is ShapePattern.LEVEL_SHIFT_UP:
        tail = list(20.0 + rng.normal(0.0, 0.5, 11))
    elif pattern is ShapePattern.LEVEL_SHIFT_DOWN:
        tail = list(0.0 + rng.normal(0.0, 0.5, 11))
    elif pattern is ShapePattern.STEADY_INCREASE:
        tail = [10.0 + (k + 1) + noise[k] for k in range(11)]
    elif pattern is ShapePattern.STEADY_DECREASE:
        tail = [10.0 - (k + 1) + noise[k] for k in range(11)]
    else:
        tail = [10.5] + [10.0 + (3.0 if k % 2 else -3.0) + noise[k] for k in range(10)]
    series = _series(pre + tail)
    anomaly = MetricAnomaly("pod-a", "cpu_usage", 30 * 60, 5.0, tail[0])
    return series, anomaly


def test_shape_rules_are_accurate():
    rng = np.random.RandomState(21)
    hits = total = 0
    for pattern in ShapePattern:
        for _ in range(20):
            series, anomaly = _shape_case(pattern, rng)
            hits += classify_shape(series, anomaly) is pattern
            total += 1
    assert hits / total >= 0.95


def test_shape_context_pads_short_edges():
    series = _series([1.0, 1.0, 9.0])
    before, value, after = RuleShapeClassifier(pre=5, post=4).context(series, MetricAnomaly("pod-a", "cpu_usage", 120, 5.0, 9.0))
    assert list(before) == [1.0] * 5
    assert value == 9.0
    assert list(after) == [9.0] * 4


def test_sign_agreement():
    assert sign_agreement([1, 2, 3, 4]) == (1.0, 1)
    assert sign_agreement([4, 3, 2]) == (1.0, -1)
    assert sign_agreement([2, 2, 2]) == (0.0, 0)


def test_unknown_anomaly_timestamp_is_rejected():
    with pytest.raises(ValueError):
        classify_shape(_series([1.0, 2.0, 3.0]), MetricAnomaly("pod-a", "cpu_usage", 999, 5.0, 3.0))


def _planted_incident(rng, pods=10, metrics=("cpu_usage", "memory_usage", "net_in"), minutes=180, fault_minute=120):
    planted = f"pod-{rng.randint(pods)}"
    faulty_metric = metrics[rng.randint(len(metrics))]
    shift = rng.choice([-1.0, 1.0]) * rng.uniform(8.0, 15.0)
    series = []
    for pod in (f"pod-{i}" for i in range(pods)):
        for metric in metrics:
            base, scale = rng.uniform(10.0, 100.0), rng.uniform(0.5, 3.0)
            values = base + rng.normal(0.0, scale, minutes)
            if pod == planted and metric == faulty_metric:
                values[fault_minute:] += shift * scale
            samples = tuple(MetricSample(i * 60, pod, metric, float(v)) for i, v in enumerate(values))
            series.append(MetricSeries(pod, metric, samples))
    window = TimeWindow(90 * 60, 150 * 60)
    return TelemetryBundle(metrics=tuple(series), window=window), planted


def test_planted_fault_pod_ranks_in_top_five():
    processor = MetricsProcessor()
    hits = 0
    for seed in range(20):
        bundle, planted = _planted_incident(np.random.RandomState(seed))
        description = processor.process(slice_window(bundle, bundle.window, warmup=processor.config.window))
        hits += planted in [pod for pod, _ in description.top_pods[:5]]
    assert hits >= 19
