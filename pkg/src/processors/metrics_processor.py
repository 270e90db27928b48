"""
Metrics Processor Module for the incident desk

Sliding-window 3-sigma detection, shape labelling and top-k aggregation into
`<service_instance, metric_name, anomaly_pattern: timestamp, deviation_score = kσ>`
records.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from processors.shape_classifier import RuleShapeClassifier, ShapePattern


NO_METRIC_ANOMALIES = "no metric anomalies detected"


@dataclass(frozen=True)
class MetricsConfig:
    window: int = 60
    threshold: float = 3.0
    min_history: int = 10
    score_cap: float = 99.0
    top_k: int = 5
    shape_pre: int = 20
    shape_post: int = 10

    def __post_init__(self):
        if not self.window >= self.min_history >= 2:
            raise ValueError("metrics config needs window >= min_history >= 2")
        if self.score_cap <= self.threshold:
            raise ValueError("metrics.score_cap must exceed metrics.threshold")
        if self.top_k < 1:
            raise ValueError("metrics.top_k must be positive")


@dataclass(frozen=True)
class MetricAnomaly:
    service_instance: str
    metric_name: str
    timestamp: int
    deviation_score: float
    value: float
    shape: Optional[ShapePattern] = None

    def render(self):
        shape = self.shape.value if self.shape else "unclassified"
        return (
            f"{self.service_instance}, {self.metric_name}, {shape}: "
            f"{self.timestamp}, deviation_score = {self.deviation_score:.1f}σ"
        )

    def sort_key(self):
        return (-self.deviation_score, self.service_instance, self.metric_name, self.timestamp)


@dataclass(frozen=True)
class MetricsDescription:
    top_pods: Tuple[Tuple[str, float], ...] = ()
    top_metrics: Tuple[Tuple[str, float], ...] = ()
    anomalies: Tuple[MetricAnomaly, ...] = ()

    @property
    def lines(self):
        return tuple(anomaly.render() for anomaly in self.anomalies)

    def render(self):
        if not self.anomalies:
            return NO_METRIC_ANOMALIES
        pods = ", ".join(f"{name} ({score:.1f})" for name, score in self.top_pods)
        metrics = ", ".join(f"{name} ({score:.1f})" for name, score in self.top_metrics)
        return "\n".join((f"top pods: {pods}", f"top metrics: {metrics}") + self.lines)


def _trailing_stats(values, index, window):
    history = values[max(0, index - window):index]
    return float(np.mean(history)), float(np.std(history))


def detect_anomalies(series, cfg=MetricsConfig()):
    """
    Flag in-window samples deviating more than `threshold` sigma from their trailing window

    For sample x_t with at least `min_history` predecessors, mu and sigma (population)
    are taken over the up-to-W preceding samples, x_t excluded. The sample is flagged
    iff |x_t - mu| / sigma_eff > threshold, where
    sigma_eff = max(sigma, 1e-6 * max(|mu|, 1)); the score is capped at `score_cap`.

    Args:
        series (MetricSeries): The series; warm-up samples only serve as history
        cfg (MetricsConfig): Detector configuration

    Returns:
        list: MetricAnomaly objects without shapes, in time order
    """
    history = series.history()
    if len(history) < cfg.min_history + 1:
        return []

    values = np.asarray([s.value for s in history], dtype=float)
    first_candidate = max(len(series.warmup), cfg.min_history)
    indices = np.arange(first_candidate, len(values))
    if indices.size == 0:
        return []

    means = np.empty(indices.size)
    stds = np.empty(indices.size)
    full = indices >= cfg.window
    if full.any():
        # row j of the view is values[j:j+W]; index i needs values[i-W:i]
        windows = sliding_window_view(values, cfg.window)[indices[full] - cfg.window]
        means[full] = windows.mean(axis=1)
        stds[full] = windows.std(axis=1)
    for position in np.flatnonzero(~full):
        means[position], stds[position] = _trailing_stats(values, indices[position], cfg.window)

    deviations = np.abs(values[indices] - means)
    sigma_eff = np.maximum(stds, 1e-6 * np.maximum(np.abs(means), 1.0))
    scores = deviations / sigma_eff

    anomalies = []
    for position in np.flatnonzero(scores > cfg.threshold):
        sample = history[indices[position]]
        anomalies.append(MetricAnomaly(
            service_instance=series.service_instance,
            metric_name=series.metric_name,
            timestamp=sample.timestamp,
            deviation_score=float(min(scores[position], cfg.score_cap)),
            value=sample.value,
        ))
    return anomalies


def classify_shape(series, anomaly, classifier=None, pre=20, post=10):
    """Label an anomaly with one of the seven shape patterns"""
    classifier = classifier or RuleShapeClassifier(pre=pre, post=post)
    return classifier.classify(series, anomaly)


def _top_k(scores, k):
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return tuple((name, float(score)) for name, score in ranked[:k])


def aggregate_and_render(anomalies, k=5):
    """
    Select the top-k pods and top-k metrics by summed deviation score

    Rendered records are the anomalies of a top pod OR a top metric, sorted by
    score descending; ties are broken by name ascending.

    Args:
        anomalies (list): Shape-labelled MetricAnomaly objects
        k (int): How many pods and metrics to keep

    Returns:
        MetricsDescription: Order-independent of the input order
    """
    if not anomalies:
        return MetricsDescription()

    ordered = sorted(anomalies, key=MetricAnomaly.sort_key)
    pod_scores = defaultdict(float)
    metric_scores = defaultdict(float)
    for anomaly in ordered:
        pod_scores[anomaly.service_instance] += anomaly.deviation_score
        metric_scores[anomaly.metric_name] += anomaly.deviation_score

    top_pods = _top_k(pod_scores, k)
    top_metrics = _top_k(metric_scores, k)
    pod_names = {name for name, _ in top_pods}
    metric_names = {name for name, _ in top_metrics}
    selected = tuple(
        a for a in ordered if a.service_instance in pod_names or a.metric_name in metric_names
    )
    return MetricsDescription(top_pods=top_pods, top_metrics=top_metrics, anomalies=selected)


class MetricsProcessor:
    """Runs detection, shape labelling and aggregation over every series of a bundle"""

    def __init__(self, config=None, classifier=None):
        """Initialize the metrics processor"""
        self.config = config or MetricsConfig()
        self.classifier = classifier or RuleShapeClassifier(self.config.shape_pre, self.config.shape_post)
        self.logger = logging.getLogger(__name__)

    def detect(self, series_list):
        """Detect and label anomalies over a list of series"""
        labelled = []
        for series in series_list:
            for anomaly in detect_anomalies(series, self.config):
                labelled.append(replace(anomaly, shape=classify_shape(series, anomaly, self.classifier)))
        labelled.sort(key=MetricAnomaly.sort_key)
        return labelled

    def process(self, bundle):
        """
        Describe the metric evidence of a (sliced) bundle

        Args:
            bundle (TelemetryBundle): Telemetry restricted to the analysis window

        Returns:
            MetricsDescription: The top-k description
        """
        anomalies = self.detect(bundle.metrics)
        description = aggregate_and_render(anomalies, self.config.top_k)
        self.logger.info(
            f"Detected {len(anomalies)} metric anomalies across {len(bundle.metrics)} series, "
            f"rendering {len(description.anomalies)}"
        )
        return description
