"""
Training-free data processor: runs the three modality processors on one window
"""
import logging
from dataclasses import dataclass

from processors.logs_processor import LogsConfig, LogsProcessor
from processors.metrics_processor import MetricsConfig, MetricsProcessor
from processors.traces_processor import TracesConfig, TracesProcessor


MODALITIES = ("metrics", "logs", "traces")


@dataclass(frozen=True)
class Descriptions:
    """Structured results of the three processors plus their rendered texts"""

    metrics: object
    logs: object
    traces: object
    textual: bool = True

    def render(self, modality):
        if self.textual:
            return getattr(self, modality).render()
        return _RAW_RENDERERS[modality](getattr(self, modality))

    def texts(self):
        """modality -> rendered text, in METRICS / LOGS / TRACES order"""
        return {modality: self.render(modality) for modality in MODALITIES}


def _raw_metrics(description):
    if not description.anomalies:
        return "[]"
    return "\n".join(
        f"{{'instance': '{a.service_instance}', 'metric': '{a.metric_name}', "
        f"'timestamp': {a.timestamp}, 'value': {a.value!r}}}"
        for a in description.anomalies
    )


def _raw_logs(description):
    if not description.retained:
        return "[]"
    return "\n".join(
        f"{{'timestamp': {r.entry.timestamp}, 'instance': '{r.entry.service_instance}', "
        f"'message': {r.entry.message!r}}}"
        for r in description.retained
    )


def _raw_traces(description):
    if not description.flagged:
        return "[]"
    return "\n".join(
        f"{{'timestamp': {s.timestamp}, 'trace_id': '{s.trace_id}', 'caller': '{s.caller}', "
        f"'callee': '{s.callee}', 'call_type': '{s.call_type}', 'latency_ms': {s.latency_ms!r}}}"
        for s in description.flagged
    )


# evidence in record form, used when the textual descriptions are switched off
_RAW_RENDERERS = {"metrics": _raw_metrics, "logs": _raw_logs, "traces": _raw_traces}


class DataProcessor:
    """Facade over the metrics, logs and traces processors"""

    def __init__(self, metrics_config=None, logs_config=None, traces_config=None, textual=True):
        self.metrics = MetricsProcessor(metrics_config or MetricsConfig())
        self.logs = LogsProcessor(logs_config or LogsConfig())
        self.traces = TracesProcessor(traces_config or TracesConfig())
        self.textual = textual
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_config(cls, config):
        return cls(config.metrics, config.logs, config.traces, config.workflow.textual_descriptions)

    def describe(self, bundle):
        """
        Describe a sliced bundle

        Args:
            bundle (TelemetryBundle): Telemetry restricted to the analysis window

        Returns:
            Descriptions: Structured results and rendered texts
        """
        descriptions = Descriptions(
            metrics=self.metrics.process(bundle),
            logs=self.logs.process(bundle),
            traces=self.traces.process(bundle),
            textual=self.textual,
        )
        self.logger.info(f"Described window {bundle.window} ({'text' if self.textual else 'raw records'})")
        return descriptions
