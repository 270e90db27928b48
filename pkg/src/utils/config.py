"""
Desk configuration: defaults, an optional YAML file and environment overrides
"""
import os
import logging
from dataclasses import dataclass, field, fields
from typing import Optional

import yaml

from agents.profiles import Role
from agents.prompts import LabelSpace
from evolution.reward import EvolveConfig
from knowledge.store import KnowledgeConfig
from orchestration.workflow import WorkflowConfig
from processors.logs_processor import Lexicon, LogsConfig
from processors.metrics_processor import MetricsConfig
from processors.template_miner import MinerConfig
from processors.traces_processor import TracesConfig
from utils.errors import ConfigError


ENV_ENDPOINT = "INCIDENT_DESK_ENDPOINT"
ENV_API_KEY = "INCIDENT_DESK_API_KEY"
ENV_MODEL = "INCIDENT_DESK_MODEL"
ENV_EMBEDDING_ENDPOINT = "INCIDENT_DESK_EMBEDDING_ENDPOINT"


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "http"
    endpoint: Optional[str] = None
    model: Optional[str] = None
    api_key: Optional[str] = None
    timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 1.0
    temperature: float = 0.0
    max_tokens: int = 1024
    seed: Optional[int] = None
    fixture: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("http", "scripted"):
            raise ValueError(f"backend.kind must be 'http' or 'scripted', got {self.kind!r}")
        if self.max_retries < 0:
            raise ValueError("backend.max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("backend.timeout must be positive")


@dataclass(frozen=True)
class TimeConfig:
    timezone: str = "UTC"


@dataclass(frozen=True)
class LoggingConfig:
    level: str = "INFO"
    file: Optional[str] = None

    def __post_init__(self):
        if not isinstance(logging.getLevelName(self.level.upper()), int):
            raise ValueError(f"Unknown logging.level {self.level!r}")


@dataclass(frozen=True)
class DeskConfig:
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    logs: LogsConfig = field(default_factory=LogsConfig)
    traces: TracesConfig = field(default_factory=TracesConfig)
    kb: KnowledgeConfig = field(default_factory=KnowledgeConfig)
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    workflow: WorkflowConfig = field(default_factory=WorkflowConfig)
    labels: LabelSpace = field(default_factory=LabelSpace)
    time: TimeConfig = field(default_factory=TimeConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


def _build(cls, section, values):
    """Instantiate a section dataclass, rejecting unknown keys and bad values"""
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigError(f"Config section '{section}' must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {', '.join(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid '{section}' settings: {e}") from e


def _logs_section(values):
    values = dict(values or {})
    miner_values = {key: values.pop(key) for key in ("depth", "sim_threshold", "max_children") if key in values}
    lexicon = values.pop("lexicon", None)
    miner = _build(MinerConfig, "logs", miner_values)
    try:
        values["lexicon"] = Lexicon.from_words(w.lower() for w in lexicon) if lexicon is not None else Lexicon()
    except (TypeError, ValueError, AttributeError) as e:
        raise ConfigError(f"Invalid 'logs.lexicon': {e}") from e
    values["miner"] = miner
    return _build(LogsConfig, "logs", values)


def _tuple_section(cls, section, values):
    values = {key: tuple(items or ()) for key, items in (values or {}).items()}
    return _build(cls, section, values)


def _evolve_section(values):
    values = dict(values or {})
    if "judge_role" in values:
        try:
            values["judge_role"] = Role(values["judge_role"])
        except ValueError as e:
            raise ConfigError(f"Invalid 'evolve.judge_role': {e}") from e
    return _build(EvolveConfig, "evolve", values)


def apply_environment(data, environ=None):
    """Overlay INCIDENT_DESK_* variables onto raw config data"""
    environ = os.environ if environ is None else environ
    data = {section: (dict(values) if isinstance(values, dict) else values) for section, values in data.items()}
    backend = data.get("backend") or {}
    kb = data.get("kb") or {}
    if environ.get(ENV_ENDPOINT):
        backend["endpoint"] = environ[ENV_ENDPOINT]
    if environ.get(ENV_API_KEY):
        backend["api_key"] = environ[ENV_API_KEY]
        kb.setdefault("api_key", environ[ENV_API_KEY])
    if environ.get(ENV_MODEL):
        backend["model"] = environ[ENV_MODEL]
    if environ.get(ENV_EMBEDDING_ENDPOINT):
        kb["embedding_endpoint"] = environ[ENV_EMBEDDING_ENDPOINT]
    if backend:
        data["backend"] = backend
    if kb:
        data["kb"] = kb
    return data


def config_from_dict(data):
    """
    Build a DeskConfig from raw (YAML-shaped) data

    Raises:
        ConfigError: Unknown sections or keys, or out-of-range values
    """
    data = data or {}
    unknown = sorted(set(data) - {f.name for f in fields(DeskConfig)})
    if unknown:
        raise ConfigError(f"Unknown config sections: {', '.join(unknown)}")
    return DeskConfig(
        metrics=_build(MetricsConfig, "metrics", data.get("metrics")),
        logs=_logs_section(data.get("logs")),
        traces=_build(TracesConfig, "traces", data.get("traces")),
        kb=_build(KnowledgeConfig, "kb", data.get("kb")),
        evolve=_evolve_section(data.get("evolve")),
        backend=_build(BackendConfig, "backend", data.get("backend")),
        workflow=_build(WorkflowConfig, "workflow", data.get("workflow")),
        labels=_tuple_section(LabelSpace, "labels", data.get("labels")),
        time=_build(TimeConfig, "time", data.get("time")),
        logging=_build(LoggingConfig, "logging", data.get("logging")),
    )


def load_config(path=None, environ=None):
    """
    Load configuration from an optional YAML file plus the environment

    Args:
        path (str): YAML file; defaults only when None
        environ (dict): Environment mapping, os.environ by default

    Returns:
        DeskConfig: Validated configuration
    """
    data = {}
    if path:
        if not os.path.isfile(path):
            raise ConfigError(f"Config file not found: {path}")
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = yaml.safe_load(fh) or {}
            except yaml.YAMLError as e:
                raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must hold a mapping")
    return config_from_dict(apply_environment(data, environ))
