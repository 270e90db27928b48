"""
Agent roles, tasks and the shipped agent profiles
"""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple


class Role(str, Enum):
    INTENT_INTERPRETER = "intent_interpreter"
    ORCHESTRATOR = "orchestrator"
    ANOMALY_SENTINEL = "anomaly_sentinel"
    FAILURE_DIAGNOSER = "failure_diagnoser"
    ROOT_DETECTIVE = "root_detective"

    def __str__(self):
        return self.value


class Task(str, Enum):
    """Diagnosis subtasks; `key` is the field name used in final answers"""

    AD = "AD"
    FT = "FT"
    RCL = "RCL"

    def __str__(self):
        return self.value

    @property
    def key(self):
        return _TASK_KEYS[self]

    @property
    def answer_field(self):
        return _ANSWER_FIELDS[self]

    @property
    def role(self):
        return _TASK_ROLES[self]


_TASK_KEYS = {Task.AD: "t", Task.FT: "c", Task.RCL: "r"}
_ANSWER_FIELDS = {
    Task.AD: "root_cause_occurrence_time",
    Task.FT: "failure_type",
    Task.RCL: "root_cause_component",
}
_TASK_ROLES = {
    Task.AD: Role.ANOMALY_SENTINEL,
    Task.FT: Role.FAILURE_DIAGNOSER,
    Task.RCL: Role.ROOT_DETECTIVE,
}

TASK_ORDER = (Task.AD, Task.FT, Task.RCL)
EXPERT_ROLES = tuple(task.role for task in TASK_ORDER)
TASK_FOR_ROLE = {task.role: task for task in TASK_ORDER}


def task_for_key(key):
    """Map a final-answer key (t / c / r) back to its task"""
    for task, task_key in _TASK_KEYS.items():
        if task_key == key:
            return task
    raise KeyError(f"Unknown answer key: {key}")


@dataclass(frozen=True)
class AgentProfile:
    name: str
    role: Role
    task_description: str
    instructions: str
    examples: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        for field_name in ("name", "task_description", "instructions"):
            if not getattr(self, field_name).strip():
                raise ValueError(f"Agent profile field '{field_name}' must be non-empty")
        if not isinstance(self.role, Role):
            raise ValueError(f"Unknown agent role: {self.role!r}")
        for example_input, example_output in self.examples:
            if not example_input.strip() or not example_output.strip():
                raise ValueError(f"Agent profile '{self.name}' has an empty example")


_EVIDENCE_RULES = (
    "Reason only over the METRICS, LOGS and TRACES descriptions you are given. "
    "Think step by step: write one numbered reasoning step per line, citing the evidence "
    "each step relies on, then end your reply with the fenced json block described under "
    "OUTPUT FORMAT."
)

DEFAULT_PROFILES = {
    Role.INTENT_INTERPRETER: AgentProfile(
        name="Intent Interpreter",
        role=Role.INTENT_INTERPRETER,
        task_description=(
            "Read an on-call engineer's incident query and extract the analysis time window "
            "and which diagnosis tasks are requested: AD (root cause occurrence time), "
            "FT (failure type) and RCL (root cause component)."
        ),
        instructions=(
            "Return the window as unix seconds. Only list tasks the query asks for. "
            "End with a fenced json block {\"start\": ..., \"end\": ..., \"tasks\": [...]}."
        ),
        examples=((
            "Between 2021-03-05 10:00 and 11:00 UTC one failure occurred. Find its root cause component.",
            "```json\n{\"start\": 1614938400, \"end\": 1614942000, \"tasks\": [\"RCL\"]}\n```",
        ),),
    ),
    Role.ORCHESTRATOR: AgentProfile(
        name="Orchestrator",
        role=Role.ORCHESTRATOR,
        task_description=(
            "Coordinate the expert agents and judge the quality of their reasoning chains."
        ),
        instructions=(
            "When judging, score consistency, clarity, relevance and rationality on a 0-5 "
            "scale (3 is neutral) and answer only in the requested format. When comparing two "
            "knowledge entries, answer with exactly one word: conflicting or complementary."
        ),
        examples=((
            "1. cpu_usage on pod-a spiked to 12σ at 10:05.\n2. pod-a logs show OOM errors.",
            "consistency: 4, clarity: 4, relevance: 5, rationality: 4",
        ),),
    ),
    Role.ANOMALY_SENTINEL: AgentProfile(
        name="Anomaly Sentinel",
        role=Role.ANOMALY_SENTINEL,
        task_description=(
            "Anomaly detection: find the root cause occurrence time, the earliest timestamp "
            "at which anomalous behaviour starts to manifest."
        ),
        instructions=_EVIDENCE_RULES + " Prefer the earliest strong deviation over the largest one.",
        examples=((
            "METRICS: pod-a, cpu_usage, level_shift_up: 1700000100, deviation_score = 14.2σ",
            "1. The earliest strong deviation is pod-a cpu_usage at 1700000100.\n"
            "```json\n{\"root_cause_occurrence_time\": 1700000100}\n```",
        ),),
    ),
    Role.FAILURE_DIAGNOSER: AgentProfile(
        name="Failure Diagnoser",
        role=Role.FAILURE_DIAGNOSER,
        task_description=(
            "Failure triage: select the most probable failure type from the candidate list."
        ),
        instructions=_EVIDENCE_RULES + " Answer with one label copied exactly from the candidates.",
        examples=((
            "METRICS: pod-a, memory_usage, steady_increase: 1700000100, deviation_score = 8.0σ",
            "1. Memory on pod-a grows steadily before the errors.\n"
            "```json\n{\"failure_type\": \"container memory load\"}\n```",
        ),),
    ),
    Role.ROOT_DETECTIVE: AgentProfile(
        name="Root Detective",
        role=Role.ROOT_DETECTIVE,
        task_description=(
            "Root cause localization: pick the most likely faulty component from the candidate list."
        ),
        instructions=_EVIDENCE_RULES + " Answer with one component copied exactly from the candidates.",
        examples=((
            "TRACES: [1700000100, 1700000160), cart, count = 12, max_latency = 900.0ms, callers = {web: 12}",
            "1. Latency concentrates on calls into cart.\n"
            "```json\n{\"root_cause_component\": \"cart\"}\n```",
        ),),
    ),
}
