"""
Structured-response parsing for expert replies
"""
import re
import json
from dataclasses import dataclass
from typing import Tuple

from agents.profiles import Role, Task
from utils.errors import ParseError
from utils.timeparse import to_unix_seconds


_FENCE_RE = re.compile(r"```[ \t]*(?:json|JSON)?[ \t]*\n?(.*?)```", re.DOTALL)
_STEP_PREFIX_RE = re.compile(r"^\s*(?:(?:step\s*)?\d{1,3}\s*[.):]|[-*•])\s*", re.IGNORECASE)


@dataclass(frozen=True)
class AgentAnswer:
    role: Role
    task: Task
    answer: object
    rationale: Tuple[str, ...]
    raw_text: str

    def to_dict(self):
        return {
            "role": self.role.value,
            "task": self.task.value,
            "answer": self.answer,
            "rationale": list(self.rationale),
            "raw_text": self.raw_text,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            role=Role(data["role"]),
            task=Task(data["task"]),
            answer=data["answer"],
            rationale=tuple(data.get("rationale", ())),
            raw_text=data.get("raw_text", ""),
        )


def extract_json_block(raw):
    """
    Return (prose before the block, decoded object) for the last fenced block

    A bare trailing JSON object is accepted when no fence is present.

    Raises:
        ParseError: No block, or a block that is not a JSON object
    """
    if not raw or not raw.strip():
        raise ParseError("empty reply", raw)

    matches = list(_FENCE_RE.finditer(raw))
    if matches:
        last = matches[-1]
        prose, payload = raw[:last.start()], last.group(1)
    else:
        start = raw.rfind("{")
        if start < 0:
            raise ParseError("no machine-readable block found", raw)
        prose, payload = raw[:start], raw[start:]

    try:
        data = json.loads(payload.strip())
    except ValueError as e:
        raise ParseError(f"ill-formed json block: {e}", raw) from e
    if not isinstance(data, dict):
        raise ParseError("json block is not an object", raw)
    return prose, data


def split_rationale(prose):
    """Non-empty prose lines with list numbering stripped, in order"""
    steps = []
    for line in prose.splitlines():
        step = _STEP_PREFIX_RE.sub("", line).strip()
        if step:
            steps.append(step)
    return tuple(steps)


def coerce_answer(task, value, raw="", tz_name="UTC"):
    if task is Task.AD:
        try:
            return to_unix_seconds(value, tz_name)
        except ValueError as e:
            raise ParseError(f"bad {task.answer_field}: {e}", raw) from e
    if not isinstance(value, str) or not value.strip():
        raise ParseError(f"{task.answer_field} must be a non-empty string", raw)
    return value.strip()


def parse_structured(raw, task, role=None, tz_name="UTC"):
    """
    Parse an expert reply into an AgentAnswer

    Args:
        raw (str): The assistant text
        task (Task): Which answer field to read
        role (Role): Replying agent, defaults to the task's expert
        tz_name (str): Zone for naive AD datetimes

    Returns:
        AgentAnswer: Parsed answer; unknown block fields are ignored

    Raises:
        ParseError: Missing or ill-formed block, or missing answer field
    """
    prose, data = extract_json_block(raw)
    if task.answer_field not in data:
        raise ParseError(f"block lacks '{task.answer_field}'", raw)
    answer = coerce_answer(task, data[task.answer_field], raw, tz_name)
    return AgentAnswer(
        role=role or task.role,
        task=task,
        answer=answer,
        rationale=split_rationale(prose),
        raw_text=raw,
    )


def format_answer(answer):
    """Canonical raw form of an answer: numbered steps, then the fenced block"""
    steps = [f"{i}. {step}" for i, step in enumerate(answer.rationale, start=1)]
    block = json.dumps({answer.task.answer_field: answer.answer}, ensure_ascii=False)
    return "\n".join(steps + [f"```json\n{block}\n```"])
