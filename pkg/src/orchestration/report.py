"""
Root Cause Report: final answers plus every intermediate artifact of a diagnosis
"""
import os
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from agents.parsing import AgentAnswer
from agents.profiles import Role
from agents.prompts import ChatMessage, prompt_digest
from orchestration.intent import Intent
from utils.errors import DatasetError
from utils.file_utils import create_directory_if_not_exists, get_output_path


logger = logging.getLogger(__name__)

STAGES = ("intent", "symptoms", "initial", "review", "refine")


@dataclass(frozen=True)
class CallRecord:
    """One backend exchange; `seq` counts re-prompts within the same purpose"""

    stage: str
    round: int
    purpose: str
    seq: int
    role: Role
    messages: Tuple[ChatMessage, ...]
    response: str

    @property
    def prompt_digest(self):
        return prompt_digest(self.messages)

    def sort_key(self):
        return (STAGES.index(self.stage), self.round, self.purpose, self.seq)

    def to_dict(self):
        return {
            "stage": self.stage,
            "round": self.round,
            "purpose": self.purpose,
            "seq": self.seq,
            "role": self.role.value,
            "prompt_digest": self.prompt_digest,
            "messages": [message.to_wire() for message in self.messages],
            "response": self.response,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            stage=data["stage"],
            round=int(data["round"]),
            purpose=data["purpose"],
            seq=int(data["seq"]),
            role=Role(data["role"]),
            messages=tuple(ChatMessage.from_wire(m) for m in data["messages"]),
            response=data["response"],
        )


@dataclass(frozen=True)
class ReviewAdvice:
    reviewer: Role
    reviewee: Role
    advice: str
    round: int = 1

    def __post_init__(self):
        if self.reviewer == self.reviewee:
            raise ValueError("An agent cannot review itself")

    def to_dict(self):
        return {
            "reviewer": self.reviewer.value,
            "reviewee": self.reviewee.value,
            "advice": self.advice,
            "round": self.round,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(Role(data["reviewer"]), Role(data["reviewee"]), data["advice"], int(data.get("round", 1)))


def _answers_to_dict(answers):
    return {role.value: answer.to_dict() for role, answer in answers.items()}


def _answers_from_dict(data):
    return {Role(role): AgentAnswer.from_dict(answer) for role, answer in data.items()}


@dataclass(frozen=True)
class RootCauseReport:
    case_id: str
    query: str
    intent: Intent
    descriptions_digest: Dict[str, str]
    initial_answers: Dict[Role, AgentAnswer]
    review_advice: Tuple[ReviewAdvice, ...]
    refined_answers: Dict[Role, AgentAnswer]
    final: Dict[str, object]
    rounds: int
    attempt: int = 1
    feedback: Optional[str] = None
    symptom_keys: Dict[Role, str] = field(default_factory=dict)
    knowledge: Dict[Role, Tuple[str, ...]] = field(default_factory=dict)
    calls: Tuple[CallRecord, ...] = ()
    warnings: Tuple[str, ...] = ()
    confirmed: bool = False

    def __post_init__(self):
        if self.attempt < 1:
            raise ValueError("Report attempt numbers start at 1")

    @property
    def tasks(self):
        return self.intent.tasks

    @property
    def unanswered(self):
        return tuple(task for task in self.intent.tasks if self.final.get(task.key) is None)

    def answer_for(self, task):
        """Refined answer for a task's expert, or the initial one when never refined"""
        role = task.role
        return self.refined_answers.get(role) or self.initial_answers.get(role)

    def to_dict(self):
        return {
            "case_id": self.case_id,
            "query": self.query,
            "intent": self.intent.to_dict(),
            "descriptions_digest": dict(self.descriptions_digest),
            "initial_answers": _answers_to_dict(self.initial_answers),
            "review_advice": [advice.to_dict() for advice in self.review_advice],
            "refined_answers": _answers_to_dict(self.refined_answers),
            "final": dict(self.final),
            "rounds": self.rounds,
            "attempt": self.attempt,
            "feedback": self.feedback,
            "symptom_keys": {role.value: key for role, key in self.symptom_keys.items()},
            "knowledge": {role.value: list(items) for role, items in self.knowledge.items()},
            "calls": [call.to_dict() for call in self.calls],
            "warnings": list(self.warnings),
            "confirmed": self.confirmed,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                case_id=data["case_id"],
                query=data["query"],
                intent=Intent.from_dict(data["intent"]),
                descriptions_digest=dict(data["descriptions_digest"]),
                initial_answers=_answers_from_dict(data["initial_answers"]),
                review_advice=tuple(ReviewAdvice.from_dict(a) for a in data["review_advice"]),
                refined_answers=_answers_from_dict(data["refined_answers"]),
                final=dict(data["final"]),
                rounds=int(data["rounds"]),
                attempt=int(data["attempt"]),
                feedback=data.get("feedback"),
                symptom_keys={Role(r): k for r, k in data.get("symptom_keys", {}).items()},
                knowledge={Role(r): tuple(items) for r, items in data.get("knowledge", {}).items()},
                calls=tuple(CallRecord.from_dict(c) for c in data.get("calls", ())),
                warnings=tuple(data.get("warnings", ())),
                confirmed=bool(data.get("confirmed", False)),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise DatasetError(f"Malformed report: {e}") from e

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, indent=2)

    def render_text(self):
        """Human-readable report"""
        lines = [
            f"Root Cause Report - case {self.case_id}, attempt {self.attempt}",
            f"Query: {self.query}",
            f"Window: [{self.intent.window.start}, {self.intent.window.end}]",
            f"Tasks: {', '.join(task.value for task in self.tasks)}",
            "",
            "Final answers:",
        ]
        for task in self.tasks:
            value = self.final.get(task.key)
            lines.append(f"  {task.answer_field}: {'(unanswered)' if value is None else value}")
        if self.feedback:
            lines += ["", "Feedback:", self.feedback]
        for modality, text in self.descriptions_digest.items():
            lines += ["", f"{modality.upper()}:", text]
        for task in self.tasks:
            answer = self.answer_for(task)
            if answer is None:
                continue
            lines += ["", f"{task.role.value} reasoning:"]
            lines.extend(f"  {i}. {step}" for i, step in enumerate(answer.rationale, start=1))
        if self.review_advice:
            lines += ["", f"Cross-review ({self.rounds} round(s)):"]
            lines.extend(
                f"  [{a.round}] {a.reviewer.value} -> {a.reviewee.value}: {a.advice or '(no advice)'}"
                for a in self.review_advice
            )
        if self.warnings:
            lines += ["", "Warnings:"]
            lines.extend(f"  - {warning}" for warning in self.warnings)
        return "\n".join(lines) + "\n"

    def save(self, output_dir):
        """
        Write report.json and report.txt under <output_dir>/<case_id>/attempt-<n>/

        Returns:
            tuple: (json path, text path)
        """
        json_path = get_output_path(output_dir, self.case_id, self.attempt, "json")
        text_path = get_output_path(output_dir, self.case_id, self.attempt, "txt")
        create_directory_if_not_exists(os.path.dirname(json_path))
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(self.render_text())
        logger.info(f"Report saved to {json_path}")
        return json_path, text_path


def load_report(file_path):
    if not os.path.isfile(file_path):
        raise DatasetError(f"Report not found: {file_path}")
    with open(file_path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except ValueError as e:
            raise DatasetError(f"Report {file_path} is not valid JSON: {e}") from e
    return RootCauseReport.from_dict(data)
