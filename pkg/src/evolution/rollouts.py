"""
Rollout export for external policy trainers

One line-delimited record per (case, run, attempt, engaged agent). Re-exporting the
same key never duplicates a record.
"""
import os
import logging
from dataclasses import dataclass
from typing import Tuple

from agents.profiles import Role
from agents.prompts import ChatMessage, prompt_digest
from evolution.reward import QualityScores, Reward, compute_reward
from utils.file_utils import read_jsonl, write_jsonl


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rollout:
    case_id: str
    attempt: int
    agent_role: Role
    prompt_messages: Tuple[ChatMessage, ...]
    response_text: str
    correct: bool
    quality: QualityScores
    reward: Reward
    run: int = 1

    @property
    def key(self):
        return (self.case_id, self.agent_role.value, self.run, self.attempt)

    def to_dict(self):
        return {
            "case_id": self.case_id,
            "run": self.run,
            "attempt": self.attempt,
            "agent_role": self.agent_role.value,
            "prompt_digest": prompt_digest(self.prompt_messages),
            "prompt_messages": [message.to_wire() for message in self.prompt_messages],
            "response_text": self.response_text,
            "correct": self.correct,
            "quality": self.quality.to_dict(),
            "quality_valid": self.quality.valid,
            "alpha": self.reward.alpha,
            "reward": self.reward.value,
        }


def final_trajectory(report, role):
    """The last call that produced the role's answer: latest refinement, else initial"""
    calls = [c for c in report.calls if c.role == role and c.stage in ("initial", "refine")]
    return calls[-1] if calls else None


def build_rollouts(report, correctness, qualities, alpha=0.5, run=1):
    """
    Args:
        report (RootCauseReport): One attempt
        correctness (dict): Task -> bool
        qualities (dict): Role -> QualityScores
        alpha (float): Accuracy weight
        run (int): 1-based repetition of the case within an evolve session

    Returns:
        list: Rollout per engaged agent that made a call
    """
    rollouts = []
    for task in report.tasks:
        role = task.role
        call = final_trajectory(report, role)
        if call is None:
            continue
        quality = qualities.get(role, QualityScores(valid=False))
        correct = bool(correctness.get(task))
        rollouts.append(Rollout(
            case_id=report.case_id,
            attempt=report.attempt,
            agent_role=role,
            prompt_messages=call.messages,
            response_text=call.response,
            correct=correct,
            quality=quality,
            reward=compute_reward(correct, quality, alpha),
            run=run,
        ))
    return rollouts


def export_rollouts(rollouts, out_path):
    """
    Append rollouts whose (case_id, agent_role, run, attempt) is not yet in the file

    Returns:
        int: Number of records written
    """
    existing = set()
    if os.path.isfile(out_path):
        existing = {(r["case_id"], r["agent_role"], r.get("run", 1), r["attempt"]) for r in read_jsonl(out_path)}
    fresh = []
    for rollout in sorted(rollouts, key=lambda r: (r.case_id, r.run, r.attempt, r.agent_role.value)):
        if rollout.key not in existing:
            existing.add(rollout.key)
            fresh.append(rollout.to_dict())
    written = write_jsonl(out_path, fresh, append=True) if fresh else 0
    logger.info(f"Exported {written} new rollouts to {out_path} ({len(rollouts) - written} already present)")
    return written
