"""
Benchmark cases with ground truth
"""
import os
from dataclasses import dataclass
from typing import Dict

from agents.profiles import TASK_ORDER, task_for_key
from telemetry.model import TimeWindow
from utils.errors import DatasetError
from utils.file_utils import read_jsonl, write_jsonl


@dataclass(frozen=True)
class GroundTruth:
    """One incident: its query, window and the true t / c / r values it asks for"""

    case_id: str
    query: str
    window: TimeWindow
    truth: Dict[str, object]

    def __post_init__(self):
        if not self.truth:
            raise ValueError(f"Case {self.case_id} has no ground-truth fields")
        for key in self.truth:
            task_for_key(key)

    @property
    def tasks(self):
        return tuple(task for task in TASK_ORDER if task.key in self.truth)

    def to_dict(self):
        return {
            "case_id": self.case_id,
            "query": self.query,
            "window": self.window.to_dict(),
            "truth": dict(self.truth),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            case_id=str(data["case_id"]),
            query=data["query"],
            window=TimeWindow.from_dict(data["window"]),
            truth=dict(data["truth"]),
        )


def load_cases(file_path):
    """
    Read cases.jsonl

    Raises:
        DatasetError: Missing file, malformed record or duplicate case id
    """
    if not os.path.isfile(file_path):
        raise DatasetError(f"Cases file not found: {file_path}")
    cases, seen = [], set()
    try:
        for record in read_jsonl(file_path):
            case = GroundTruth.from_dict(record)
            if case.case_id in seen:
                raise DatasetError(f"Duplicate case id {case.case_id} in {file_path}")
            seen.add(case.case_id)
            cases.append(case)
    except (KeyError, ValueError, TypeError) as e:
        raise DatasetError(f"Malformed case in {file_path}: {e}") from e
    return cases


def save_cases(file_path, cases):
    return write_jsonl(file_path, [case.to_dict() for case in cases])
