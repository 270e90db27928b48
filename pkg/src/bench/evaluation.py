"""
Correct / Partial evaluation against ground truth
"""
import logging
from dataclasses import dataclass, field
from typing import Dict

from agents.profiles import Task
from utils.errors import DatasetError


logger = logging.getLogger(__name__)

AD_TOLERANCE_SECONDS = 60


@dataclass(frozen=True)
class EvalResult:
    per_case: Dict[str, Dict[Task, bool]] = field(default_factory=dict)
    correct_rate: float = 0.0
    partial_rate: float = 0.0
    n: int = 0
    runs: int = 1

    def to_dict(self):
        return {
            "per_case": {
                case_id: {task.value: ok for task, ok in marks.items()}
                for case_id, marks in sorted(self.per_case.items())
            },
            "correct_rate": self.correct_rate,
            "partial_rate": self.partial_rate,
            "n": self.n,
            "runs": self.runs,
        }


def is_correct(task, predicted, expected):
    """AD within ±60 s inclusive; FT and RCL exact after trimming, case-sensitive"""
    if predicted is None:
        return False
    if task is Task.AD:
        try:
            return abs(int(predicted) - int(expected)) <= AD_TOLERANCE_SECONDS
        except (TypeError, ValueError):
            return False
    if not isinstance(predicted, str):
        return False
    return predicted.strip() == str(expected).strip()


def score_case(final, truth):
    """Task -> correctness for every task the case asks for"""
    return {task: is_correct(task, final.get(task.key), truth.truth[task.key]) for task in truth.tasks}


def evaluate(predictions, truths):
    """
    Args:
        predictions (dict): case_id -> final answers {t?, c?, r?}
        truths (dict): case_id -> GroundTruth

    Returns:
        EvalResult: Correct = all requested tasks right, Partial = at least one right

    Raises:
        DatasetError: A prediction has no ground truth
    """
    missing = sorted(set(predictions) - set(truths))
    if missing:
        raise DatasetError(f"Predictions without ground truth: {', '.join(missing)}")

    per_case = {case_id: score_case(final, truths[case_id]) for case_id, final in predictions.items()}
    n = len(per_case)
    if n == 0:
        return EvalResult()
    num_correct = sum(1 for marks in per_case.values() if marks and all(marks.values()))
    num_partial = sum(1 for marks in per_case.values() if any(marks.values()))
    result = EvalResult(per_case, num_correct / n, num_partial / n, n)
    logger.info(f"Evaluated {n} cases: correct {result.correct_rate:.3f}, partial {result.partial_rate:.3f}")
    return result


def average_results(results):
    """Mean Correct / Partial over repeated runs"""
    results = list(results)
    if not results:
        raise ValueError("average_results needs at least one result")
    return EvalResult(
        per_case={},
        correct_rate=sum(r.correct_rate for r in results) / len(results),
        partial_rate=sum(r.partial_rate for r in results) / len(results),
        n=results[0].n,
        runs=len(results),
    )
