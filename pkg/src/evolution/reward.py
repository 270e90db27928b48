"""
Reward model: accuracy blended with judged reasoning quality
"""
from dataclasses import dataclass

from agents.profiles import Role
from utils.errors import ConfigError


CORRECT_REWARD = 5.0
SCORE_MAX = 5.0
DIMENSIONS = ("consistency", "clarity", "relevance", "rationality")


@dataclass(frozen=True)
class EvolveConfig:
    alpha: float = 0.5
    judge_role: Role = Role.ORCHESTRATOR
    reflect: bool = True
    export: bool = True
    rollouts_file: str = "rollouts.jsonl"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"evolve.alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class QualityScores:
    consistency: float = 0.0
    clarity: float = 0.0
    relevance: float = 0.0
    rationality: float = 0.0
    valid: bool = True

    def __post_init__(self):
        for name in DIMENSIONS:
            value = getattr(self, name)
            if not 0.0 <= value <= SCORE_MAX:
                raise ValueError(f"{name} score {value} outside [0, {SCORE_MAX}]")

    @property
    def mean(self):
        return sum(getattr(self, name) for name in DIMENSIONS) / len(DIMENSIONS)

    def to_dict(self):
        return {name: getattr(self, name) for name in DIMENSIONS}


@dataclass(frozen=True)
class Reward:
    accuracy_component: float
    quality_mean: float
    alpha: float
    value: float

    def to_dict(self):
        return {
            "accuracy_component": self.accuracy_component,
            "quality_mean": self.quality_mean,
            "alpha": self.alpha,
            "value": self.value,
        }


def compute_reward(correct, quality, alpha=0.5):
    """
    value = alpha * accuracy + (1 - alpha) * mean quality, accuracy being 5 or 0

    Args:
        correct (bool): Whether the agent's answer matched the ground truth
        quality (QualityScores): Judged reasoning quality
        alpha (float): Weight of the accuracy term, in [0, 1]

    Returns:
        Reward: The blended reward in [0, 5]

    Raises:
        ConfigError: If alpha is outside [0, 1]
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
    accuracy = CORRECT_REWARD if correct else 0.0
    quality_mean = quality.mean
    return Reward(accuracy, quality_mean, alpha, alpha * accuracy + (1.0 - alpha) * quality_mean)
