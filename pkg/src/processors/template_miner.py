"""
Log template mining on the drain3 fixed-depth parse tree

Digit-bearing tokens are masked to <*> before mining, so numbers, addresses
and durations never split a template.
"""
from dataclasses import dataclass
from typing import Tuple

from drain3 import TemplateMiner as DrainTemplateMiner
from drain3.masking import LogMasker, MaskingInstruction
from drain3.template_miner_config import TemplateMinerConfig

WILDCARD = "<*>"
_DIGIT_TOKENS = MaskingInstruction(r"\S*\d\S*", "*")


@dataclass(frozen=True)
class MinerConfig:
    depth: int = 4
    sim_threshold: float = 0.4
    max_children: int = 100

    def __post_init__(self):
        if self.depth < 3:
            raise ValueError("logs.depth must be at least 3")
        if not 0.0 <= self.sim_threshold <= 1.0:
            raise ValueError("logs.sim_threshold must lie in [0, 1]")
        if self.max_children < 2:
            raise ValueError("logs.max_children must be at least 2")

    def to_drain(self):
        config = TemplateMinerConfig()
        config.profiling_enabled = False
        config.drain_depth = self.depth
        config.drain_sim_th = self.sim_threshold
        config.drain_max_children = self.max_children
        config.masking_instructions = [_DIGIT_TOKENS]
        return config


@dataclass(frozen=True)
class LogTemplate:
    template_id: int
    tokens: Tuple[str, ...]
    count: int

    @property
    def text(self):
        return " ".join(self.tokens)


_masker = LogMasker([_DIGIT_TOKENS], "<", ">")


def preprocess(message):
    """Whitespace tokens with every digit-bearing token masked as <*>"""
    return _masker.mask(message).split() or [message]


class TemplateMiner:
    """Single-pass miner; results depend only on the input order"""

    def __init__(self, config=None):
        self.config = config or MinerConfig()
        self._miner = DrainTemplateMiner(config=self.config.to_drain())

    def add(self, message):
        """
        Assign a message to a template, creating or generalising templates as needed

        Returns:
            int: The template id, counted from 0 in order of first appearance
        """
        result = self._miner.add_log_message(message)
        return result["cluster_id"] - 1

    def templates(self):
        clusters = sorted(self._miner.drain.clusters, key=lambda c: c.cluster_id)
        return [
            LogTemplate(cluster.cluster_id - 1, tuple(cluster.log_template_tokens), cluster.size)
            for cluster in clusters
        ]


def mine_templates(entries, cfg=None):
    """
    Mine templates over log entries in their given order

    Args:
        entries (list): LogEntry objects, normally keyword-filtered
        cfg (MinerConfig): Tree depth, similarity threshold and fan-out cap

    Returns:
        tuple: (templates, assignment) where assignment[i] is the template id of entries[i]
    """
    miner = TemplateMiner(cfg)
    assignment = [miner.add(entry.message) for entry in entries]
    return miner.templates(), assignment
