"""
Logs Processor Module for the incident desk

Keyword filtering, template mining, TF-IDF ranking over one-minute buckets,
percentile cut and earliest-instance deduplication.
"""
import math
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import FrozenSet, Tuple

from processors.template_miner import MinerConfig, mine_templates
from telemetry.model import LogEntry
from utils.stats import nearest_rank


NO_INCIDENT_LOGS = "no incident-indicative logs"
DEFAULT_KEYWORDS = frozenset({"fatal", "error", "crash", "fail", "exception", "panic", "timeout", "refused"})


@dataclass(frozen=True)
class Lexicon:
    keywords: FrozenSet[str] = DEFAULT_KEYWORDS

    def __post_init__(self):
        if not self.keywords:
            raise ValueError("the log lexicon needs at least one keyword")
        for keyword in self.keywords:
            if not keyword or keyword != keyword.lower():
                raise ValueError(f"lexicon keywords must be non-empty lowercase strings: {keyword!r}")

    @classmethod
    def from_words(cls, words):
        return cls(frozenset(words))


@dataclass(frozen=True)
class LogsConfig:
    lexicon: Lexicon = field(default_factory=Lexicon)
    miner: MinerConfig = field(default_factory=MinerConfig)
    threshold_pct: float = 80.0
    dedupe_seconds: int = 60
    bucket_seconds: int = 60

    def __post_init__(self):
        if not 0 < self.threshold_pct <= 100:
            raise ValueError("logs.threshold_pct must lie in (0, 100]")
        if self.dedupe_seconds < 0:
            raise ValueError("logs.dedupe_seconds must be >= 0")


@dataclass(frozen=True)
class TemplateStats:
    template_id: int
    tf: int
    idf: float
    score: float


@dataclass(frozen=True)
class RetainedLog:
    entry: LogEntry
    template_id: int
    score: float


@dataclass(frozen=True)
class LogDescription:
    retained: Tuple[RetainedLog, ...] = ()
    stats: Tuple[TemplateStats, ...] = ()
    threshold: float = 0.0

    def render(self):
        if not self.retained:
            return NO_INCIDENT_LOGS
        return "\n".join(
            f"{item.entry.timestamp}, {item.entry.service_instance}: {item.entry.message}"
            for item in self.retained
        )


def filter_keywords(entries, lexicon=Lexicon()):
    """Keep entries whose lowercased message contains any lexicon keyword"""
    keywords = sorted(lexicon.keywords)
    return [entry for entry in entries if any(k in entry.message.lower() for k in keywords)]


def template_stats(entries, assignment, window_start, window_end, bucket_seconds=60):
    """
    TF-IDF per template with one-minute buckets of the window as documents

    tf is the template's occurrence count, idf = ln((1 + B) / (1 + b)) + 1 where B is
    the number of buckets in the window and b the buckets containing the template.

    Returns:
        dict: template_id -> TemplateStats
    """
    bucket_count = (window_end - window_start) // bucket_seconds + 1
    tf = defaultdict(int)
    buckets = defaultdict(set)
    for entry, template_id in zip(entries, assignment):
        tf[template_id] += 1
        buckets[template_id].add((entry.timestamp - window_start) // bucket_seconds)

    stats = {}
    for template_id in sorted(tf):
        idf = math.log((1 + bucket_count) / (1 + len(buckets[template_id]))) + 1
        stats[template_id] = TemplateStats(template_id, tf[template_id], idf, tf[template_id] * idf)
    return stats


def deduplicate(items, dedupe_seconds=60):
    """
    Per template, keep the earliest entry of every cluster so kept entries are
    at least `dedupe_seconds` apart
    """
    last_kept = {}
    kept = []
    for item in sorted(items, key=lambda i: i.entry.timestamp):
        previous = last_kept.get(item.template_id)
        if previous is None or item.entry.timestamp - previous >= dedupe_seconds:
            kept.append(item)
            last_kept[item.template_id] = item.entry.timestamp
    return kept


def rank_and_select(entries, templates, assignment, cfg=None, window=None):
    """
    Rank templates by TF-IDF and keep deduplicated entries of the salient ones

    Args:
        entries (list): Keyword-filtered LogEntry objects
        templates (list): LogTemplate objects from mine_templates
        assignment (list): Template id per entry
        cfg (LogsConfig): Percentile and dedup settings
        window (TimeWindow): Analysis window; defaults to the entries' time span

    Returns:
        LogDescription: Retained raw entries sorted by timestamp
    """
    cfg = cfg or LogsConfig()
    if not templates or not entries:
        return LogDescription()

    start = window.start if window else min(e.timestamp for e in entries)
    end = window.end if window else max(e.timestamp for e in entries)
    stats = template_stats(entries, assignment, start, end, cfg.bucket_seconds)
    threshold = nearest_rank([s.score for s in stats.values()], cfg.threshold_pct)

    candidates = [
        RetainedLog(entry, template_id, stats[template_id].score)
        for entry, template_id in zip(entries, assignment)
        if stats[template_id].score >= threshold
    ]
    retained = deduplicate(candidates, cfg.dedupe_seconds)
    retained.sort(key=lambda item: (item.entry.timestamp, item.template_id))
    return LogDescription(tuple(retained), tuple(stats.values()), threshold)


class LogsProcessor:
    """Turns raw log entries into the incident-indicative log description"""

    def __init__(self, config=None):
        """Initialize the logs processor"""
        self.config = config or LogsConfig()
        self.logger = logging.getLogger(__name__)

    def process(self, bundle):
        filtered = filter_keywords(bundle.logs, self.config.lexicon)
        templates, assignment = mine_templates(filtered, self.config.miner)
        description = rank_and_select(filtered, templates, assignment, self.config, bundle.window)
        self.logger.info(
            f"Kept {len(filtered)} of {len(bundle.logs)} log entries by keyword, "
            f"mined {len(templates)} templates, retained {len(description.retained)}"
        )
        return description
