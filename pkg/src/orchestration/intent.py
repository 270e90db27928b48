"""
Intent interpretation: analysis window and requested tasks from a free-text query

A regex pre-pass reads explicit datetimes, epoch ranges and task names; the
Intent Interpreter agent fills in whatever the pre-pass cannot decide. Where
both produce a value the pre-pass wins and the disagreement is recorded.
"""
import re
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from agents.backends import ChatParams
from agents.parsing import extract_json_block
from agents.profiles import DEFAULT_PROFILES, TASK_ORDER, Role, Task
from agents.prompts import render_intent_prompt
from telemetry.model import TimeWindow
from utils.errors import ParseError, UnanswerableQueryError
from utils.timeparse import parse_datetime_text, to_unix_seconds


logger = logging.getLogger(__name__)

_TZ = r"(?:Z|[+-]\d{2}:?\d{2})?"
_ISO_DATETIME_RE = re.compile(r"\b(\d{4}[-/]\d{2}[-/]\d{2})[ T](\d{1,2}:\d{2}(?::\d{2})?)" + _TZ)
_ISO_DATE_RE = re.compile(r"\b(\d{4})[-/](\d{2})[-/](\d{2})\b")
_MONTH_DATE_RE = re.compile(
    r"\b(January|February|March|April|May|June|July|August|September|October|November|December)"
    r"\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})\b",
    re.IGNORECASE,
)
_BARE_TIME_RE = re.compile(r"(?<![\d:])(\d{1,2}:\d{2}(?::\d{2})?)(?![\d:])")
_EPOCH_RE = re.compile(r"(?<!\d)(\d{10}|\d{13})(?!\d)")
_MONTHS = {
    name: index for index, name in enumerate(
        ("january", "february", "march", "april", "may", "june", "july",
         "august", "september", "october", "november", "december"),
        start=1,
    )
}
DAY_SECONDS = 86400

TASK_PATTERNS = {
    Task.AD: re.compile(
        r"occurrence (?:date)?time|\bwhen\b|what time|anomaly detection|\bAD\b|start(?:ing)? time",
        re.IGNORECASE,
    ),
    Task.FT: re.compile(
        r"failure type|type of (?:the )?failure|\breason\b|failure triage|\bFT\b", re.IGNORECASE
    ),
    Task.RCL: re.compile(
        r"\bcomponent\b|root cause locali[sz]ation|\bRCL\b|which (?:pod|service|node|host)", re.IGNORECASE
    ),
}


@dataclass(frozen=True)
class Intent:
    window: TimeWindow
    tasks: Tuple[Task, ...]
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.tasks:
            raise ValueError("An intent needs at least one task")

    def to_dict(self):
        return {
            "window": self.window.to_dict(),
            "tasks": [task.value for task in self.tasks],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            window=TimeWindow.from_dict(data["window"]),
            tasks=tuple(Task(task) for task in data["tasks"]),
            warnings=tuple(data.get("warnings", ())),
        )


@dataclass(frozen=True)
class PrePass:
    window: Optional[TimeWindow]
    tasks: Tuple[Task, ...]


def _ordered(tasks):
    return tuple(task for task in TASK_ORDER if task in tasks)


def _date_anchor(query):
    """Calendar date named in the query as YYYY-MM-DD, if any"""
    match = _ISO_DATE_RE.search(query)
    if match:
        return "-".join(match.groups())
    match = _MONTH_DATE_RE.search(query)
    if match:
        month = _MONTHS[match.group(1).lower()]
        return f"{int(match.group(3)):04d}-{month:02d}-{int(match.group(2)):02d}"
    return None


def _make_window(start, end, same_day=False):
    if same_day and end < start:
        end += DAY_SECONDS
    if end <= start:
        return None
    return TimeWindow(start, end)


def extract_window(query, tz_name="UTC"):
    """
    Recover an explicit window from the query text

    Recognised, in order: two full datetimes; one full datetime followed by a
    bare clock time on the same day ("10:00 and 11:00"); a calendar date with two
    bare clock times; two epoch values (seconds or milliseconds). Text that looks
    like a window but does not parse counts as no window.

    Returns:
        TimeWindow or None
    """
    try:
        return _explicit_window(query, tz_name)
    except ValueError as e:
        logger.warning(f"Ignoring unreadable window in query: {e}")
        return None


def _explicit_window(query, tz_name):
    full = list(_ISO_DATETIME_RE.finditer(query))
    if len(full) >= 2:
        start = parse_datetime_text(full[0].group(0), tz_name)
        end = parse_datetime_text(full[1].group(0), tz_name)
        return _make_window(start, end)

    if len(full) == 1:
        anchor = full[0]
        rest = query[anchor.end():]
        bare = _BARE_TIME_RE.search(rest)
        if bare:
            start = parse_datetime_text(anchor.group(0), tz_name)
            end = parse_datetime_text(f"{anchor.group(1)} {bare.group(1)}", tz_name)
            return _make_window(start, end, same_day=True)
        return None

    date = _date_anchor(query)
    if date:
        times = _BARE_TIME_RE.findall(query)
        if len(times) >= 2:
            start = parse_datetime_text(f"{date} {times[0]}", tz_name)
            end = parse_datetime_text(f"{date} {times[1]}", tz_name)
            return _make_window(start, end, same_day=True)
        return None

    epochs = _EPOCH_RE.findall(query)
    if len(epochs) >= 2:
        return _make_window(to_unix_seconds(epochs[0]), to_unix_seconds(epochs[1]))
    return None


def extract_tasks(query):
    return _ordered([task for task, pattern in TASK_PATTERNS.items() if pattern.search(query)])


def pre_pass(query, tz_name="UTC"):
    return PrePass(extract_window(query, tz_name), extract_tasks(query))


def _agent_intent(query, backend, tz_name):
    """
    Ask the Intent Interpreter; returns (window or None, tasks, warning or None)
    """
    messages = render_intent_prompt(DEFAULT_PROFILES[Role.INTENT_INTERPRETER], query)
    reply = backend.complete(messages, ChatParams(temperature=0.0, max_tokens=256), Role.INTENT_INTERPRETER)
    try:
        _, data = extract_json_block(reply)
    except ParseError as e:
        return None, (), f"intent interpreter reply unusable: {e}"

    window = None
    try:
        window = _make_window(to_unix_seconds(data["start"], tz_name), to_unix_seconds(data["end"], tz_name))
    except (KeyError, ValueError, TypeError):
        pass

    tasks = []
    raw_tasks = data.get("tasks") or []
    if isinstance(raw_tasks, list):
        for name in raw_tasks:
            try:
                tasks.append(Task(str(name).strip().upper()))
            except ValueError:
                continue
    return window, _ordered(tasks), None


def interpret_intent(query, backend, tz_name="UTC"):
    """
    Parse a query into an analysis window and the requested tasks

    Args:
        query (str): The on-call engineer's question
        backend (ChatBackend): Serves the Intent Interpreter call
        tz_name (str): Zone for datetimes without an offset

    Returns:
        Intent: Window, tasks and any precedence warnings

    Raises:
        UnanswerableQueryError: Neither path recovered a window
    """
    if not query or not query.strip():
        raise UnanswerableQueryError("empty query")

    explicit = pre_pass(query, tz_name)
    agent_window, agent_tasks, agent_warning = _agent_intent(query, backend, tz_name)
    warnings = [agent_warning] if agent_warning else []

    if explicit.window is not None:
        window = explicit.window
        if agent_window is not None and agent_window != window:
            warnings.append(
                f"interpreter window [{agent_window.start}, {agent_window.end}] overridden by "
                f"explicit window [{window.start}, {window.end}]"
            )
    elif agent_window is not None:
        window = agent_window
    else:
        raise UnanswerableQueryError(f"no analysis window recoverable from query: {query!r}")

    if explicit.tasks:
        tasks = explicit.tasks
        if agent_tasks and agent_tasks != tasks:
            warnings.append(
                f"interpreter tasks {[t.value for t in agent_tasks]} overridden by "
                f"explicit tasks {[t.value for t in tasks]}"
            )
    elif agent_tasks:
        tasks = agent_tasks
    else:
        tasks = TASK_ORDER
        warnings.append("no task recoverable from query; engaging all experts")

    for warning in warnings:
        logger.warning(warning)
    return Intent(window, tasks, tuple(warnings))
