"""
Orchestrator-as-judge scoring of one reasoning chain
"""
import re
import logging
from dataclasses import dataclass
from typing import Tuple

from agents.backends import ChatParams
from agents.profiles import DEFAULT_PROFILES, Role
from agents.prompts import ChatMessage, render_judge_prompt
from evolution.reward import DIMENSIONS, SCORE_MAX, QualityScores
from utils.errors import ParseError


logger = logging.getLogger(__name__)

_NUMBER = r"(-?\d+(?:\.\d+)?)"
_NAMED_RES = {name: re.compile(rf"{name}\s*[:=]?\s*{_NUMBER}", re.IGNORECASE) for name in DIMENSIONS}
_ANY_NUMBER_RE = re.compile(_NUMBER)


@dataclass(frozen=True)
class Judgement:
    scores: QualityScores
    raw_text: str = ""
    warnings: Tuple[str, ...] = ()


def parse_scores(text):
    """
    Read the four raw (unclamped) scores from a judge reply

    Named scores ("clarity: 4") take precedence; otherwise the first four numbers
    are read in consistency, clarity, relevance, rationality order.

    Raises:
        ParseError: Fewer than four scores found
    """
    named = {name: pattern.search(text) for name, pattern in _NAMED_RES.items()}
    if all(named.values()):
        return tuple(float(named[name].group(1)) for name in DIMENSIONS)
    numbers = _ANY_NUMBER_RE.findall(text)
    if len(numbers) >= len(DIMENSIONS):
        return tuple(float(n) for n in numbers[:len(DIMENSIONS)])
    raise ParseError("judge reply holds fewer than four scores", text)


def clamp_scores(values):
    """Clamp to [0, 5]; returns (QualityScores, warnings)"""
    clamped, warnings = [], []
    for name, value in zip(DIMENSIONS, values):
        bounded = min(max(value, 0.0), SCORE_MAX)
        if bounded != value:
            warnings.append(f"{name} score {value:g} clamped to {bounded:g}")
        clamped.append(bounded)
    return QualityScores(*clamped), warnings


def judge_quality(rationale, backend, judge_role=Role.ORCHESTRATOR, params=None):
    """
    Score a reasoning chain on consistency, clarity, relevance and rationality

    Args:
        rationale (list): Reasoning steps of one agent
        backend (ChatBackend): Serves the judge call
        judge_role (Role): Profile used as judge
        params (ChatParams): Sampling parameters

    Returns:
        Judgement: Scores in [0, 5]; all zero and invalid when the judge stays unparseable
    """
    params = params or ChatParams(temperature=0.0, max_tokens=64)
    if not rationale:
        warning = "empty rationale; not judged"
        logger.warning(warning)
        return Judgement(QualityScores(valid=False), "", (warning,))

    messages = render_judge_prompt(DEFAULT_PROFILES[judge_role], rationale)
    reply = backend.complete(messages, params, judge_role)
    try:
        values = parse_scores(reply)
    except ParseError as e:
        logger.warning(f"Judge reply unparseable ({e}); re-prompting once")
        retry = messages + [
            ChatMessage("assistant", reply or "(empty reply)"),
            ChatMessage("user", "Reply only as: consistency: <0-5>, clarity: <0-5>, relevance: <0-5>, rationality: <0-5>"),
        ]
        reply = backend.complete(retry, params, judge_role)
        try:
            values = parse_scores(reply)
        except ParseError:
            warning = "judge output unparseable after re-prompt; scores set to zero"
            logger.warning(warning)
            return Judgement(QualityScores(valid=False), reply, (warning,))

    scores, warnings = clamp_scores(values)
    for warning in warnings:
        logger.warning(warning)
    return Judgement(scores, reply, tuple(warnings))
