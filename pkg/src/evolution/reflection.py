"""
Reflection: verified-correct diagnoses become knowledge entries
"""
import logging
from dataclasses import dataclass
from typing import Tuple

from agents.backends import ChatParams
from agents.parsing import extract_json_block, format_answer
from agents.profiles import DEFAULT_PROFILES, Role
from agents.prompts import render_reflection_prompt
from knowledge.store import UpsertResult
from utils.errors import BackendUnavailableError, ParseError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReflectionOutcome:
    results: Tuple[Tuple[Role, UpsertResult], ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def entries(self):
        return [result.entry for _, result in self.results]


def _digest(report):
    return "\n".join(f"{modality.upper()}:\n{text}" for modality, text in report.descriptions_digest.items())


def reflect(report, correctness, backend, kb_set, offline=False, params=None):
    """
    Distil each correct expert's trajectory into its own knowledge store

    Only confirmed reports reflect, unless `offline` says the correctness map came
    from ground truth. Tasks that are not correct write nothing.

    Args:
        report (RootCauseReport): The diagnosis
        correctness (dict): Task -> bool
        backend (ChatBackend): Serves the summary and reconciliation calls
        kb_set (KnowledgeBaseSet): Stores to write to
        offline (bool): Correctness comes from ground truth rather than a mitigation

    Returns:
        ReflectionOutcome: Upserts per role and any skip warnings
    """
    if not (report.confirmed or offline):
        logger.info(f"Case {report.case_id}: report not confirmed, nothing to reflect")
        return ReflectionOutcome()

    params = params or ChatParams(temperature=0.0, max_tokens=512)
    digest = _digest(report)
    results, warnings = [], []
    for task in report.tasks:
        answer = report.answer_for(task)
        if not correctness.get(task) or answer is None:
            continue
        role = task.role
        messages = render_reflection_prompt(DEFAULT_PROFILES[role], digest, answer.rationale, format_answer(answer))
        try:
            reply = backend.complete(messages, params, role)
            _, data = extract_json_block(reply)
        except (BackendUnavailableError, ParseError) as e:
            warnings.append(f"{role.value}: reflection skipped ({e})")
            logger.warning(warnings[-1])
            continue

        experience = str(data.get("experience") or "").strip()
        if not experience:
            warnings.append(f"{role.value}: reflection reply has no experience; skipped")
            logger.warning(warnings[-1])
            continue
        symptoms = str(data.get("symptoms") or "").strip() or report.symptom_keys.get(role, "")
        if not symptoms:
            warnings.append(f"{role.value}: no symptoms available; skipped")
            logger.warning(warnings[-1])
            continue

        store = kb_set[role]
        result = store.upsert(store.make_entry(symptoms, experience, report.case_id), backend)
        warnings.extend(result.warnings)
        results.append((role, result))

    return ReflectionOutcome(tuple(results), tuple(warnings))
