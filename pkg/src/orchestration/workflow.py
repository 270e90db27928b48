"""
Diagnosis workflow: intent -> data processing -> expert fan-out -> cross-review -> report

Coordination is plain control logic. Experts run concurrently, but calls made on
behalf of one role are always issued in a fixed order so scripted backends replay
deterministically.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from agents.backends import ChatParams
from agents.parsing import extract_json_block, format_answer, parse_structured
from agents.profiles import DEFAULT_PROFILES, TASK_FOR_ROLE
from agents.prompts import (
    LabelSpace,
    PromptContext,
    output_format_for,
    render_prompt,
    render_reparse_request,
    render_review_prompt,
    render_symptom_prompt,
)
from knowledge.symptoms import symptom_key
from orchestration.intent import interpret_intent
from orchestration.report import CallRecord, ReviewAdvice, RootCauseReport
from processors.pipeline import MODALITIES, DataProcessor
from telemetry.model import slice_window
from utils.errors import BackendUnavailableError, ParseError


SUCCESS = "success"
FAILURE = "failure"

DIAGNOSED = "diagnosed"
CONFIRMED = "confirmed"
RETRIED = "retried"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class WorkflowConfig:
    max_rounds: int = 1
    max_attempts: int = 3
    parallel: bool = True
    use_knowledge: bool = True
    textual_descriptions: bool = True

    def __post_init__(self):
        if self.max_rounds < 0:
            raise ValueError("workflow.max_rounds must be >= 0")
        if self.max_attempts < 1:
            raise ValueError("workflow.max_attempts must be >= 1")


@dataclass(frozen=True)
class MitigationVerdict:
    outcome: str
    note: Optional[str] = None

    def __post_init__(self):
        if self.outcome not in (SUCCESS, FAILURE):
            raise ValueError(f"Verdict must be '{SUCCESS}' or '{FAILURE}', got {self.outcome!r}")


@dataclass(frozen=True)
class FeedbackOutcome:
    status: str
    reports: Tuple[RootCauseReport, ...]

    @property
    def latest(self):
        return self.reports[-1]


class AuditTrail:
    """Thread-safe collector of every backend exchange in one diagnosis"""

    def __init__(self, backend):
        self.backend = backend
        self._records = []
        self._lock = threading.Lock()

    def bind(self, stage, purpose, round_number=0):
        return _BoundBackend(self, stage, purpose, round_number)

    def add(self, record):
        with self._lock:
            self._records.append(record)

    def records(self):
        with self._lock:
            return tuple(sorted(self._records, key=CallRecord.sort_key))


class _BoundBackend:
    """Backend view that records each call under a fixed (stage, round, purpose)"""

    def __init__(self, trail, stage, purpose, round_number):
        self.trail = trail
        self.stage = stage
        self.purpose = purpose
        self.round_number = round_number
        self.seq = 0

    def complete(self, messages, params=ChatParams(), role=None):
        response = self.trail.backend.complete(messages, params, role)
        self.trail.add(CallRecord(
            stage=self.stage,
            round=self.round_number,
            purpose=self.purpose,
            seq=self.seq,
            role=role,
            messages=tuple(messages),
            response=response,
        ))
        self.seq += 1
        return response


def render_feedback(report, note=None):
    """FEEDBACK section text quoting the previous attempt's final answers"""
    lines = [f"The final answers of attempt {report.attempt} were incorrect: mitigation based on them failed."]
    for task in report.tasks:
        value = report.final.get(task.key)
        lines.append(f"previous {task.answer_field}: {'(unanswered)' if value is None else value}")
    if note:
        lines.append(f"operator note: {note}")
    lines.append("Re-examine the evidence and do not repeat an answer unless the evidence clearly supports it.")
    return "\n".join(lines)


class DiagnosisWorkflow:
    """Runs diagnoses for one backend, processor and knowledge-store set"""

    def __init__(self, backend, processor=None, kb_set=None, config=None, labels=None,
                 params=None, tz_name="UTC"):
        self.backend = backend
        self.processor = processor or DataProcessor()
        self.kb_set = kb_set
        self.config = config or WorkflowConfig()
        self.labels = labels or LabelSpace()
        self.params = params or ChatParams()
        self.tz_name = tz_name
        self.logger = logging.getLogger(__name__)

    def _map(self, func, items):
        items = list(items)
        if self.config.parallel and len(items) > 1:
            with ThreadPoolExecutor(max_workers=len(items)) as executor:
                return list(executor.map(func, items))
        return [func(item) for item in items]

    def _ask(self, bound, role, messages, warnings):
        """Complete and parse, re-prompting once on a parse failure; None when still unparseable"""
        task = TASK_FOR_ROLE[role]
        reply = bound.complete(messages, self.params, role)
        try:
            return parse_structured(reply, task, role, self.tz_name)
        except ParseError as e:
            self.logger.warning(f"{role.value}: unparseable reply ({e}); re-prompting once")
            retry = render_reparse_request(messages, reply, e)
            reply = bound.complete(retry, self.params, role)
        try:
            return parse_structured(reply, task, role, self.tz_name)
        except ParseError as e:
            warnings.append(f"{role.value}: no usable answer after re-prompt ({e})")
            self.logger.warning(warnings[-1])
            return None

    def _symptom_key(self, bound, role, context, template_key, warnings):
        """The expert's own symptom key; the template key stands in when the call fails or is unusable"""
        messages = render_symptom_prompt(DEFAULT_PROFILES[role], context, template_key)
        try:
            _, data = extract_json_block(bound.complete(messages, self.params, role))
            key = " ".join(str(data.get("symptoms") or "").split())
            if not key:
                raise ParseError("empty symptom key")
            return key
        except (BackendUnavailableError, ParseError) as e:
            warnings.append(f"{role.value}: template symptom key used ({e})")
            self.logger.warning(warnings[-1])
            return template_key

    def _contexts(self, roles, descriptions, feedback, trail, warnings):
        """Prompt context per engaged role, with knowledge retrieved by each role's symptom key"""
        texts = descriptions.texts()
        template_key = symptom_key(descriptions)
        contexts = {
            role: PromptContext(
                metrics=texts["metrics"],
                logs=texts["logs"],
                traces=texts["traces"],
                output_format=output_format_for(TASK_FOR_ROLE[role], self.labels),
                feedback=feedback,
            )
            for role in roles
        }
        keys = {role: template_key for role in roles}
        knowledge = {role: () for role in roles}
        if not self.config.use_knowledge or self.kb_set is None:
            return contexts, keys, knowledge

        def lookup(role):
            bound = trail.bind("symptoms", role.value)
            key = self._symptom_key(bound, role, contexts[role], template_key, warnings)
            return key, tuple(entry.render() for entry in self.kb_set[role].retrieve(key))

        for role, (key, retrieved) in zip(roles, self._map(lookup, roles)):
            keys[role] = key
            knowledge[role] = retrieved
            contexts[role] = replace(contexts[role], knowledge=retrieved)
        return contexts, keys, knowledge

    def cross_review(self, answers, contexts, trail, max_rounds=None, warnings=None):
        """
        Peer review among the answered experts

        Each round every agent advises each peer on its current answer, then every
        agent refines with the advice addressed to it. Stops early after a round in
        which no answer payload changed.

        Args:
            answers (dict): Role -> AgentAnswer (roles without an answer are skipped)
            contexts (dict): Role -> PromptContext
            trail (AuditTrail): Collects the calls
            max_rounds (int): Round cap, the configured value by default

        Returns:
            tuple: (list of ReviewAdvice, role -> refined AgentAnswer, rounds run)
        """
        max_rounds = self.config.max_rounds if max_rounds is None else max_rounds
        warnings = warnings if warnings is not None else []
        current = {role: answer for role, answer in answers.items() if answer is not None}
        participants = list(current)
        all_advice = []
        rounds = 0
        if len(participants) < 2:
            return all_advice, dict(current), rounds

        for round_number in range(1, max_rounds + 1):
            def advise(reviewer):
                given = []
                for reviewee in participants:
                    if reviewee == reviewer:
                        continue
                    messages = render_review_prompt(
                        DEFAULT_PROFILES[reviewer],
                        contexts[reviewer],
                        DEFAULT_PROFILES[reviewee].name,
                        format_answer(current[reviewee]),
                    )
                    bound = trail.bind("review", f"{reviewer.value}->{reviewee.value}", round_number)
                    try:
                        text = bound.complete(messages, self.params, reviewer).strip()
                    except BackendUnavailableError as e:
                        warnings.append(f"advice {reviewer.value} -> {reviewee.value} failed: {e}")
                        self.logger.warning(warnings[-1])
                        text = ""
                    given.append(ReviewAdvice(reviewer, reviewee, text, round_number))
                return given

            round_advice = [advice for batch in self._map(advise, participants) for advice in batch]
            all_advice.extend(round_advice)

            def refine(role):
                addressed = tuple(
                    f"{DEFAULT_PROFILES[a.reviewer].name}: {a.advice}"
                    for a in round_advice
                    if a.reviewee == role and a.advice
                )
                context = replace(contexts[role], review_advice=addressed, previous_answer=format_answer(current[role]))
                bound = trail.bind("refine", role.value, round_number)
                refined = self._ask(bound, role, render_prompt(DEFAULT_PROFILES[role], context), warnings)
                return refined if refined is not None else current[role]

            refined = dict(zip(participants, self._map(refine, participants)))
            rounds = round_number
            changed = any(refined[role].answer != current[role].answer for role in participants)
            current = refined
            if not changed:
                self.logger.info(f"Cross-review reached a fixed point after round {round_number}")
                break

        return all_advice, current, rounds

    def run_diagnosis(self, query, bundle, case_id="case", attempt=1, feedback=None, intent=None):
        """
        Diagnose one incident end to end

        Args:
            query (str): Natural-language incident query
            bundle (TelemetryBundle): Loaded telemetry
            case_id (str): Identifier used for output paths
            attempt (int): 1-based attempt number
            feedback (str): FEEDBACK section text for retries
            intent (Intent): Reuse a previous interpretation instead of asking again

        Returns:
            RootCauseReport: Final answers and every intermediate artifact
        """
        trail = AuditTrail(self.backend)
        if intent is None:
            intent = interpret_intent(query, trail.bind("intent", "intent"), self.tz_name)
        warnings = list(intent.warnings)

        sliced = slice_window(bundle, intent.window, warmup=self.processor.metrics.config.window)
        descriptions = self.processor.describe(sliced)
        roles = [task.role for task in intent.tasks]
        contexts, keys, knowledge = self._contexts(roles, descriptions, feedback, trail, warnings)

        def initial(role):
            messages = render_prompt(DEFAULT_PROFILES[role], contexts[role])
            return self._ask(trail.bind("initial", role.value), role, messages, warnings)

        initial_answers = dict(zip(roles, self._map(initial, roles)))
        advice, refined, rounds = self.cross_review(initial_answers, contexts, trail, warnings=warnings)

        final = {}
        for task in intent.tasks:
            answer = refined.get(task.role) or initial_answers.get(task.role)
            final[task.key] = answer.answer if answer is not None else None

        report = RootCauseReport(
            case_id=str(case_id),
            query=query,
            intent=intent,
            descriptions_digest={modality: descriptions.render(modality) for modality in MODALITIES},
            initial_answers={role: answer for role, answer in initial_answers.items() if answer is not None},
            review_advice=tuple(advice),
            refined_answers=refined if rounds else {},
            final=final,
            rounds=rounds,
            attempt=attempt,
            feedback=feedback,
            symptom_keys=keys,
            knowledge=knowledge,
            calls=trail.records(),
            warnings=tuple(sorted(warnings)),
        )
        self.logger.info(f"Case {case_id} attempt {attempt}: final {final} after {rounds} review round(s)")
        return report

    def apply_feedback(self, report, verdict, bundle, history=()):
        """
        Act on the operator's mitigation verdict

        Success confirms the report without new calls. Failure re-runs the diagnosis
        with a FEEDBACK section quoting the failed answers, until max_attempts
        reports exist; then the incident is unresolved.

        Args:
            report (RootCauseReport): Latest attempt
            verdict (MitigationVerdict): Operator outcome
            bundle (TelemetryBundle): Telemetry for a retry
            history (tuple): Earlier attempts' reports

        Returns:
            FeedbackOutcome: Status and every attempt's report
        """
        reports = tuple(history) + (report,)
        if verdict.outcome == SUCCESS:
            confirmed = replace(report, confirmed=True)
            return FeedbackOutcome(CONFIRMED, reports[:-1] + (confirmed,))

        if report.attempt >= self.config.max_attempts:
            self.logger.warning(f"Case {report.case_id}: {report.attempt} attempts failed, incident unresolved")
            return FeedbackOutcome(UNRESOLVED, reports)

        retry = self.run_diagnosis(
            report.query,
            bundle,
            case_id=report.case_id,
            attempt=report.attempt + 1,
            feedback=render_feedback(report, verdict.note),
            intent=report.intent,
        )
        return FeedbackOutcome(RETRIED, reports + (retry,))


class IncidentSession:
    """All attempts for one incident, driven by successive verdicts"""

    def __init__(self, workflow, query, bundle, case_id="case"):
        self.workflow = workflow
        self.query = query
        self.bundle = bundle
        self.case_id = str(case_id)
        self.reports = []
        self.status = None

    @property
    def latest(self):
        return self.reports[-1] if self.reports else None

    def start(self):
        self.reports = [self.workflow.run_diagnosis(self.query, self.bundle, self.case_id)]
        self.status = DIAGNOSED
        return self.latest

    def resume(self, reports):
        """Continue from previously saved attempts"""
        self.reports = list(reports)
        self.status = CONFIRMED if self.latest.confirmed else DIAGNOSED
        return self.latest

    def feedback(self, verdict):
        if not self.reports:
            raise ValueError("start() the session before giving feedback")
        if self.status in (CONFIRMED, UNRESOLVED):
            return FeedbackOutcome(self.status, tuple(self.reports))
        outcome = self.workflow.apply_feedback(self.latest, verdict, self.bundle, tuple(self.reports[:-1]))
        self.reports = list(outcome.reports)
        self.status = outcome.status
        return outcome
