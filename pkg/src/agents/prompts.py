"""
Prompt assembly for every agent call

All renderers are pure: identical inputs give byte-identical messages.
"""
import json
import hashlib
from dataclasses import dataclass
from typing import Optional, Tuple

from agents.profiles import Task


SPEAKERS = ("system", "user", "assistant")
SECTION_ORDER = ("METRICS", "LOGS", "TRACES", "KNOWLEDGE", "REVIEW ADVICE", "FEEDBACK", "OUTPUT FORMAT")


@dataclass(frozen=True)
class ChatMessage:
    speaker: str
    content: str

    def __post_init__(self):
        if self.speaker not in SPEAKERS:
            raise ValueError(f"Unknown speaker: {self.speaker!r}")
        if not self.content:
            raise ValueError("Chat message content must be non-empty")

    def to_wire(self):
        return {"role": self.speaker, "content": self.content}

    @classmethod
    def from_wire(cls, data):
        return cls(data["role"], data["content"])


@dataclass(frozen=True)
class PromptContext:
    """Everything an expert prompt can carry besides the profile"""

    metrics: str
    logs: str
    traces: str
    output_format: str
    knowledge: Tuple[str, ...] = ()
    review_advice: Tuple[str, ...] = ()
    previous_answer: Optional[str] = None
    feedback: Optional[str] = None


@dataclass(frozen=True)
class LabelSpace:
    failure_types: Tuple[str, ...] = ()
    components: Tuple[str, ...] = ()


def prompt_digest(messages):
    """sha256 over the wire form of a message list"""
    payload = json.dumps([m.to_wire() for m in messages], sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def render_system(profile):
    lines = [
        f"You are the {profile.name}.",
        f"Task: {profile.task_description}",
        f"Instructions: {profile.instructions}",
    ]
    if profile.examples:
        lines.append("Examples:")
        for example_input, example_output in profile.examples:
            lines.append(f"Input:\n{example_input}")
            lines.append(f"Output:\n{example_output}")
    return "\n".join(lines)


def render_sections(sections):
    """Join (label, body) pairs into the labelled user-message layout"""
    return "\n\n".join(f"### {label}\n{body}" for label, body in sections)


def output_format_for(task, labels=LabelSpace()):
    """The OUTPUT FORMAT section for one expert task"""
    if task is Task.AD:
        value = "<unix seconds>"
        note = "Give the root cause occurrence time in unix seconds."
    elif task is Task.FT:
        value = "\"<failure type>\""
        note = "Choose exactly one failure type" + (
            f" from: {', '.join(labels.failure_types)}." if labels.failure_types else "."
        )
    else:
        value = "\"<component>\""
        note = "Choose exactly one component" + (
            f" from: {', '.join(labels.components)}." if labels.components else "."
        )
    return (
        f"{note}\nWrite your numbered reasoning steps first, then end with:\n"
        f"```json\n{{\"{task.answer_field}\": {value}}}\n```"
    )


def render_prompt(profile, context):
    """
    Build the system + user messages for an expert call

    The user message holds labelled sections in the fixed order METRICS, LOGS,
    TRACES, KNOWLEDGE, REVIEW ADVICE, FEEDBACK, OUTPUT FORMAT; optional sections
    without content are left out entirely.

    Args:
        profile (AgentProfile): The calling agent
        context (PromptContext): Descriptions and optional extras

    Returns:
        list: Two ChatMessage objects
    """
    sections = [("METRICS", context.metrics), ("LOGS", context.logs), ("TRACES", context.traces)]
    if context.knowledge:
        sections.append(("KNOWLEDGE", "\n".join(f"- {item}" for item in context.knowledge)))
    if context.review_advice or context.previous_answer:
        advice_lines = []
        if context.previous_answer:
            advice_lines.append(f"Your previous answer:\n{context.previous_answer}")
        advice_lines.extend(f"- {advice}" for advice in context.review_advice)
        advice_lines.append("Refine your answer in accordance with the advice above.")
        sections.append(("REVIEW ADVICE", "\n".join(advice_lines)))
    if context.feedback:
        sections.append(("FEEDBACK", context.feedback))
    sections.append(("OUTPUT FORMAT", context.output_format))
    return [
        ChatMessage("system", render_system(profile)),
        ChatMessage("user", render_sections(sections)),
    ]


def render_review_prompt(profile, context, peer_name, peer_answer_text):
    """Ask `profile`'s agent for concise review advice on one peer's answer"""
    sections = [("METRICS", context.metrics), ("LOGS", context.logs), ("TRACES", context.traces)]
    if context.feedback:
        sections.append(("FEEDBACK", context.feedback))
    sections.append(("PEER ANSWER", f"{peer_name} answered:\n{peer_answer_text}"))
    sections.append((
        "OUTPUT FORMAT",
        f"Write concise review advice for the {peer_name}: point out overlooked or weak "
        "evidence, unclear reasoning that needs clarification, and plausible alternative "
        "hypotheses. Plain text, no json.",
    ))
    return [ChatMessage("system", render_system(profile)), ChatMessage("user", render_sections(sections))]


def render_symptom_prompt(profile, context, template_key):
    """Ask an expert for the symptom key its knowledge store is searched with"""
    sections = [
        ("METRICS", context.metrics),
        ("LOGS", context.logs),
        ("TRACES", context.traces),
        ("OUTPUT FORMAT",
         "Summarise the symptoms above that matter for your task as one line of short key "
         f"phrases, for example: {template_key}\n"
         "```json\n{\"symptoms\": \"<symptom key>\"}\n```"),
    ]
    return [ChatMessage("system", render_system(profile)), ChatMessage("user", render_sections(sections))]


def render_reparse_request(messages, raw_reply, error):
    """Follow-up turn asking the agent to restate an unparseable reply"""
    return list(messages) + [
        ChatMessage("assistant", raw_reply or "(empty reply)"),
        ChatMessage(
            "user",
            f"Your reply could not be parsed ({error}). Repeat your final answer, ending with "
            "the fenced json block exactly as described under OUTPUT FORMAT.",
        ),
    ]


def render_intent_prompt(profile, query):
    sections = [
        ("QUERY", query),
        ("OUTPUT FORMAT",
         "```json\n{\"start\": <unix seconds>, \"end\": <unix seconds>, \"tasks\": [\"AD\" | \"FT\" | \"RCL\", ...]}\n```"),
    ]
    return [ChatMessage("system", render_system(profile)), ChatMessage("user", render_sections(sections))]


def render_judge_prompt(profile, rationale):
    steps = "\n".join(f"{i}. {step}" for i, step in enumerate(rationale, start=1))
    sections = [
        ("REASONING CHAIN", steps),
        ("RUBRIC",
         "consistency: steps agree with one another and with the cited evidence\n"
         "clarity: readable, precise, unambiguous explanation\n"
         "relevance: steps use evidence that bears on the incident\n"
         "rationality: conclusions follow from the evidence"),
        ("OUTPUT FORMAT", "consistency: <0-5>, clarity: <0-5>, relevance: <0-5>, rationality: <0-5>"),
    ]
    return [ChatMessage("system", render_system(profile)), ChatMessage("user", render_sections(sections))]


def render_reflection_prompt(profile, descriptions_digest, rationale, answer_text):
    sections = [
        ("DESCRIPTIONS", descriptions_digest),
        ("RATIONALE", "\n".join(f"{i}. {step}" for i, step in enumerate(rationale, start=1)) or "(none)"),
        ("CONFIRMED ANSWER", answer_text),
        ("OUTPUT FORMAT",
         "This diagnosis was verified correct. Summarise it as reusable knowledge:\n"
         "```json\n{\"symptoms\": \"<characteristic symptoms>\", \"experience\": \"<what they indicate and how to confirm>\"}\n```"),
    ]
    return [ChatMessage("system", render_system(profile)), ChatMessage("user", render_sections(sections))]


def render_reconcile_prompt(profile, older, newer):
    sections = [
        ("EXISTING ENTRY", f"symptoms: {older.symptoms}\nexperience: {older.experience}"),
        ("NEW ENTRY", f"symptoms: {newer.symptoms}\nexperience: {newer.experience}"),
        ("OUTPUT FORMAT", "Answer with exactly one word: conflicting or complementary."),
    ]
    return [ChatMessage("system", render_system(profile)), ChatMessage("user", render_sections(sections))]
