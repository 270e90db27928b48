import pytest

from agents.profiles import DEFAULT_PROFILES, EXPERT_ROLES, TASK_FOR_ROLE, AgentProfile, Role, Task, task_for_key
from agents.prompts import (
    ChatMessage,
    LabelSpace,
    PromptContext,
    output_format_for,
    prompt_digest,
    render_prompt,
    render_review_prompt,
)


def _context(**extra):
    base = dict(
        metrics="cart-0, cpu_usage, level_shift_up: 1700000000, deviation_score = 40.0σ",
        logs="1700000005, cart-0: connect fail to 10.0.0.1",
        traces="no high-latency spans",
        output_format=output_format_for(Task.RCL, LabelSpace(components=("cart", "checkout"))),
    )
    base.update(extra)
    return PromptContext(**base)


def _labels(message):
    return [line[4:] for line in message.content.splitlines() if line.startswith("### ")]


def test_minimal_prompt_has_four_sections_in_order():
    system, user = render_prompt(DEFAULT_PROFILES[Role.ROOT_DETECTIVE], _context())
    assert system.speaker == "system"
    assert "You are the Root Detective." in system.content
    assert _labels(user) == ["METRICS", "LOGS", "TRACES", "OUTPUT FORMAT"]


def test_optional_sections_slot_into_fixed_order():
    context = _context(
        knowledge=("symptoms: slow cart | experience: check redis",),
        review_advice=("Failure Diagnoser: look at the traces",),
        previous_answer="1. cart\n```json\n{\"root_cause_component\": \"cart\"}\n```",
        feedback="previous root_cause_component: checkout",
    )
    _, user = render_prompt(DEFAULT_PROFILES[Role.ROOT_DETECTIVE], context)
    assert _labels(user) == ["METRICS", "LOGS", "TRACES", "KNOWLEDGE", "REVIEW ADVICE", "FEEDBACK", "OUTPUT FORMAT"]
    assert "- Failure Diagnoser: look at the traces" in user.content
    assert "Refine your answer" in user.content


def test_rendering_is_deterministic():
    profile = DEFAULT_PROFILES[Role.ANOMALY_SENTINEL]
    first = render_prompt(profile, _context())
    second = render_prompt(profile, _context())
    assert first == second
    assert prompt_digest(first) == prompt_digest(second)
    assert prompt_digest(first) != prompt_digest(render_prompt(profile, _context(feedback="retry")))


def test_output_format_lists_candidates():
    text = output_format_for(Task.FT, LabelSpace(failure_types=("container CPU load", "network delay")))
    assert "container CPU load, network delay" in text
    assert '"failure_type"' in text
    assert "unix seconds" in output_format_for(Task.AD)


def test_review_prompt_quotes_peer():
    messages = render_review_prompt(
        DEFAULT_PROFILES[Role.FAILURE_DIAGNOSER], _context(), "Root Detective", "1. cart is slow"
    )
    assert _labels(messages[1]) == ["METRICS", "LOGS", "TRACES", "PEER ANSWER", "OUTPUT FORMAT"]
    assert "Root Detective answered:\n1. cart is slow" in messages[1].content


def test_chat_message_validation():
    assert ChatMessage.from_wire({"role": "user", "content": "hi"}).to_wire() == {"role": "user", "content": "hi"}
    with pytest.raises(ValueError):
        ChatMessage("tool", "x")
    with pytest.raises(ValueError):
        ChatMessage("user", "")


def test_profiles_cover_every_role():
    assert set(DEFAULT_PROFILES) == set(Role)
    assert [TASK_FOR_ROLE[role] for role in EXPERT_ROLES] == [Task.AD, Task.FT, Task.RCL]
    assert [task.key for task in Task] == ["t", "c", "r"]
    assert task_for_key("r") is Task.RCL
    with pytest.raises(KeyError):
        task_for_key("x")


def test_profile_validation():
    with pytest.raises(ValueError):
        AgentProfile("", Role.ROOT_DETECTIVE, "task", "do it", ())
    with pytest.raises(ValueError):
        AgentProfile("Detective", Role.ROOT_DETECTIVE, "task", "do it", (("input", " "),))
