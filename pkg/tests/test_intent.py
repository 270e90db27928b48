import pytest

from agents.backends import ScriptedBackend
from agents.profiles import TASK_ORDER, Task
from conftest import QUERY, WINDOW, intent_reply
from orchestration.intent import Intent, extract_tasks, extract_window, interpret_intent
from telemetry.model import TimeWindow
from utils.errors import UnanswerableQueryError


def _interpreter(*replies):
    return ScriptedBackend({"intent_interpreter": list(replies)})


@pytest.mark.parametrize("query,expected", [
    (QUERY, WINDOW),
    ("From 2023-11-14 01:30 to 02:30 something broke", WINDOW),
    ("On November 14, 2023, between 01:30 and 02:30 the cart failed", WINDOW),
    ("On 2023/11/14 the window 01:30 - 02:30 is suspicious", WINDOW),
    (f"window {WINDOW.start} to {WINDOW.end}", WINDOW),
    (f"window {WINDOW.start * 1000} to {WINDOW.end * 1000}", WINDOW),
    ("Between 2023-11-14 23:30 and 00:30 the night job failed", TimeWindow(1700004600, 1700008200)),
])
def test_explicit_windows(query, expected):
    assert extract_window(query) == expected


def test_window_honours_explicit_offsets():
    window = extract_window("Between 2023-11-14T09:30:00+08:00 and 2023-11-14T10:30:00+08:00")
    assert window == WINDOW


def test_compact_offsets_parse_like_colon_offsets():
    compact = extract_window("Between 2021-03-05 10:00+0800 and 2021-03-05 11:00+0800 the cart failed")
    assert compact == TimeWindow(1614909600, 1614913200)
    assert compact == extract_window("Between 2021-03-05 10:00+08:00 and 2021-03-05 11:00+08:00")
    assert extract_window("Between 2021/03/05 10:00:00+0800 and 2021/03/05 11:00:00+0800") == compact


def test_unreadable_window_counts_as_missing():
    query = "Between 2023-11-14 25:61 and 2023-11-14 26:00 find the root cause component"
    assert extract_window(query) is None
    intent = interpret_intent(query, _interpreter(intent_reply(WINDOW, (Task.RCL,))))
    assert intent.window == WINDOW


def test_no_window_in_text():
    assert extract_window("Something failed this morning, find the root cause component") is None


@pytest.mark.parametrize("query,tasks", [
    (QUERY, TASK_ORDER),
    ("Which service is the root cause component?", (Task.RCL,)),
    ("When did it start and what is the failure type?", (Task.AD, Task.FT)),
])
def test_task_keywords(query, tasks):
    assert extract_tasks(query) == tasks


def test_pre_pass_and_agent_agree():
    intent = interpret_intent(QUERY, _interpreter(intent_reply()))
    assert intent == Intent(WINDOW, TASK_ORDER, ())


def test_pre_pass_overrides_agent_with_warnings():
    reply = intent_reply(TimeWindow(WINDOW.start, WINDOW.end + 600), (Task.RCL,))
    intent = interpret_intent(QUERY, _interpreter(reply))
    assert intent.window == WINDOW
    assert intent.tasks == TASK_ORDER
    assert len(intent.warnings) == 2
    assert "overridden by explicit window" in intent.warnings[0]


def test_agent_fills_missing_window():
    query = "The checkout flow broke this morning; find the root cause component."
    intent = interpret_intent(query, _interpreter(intent_reply(WINDOW, (Task.AD, Task.RCL))))
    assert intent.window == WINDOW
    assert intent.tasks == (Task.RCL,)


def test_no_tasks_anywhere_engages_every_expert():
    query = f"Something is wrong between {WINDOW.start} and {WINDOW.end}."
    intent = interpret_intent(query, _interpreter("I cannot tell."))
    assert intent.tasks == TASK_ORDER
    assert any("engaging all experts" in w for w in intent.warnings)
    assert any("interpreter reply unusable" in w for w in intent.warnings)


def test_unrecoverable_window_is_an_error():
    with pytest.raises(UnanswerableQueryError):
        interpret_intent("please help, the site is down", _interpreter('```json\n{"tasks": ["RCL"]}\n```'))
    with pytest.raises(UnanswerableQueryError):
        interpret_intent("   ", _interpreter())


def test_intent_dict_round_trip():
    intent = Intent(WINDOW, (Task.FT,), ("note",))
    assert Intent.from_dict(intent.to_dict()) == intent
