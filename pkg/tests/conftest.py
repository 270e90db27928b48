"""
Shared fixtures: a small synthetic incident and scripted agent replies
"""
import json
import os
from dataclasses import dataclass
from typing import Dict

import numpy as np
import pytest

from agents.profiles import TASK_ORDER
from telemetry.model import TimeWindow
from utils.file_utils import write_jsonl


# 2023-11-14 00:00:00 UTC
T0 = 1699920000
STEP = 60
MINUTES = 180
FAULT_TIME = T0 + 120 * STEP
WINDOW = TimeWindow(T0 + 90 * STEP, T0 + 150 * STEP)
QUERY = (
    "Between 2023-11-14 01:30:00 and 2023-11-14 02:30:00 UTC one failure occurred. "
    "Find the root cause occurrence time, the failure type and the root cause component."
)
TRUTH = {"t": FAULT_TIME, "c": "container CPU load", "r": "cart"}
INSTANCES = ("cart-0", "checkout-0", "frontend-0")


@dataclass(frozen=True)
class Incident:
    data_dir: str
    window: TimeWindow
    fault_time: int
    query: str
    truth: Dict[str, object]


def write_incident(root, seed=7):
    """Three services; cart-0 CPU shifts up at FAULT_TIME and cart calls slow down"""
    rng = np.random.RandomState(seed)
    metrics, logs, traces = [], [], []
    for minute in range(MINUTES):
        ts = T0 + minute * STEP
        faulty = ts >= FAULT_TIME
        for instance in INSTANCES:
            cpu = 30.0 + rng.normal(0.0, 1.0)
            if faulty and instance == "cart-0":
                cpu += 40.0
            metrics.append({"ts": ts, "instance": instance, "metric": "cpu_usage", "value": round(cpu, 3)})
            memory = 500.0 + rng.normal(0.0, 5.0)
            metrics.append({"ts": ts, "instance": instance, "metric": "memory_usage", "value": round(memory, 3)})
            logs.append({"ts": ts, "instance": instance, "message": f"GET /api/items 200 in {10 + minute % 7}ms"})
        if faulty:
            logs.append({"ts": ts + 5, "instance": "cart-0", "message": f"connect fail to 10.0.0.{minute % 5}"})
        if minute % 15 == 0:
            logs.append({"ts": ts + 7, "instance": "frontend-0", "message": "error rendering widget"})

        trace_id = f"tr-{minute}"
        traces.append({
            "ts": ts, "trace_id": trace_id, "span_id": "s1", "parent_span_id": "",
            "caller": "frontend", "callee": "checkout", "call_type": "http",
            "latency_ms": round(40.0 + rng.uniform(0.0, 5.0), 3),
        })
        cart_latency = 900.0 + rng.uniform(0.0, 50.0) if faulty else 20.0 + rng.uniform(0.0, 5.0)
        traces.append({
            "ts": ts + 1, "trace_id": trace_id, "span_id": "s2", "parent_span_id": "s1",
            "caller": "checkout", "callee": "cart", "call_type": "rpc",
            "latency_ms": round(cart_latency, 3),
        })

    write_jsonl(os.path.join(root, "metrics.jsonl"), metrics)
    write_jsonl(os.path.join(root, "logs.jsonl"), logs)
    write_jsonl(os.path.join(root, "traces.jsonl"), traces)
    return root


@pytest.fixture
def incident(tmp_path):
    data_dir = write_incident(str(tmp_path / "data"))
    return Incident(data_dir, WINDOW, FAULT_TIME, QUERY, dict(TRUTH))


@pytest.fixture
def bundle(incident):
    from telemetry.loader import load_dataset

    return load_dataset(incident.data_dir)


def intent_reply(window=WINDOW, tasks=TASK_ORDER):
    block = json.dumps({"start": window.start, "end": window.end, "tasks": [task.value for task in tasks]})
    return f"The query names an explicit window.\n```json\n{block}\n```"


def expert_reply(task, value, steps=("The evidence points here.",)):
    lines = [f"{i}. {step}" for i, step in enumerate(steps, start=1)]
    block = json.dumps({task.answer_field: value})
    return "\n".join(lines + [f"```json\n{block}\n```"])


def symptom_reply(symptoms):
    return f"```json\n{json.dumps({'symptoms': symptoms})}\n```"


def scripted_responses(tasks=TASK_ORDER, answers=None, refined=None, rounds=1, attempts=1, intent=True,
                       symptoms=True):
    """
    role -> replies for `attempts` diagnoses of `tasks`

    Each engaged expert states its symptom key (unless `symptoms` is off), answers
    once, advises every peer each round and refines once per round. Retries reuse
    the first attempt's intent, so only one intent reply is queued.
    """
    answers = answers or TRUTH
    refined = refined or answers
    responses = {}
    if intent:
        responses["intent_interpreter"] = [intent_reply(tasks=tasks)]
    peers = len(tasks) - 1
    for task in tasks:
        replies = []
        for _ in range(attempts):
            if symptoms:
                replies.append(symptom_reply(f"{task.value}: cart-0 cpu level shift, slow cart calls"))
            replies.append(expert_reply(task, answers[task.key], (f"Initial look at {task.value} evidence.",)))
            if peers:
                for round_number in range(1, rounds + 1):
                    replies.extend(f"Round {round_number}: double-check the earliest deviation." for _ in range(peers))
                    replies.append(expert_reply(task, refined[task.key], (f"Refined {task.value} after review.",)))
        responses[task.role.value] = replies
    return responses

