"""
Deterministic symptom keys built from a window's descriptions
"""
from processors.template_miner import preprocess


NO_SYMPTOMS = "no anomalies observed"


def _metric_part(metrics, limit):
    return [
        f"{a.service_instance} {a.metric_name} {a.shape.value if a.shape else 'unclassified'}"
        for a in metrics.anomalies[:limit]
    ]


def _log_part(logs, limit):
    ranked = sorted(logs.retained, key=lambda item: (-item.score, item.template_id))
    seen = []
    for item in ranked:
        masked = " ".join(preprocess(item.entry.message))
        text = f"{item.entry.service_instance} {masked}"
        if text not in seen:
            seen.append(text)
        if len(seen) == limit:
            break
    return seen


def _trace_part(traces, limit):
    hottest = sorted(traces.aggregates, key=lambda a: (-a.count, a.callee, a.window_start))
    callees = []
    for aggregate in hottest:
        if aggregate.callee not in callees:
            callees.append(aggregate.callee)
    parts = [f"slow {callee}" for callee in callees[:limit]]
    parts.extend(f"{p.caller} -> {p.callee}" for p in traces.paths[:limit])
    return parts


def symptom_key(descriptions, limit=3):
    """
    Summarise the strongest evidence of each modality into one query string

    Args:
        descriptions (Descriptions): Output of the data processor
        limit (int): Items taken per modality

    Returns:
        str: e.g. "metrics: pod-a cpu_usage sudden_spike_up | traces: slow cart"
    """
    sections = []
    for label, items in (
        ("metrics", _metric_part(descriptions.metrics, limit)),
        ("logs", _log_part(descriptions.logs, limit)),
        ("traces", _trace_part(descriptions.traces, limit)),
    ):
        if items:
            sections.append(f"{label}: {'; '.join(items)}")
    return " | ".join(sections) or NO_SYMPTOMS
