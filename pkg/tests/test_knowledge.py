import itertools

import numpy as np
import pytest

from agents.backends import ScriptedBackend
from agents.profiles import Role
from conftest import WINDOW
from knowledge.embedding import HashingEmbedder, HttpEmbedder, build_embedder, cosine, embed
from knowledge.store import (
    INSERTED,
    MERGED,
    REPLACED,
    KnowledgeBase,
    KnowledgeBaseSet,
    KnowledgeConfig,
)
from knowledge.symptoms import NO_SYMPTOMS, symptom_key
from processors.pipeline import DataProcessor
from telemetry.model import TelemetryBundle, slice_window
from utils.errors import ConfigError, DatasetError
from utils.file_utils import write_jsonl


def _ticking_clock(start=1000):
    counter = itertools.count(start)
    return lambda: next(counter)


def _store(role=Role.ROOT_DETECTIVE, **config):
    return KnowledgeBase(role, config=KnowledgeConfig(**config), clock=_ticking_clock())


class _FakeResponse:

    def __init__(self, payload):
        self.payload = payload

    def raise_for_status(self):
        pass

    def json(self):
        return self.payload


class _FakeSession:

    def __init__(self, payload):
        self.payload = payload
        self.posted = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.posted.append(json)
        return _FakeResponse(self.payload)


def test_hashing_embedder_is_unit_and_order_invariant():
    embedder = HashingEmbedder(64)
    a = embedder.encode("slow cart calls, cart CPU high")
    b = embedder.encode("cart CPU high; slow cart calls")
    assert len(a) == 64
    assert np.linalg.norm(a) == pytest.approx(1.0)
    assert cosine(a, b) == pytest.approx(1.0)
    assert embedder.encode("") == tuple([0.0] * 64)
    assert cosine(a, embedder.encode("")) == 0.0
    assert embed("slow cart calls, cart CPU high", embedder) == a


def test_http_embedder_checks_dimension():
    embedder = HttpEmbedder("http://embed.local/v1/embeddings", "e5", dim=3)
    embedder.session = _FakeSession({"data": [{"embedding": [3.0, 4.0, 0.0]}]})
    assert embedder.encode("cart") == pytest.approx((0.6, 0.8, 0.0))
    assert embedder.session.posted == [{"model": "e5", "input": "cart"}]

    embedder.session = _FakeSession({"data": [{"embedding": [1.0, 0.0]}]})
    with pytest.raises(ConfigError):
        embedder.encode("cart")


def test_build_embedder():
    assert isinstance(build_embedder(KnowledgeConfig(dim=32)), HashingEmbedder)
    with pytest.raises(ConfigError):
        build_embedder(KnowledgeConfig(provider="word2vec"))
    with pytest.raises(ConfigError):
        build_embedder(KnowledgeConfig(provider="http"))


def test_insert_then_replace_duplicate():
    store = _store()
    first = store.upsert(store.make_entry("slow cart calls", "cart is the root cause", "c1"))
    second = store.upsert(store.make_entry("slow cart calls", "cart is the root cause", "c2"))
    assert first.outcome == INSERTED
    assert second.outcome == REPLACED
    assert [e.case_id for e in store.entries] == ["c2"]


def test_complementary_entries_merge_with_provenance():
    store = _store()
    store.upsert(store.make_entry("slow cart calls", "check the cart pod CPU", "c1"))
    result = store.upsert(store.make_entry("slow cart calls", "check redis connections from cart", "c2"))
    assert result.outcome == MERGED
    assert len(store) == 1
    assert store.entries[0].experience == "[case c1] check the cart pod CPU\n[case c2] check redis connections from cart"
    assert len(result.displaced) == 1


@pytest.mark.parametrize("verdict,outcome", [("conflicting", REPLACED), ("Complementary.", MERGED)])
def test_orchestrator_classifies_near_duplicates(verdict, outcome):
    store = _store()
    store.upsert(store.make_entry("slow cart calls", "cart is the root cause", "c1"))
    backend = ScriptedBackend({"orchestrator": [verdict]})
    result = store.upsert(store.make_entry("slow cart calls", "checkout is the root cause", "c2"), backend)
    assert result.outcome == outcome
    assert result.warnings == ()
    assert backend.calls[0][0] == "orchestrator"


def test_ambiguous_verdict_falls_back():
    store = _store()
    store.upsert(store.make_entry("slow cart calls", "a", "c1"))
    backend = ScriptedBackend({"orchestrator": ["conflicting or complementary, hard to say"]})
    result = store.upsert(store.make_entry("slow cart calls", "b", "c2"), backend)
    assert result.outcome == MERGED
    assert "fallback" in result.warnings[0]


def test_distinct_symptoms_are_both_kept():
    store = _store()
    store.upsert(store.make_entry("slow cart calls", "x", "c1"))
    store.upsert(store.make_entry("memory leak on payment pod", "y", "c2"))
    assert len(store) == 2


def test_retrieval_matches_brute_force():
    store = _store(tau_min=0.0, top_k=3)
    texts = [
        "slow cart calls", "cart cpu spike", "checkout errors", "payment timeout",
        "redis connection refused", "frontend latency", "cart memory growth",
    ]
    for index, text in enumerate(texts):
        store.upsert(store.make_entry(text, f"experience {index}", f"c{index}"))

    query = "cart latency and cpu"
    q = store.embedder.encode(query)
    expected = sorted(store.entries, key=lambda e: (-cosine(q, e.embedding), -e.created_at))[:3]
    assert store.retrieve(query) == expected


VOCABULARY = ("cart", "checkout", "cpu", "memory", "latency", "timeout", "redis", "refused", "spike", "shift")


def _random_text(rng, low=1, high=4):
    return " ".join(rng.choice(VOCABULARY, size=rng.randint(low, high)))


def test_retrieval_matches_oracle_on_random_store():
    rng = np.random.RandomState(17)
    store = _store(top_k=5)
    store._entries = [store.make_entry(_random_text(rng), f"experience {i}", f"c{i}") for i in range(50)]

    for _ in range(20):
        query = _random_text(rng, 1, 5)
        tau_min = float(rng.uniform(0.0, 0.8))
        q = store.embedder.encode(query)
        ranked = sorted(
            ((e, cosine(q, e.embedding)) for e in store.entries),
            key=lambda pair: (-pair[1], -pair[0].created_at),
        )
        expected = [entry for entry, similarity in ranked if similarity >= tau_min][:5]
        assert store.retrieve(query, tau_min=tau_min) == expected


def test_retrieval_threshold_and_tie_break():
    store = _store(tau_min=0.5)
    store.upsert(store.make_entry("cart slow", "older", "c1"))
    store.upsert(store.make_entry("unrelated payment issue", "other", "c2"))
    assert store.retrieve("completely different words") == []

    twin = _store(tau_min=0.0, tau_same=1.0)
    twin._entries = [twin.make_entry("cart slow", "older", "c1"), twin.make_entry("cart slow", "newer", "c2")]
    assert [e.experience for e in twin.retrieve("cart slow")] == ["newer", "older"]


def test_compact_reconciles_loaded_duplicates(tmp_path):
    store = _store()
    entries = [store.make_entry("slow cart calls", "same", f"c{i}") for i in range(3)]
    path = str(tmp_path / "root_detective.jsonl")
    write_jsonl(path, [e.to_dict() for e in entries])
    store.load(path)
    assert len(store) == 3
    assert store.compact() == 2
    assert store.entries[0].case_id == "c2"


def test_persistence_and_role_isolation(tmp_path):
    kb_set = KnowledgeBaseSet(clock=_ticking_clock())
    detective = kb_set[Role.ROOT_DETECTIVE]
    detective.upsert(detective.make_entry("slow cart calls", "cart", "c1"))
    kb_set.save(str(tmp_path))

    restored = KnowledgeBaseSet()
    counts = restored.load(str(tmp_path))
    assert counts[Role.ROOT_DETECTIVE] == 1
    assert counts[Role.ANOMALY_SENTINEL] == 0
    assert restored[Role.ROOT_DETECTIVE].entries == detective.entries
    assert restored[Role.FAILURE_DIAGNOSER].retrieve("slow cart calls") == []


def test_load_rejects_bad_files(tmp_path):
    store = _store()
    path = str(tmp_path / "kb.jsonl")
    write_jsonl(path, [{"symptoms": "x"}])
    with pytest.raises(DatasetError):
        store.load(path)

    narrow = {"symptoms": "x", "experience": "y", "embedding": [0.0] * 8, "created_at": 1, "case_id": "c"}
    write_jsonl(path, [narrow])
    with pytest.raises(ConfigError):
        store.load(path)


def test_only_experts_own_stores():
    with pytest.raises(ConfigError):
        KnowledgeBase(Role.ORCHESTRATOR)


def test_symptom_key_summarises_evidence(bundle):
    processor = DataProcessor()
    descriptions = processor.describe(slice_window(bundle, WINDOW, warmup=60))
    key = symptom_key(descriptions)
    assert key.startswith("metrics: cart-0 cpu_usage level_shift_up")
    assert "logs: cart-0 connect fail to <*>" in key
    assert "slow cart" in key
    assert symptom_key(descriptions) == key

    empty = processor.describe(TelemetryBundle(window=WINDOW))
    assert symptom_key(empty) == NO_SYMPTOMS
