"""
Per-agent knowledge stores of <symptoms, experience> entries

Retrieval is brute-force cosine over unit vectors; inserts reconcile against the
nearest existing entry so no two stored entries are near-duplicates.
"""
import os
import time
import logging
import threading
from dataclasses import dataclass
from typing import Optional, Tuple

from agents.backends import ChatParams
from agents.profiles import DEFAULT_PROFILES, EXPERT_ROLES, Role
from agents.prompts import render_reconcile_prompt
from knowledge.embedding import HashingEmbedder, cosine, embed
from utils.errors import BackendUnavailableError, ConfigError, DatasetError
from utils.file_utils import read_jsonl, write_jsonl


INSERTED = "inserted"
REPLACED = "replaced"
MERGED = "merged"
CONFLICTING = "conflicting"
COMPLEMENTARY = "complementary"
PROVENANCE_PREFIX = "[case "


@dataclass(frozen=True)
class KnowledgeConfig:
    dim: int = 256
    tau_same: float = 0.9
    tau_min: float = 0.2
    top_k: int = 3
    provider: str = "hashing"
    embedding_endpoint: Optional[str] = None
    embedding_model: str = "text-embedding"
    api_key: Optional[str] = None
    dir: str = "kb"

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("kb.dim must be positive")
        if not 0.0 < self.tau_same <= 1.0:
            raise ValueError("kb.tau_same must lie in (0, 1]")
        if not 0.0 <= self.tau_min <= 1.0:
            raise ValueError("kb.tau_min must lie in [0, 1]")
        if self.top_k <= 0:
            raise ValueError("kb.top_k must be positive")


@dataclass(frozen=True)
class KnowledgeEntry:
    symptoms: str
    experience: str
    embedding: Tuple[float, ...]
    created_at: int
    case_id: str

    def __post_init__(self):
        if not self.symptoms.strip():
            raise ValueError("Knowledge entry symptoms must be non-empty")

    def to_dict(self):
        return {
            "symptoms": self.symptoms,
            "experience": self.experience,
            "embedding": list(self.embedding),
            "created_at": self.created_at,
            "case_id": self.case_id,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            symptoms=data["symptoms"],
            experience=data["experience"],
            embedding=tuple(float(x) for x in data["embedding"]),
            created_at=int(data["created_at"]),
            case_id=str(data["case_id"]),
        )

    def render(self):
        return f"symptoms: {self.symptoms} | experience: {self.experience}"


@dataclass(frozen=True)
class UpsertResult:
    outcome: str
    entry: KnowledgeEntry
    displaced: Tuple[KnowledgeEntry, ...] = ()
    warnings: Tuple[str, ...] = ()


def _with_provenance(entry):
    if entry.experience.startswith(PROVENANCE_PREFIX):
        return entry.experience
    return f"{PROVENANCE_PREFIX}{entry.case_id}] {entry.experience}"


def fallback_relation(older, newer):
    """Byte-identical experience counts as a duplicate to replace, anything else merges"""
    return CONFLICTING if older.experience == newer.experience else COMPLEMENTARY


class KnowledgeBase:
    """One expert agent's store"""

    def __init__(self, owner_role, embedder=None, config=None, clock=time.time):
        if owner_role not in EXPERT_ROLES:
            raise ConfigError(f"Knowledge stores belong to expert roles only, got {owner_role}")
        self.owner_role = owner_role
        self.config = config or KnowledgeConfig()
        self.embedder = embedder or HashingEmbedder(self.config.dim)
        self.clock = clock
        self._entries = []
        self._lock = threading.RLock()
        self.logger = logging.getLogger(__name__)

    @property
    def entries(self):
        with self._lock:
            return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def make_entry(self, symptoms, experience, case_id):
        return KnowledgeEntry(
            symptoms=symptoms,
            experience=experience,
            embedding=embed(symptoms, self.embedder),
            created_at=int(self.clock()),
            case_id=str(case_id),
        )

    def _nearest(self, embedding):
        best_index, best_sim = None, None
        for index, entry in enumerate(self._entries):
            sim = cosine(embedding, entry.embedding)
            if best_sim is None or sim > best_sim:
                best_index, best_sim = index, sim
        return best_index, best_sim

    def classify_pair(self, older, newer, backend=None):
        """
        Decide whether two same-symptom entries conflict or complement each other

        Returns:
            tuple: (relation, warning or None)
        """
        if backend is None:
            return fallback_relation(older, newer), None
        messages = render_reconcile_prompt(DEFAULT_PROFILES[Role.ORCHESTRATOR], older, newer)
        try:
            reply = backend.complete(messages, ChatParams(temperature=0.0, max_tokens=8), Role.ORCHESTRATOR)
        except BackendUnavailableError as e:
            warning = f"reconciliation call failed ({e}); used fallback rule"
            self.logger.warning(warning)
            return fallback_relation(older, newer), warning

        verdict = reply.strip().lower()
        says_conflict = CONFLICTING in verdict
        says_complement = COMPLEMENTARY in verdict
        if says_conflict != says_complement:
            return (CONFLICTING if says_conflict else COMPLEMENTARY), None
        warning = f"unusable reconciliation verdict {reply.strip()!r}; used fallback rule"
        self.logger.warning(warning)
        return fallback_relation(older, newer), warning

    def _merge(self, older, newer):
        symptoms = older.symptoms if older.symptoms == newer.symptoms else f"{older.symptoms}; {newer.symptoms}"
        return KnowledgeEntry(
            symptoms=symptoms,
            experience=f"{_with_provenance(older)}\n{_with_provenance(newer)}",
            embedding=embed(symptoms, self.embedder),
            created_at=newer.created_at,
            case_id=newer.case_id,
        )

    def upsert(self, entry, backend=None):
        """
        Insert an entry, reconciling it with any near-duplicate

        The nearest entry at cosine >= tau_same is either replaced by the newer one
        (conflicting) or merged with it (complementary). A merged entry is checked
        again against the rest of the store until no neighbour is that close.

        Args:
            entry (KnowledgeEntry): Embedded entry to add
            backend (ChatBackend): Classifies conflicts; the fallback rule applies without one

        Returns:
            UpsertResult: Outcome of the first reconciliation step
        """
        with self._lock:
            candidate = entry
            outcome = None
            displaced = []
            warnings = []
            while True:
                index, sim = self._nearest(candidate.embedding)
                if index is None or sim < self.config.tau_same:
                    self._entries.append(candidate)
                    break
                older = self._entries.pop(index)
                displaced.append(older)
                relation, warning = self.classify_pair(older, candidate, backend)
                if warning:
                    warnings.append(warning)
                if relation == CONFLICTING:
                    step = REPLACED
                else:
                    candidate = self._merge(older, candidate)
                    step = MERGED
                outcome = outcome or step

        outcome = outcome or INSERTED
        self.logger.info(f"{self.owner_role}: {outcome} entry for case {entry.case_id}")
        return UpsertResult(outcome, candidate, tuple(displaced), tuple(warnings))

    def retrieve_scored(self, symptom_key, k=None, tau_min=None):
        """Top-k (entry, similarity) pairs at or above tau_min, best first, newer first on ties"""
        k = self.config.top_k if k is None else k
        tau_min = self.config.tau_min if tau_min is None else tau_min
        query = embed(symptom_key, self.embedder)
        with self._lock:
            scored = [(entry, cosine(query, entry.embedding)) for entry in self._entries]
        hits = [pair for pair in scored if pair[1] >= tau_min]
        hits.sort(key=lambda pair: (-pair[1], -pair[0].created_at))
        return hits[:k]

    def retrieve(self, symptom_key, k=None, tau_min=None):
        return [entry for entry, _ in self.retrieve_scored(symptom_key, k, tau_min)]

    def compact(self):
        """Re-run reconciliation over every entry, oldest first, without a backend"""
        with self._lock:
            entries = sorted(self._entries, key=lambda e: e.created_at)
            self._entries = []
            for entry in entries:
                self.upsert(entry)
            return len(entries) - len(self._entries)

    def save(self, file_path):
        with self._lock:
            records = [entry.to_dict() for entry in self._entries]
        return write_jsonl(file_path, records)

    def load(self, file_path):
        """Replace the store's contents with a saved file; a missing file leaves it empty"""
        entries = []
        if os.path.isfile(file_path):
            try:
                entries = [KnowledgeEntry.from_dict(record) for record in read_jsonl(file_path)]
            except (KeyError, ValueError, TypeError) as e:
                raise DatasetError(f"Corrupt knowledge file {file_path}: {e}") from e
        for entry in entries:
            if len(entry.embedding) != self.embedder.dim:
                raise ConfigError(
                    f"{file_path} holds {len(entry.embedding)}-d embeddings, store expects {self.embedder.dim}"
                )
        with self._lock:
            self._entries = entries
        return len(entries)


class KnowledgeBaseSet:
    """The three expert stores, persisted as <dir>/<role>.jsonl"""

    def __init__(self, config=None, embedder=None, clock=time.time):
        self.config = config or KnowledgeConfig()
        self.embedder = embedder or HashingEmbedder(self.config.dim)
        self.stores = {role: KnowledgeBase(role, self.embedder, self.config, clock) for role in EXPERT_ROLES}

    def __getitem__(self, role):
        return self.stores[Role(role)]

    def __iter__(self):
        return iter(self.stores.items())

    @staticmethod
    def path_for(kb_dir, role):
        return os.path.join(kb_dir, f"{Role(role).value}.jsonl")

    def save(self, kb_dir):
        return {role: store.save(self.path_for(kb_dir, role)) for role, store in self.stores.items()}

    def load(self, kb_dir):
        return {role: store.load(self.path_for(kb_dir, role)) for role, store in self.stores.items()}
