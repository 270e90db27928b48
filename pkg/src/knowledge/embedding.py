"""
Text embedding providers for the knowledge stores
"""
import re
import hashlib
import logging

import numpy as np
import requests

from utils.errors import BackendUnavailableError, ConfigError


_TOKEN_RE = re.compile(r"\w+")


def normalize(vector):
    """L2-normalize; the zero vector stays zero"""
    vector = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        return vector
    return vector / norm


def cosine(a, b):
    """Cosine similarity of two unit (or zero) vectors"""
    return float(np.dot(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)))


class HashingEmbedder:
    """
    Offline bag-of-words embedder

    Lowercased word tokens are hashed (md5) into `dim` buckets, weighted by count
    and L2-normalized, so the output is order-invariant and deterministic across
    processes.
    """

    name = "hashing"

    def __init__(self, dim=256):
        if dim <= 0:
            raise ConfigError("kb.dim must be positive")
        self.dim = dim

    def bucket(self, token):
        return int(hashlib.md5(token.encode("utf-8")).hexdigest(), 16) % self.dim

    def encode(self, text):
        vector = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN_RE.findall(text.lower()):
            vector[self.bucket(token)] += 1.0
        return tuple(normalize(vector).tolist())


class HttpEmbedder:
    """Remote embedding endpoint returning {"data": [{"embedding": [...]}]}"""

    name = "http"

    def __init__(self, endpoint, model, dim=256, api_key=None, timeout=30.0):
        if not endpoint:
            raise ConfigError("an embedding endpoint is required for the http provider")
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.api_key = api_key
        self.timeout = timeout
        self.session = requests.Session()
        self.logger = logging.getLogger(__name__)

    def encode(self, text):
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self.session.post(
                self.endpoint, json={"model": self.model, "input": text}, headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
            embedding = response.json()["data"][0]["embedding"]
        except requests.RequestException as e:
            raise BackendUnavailableError(f"Embedding endpoint failed: {e}") from e
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise BackendUnavailableError(f"Malformed embedding response: {e}") from e

        if len(embedding) != self.dim:
            raise ConfigError(f"Embedding endpoint returned dimension {len(embedding)}, store expects {self.dim}")
        return tuple(normalize(embedding).tolist())


def embed(text, provider):
    """Unit vector of `provider.dim` for one text"""
    return provider.encode(text)


def build_embedder(config):
    """Create the provider named by `kb.provider`"""
    if config.provider == "hashing":
        return HashingEmbedder(config.dim)
    if config.provider == "http":
        return HttpEmbedder(config.embedding_endpoint, config.embedding_model, config.dim, config.api_key)
    raise ConfigError(f"Unknown embedding provider: {config.provider}")
