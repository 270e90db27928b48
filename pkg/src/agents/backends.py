"""
Chat-completion backends

`HttpChatBackend` talks to an OpenAI-compatible endpoint with requests;
`ScriptedBackend` replays per-role response queues from a fixture file so a
whole diagnosis is reproducible offline.
"""
import os
import json
import time
import logging
import threading
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Optional

import requests
import yaml

from utils.errors import BackendUnavailableError, ConfigError, FixtureExhaustedError


RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class ChatParams:
    temperature: float = 0.0
    max_tokens: int = 1024
    seed: Optional[int] = None


class ChatBackend(ABC):
    """Contract every backend honours; implementations must be thread-safe"""

    @abstractmethod
    def complete(self, messages, params=ChatParams(), role=None):
        """Return the assistant text for `messages` sent on behalf of `role`"""


class HttpChatBackend(ChatBackend):
    """Remote backend speaking the chat-completion wire protocol"""

    def __init__(self, endpoint, model, api_key=None, timeout=60.0, max_retries=3, backoff=1.0, sleep=time.sleep):
        if not endpoint:
            raise ConfigError("backend.endpoint is required for the http backend")
        if not model:
            raise ConfigError("backend.model is required for the http backend")
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.sleep = sleep
        self.session = requests.Session()
        self.last_request_body = None
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_config(cls, config):
        return cls(
            endpoint=config.endpoint,
            model=config.model,
            api_key=config.api_key,
            timeout=config.timeout,
            max_retries=config.max_retries,
            backoff=config.backoff,
        )

    def request_body(self, messages, params):
        body = {
            "model": self.model,
            "messages": [message.to_wire() for message in messages],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if params.seed is not None:
            body["seed"] = params.seed
        return body

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, messages, params=ChatParams(), role=None):
        """
        POST the messages and return the first choice's content

        Connection errors, timeouts, 429 and 5xx responses are retried up to
        `max_retries` times with exponential backoff; anything else fails at once.

        Raises:
            BackendUnavailableError: Retries exhausted or a non-retryable failure
        """
        body = self.request_body(messages, params)
        self.last_request_body = body
        attempts = self.max_retries + 1
        last_error = None

        for attempt in range(attempts):
            if attempt:
                delay = self.backoff * (2 ** (attempt - 1))
                self.logger.warning(f"Retrying {role or 'chat'} call in {delay:.1f}s ({last_error})")
                self.sleep(delay)
            try:
                response = self.session.post(self.endpoint, json=body, headers=self._headers(), timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as e:
                last_error = f"{type(e).__name__}: {e}"
                continue

            if response.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise BackendUnavailableError(f"Chat endpoint returned HTTP {response.status_code}")
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as e:
                raise BackendUnavailableError(f"Malformed chat-completion response: {e}") from e

        self.logger.error(f"Chat endpoint unavailable after {attempts} attempts: {last_error}")
        raise BackendUnavailableError(f"Chat endpoint unavailable after {attempts} attempts: {last_error}")


class ScriptedBackend(ChatBackend):
    """Deterministic backend: each role pops its own queue of canned replies"""

    def __init__(self, responses=None):
        self._queues = {str(role): deque(replies) for role, replies in (responses or {}).items()}
        self._locks = {}
        self._registry_lock = threading.Lock()
        self.calls = []
        self.logger = logging.getLogger(__name__)

    @classmethod
    def from_file(cls, file_path):
        """Load a role -> [reply, ...] mapping from a JSON or YAML fixture"""
        if not os.path.isfile(file_path):
            raise ConfigError(f"Scripted fixture not found: {file_path}")
        with open(file_path, "r", encoding="utf-8") as fh:
            if file_path.lower().endswith(".json"):
                data = json.load(fh)
            else:
                data = yaml.safe_load(fh)
        if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
            raise ConfigError(f"Scripted fixture must map role names to reply lists: {file_path}")
        return cls(data)

    def _lock_for(self, role):
        with self._registry_lock:
            return self._locks.setdefault(role, threading.Lock())

    def remaining(self, role):
        return len(self._queues.get(str(role), ()))

    def complete(self, messages, params=ChatParams(), role=None):
        role = str(role)
        with self._lock_for(role):
            queue = self._queues.get(role)
            if not queue:
                raise FixtureExhaustedError(role)
            reply = queue.popleft()
        with self._registry_lock:
            self.calls.append((role, tuple(messages)))
        return reply


def complete(backend, messages, params=ChatParams(), role=None):
    """Send one chat request through any backend"""
    return backend.complete(messages, params, role)


def build_backend(config):
    """
    Create the backend named by `backend.kind`

    Args:
        config (BackendConfig): Backend section of the desk configuration

    Returns:
        ChatBackend: An http or scripted backend
    """
    if config.kind == "scripted":
        if not config.fixture:
            raise ConfigError("backend.fixture is required for the scripted backend")
        return ScriptedBackend.from_file(config.fixture)
    if config.kind == "http":
        return HttpChatBackend.from_config(config)
    raise ConfigError(f"Unknown backend kind: {config.kind}")
