"""Where the raw model text comes from: an HTTP chat endpoint, a replay store, or fixtures."""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import requests

from ..errors import BitextError, InputError
from ..fsutil import write_atomic

log = logging.getLogger(__name__)

BACKENDS = ("http_chat", "replay", "mock")
RETRY_STATUSES = {429, 500, 502, 503, 504}

# patched in tests
_sleep = time.sleep


class MissingApiKey(InputError):
    pass


class TransportError(BitextError):
    def __init__(self, message: str, status: Optional[int] = None):
        super().__init__(message)
        self.status = status


class TransportExhausted(TransportError):
    def __init__(self, attempts: int, last_status: Optional[int], detail: str = ""):
        super().__init__(f"giving up after {attempts} attempts "
                         f"(last status: {last_status if last_status is not None else 'no response'})"
                         + (f": {detail}" if detail else ""), last_status)
        self.last_status = last_status


class ReplayMiss(BitextError):
    def __init__(self, digest: str, directory: str):
        super().__init__(f"no recorded response {digest} in {directory}")
        self.digest = digest


class MockMiss(BitextError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    backend: str = "mock"
    endpoint_url: str = ""
    model_name: str = ""
    api_key_env: str = "LLM_API_KEY"
    temperature: float = 0.0
    max_retries: int = 3
    retry_backoff_base: float = 1.0
    timeout: float = 120.0
    max_prompt_tokens_estimate: int = 100_000
    auth_header: str = "Authorization"
    auth_scheme: str = "Bearer"
    replay_dir: Optional[str] = None
    record: bool = False
    mock_dir: Optional[str] = None
    mock_responses: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.backend == "http_chat" and not self.endpoint_url:
            raise ValueError("http_chat backend needs endpoint_url")
        if self.backend == "replay" and not self.replay_dir:
            raise ValueError("replay backend needs replay_dir")


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


def _http_chat(prompt: str, system_text: Optional[str], config: LlmConfig) -> str:
    key = os.environ.get(config.api_key_env)
    if not key:
        raise MissingApiKey(f"environment variable {config.api_key_env} is not set")
    messages = []
    if system_text:
        messages.append({"role": "system", "content": system_text})
    messages.append({"role": "user", "content": prompt})
    payload = {"model": config.model_name, "messages": messages, "temperature": config.temperature}
    auth = f"{config.auth_scheme} {key}" if config.auth_scheme else key
    headers = {config.auth_header: auth, "Content-Type": "application/json"}

    last_status, detail = None, ""
    attempts = config.max_retries + 1
    for attempt in range(attempts):
        if attempt:
            delay = config.retry_backoff_base * 2 ** (attempt - 1)
            log.info("retrying in %.1fs (attempt %d/%d)", delay, attempt + 1, attempts)
            _sleep(delay)
        try:
            resp = requests.post(config.endpoint_url, json=payload, headers=headers,
                                 timeout=config.timeout)
        except (requests.Timeout, requests.ConnectionError) as e:
            last_status, detail = None, type(e).__name__
            continue
        if resp.status_code in RETRY_STATUSES:
            last_status, detail = resp.status_code, resp.text[:200]
            continue
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}", resp.status_code)
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportError(f"unexpected chat response shape: {resp.text[:200]}", 200) from e
        if not isinstance(content, str):
            raise TransportError("chat response content is not text", 200)
        return content
    raise TransportExhausted(attempts, last_status, detail)


def _mock(config: LlmConfig, pair_id: str, chunk_id: Optional[int]) -> str:
    keys = ([f"{pair_id}.chunk{chunk_id}"] if chunk_id is not None else []) + [pair_id]
    for key in keys:
        if key in config.mock_responses:
            return config.mock_responses[key]
        if config.mock_dir:
            for suffix in (".json", ".txt"):
                p = Path(config.mock_dir) / f"{key}{suffix}"
                if p.is_file():
                    return p.read_text(encoding="utf-8")
    raise MockMiss(f"no mock response for {' or '.join(keys)}")


def request_alignment(prompt: str, config: LlmConfig, *, system_text: Optional[str] = None,
                      pair_id: str = "", chunk_id: Optional[int] = None) -> str:
    """Return the backend's raw text completion for ``prompt``."""
    if config.backend == "mock":
        return _mock(config, pair_id, chunk_id)

    digest = prompt_hash(prompt)
    if config.backend == "replay":
        p = Path(config.replay_dir) / digest
        if not p.is_file():
            raise ReplayMiss(digest, config.replay_dir)
        return p.read_text(encoding="utf-8")

    text = _http_chat(prompt, system_text, config)
    if config.record and config.replay_dir:
        write_atomic(Path(config.replay_dir) / digest, text)
    return text
