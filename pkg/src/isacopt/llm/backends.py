"""Chat-completion backends: an offline deterministic mock and an HTTP client
for any server speaking the common chat-completions JSON format."""
from __future__ import annotations

import logging
import os
import re
import time
from dataclasses import dataclass

import numpy as np
import requests

from .prompt import format_point

log = logging.getLogger(__name__)

SYSTEM_ROLE = (
    "You are a numerical search operator inside an evolutionary optimizer. "
    "Reply only with the requested points, one per line."
)


class BackendError(RuntimeError):
    """Transport-level failure (timeout, connection, HTTP error) after retries."""


class ConfigurationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo"
    temperature: float = 1.0
    max_retries: int = 3
    timeout_s: float = 30.0
    api_key_env: str = "LLM_API_KEY"
    max_in_flight: int = 4

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")

    def api_key(self) -> str:
        key = os.environ.get(self.api_key_env, "").strip()
        if not key:
            raise ConfigurationError(f"environment variable {self.api_key_env} is not set")
        return key


_POINT = re.compile(r"^point:\s*(?P<v>[-0-9.,eE+]+)\s.*fitness:\s*(?P<f>\S+)\s*$", re.MULTILINE)
_DIM = re.compile(r"D=(\d+)")
_COUNT = re.compile(r"Generate (\d+) new points")


class MockBackend:
    """Stand-in LLM: blends the two best example points and adds Gaussian noise.

    It only reads the prompt text, so it exercises the same protocol a real
    model would.
    """

    def __init__(self, noise: float = 0.05):
        self.noise = noise
        self.calls = 0

    def __call__(self, prompt: str, rng: np.random.Generator) -> str:
        self.calls += 1
        n_o = int(_COUNT.search(prompt).group(1)) if _COUNT.search(prompt) else 1
        examples = [
            (float(m.group("f")), np.array([float(t) for t in m.group("v").split(",")]))
            for m in _POINT.finditer(prompt)
        ]
        if not examples:
            dim = int(_DIM.search(prompt).group(1)) if _DIM.search(prompt) else 1
            return "\n".join(format_point(rng.random(dim)) for _ in range(n_o))
        examples.sort(key=lambda e: e[0])
        best = examples[0][1]
        second = examples[1][1] if len(examples) > 1 else best
        lines = []
        for _ in range(n_o):
            u = rng.random()
            child = u * best + (1 - u) * second + rng.normal(0.0, self.noise, size=best.shape)
            lines.append(format_point(np.clip(child, 0.0, 1.0)))
        return "\n".join(lines)


class HttpBackend:
    """One chat-completion request per call, with exponential backoff on
    transport errors, HTTP 429 and 5xx."""

    def __init__(self, cfg: LlmConfig, session: requests.Session | None = None, sleep=time.sleep):
        self.cfg = cfg
        self.api_key = cfg.api_key()  # fail at startup, not per call
        self.session = session or requests.Session()
        self.sleep = sleep
        self.calls = 0

    def payload(self, prompt: str) -> dict:
        return {
            "model": self.cfg.model,
            "temperature": self.cfg.temperature,
            "messages": [
                {"role": "system", "content": SYSTEM_ROLE},
                {"role": "user", "content": prompt},
            ],
        }

    def __call__(self, prompt: str, rng=None) -> str:
        headers = {"Authorization": f"Bearer {self.api_key}", "Content-Type": "application/json"}
        last = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                self.sleep(2.0 ** (attempt - 1))
            self.calls += 1
            try:
                resp = self.session.post(
                    self.cfg.endpoint, json=self.payload(prompt), headers=headers, timeout=self.cfg.timeout_s
                )
            except requests.RequestException as exc:
                last = f"transport error: {exc}"
                log.debug("attempt %d: %s", attempt + 1, last)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = f"HTTP {resp.status_code}"
                log.debug("attempt %d: %s", attempt + 1, last)
                continue
            if resp.status_code != 200:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed completion payload: {exc}") from exc
        raise BackendError(f"gave up after {self.cfg.max_retries + 1} attempts ({last})")
