"""LLM reproduction step: prompt -> backend -> parsed offspring, with a
classical fallback so the optimizer never stalls on a misbehaving model."""
from __future__ import annotations

import json
import logging
import threading
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..operators import GaOperator
from .backends import BackendError
from .prompt import ParseFailure, PromptContext, build_prompt, parse_response

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OperatorTranscript:
    generation: int
    subproblem: int
    prompt: str
    response: str | None
    outcome: str  # ok | partial | parse_failure | transport_error
    fallback: bool
    attempts: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def generate(ctx: PromptContext, backend, fallback, rng, max_retries: int = 3, generation: int = 0):
    """Return ``(offspring, transcript)``; never raises.

    ``fallback(n, rng)`` must return ``n`` vectors. It pads a partial reply and
    replaces the whole reply once ``1 + max_retries`` attempts have failed.
    """
    prompt = build_prompt(ctx)
    n_o, dim = ctx.n_offspring, ctx.dim
    response, outcome = None, "parse_failure"
    for attempt in range(1, max_retries + 2):
        try:
            response = backend(prompt, rng)
            kids = parse_response(response, n_o, dim)
        except BackendError as exc:
            outcome = "transport_error"
            log.debug("subproblem %d attempt %d: %s", ctx.index, attempt, exc)
            continue
        except ParseFailure:
            outcome = "parse_failure"
            continue
        except Exception as exc:  # a broken backend must not escape to the loop
            outcome = "transport_error"
            log.warning("backend raised %r", exc)
            continue
        partial = len(kids) < n_o
        if partial:
            kids = kids + list(fallback(n_o - len(kids), rng))
        tr = OperatorTranscript(generation, ctx.index, prompt, response, "partial" if partial else "ok", False, attempt)
        return np.array(kids), tr
    kids = np.asarray(fallback(n_o, rng))
    return kids, OperatorTranscript(generation, ctx.index, prompt, response, outcome, True, max_retries + 1)


class LlmOperator:
    """Offspring operator that queries a chat backend with the structured prompt."""

    name = "ledma"

    def __init__(self, backend, num_users: int = 1, fallback=None, max_retries: int = 3, keep_transcripts: bool = True):
        self.backend = backend
        self.num_users = num_users
        self.fallback_operator = fallback or GaOperator()
        self.max_retries = max_retries
        self.keep_transcripts = keep_transcripts
        self.transcripts: list[OperatorTranscript] = []
        self.calls = 0
        self.fallbacks = 0
        self.partials = 0
        self._lock = threading.Lock()

    def reproduce(self, ctx, rng):
        pctx = PromptContext.from_subproblem(ctx, self.num_users)

        def fallback(n, rng_):
            return self.fallback_operator.reproduce(_with_count(ctx, n), rng_)

        kids, tr = generate(pctx, self.backend, fallback, rng, self.max_retries, ctx.generation)
        with self._lock:
            self.calls += 1
            self.fallbacks += tr.fallback
            self.partials += tr.outcome == "partial"
            if self.keep_transcripts:
                self.transcripts.append(tr)
        return kids

    @property
    def fallback_rate(self) -> float:
        return self.fallbacks / self.calls if self.calls else 0.0

    def write_transcripts(self, path) -> None:
        records = sorted(self.transcripts, key=lambda t: (t.generation, t.subproblem))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for t in records:
                fh.write(t.to_json() + "\n")


def _with_count(ctx, n):
    return replace(ctx, n_offspring=n)
