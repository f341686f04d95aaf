"""Prompt construction for the LLM search operator and parsing of its replies."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

TEMPLATE_VERSION = "v1"


class ParseFailure(ValueError):
    """No line of the response held a usable point."""


@lru_cache(maxsize=None)
def _template(version: str = TEMPLATE_VERSION) -> str:
    path = resources.files(__package__) / "templates" / f"prompt_{version}.txt"
    return path.read_text(encoding="utf-8")


@dataclass(frozen=True)
class PromptContext:
    index: int
    weight: tuple[float, float]
    z: tuple[float, float]
    points: np.ndarray  # (d, D) normalized, rounded to 4 decimals
    objectives: np.ndarray  # (d, 2) raw
    fitness: np.ndarray  # (d,)
    n_offspring: int
    num_users: int = 1

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_subproblem(cls, ctx, num_users: int = 1) -> "PromptContext":
        order = np.argsort(ctx.parents_fitness, kind="stable")
        return cls(
            index=ctx.index,
            weight=tuple(float(w) for w in ctx.weight),
            z=tuple(float(v) for v in ctx.z),
            points=np.round(np.clip(ctx.parents_x[order], 0.0, 1.0), 4),
            objectives=np.asarray(ctx.parents_f)[order],
            fitness=np.asarray(ctx.parents_fitness)[order],
            n_offspring=ctx.n_offspring,
            num_users=num_users,
        )


def format_point(v) -> str:
    return ",".join(f"{c:.4f}" for c in v)


def build_prompt(ctx: PromptContext) -> str:
    order = np.argsort(ctx.fitness, kind="stable")
    lines = [
        f"point: {format_point(ctx.points[i])} objectives: {ctx.objectives[i][0]:.6g}, "
        f"{ctx.objectives[i][1]:.6g} fitness: {ctx.fitness[i]:.6g}"
        for i in order
    ]
    return _template().format(
        num_uavs=max(1, ctx.dim // 4),
        num_users=ctx.num_users,
        dim=ctx.dim,
        w1=f"{ctx.weight[0]:.6f}",
        w2=f"{ctx.weight[1]:.6f}",
        z1=f"{ctx.z[0]:.6g}",
        z2=f"{ctx.z[1]:.6g}",
        num_examples=len(lines),
        examples="\n".join(lines),
        n_offspring=ctx.n_offspring,
    )


_LABEL = re.compile(r"^\s*(?:[A-Za-z][\w ]*:\s*|[-*•]\s+)")
_ENUM = re.compile(r"^\s*\d+[.)]\s+")
_SEP = re.compile(r"[,;\s]+")


def _parse_line(line: str, dim: int):
    body = _LABEL.sub("", line, count=1).strip().strip("[]()<>{}").strip()
    if not body:
        return None
    toks = [t for t in _SEP.split(body) if t]
    if len(toks) == dim + 1 and _ENUM.match(line):
        toks = toks[1:]
    if len(toks) != dim:
        return None
    try:
        vals = [float(t) for t in toks]
    except ValueError:
        return None
    if not all(math.isfinite(v) for v in vals):
        return None
    return np.clip(np.array(vals), 0.0, 1.0)


def parse_response(text: str, n_offspring: int, dim: int) -> list[np.ndarray]:
    """First ``n_offspring`` lines holding exactly ``dim`` finite numbers, clamped.

    May return fewer than requested (a partial result); raises ParseFailure
    when nothing parses.
    """
    found = []
    for line in (text or "").splitlines():
        v = _parse_line(line, dim)
        if v is not None:
            found.append(v)
            if len(found) == n_offspring:
                break
    if not found:
        raise ParseFailure("no parseable point in response")
    return found
