"""Classical offspring operators for the decomposition loop.

GA (SBX + polynomial mutation), DE/rand/1/bin and uniform random search. All
work on the unit box and clamp their output into it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GaParams:
    sbx_eta: float = 20.0
    mut_eta: float = 20.0
    mut_prob: float | None = None  # None -> 1/dim
    crossover_prob: float = 0.9

    def __post_init__(self):
        if self.sbx_eta <= 0 or self.mut_eta <= 0:
            raise ValueError("distribution indices must be positive")
        if self.mut_prob is not None and not 0 <= self.mut_prob <= 1:
            raise ValueError("mut_prob must be in [0, 1]")
        if not 0 <= self.crossover_prob <= 1:
            raise ValueError("crossover_prob must be in [0, 1]")


@dataclass(frozen=True)
class DeParams:
    F: float = 0.5
    CR: float = 0.9

    def __post_init__(self):
        if not 0 < self.F <= 2:
            raise ValueError("F must be in (0, 2]")
        if not 0 <= self.CR <= 1:
            raise ValueError("CR must be in [0, 1]")


def sbx(p1, p2, eta, rng, lo=0.0, hi=1.0):
    """Bounded simulated binary crossover (Deb & Agrawal), genewise with prob 0.5."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    c1, c2 = p1.copy(), p2.copy()
    dim = len(p1)
    swap_gene = rng.random(dim) <= 0.5
    u = rng.random(dim)
    flip = rng.random(dim) <= 0.5
    for i in range(dim):
        if not swap_gene[i] or abs(p1[i] - p2[i]) <= 1e-14:
            continue
        y1, y2 = min(p1[i], p2[i]), max(p1[i], p2[i])
        delta = y2 - y1

        def spread(bound_gap):
            beta = 1.0 + 2.0 * bound_gap / delta
            alpha = 2.0 - beta ** -(eta + 1.0)
            if u[i] <= 1.0 / alpha:
                return (u[i] * alpha) ** (1.0 / (eta + 1.0))
            return (1.0 / (2.0 - u[i] * alpha)) ** (1.0 / (eta + 1.0))

        a = 0.5 * (y1 + y2 - spread(y1 - lo) * delta)
        b = 0.5 * (y1 + y2 + spread(hi - y2) * delta)
        a, b = np.clip(a, lo, hi), np.clip(b, lo, hi)
        if flip[i]:
            a, b = b, a
        c1[i], c2[i] = a, b
    return c1, c2


def polynomial_mutation(x, eta, prob, rng, lo=0.0, hi=1.0):
    x = np.asarray(x, dtype=float).copy()
    mask = rng.random(len(x)) < prob
    u = rng.random(len(x))
    for i in np.flatnonzero(mask):
        y = x[i]
        d1 = (y - lo) / (hi - lo)
        d2 = (hi - y) / (hi - lo)
        mpow = 1.0 / (eta + 1.0)
        if u[i] < 0.5:
            v = 2.0 * u[i] + (1.0 - 2.0 * u[i]) * (1.0 - d1) ** (eta + 1.0)
            dq = v**mpow - 1.0
        else:
            v = 2.0 * (1.0 - u[i]) + 2.0 * (u[i] - 0.5) * (1.0 - d2) ** (eta + 1.0)
            dq = 1.0 - v**mpow
        x[i] = y + dq * (hi - lo)
    return np.clip(x, lo, hi)


def ga_offspring(parents, rng, params: GaParams = GaParams(), n_offspring: int = 2) -> np.ndarray:
    parents = np.atleast_2d(np.asarray(parents, dtype=float))
    if len(parents) < 2:
        parents = np.vstack([parents[0], parents[0]])
    dim = parents.shape[1]
    mut_prob = 1.0 / dim if params.mut_prob is None else params.mut_prob
    kids = []
    while len(kids) < n_offspring:
        i, j = rng.choice(len(parents), size=2, replace=False)
        a, b = parents[i], parents[j]
        if rng.random() < params.crossover_prob:
            a, b = sbx(a, b, params.sbx_eta, rng)
        for c in (a, b):
            kids.append(polynomial_mutation(c, params.mut_eta, mut_prob, rng))
    return np.clip(np.array(kids[:n_offspring]), 0.0, 1.0)


def de_offspring(parents, rng, params: DeParams = DeParams(), n_offspring: int = 2) -> np.ndarray:
    """DE/rand/1/bin; the best-ranked parent is the crossover target."""
    parents = np.atleast_2d(np.asarray(parents, dtype=float))
    if len(parents) < 4:
        return ga_offspring(parents, rng, n_offspring=n_offspring)
    dim = parents.shape[1]
    target = parents[0]
    kids = np.empty((n_offspring, dim))
    for n in range(n_offspring):
        a, b, c = parents[rng.choice(len(parents), size=3, replace=False)]
        v = a + params.F * (b - c)
        cross = rng.random(dim) < params.CR
        cross[rng.integers(dim)] = True
        kids[n] = np.where(cross, v, target)
    return np.clip(kids, 0.0, 1.0)


def random_offspring(dim: int, n_offspring: int, rng) -> np.ndarray:
    return rng.random((n_offspring, dim))


class GaOperator:
    name = "moead-ga"

    def __init__(self, params: GaParams = GaParams()):
        self.params = params

    def reproduce(self, ctx, rng):
        return ga_offspring(ctx.parents_x, rng, self.params, ctx.n_offspring)


class DeOperator:
    name = "moead-de"

    def __init__(self, params: DeParams = DeParams()):
        self.params = params

    def reproduce(self, ctx, rng):
        return de_offspring(ctx.parents_x, rng, self.params, ctx.n_offspring)


class RandomOperator:
    name = "random"

    def reproduce(self, ctx, rng):
        return random_offspring(ctx.dim, ctx.n_offspring, rng)
