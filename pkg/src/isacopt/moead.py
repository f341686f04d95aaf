"""Decomposition-based multi-objective evolution (Tchebycheff, two objectives).

The generation loop is generic over the offspring operator: anything with a
``reproduce(ctx, rng) -> (n_o, dim) array`` method plugs in. Objectives are
minimized; decision vectors live in [0, 1]^dim.
"""
from __future__ import annotations

import bisect
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

log = logging.getLogger(__name__)

WEIGHT_EPS = 1e-6


@dataclass(frozen=True)
class AlgoParams:
    population: int = 50
    neighbors: int = 15
    parents: int = 10
    offspring: int = 2
    iterations: int = 260
    neighbor_prob: float = 0.9
    seed: int = 1

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 1 <= self.neighbors <= self.population:
            raise ValueError("neighbors must be in [1, population]")
        if not 1 <= self.parents <= self.population:
            raise ValueError("parents must be in [1, population]")
        if self.offspring < 1:
            raise ValueError("offspring must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not 0.0 <= self.neighbor_prob <= 1.0:
            raise ValueError("neighbor_prob must be in [0, 1]")

    @property
    def budget(self) -> int:
        return self.population + self.iterations * self.population * self.offspring


@dataclass(frozen=True)
class SubproblemContext:
    """Everything an offspring operator may look at for one mating event."""

    generation: int
    index: int
    weight: np.ndarray
    z: np.ndarray
    parents_x: np.ndarray  # (d, dim), best first
    parents_f: np.ndarray  # (d, 2) raw objectives
    parents_fitness: np.ndarray  # (d,) Tchebycheff value for this subproblem
    n_offspring: int

    @property
    def dim(self) -> int:
        return self.parents_x.shape[1]


class OffspringOperator(Protocol):
    def reproduce(self, ctx: SubproblemContext, rng: np.random.Generator) -> np.ndarray: ...


class Problem(Protocol):
    dim: int

    def evaluate(self, x: np.ndarray) -> np.ndarray: ...


def das_dennis_weights(n: int, eps: float = WEIGHT_EPS) -> np.ndarray:
    """Uniform 2-objective lattice, endpoints pulled inside (0, 1). Shape (n, 2)."""
    if n < 2:
        raise ValueError("need at least two weight vectors")
    w1 = np.arange(n) / (n - 1)
    w1 = np.clip(w1, eps, 1 - eps)
    return np.column_stack([w1, 1 - w1])


def build_neighborhoods(weights: np.ndarray, s: int) -> list[np.ndarray]:
    """Indices of the ``s`` nearest weights (self included), ascending order.

    Distances are rounded before ranking so mirror-image ties resolve to the
    lower index instead of depending on the last ulp.
    """
    n = len(weights)
    if not 1 <= s <= n:
        raise ValueError("neighborhood size must be in [1, N]")
    d = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=-1)
    d = np.round(d, 12)
    return [np.sort(np.argsort(row, kind="stable")[:s]) for row in d]


def tchebycheff(f, w, z):
    """max_i w_i (f_i - z_i); ``f`` may be a single pair or an (n, 2) stack."""
    f = np.asarray(f, dtype=float)
    return np.max(np.asarray(w) * (f - np.asarray(z)), axis=-1)


def dominates(a, b) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


class Archive:
    """External population: mutually non-dominated (x, f) pairs.

    Entries are kept sorted by f1, which for a bi-objective non-dominated set
    makes f2 strictly decreasing; both the dominance test and the removal of
    newly dominated entries then reduce to bisection.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._f1: list[float] = []
        self._f2: list[float] = []
        self._x: list[np.ndarray] = []
        self._cache = None

    def __len__(self):
        return len(self._f1)

    def update(self, x, f) -> bool:
        """Insert ``(x, f)`` unless dominated or duplicated; drop what it dominates."""
        a, b = float(f[0]), float(f[1])
        i = bisect.bisect_right(self._f1, a)
        if i and self._f2[i - 1] <= b:  # weakly dominated or equal
            return False
        lo = bisect.bisect_left(self._f1, a, 0, i)
        hi = lo
        while hi < len(self._f2) and self._f2[hi] >= b:
            hi += 1
        self._f1[lo:hi] = [a]
        self._f2[lo:hi] = [b]
        self._x[lo:hi] = [np.array(x, dtype=float)]
        self._cache = None
        return True

    def _arrays(self):
        if self._cache is None:
            f = np.column_stack([self._f1, self._f2]) if self._f1 else np.empty((0, 2))
            x = np.array(self._x) if self._x else np.empty((0, self.dim))
            self._cache = (x, f)
        return self._cache

    @property
    def x(self) -> np.ndarray:
        return self._arrays()[0]

    @property
    def f(self) -> np.ndarray:
        return self._arrays()[1]

    def sorted(self) -> tuple[np.ndarray, np.ndarray]:
        """Copies of the archive ordered by f1 ascending."""
        x, f = self._arrays()
        return x.copy(), f.copy()


def update_archive(archive: Archive, x, f) -> Archive:
    archive.update(x, f)
    return archive


def update_reference(z, f) -> np.ndarray:
    return np.minimum(z, f)


@dataclass
class Population:
    weights: np.ndarray
    neighborhoods: list[np.ndarray]
    x: np.ndarray  # incumbents, (N, dim)
    f: np.ndarray  # (N, 2)


def select_parents(j: int, pop: Population, z, params: AlgoParams, rng: np.random.Generator):
    """Draw ``d`` distinct incumbents and return their indices best-first for subproblem ``j``.

    One Bernoulli draw picks the mating pool (neighborhood vs whole
    population); a pool smaller than ``d`` falls back to the population.
    """
    n = len(pop.x)
    pool = pop.neighborhoods[j] if rng.random() < params.neighbor_prob else np.arange(n)
    if len(pool) < params.parents:
        pool = np.arange(n)
    idx = rng.choice(pool, size=params.parents, replace=False)
    fit = tchebycheff(pop.f[idx], pop.weights[j], z)
    order = np.argsort(fit, kind="stable")
    return idx[order], fit[order]


def update_neighbors(j: int, x_new, f_new, pop: Population, z) -> int:
    """Replace every neighbor incumbent the offspring matches or beats (<=)."""
    nb = pop.neighborhoods[j]
    w = pop.weights[nb]
    new = np.max(w * (np.asarray(f_new) - z), axis=1)
    old = np.max(w * (pop.f[nb] - z), axis=1)
    hit = nb[new <= old]
    pop.x[hit] = x_new
    pop.f[hit] = f_new
    return len(hit)


@dataclass
class GenerationRecord:
    generation: int
    evaluations: int
    z: np.ndarray
    archive_x: np.ndarray
    archive_f: np.ndarray


@dataclass
class RunResult:
    archive: Archive
    population: Population
    z: np.ndarray
    evaluations: int
    trace: list[GenerationRecord] = field(default_factory=list)
    operator_failures: int = 0


def subproblem_rng(seed: int, generation: int, j: int) -> np.random.Generator:
    # generation 0 is reserved for initialization
    return np.random.default_rng([seed, generation + 1, j])


class _Evaluator:
    def __init__(self, problem):
        self.problem = problem
        self.count = 0
        self._admissible = getattr(problem, "admissible", None)

    def __call__(self, x):
        self.count += 1
        return np.asarray(self.problem.evaluate(x), dtype=float)

    def admissible(self, f) -> bool:
        return True if self._admissible is None else bool(self._admissible(f))


def run(
    problem,
    operator,
    params: AlgoParams = AlgoParams(),
    *,
    workers: int = 1,
    on_generation: Callable[[GenerationRecord], None] | None = None,
) -> RunResult:
    """Execute the full decomposition loop and return the external archive.

    With ``workers > 1`` all parents of a generation are drawn from the
    generation-start snapshot and operator calls run in a thread pool; results
    are still applied in ascending subproblem order, so the run stays
    deterministic for a deterministic operator.
    """
    evaluate = _Evaluator(problem)
    dim = problem.dim
    n = params.population
    weights = das_dennis_weights(n)
    hoods = build_neighborhoods(weights, params.neighbors)
    init_rng = np.random.default_rng([params.seed, 0])
    x0 = init_rng.random((n, dim))
    f0 = np.array([evaluate(x) for x in x0])
    pop = Population(weights, hoods, x0, f0)
    z = f0.min(axis=0)
    archive = Archive(dim)
    for x, f in zip(x0, f0):
        if evaluate.admissible(f):
            archive.update(x, f)
    result = RunResult(archive, pop, z, evaluate.count)

    def record(gen):
        ax, af = archive.sorted()
        rec = GenerationRecord(gen, evaluate.count, z.copy(), ax, af)
        result.trace.append(rec)
        if on_generation is not None:
            on_generation(rec)

    record(0)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for gen in range(1, params.iterations + 1):
            if pool is None:
                for j in range(n):
                    rng = subproblem_rng(params.seed, gen, j)
                    ctx = _context(gen, j, pop, z, params, rng)
                    kids = _reproduce(operator, ctx, rng, result)
                    z = _apply(j, kids, pop, z, archive, evaluate)
            else:
                rngs = [subproblem_rng(params.seed, gen, j) for j in range(n)]
                ctxs = [_context(gen, j, pop, z, params, rngs[j]) for j in range(n)]
                futures = [pool.submit(_reproduce, operator, c, r, result) for c, r in zip(ctxs, rngs)]
                for j, fut in enumerate(futures):
                    z = _apply(j, fut.result(), pop, z, archive, evaluate)
            result.z = z
            result.evaluations = evaluate.count
            record(gen)
    finally:
        if pool is not None:
            pool.shutdown()
    result.z = z
    result.evaluations = evaluate.count
    return result


def _context(gen, j, pop, z, params, rng) -> SubproblemContext:
    idx, fit = select_parents(j, pop, z, params, rng)
    return SubproblemContext(
        generation=gen,
        index=j,
        weight=pop.weights[j].copy(),
        z=z.copy(),
        parents_x=pop.x[idx].copy(),
        parents_f=pop.f[idx].copy(),
        parents_fitness=fit,
        n_offspring=params.offspring,
    )


def _reproduce(operator, ctx: SubproblemContext, rng, result: RunResult) -> np.ndarray:
    try:
        kids = np.asarray(operator.reproduce(ctx, rng), dtype=float)
        if kids.shape != (ctx.n_offspring, ctx.dim) or not np.all(np.isfinite(kids)):
            raise ValueError(f"operator returned shape {kids.shape} or non-finite values")
    except Exception as exc:  # the loop never aborts on operator failure
        from .operators import ga_offspring

        log.warning("operator failed on subproblem %d: %s", ctx.index, exc)
        result.operator_failures += 1
        kids = ga_offspring(ctx.parents_x, rng, n_offspring=ctx.n_offspring)
    return np.clip(kids, 0.0, 1.0)


def _apply(j, kids, pop, z, archive, evaluate) -> np.ndarray:
    for x_new in kids:
        f_new = evaluate(x_new)
        z = update_reference(z, f_new)
        update_neighbors(j, x_new, f_new, pop, z)
        if evaluate.admissible(f_new):
            archive.update(x_new, f_new)
    return z
