"""Front normalization and 2-D hypervolume (minimization)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_REF = (1.1, 1.1)


@dataclass(frozen=True)
class FrontNormalization:
    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        if not all(h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"degenerate normalization bounds lo={self.lo} hi={self.hi}")

    @classmethod
    def from_fronts(cls, *fronts) -> "FrontNormalization":
        """Coordinatewise min/max over the union of the given fronts."""
        pts = np.vstack([np.asarray(f, dtype=float).reshape(-1, 2) for f in fronts])
        if len(pts) == 0:
            raise ValueError("cannot normalize an empty set of fronts")
        return cls(tuple(pts.min(axis=0).tolist()), tuple(pts.max(axis=0).tolist()))

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}


def normalize_front(points, norm: FrontNormalization) -> np.ndarray:
    """Affine map onto [0, 1]^2; values outside the bounds are kept, not clipped."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    lo, hi = np.asarray(norm.lo), np.asarray(norm.hi)
    return (pts - lo) / (hi - lo)


def nondominated(points) -> np.ndarray:
    """Non-dominated subset (duplicates collapsed), sorted by first objective."""
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    keep, best_y = [], np.inf
    for p in pts:  # np.unique sorts lexicographically
        if p[1] < best_y:
            keep.append(p)
            best_y = p[1]
    return np.array(keep).reshape(-1, 2)


def hypervolume_2d(points, ref=DEFAULT_REF) -> float:
    """Exact staircase sweep. Points not strictly inside the reference box add nothing."""
    ref = np.asarray(ref, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    front = nondominated(pts)
    hv, prev_y = 0.0, ref[1]
    for x, y in front:
        hv += (ref[0] - x) * (prev_y - y)
        prev_y = y
    return float(hv)


def hv_oracle_mc(points, ref=DEFAULT_REF, samples: int = 1_000_000, rng=None, chunk: int = 100_000) -> float:
    """Monte-Carlo hypervolume: dominated fraction of the box [min corner, ref]."""
    rng = np.random.default_rng(rng)
    ref = np.asarray(ref, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[np.all(pts < ref, axis=1)]
    if len(pts) == 0:
        return 0.0
    lo = pts.min(axis=0)
    area = float(np.prod(ref - lo))
    hits = 0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        s = lo + rng.random((m, 2)) * (ref - lo)
        dom = np.all(pts[None, :, :] <= s[:, None, :], axis=2).any(axis=1)
        hits += int(dom.sum())
        done += m
    return area * hits / samples


def spread(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return pts.max(axis=0) - pts.min(axis=0)
