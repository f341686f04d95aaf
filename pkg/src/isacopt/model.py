"""Multi-UAV ISAC physics: geometry, LoS channel, SINR / proportional-fair
utility, Fisher information components and the localization CRB.

All powers are linear milliwatts. Decision vectors are normalized genomes in
[0, 1]^(4K); each UAV owns four consecutive genes (x, y, transmit power,
communication share of the transmit power).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

LIGHT_SPEED = 2.998e8

# Degeneracy handling: keeps both objectives finite so dominance stays defined.
CRB_PENALTY = 1e12
UTILITY_PENALTY = 1e12
DET_REL_TOL = 1e-12

GENES_PER_UAV = 4


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class PhysicalConstants:
    noise_power_mw: float
    ref_channel_gain: float
    bandwidth_hz: float
    light_speed_mps: float = LIGHT_SPEED
    xi: float = field(init=False)

    def __post_init__(self):
        for name in ("noise_power_mw", "ref_channel_gain", "bandwidth_hz", "light_speed_mps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        xi = 8 * math.pi**2 * self.bandwidth_hz**2 / (self.noise_power_mw * self.light_speed_mps**2)
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable physical world shared by every evaluation of a run."""

    num_uavs: int
    num_users: int
    altitude_m: float
    user_positions: np.ndarray  # (M, 2)
    area_min: float
    area_max: float
    p_min_mw: float
    p_max_mw: float
    rcs_mag: np.ndarray  # (K, M, K), indexed [transmitter, user, receiver]
    constants: PhysicalConstants

    def __post_init__(self):
        K, M = self.num_uavs, self.num_users
        if K < 1 or M < 1:
            raise ValueError("need at least one UAV and one user")
        if self.altitude_m < 0:
            raise ValueError("altitude_m must be >= 0")
        if not self.area_max > self.area_min:
            raise ValueError("area_max must exceed area_min")
        if not 0 < self.p_min_mw <= self.p_max_mw:
            raise ValueError("need 0 < p_min_mw <= p_max_mw")
        users = np.array(self.user_positions, dtype=float).reshape(M, 2)
        if np.any(users < self.area_min) or np.any(users > self.area_max):
            raise ValueError("user positions must lie inside the area")
        rcs = np.array(self.rcs_mag, dtype=float)
        if rcs.shape != (K, M, K):
            raise ValueError(f"rcs_mag must have shape {(K, M, K)}, got {rcs.shape}")
        if not np.all(np.isfinite(rcs)) or np.any(rcs <= 0):
            raise ValueError("rcs magnitudes must be finite and positive")
        users.setflags(write=False)
        rcs.setflags(write=False)
        object.__setattr__(self, "user_positions", users)
        object.__setattr__(self, "rcs_mag", rcs)

    @property
    def dim(self) -> int:
        return GENES_PER_UAV * self.num_uavs

    def to_dict(self) -> dict:
        c = self.constants
        return {
            "num_uavs": self.num_uavs,
            "num_users": self.num_users,
            "altitude_m": self.altitude_m,
            "user_positions": self.user_positions.tolist(),
            "area_min": self.area_min,
            "area_max": self.area_max,
            "p_min_mw": self.p_min_mw,
            "p_max_mw": self.p_max_mw,
            "rcs_mag": self.rcs_mag.tolist(),
            "constants": {
                "noise_power_mw": c.noise_power_mw,
                "ref_channel_gain": c.ref_channel_gain,
                "bandwidth_hz": c.bandwidth_hz,
                "light_speed_mps": c.light_speed_mps,
            },
        }

    def hash(self) -> str:
        """SHA-256 over every physical input, via a canonical JSON dump."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def make_scenario(
    num_uavs: int = 2,
    num_users: int = 4,
    area: tuple[float, float] = (0.0, 2000.0),
    altitude_m: float = 100.0,
    p_min_dbm: float = 0.0,
    p_max_dbm: float = 20.0,
    noise_dbm: float = -110.0,
    rho0_db: float = -60.0,
    bandwidth_hz: float = 51.2e6,
    rcs_bounds: tuple[float, float] = (0.8, 1.0),
    seed: int = 7,
    user_positions=None,
) -> Scenario:
    """Build a scenario with uniformly placed users and i.i.d. uniform RCS.

    dB quantities are converted to linear units here and nowhere else. If
    ``user_positions`` is given, only the RCS draw consumes the seed.
    """
    rng = np.random.default_rng(seed)
    lo, hi = area
    if user_positions is None:
        users = rng.uniform(lo, hi, size=(num_users, 2))
    else:
        users = np.asarray(user_positions, dtype=float).reshape(num_users, 2)
    rcs = rng.uniform(rcs_bounds[0], rcs_bounds[1], size=(num_uavs, num_users, num_uavs))
    consts = PhysicalConstants(
        noise_power_mw=dbm_to_mw(noise_dbm),
        ref_channel_gain=db_to_linear(rho0_db),
        bandwidth_hz=bandwidth_hz,
    )
    return Scenario(
        num_uavs=num_uavs,
        num_users=num_users,
        altitude_m=altitude_m,
        user_positions=users,
        area_min=lo,
        area_max=hi,
        p_min_mw=dbm_to_mw(p_min_dbm),
        p_max_mw=dbm_to_mw(p_max_dbm),
        rcs_mag=rcs,
        constants=consts,
    )


@dataclass(frozen=True)
class Deployment:
    uav_xy: np.ndarray  # (K, 2) meters
    p_rad_mw: np.ndarray  # (K,)
    p_com_mw: np.ndarray  # (K,)

    def is_feasible(self, scn: Scenario, tol: float = 1e-9) -> bool:
        p_tx = self.p_rad_mw + self.p_com_mw
        return bool(
            np.all(self.p_rad_mw >= 0)
            and np.all(self.p_com_mw >= 0)
            and np.all(p_tx >= scn.p_min_mw * (1 - tol))
            and np.all(p_tx <= scn.p_max_mw * (1 + tol))
            and np.all(self.uav_xy >= scn.area_min)
            and np.all(self.uav_xy <= scn.area_max)
        )


class FimComponents(NamedTuple):
    b_a: np.ndarray
    b_b: np.ndarray
    b_c: np.ndarray


class ObjectiveVector(NamedTuple):
    f1_tilde: float  # negated utility
    f2_tilde: float  # log of the summed CRB traces


def decode(x, scn: Scenario) -> Deployment:
    x = np.asarray(x, dtype=float)
    if x.shape != (scn.dim,):
        raise ValueError(f"decision vector must have length {scn.dim}, got {x.shape}")
    g = np.clip(x, 0.0, 1.0).reshape(scn.num_uavs, GENES_PER_UAV)
    span = scn.area_max - scn.area_min
    xy = scn.area_min + g[:, :2] * span
    p_tx = scn.p_min_mw + g[:, 2] * (scn.p_max_mw - scn.p_min_mw)
    beta = g[:, 3]
    p_com = beta * p_tx
    p_rad = (1.0 - beta) * p_tx
    return Deployment(uav_xy=xy, p_rad_mw=p_rad, p_com_mw=p_com)


def distance(uav_xy, altitude, user_xy):
    """3-D UAV-to-user distance; broadcasts over leading axes."""
    d = np.asarray(uav_xy, dtype=float) - np.asarray(user_xy, dtype=float)
    return np.sqrt(np.sum(d * d, axis=-1) + altitude * altitude)


def channel_power_gain_sq(distance_m, consts: PhysicalConstants):
    r = np.asarray(distance_m, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distance must be positive")
    return consts.ref_channel_gain / (r * r)


def _distances(dep: Deployment, scn: Scenario) -> np.ndarray:
    # (K, M)
    return distance(dep.uav_xy[:, None, :], scn.altitude_m, scn.user_positions[None, :, :])


def sinr_from_gains(p_com, h2, noise_mw):
    """SINR matrix (K, M) from communication powers (K,) and channel gains h^2 (K, M)."""
    rx = np.asarray(p_com, dtype=float)[:, None] * h2
    interference = rx.sum(axis=0, keepdims=True) - rx
    return rx / (interference + noise_mw)


def sinr_matrix(dep: Deployment, scn: Scenario) -> np.ndarray:
    h2 = channel_power_gain_sq(_distances(dep, scn), scn.constants)
    return sinr_from_gains(dep.p_com_mw, h2, scn.constants.noise_power_mw)


def rates(dep: Deployment, scn: Scenario) -> np.ndarray:
    """Per-link rates in bit/s, (K, M); every user gets B/M of each UAV."""
    gamma = sinr_matrix(dep, scn)
    return scn.constants.bandwidth_hz / scn.num_users * np.log1p(gamma) / math.log(2)


def _utility_from_rates(r: np.ndarray) -> tuple[float, bool]:
    total = r.sum(axis=0)
    if np.any(total <= 0):
        return -UTILITY_PENALTY, True
    return float(np.sum(np.log(total))), False


def network_utility(dep: Deployment, scn: Scenario) -> float:
    """Proportional-fair utility; ``-UTILITY_PENALTY`` if any user has zero rate."""
    return _utility_from_rates(rates(dep, scn))[0]


def _fim_all_users(uav_xy: np.ndarray, scn: Scenario):
    """b_a, b_b, b_c for every user at once, each shaped (M, K)."""
    diff = uav_xy[:, None, :] - scn.user_positions[None, :, :]  # (K, M, 2)
    r = np.sqrt(np.sum(diff * diff, axis=-1) + scn.altitude_m**2)  # (K, M)
    cx = (diff[..., 0] / r).T  # (M, K)
    cy = (diff[..., 1] / r).T
    inv_r2 = (1.0 / (r * r)).T  # (M, K)
    # weight[m, k, j] = xi * alpha_{k,m,j} * |l_{k,m,j}|^2
    weight = scn.constants.xi * inv_r2[:, :, None] * inv_r2[:, None, :]
    weight = weight * np.transpose(scn.rcs_mag, (1, 0, 2)) ** 2
    gx = cx[:, :, None] + cx[:, None, :]
    gy = cy[:, :, None] + cy[:, None, :]
    b_a = np.sum(weight * gx * gx, axis=2)
    b_b = np.sum(weight * gy * gy, axis=2)
    b_c = np.sum(weight * gx * gy, axis=2)
    return b_a, b_b, b_c


def fim_components(dep: Deployment, scn: Scenario, m: int) -> FimComponents:
    b_a, b_b, b_c = _fim_all_users(np.asarray(dep.uav_xy, dtype=float), scn)
    return FimComponents(b_a[m], b_b[m], b_c[m])


def crb_trace(fim: FimComponents, p_rad) -> float:
    """Trace of the inverse 2x2 FIM, written as (a.p) / (p^T Q p).

    Returns ``CRB_PENALTY`` when the FIM is singular to within a relative
    determinant tolerance (e.g. a single UAV, or zero radar power).
    """
    p = np.asarray(p_rad, dtype=float)
    ja = float(fim.b_a @ p)
    jb = float(fim.b_b @ p)
    jc = float(fim.b_c @ p)
    det = ja * jb - jc * jc
    if not det > DET_REL_TOL * ja * jb:
        return CRB_PENALTY
    return (ja + jb) / det


def _crb_all_users(b_a, b_b, b_c, p_rad) -> tuple[np.ndarray, bool]:
    ja = b_a @ p_rad
    jb = b_b @ p_rad
    jc = b_c @ p_rad
    det = ja * jb - jc * jc
    ok = det > DET_REL_TOL * ja * jb
    crb = np.full(ja.shape, CRB_PENALTY)
    crb[ok] = (ja[ok] + jb[ok]) / det[ok]
    return crb, not bool(np.all(ok))


def evaluate(x, scn: Scenario) -> tuple[ObjectiveVector, bool]:
    """Objective pair plus a flag telling whether a penalty was applied."""
    dep = decode(x, scn)
    h2 = channel_power_gain_sq(_distances(dep, scn), scn.constants)
    gamma = sinr_from_gains(dep.p_com_mw, h2, scn.constants.noise_power_mw)
    r = scn.constants.bandwidth_hz / scn.num_users * np.log1p(gamma) / math.log(2)
    f1, bad_rate = _utility_from_rates(r)
    b_a, b_b, b_c = _fim_all_users(dep.uav_xy, scn)
    crb, bad_crb = _crb_all_users(b_a, b_b, b_c, dep.p_rad_mw)
    return ObjectiveVector(-f1, float(np.log(np.sum(crb)))), bad_rate or bad_crb


def objectives(x, scn: Scenario) -> ObjectiveVector:
    return evaluate(x, scn)[0]


def is_penalized(f) -> bool:
    return bool(f[0] >= UTILITY_PENALTY or f[1] >= math.log(CRB_PENALTY))


class IsacProblem:
    """Adapter exposing a scenario to the decomposition optimizer."""

    def __init__(self, scn: Scenario):
        self.scenario = scn
        self.dim = scn.dim

    def evaluate(self, x) -> np.ndarray:
        return np.array(objectives(x, self.scenario))

    def admissible(self, f) -> bool:
        return not is_penalized(f)
