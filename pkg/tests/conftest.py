"""Shared fixtures and literal (loop-based) reference implementations used as
oracles against the vectorized model code."""
import math

import numpy as np
import pytest

from isacopt.model import make_scenario


def brute_fim(uav_xy, users, H, rcs, xi, m):
    """Literal double loop over (k, j) for one user."""
    K = len(uav_xy)
    u, v = users[m]
    R = [math.sqrt((uav_xy[k][0] - u) ** 2 + (uav_xy[k][1] - v) ** 2 + H * H) for k in range(K)]
    b_a, b_b, b_c = [0.0] * K, [0.0] * K, [0.0] * K
    for k in range(K):
        for j in range(K):
            alpha = 1.0 / (R[k] ** 2 * R[j] ** 2)
            l2 = rcs[k][m][j] ** 2
            gx = (uav_xy[k][0] - u) / R[k] + (uav_xy[j][0] - u) / R[j]
            gy = (uav_xy[k][1] - v) / R[k] + (uav_xy[j][1] - v) / R[j]
            b_a[k] += xi * alpha * l2 * gx * gx
            b_b[k] += xi * alpha * l2 * gy * gy
            b_c[k] += xi * alpha * l2 * gx * gy
    return np.array(b_a), np.array(b_b), np.array(b_c)


def brute_objectives(x, scn):
    """Scalar re-derivation of both objectives, independent of isacopt.model."""
    K, M = scn.num_uavs, scn.num_users
    c = scn.constants
    span = scn.area_max - scn.area_min
    xy, prad, pcom = [], [], []
    for k in range(K):
        g = [min(1.0, max(0.0, t)) for t in x[4 * k : 4 * k + 4]]
        xy.append((scn.area_min + g[0] * span, scn.area_min + g[1] * span))
        ptx = scn.p_min_mw + g[2] * (scn.p_max_mw - scn.p_min_mw)
        pcom.append(g[3] * ptx)
        prad.append((1 - g[3]) * ptx)
    users = scn.user_positions.tolist()
    H = scn.altitude_m
    f1 = 0.0
    for m in range(M):
        h2 = []
        for k in range(K):
            R2 = (xy[k][0] - users[m][0]) ** 2 + (xy[k][1] - users[m][1]) ** 2 + H * H
            h2.append(c.ref_channel_gain / R2)
        total = 0.0
        for k in range(K):
            interf = sum(pcom[q] * h2[q] for q in range(K) if q != k)
            gamma = pcom[k] * h2[k] / (interf + c.noise_power_mw)
            total += c.bandwidth_hz / M * math.log2(1 + gamma)
        f1 += math.log(total)
    crb_sum = 0.0
    for m in range(M):
        b_a, b_b, b_c = brute_fim(xy, users, H, scn.rcs_mag.tolist(), c.xi, m)
        J = np.array([[b_a @ prad, b_c @ prad], [b_c @ prad, b_b @ prad]])
        crb_sum += np.trace(np.linalg.inv(J))
    return -f1, math.log(crb_sum)


@pytest.fixture(scope="session")
def default_scenario():
    return make_scenario()


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
