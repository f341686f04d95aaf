import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import brute_fim, brute_objectives
from isacopt.model import (
    CRB_PENALTY,
    UTILITY_PENALTY,
    Deployment,
    FimComponents,
    PhysicalConstants,
    Scenario,
    channel_power_gain_sq,
    crb_trace,
    decode,
    distance,
    evaluate,
    fim_components,
    make_scenario,
    network_utility,
    objectives,
    sinr_from_gains,
    sinr_matrix,
)


def consts(**kw):
    base = dict(noise_power_mw=1e-11, ref_channel_gain=1e-6, bandwidth_hz=51.2e6)
    base.update(kw)
    return PhysicalConstants(**base)


def tiny_scenario(K=2, M=1, users=((0.0, 0.0),), H=100.0, rcs=None, area=(-2000.0, 2000.0), **kw):
    rcs = np.full((K, M, K), 0.9) if rcs is None else rcs
    return Scenario(K, M, H, np.array(users, dtype=float), area[0], area[1], 1.0, 100.0, rcs, consts(**kw))


# --- geometry / channel ---------------------------------------------------


@pytest.mark.parametrize(
    "uav, h, user, expected",
    [((0, 0), 100, (0, 0), 100.0), ((3, 4), 0, (0, 0), 5.0), ((300, 400), 100, (0, 0), math.sqrt(260000.0))],
)
def test_distance(uav, h, user, expected):
    assert distance(uav, h, user) == pytest.approx(expected, rel=1e-15)


def test_distance_at_least_altitude():
    rng = np.random.default_rng(0)
    d = distance(rng.uniform(-1e3, 1e3, (100, 2)), 100.0, rng.uniform(-1e3, 1e3, (100, 2)))
    assert np.all(d >= 100.0)


def test_channel_gain():
    c = consts()
    assert channel_power_gain_sq(100.0, c) == pytest.approx(1e-10, rel=1e-15)
    assert channel_power_gain_sq(1.0, c) == pytest.approx(1e-6, rel=1e-15)
    assert channel_power_gain_sq(509.90195135927848, c) == pytest.approx(1e-6 / 260000.0, rel=1e-12)
    with pytest.raises(ValueError):
        channel_power_gain_sq(0.0, c)


def test_xi_definition():
    c = consts()
    assert c.xi == 8 * math.pi**2 * 51.2e6**2 / (1e-11 * 2.998e8**2)
    with pytest.raises(ValueError):
        consts(noise_power_mw=0.0)


# --- SINR / utility -------------------------------------------------------


def test_sinr_single_link():
    g = sinr_from_gains(np.array([100.0]), np.array([[1e-10]]), 1e-11)
    assert g[0, 0] == pytest.approx(1000.0, rel=1e-12)


def test_sinr_two_equal_links():
    g = sinr_from_gains(np.array([100.0, 100.0]), np.full((2, 3), 1e-10), 1e-11)
    assert np.allclose(g, 1e-8 / (1e-8 + 1e-11), rtol=1e-12)


def test_sinr_zero_power_row():
    scn = tiny_scenario(M=2, users=((0, 0), (500, 500)))
    dep = Deployment(np.array([[0.0, 0.0], [100.0, 0.0]]), np.ones(2), np.array([0.0, 50.0]))
    assert np.all(sinr_matrix(dep, scn)[0] == 0.0)


def test_sinr_scale_free_in_gain_and_noise():
    rng = np.random.default_rng(1)
    p = rng.uniform(0, 100, 3)
    h2 = rng.uniform(1e-12, 1e-9, (3, 5))
    a = sinr_from_gains(p, h2, 1e-11)
    b = sinr_from_gains(p, 7.5 * h2, 7.5e-11)
    assert np.allclose(a, b, rtol=1e-12)


def test_utility_single_link_value():
    # user directly below a UAV at 100 m, 100 mW: h^2 = 1e-10, gamma = 1000
    scn = tiny_scenario(K=1)
    dep = Deployment(np.array([[0.0, 0.0]]), np.array([1.0]), np.array([100.0]))
    expected = math.log(51.2e6 * math.log2(1001))
    assert network_utility(dep, scn) == pytest.approx(expected, rel=1e-12)


def test_utility_four_users_matches_quoted_value():
    # M=4 so each link gets B/4 = 12.8 MHz; one UAV above one user, others far away
    scn = tiny_scenario(K=1, M=1, bandwidth_hz=12.8e6)
    dep = Deployment(np.array([[0.0, 0.0]]), np.array([1.0]), np.array([100.0]))
    assert network_utility(dep, scn) == pytest.approx(18.6642580654, rel=1e-10)


def test_utility_zero_rate_is_penalized():
    scn = tiny_scenario()
    dep = Deployment(np.array([[0.0, 0.0], [10.0, 0.0]]), np.ones(2), np.zeros(2))
    assert network_utility(dep, scn) == -UTILITY_PENALTY


def test_doubling_bandwidth_adds_m_ln2():
    users = ((0, 0), (300, 0), (0, 700))
    a = tiny_scenario(M=3, users=users)
    b = tiny_scenario(M=3, users=users, bandwidth_hz=2 * 51.2e6)
    dep = Deployment(np.array([[0.0, 100.0], [200.0, 300.0]]), np.ones(2), np.array([30.0, 60.0]))
    assert network_utility(dep, b) - network_utility(dep, a) == pytest.approx(3 * math.log(2), rel=1e-10)


# --- FIM / CRB ------------------------------------------------------------


def test_fim_symmetric_pair_has_zero_cross_term():
    scn = tiny_scenario()
    dep = Deployment(np.array([[400.0, 0.0], [-400.0, 0.0]]), np.ones(2), np.ones(2))
    fim = fim_components(dep, scn, 0)
    assert np.all(fim.b_c == 0.0)


def test_fim_single_uav_rank_one():
    scn = tiny_scenario(K=1)
    dep = Deployment(np.array([[321.0, -123.0]]), np.ones(1), np.ones(1))
    fim = fim_components(dep, scn, 0)
    det = fim.b_a[0] * fim.b_b[0] - fim.b_c[0] ** 2
    assert abs(det) <= 1e-12 * fim.b_a[0] * fim.b_b[0]
    assert crb_trace(fim, [5.0]) == CRB_PENALTY


@pytest.mark.parametrize("K", [2, 3, 4])
def test_fim_matches_double_loop(K):
    rng = np.random.default_rng(K)
    for _ in range(20):
        M = 3
        users = rng.uniform(0, 2000, (M, 2))
        rcs = rng.uniform(0.8, 1.0, (K, M, K))
        scn = Scenario(K, M, 100.0, users, 0.0, 2000.0, 1.0, 100.0, rcs, consts())
        xy = rng.uniform(0, 2000, (K, 2))
        dep = Deployment(xy, np.ones(K), np.ones(K))
        for m in range(M):
            got = fim_components(dep, scn, m)
            ref = brute_fim(xy.tolist(), users.tolist(), 100.0, rcs.tolist(), scn.constants.xi, m)
            for g, r in zip(got, ref):
                assert np.allclose(g, r, rtol=1e-12, atol=0)


def test_crb_diagonal_example():
    fim = FimComponents(np.array([2.0, 0.0]), np.array([0.0, 2.0]), np.zeros(2))
    assert crb_trace(fim, [1.0, 1.0]) == 1.0


def test_crb_zero_power_penalized():
    fim = FimComponents(np.array([2.0, 1.0]), np.array([1.0, 2.0]), np.array([0.3, -0.2]))
    assert crb_trace(fim, [0.0, 0.0]) == CRB_PENALTY


def _random_fim(rng, K):
    users = rng.uniform(0, 2000, (1, 2))
    rcs = rng.uniform(0.8, 1.0, (K, 1, K))
    scn = Scenario(K, 1, 100.0, users, 0.0, 2000.0, 1.0, 100.0, rcs, consts())
    dep = Deployment(rng.uniform(0, 2000, (K, 2)), np.ones(K), np.ones(K))
    return fim_components(dep, scn, 0)


def test_crb_equals_inverse_trace():
    rng = np.random.default_rng(11)
    for _ in range(200):
        K = int(rng.integers(2, 5))
        fim = _random_fim(rng, K)
        p = rng.uniform(0.1, 100, K)
        J = np.array([[fim.b_a @ p, fim.b_c @ p], [fim.b_c @ p, fim.b_b @ p]])
        assert crb_trace(fim, p) == pytest.approx(np.trace(np.linalg.inv(J)), rel=1e-10)


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
def test_crb_power_scaling(c):
    rng = np.random.default_rng(12)
    for _ in range(50):
        K = int(rng.integers(2, 5))
        fim = _random_fim(rng, K)
        p = rng.uniform(0.1, 100, K)
        assert crb_trace(fim, c * p) == pytest.approx(crb_trace(fim, p) / c, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.integers(1, 4))
def test_cauchy_schwarz_determinant(seed, K):
    rng = np.random.default_rng(seed)
    fim = _random_fim(rng, K)
    p = rng.uniform(0, 100, K)
    ja, jb, jc = fim.b_a @ p, fim.b_b @ p, fim.b_c @ p
    assert ja * jb - jc * jc >= -1e-12 * ja * jb


# --- decoding -------------------------------------------------------------


def test_decode_midpoint(default_scenario):
    dep = decode(np.full(8, 0.5), default_scenario)
    assert np.allclose(dep.uav_xy, 1000.0)
    assert np.allclose(dep.p_rad_mw + dep.p_com_mw, 50.5)
    assert np.allclose(dep.p_com_mw, 25.25)
    assert np.allclose(dep.p_rad_mw, 25.25)


def test_decode_corners(default_scenario):
    lo = decode(np.zeros(8), default_scenario)
    assert np.all(lo.uav_xy == 0.0) and np.allclose(lo.p_com_mw, 0.0) and np.allclose(lo.p_rad_mw, 1.0)
    hi = decode(np.ones(8), default_scenario)
    assert np.allclose(hi.uav_xy, 2000.0) and np.allclose(hi.p_com_mw, 100.0) and np.allclose(hi.p_rad_mw, 0.0)


def test_decode_wrong_length(default_scenario):
    with pytest.raises(ValueError):
        decode(np.zeros(7), default_scenario)


@settings(max_examples=200, deadline=None)
@given(x=arrays(np.float64, 8, elements=st.floats(0.0, 1.0)))
def test_decode_always_feasible(default_scenario, x):
    assert decode(x, default_scenario).is_feasible(default_scenario)


# --- objectives -----------------------------------------------------------


def test_objectives_match_scalar_oracle(default_scenario):
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.random(8)
        got = objectives(x, default_scenario)
        ref = brute_objectives(x, default_scenario)
        assert got[0] == pytest.approx(ref[0], rel=1e-12)
        assert got[1] == pytest.approx(ref[1], rel=1e-9, abs=1e-12)


def test_objectives_golden(default_scenario):
    # frozen after agreement with brute_objectives; all-0.5 stacks both UAVs -> rank-1 FIM
    f = objectives(np.full(8, 0.5), default_scenario)
    assert f[0] == pytest.approx(-67.36775619411155, rel=1e-12)
    assert f[1] == pytest.approx(math.log(4 * CRB_PENALTY), rel=1e-12)
    x = np.array([0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 0.5, 0.5])
    f = objectives(x, default_scenario)
    assert f[0] == pytest.approx(-67.77434846409207, rel=1e-12)
    assert f[1] == pytest.approx(-0.29882424045480893, rel=1e-10)


def test_objectives_pure(default_scenario):
    x = np.random.default_rng(0).random(8)
    assert objectives(x, default_scenario) == objectives(x.copy(), default_scenario)


def test_uav_permutation_symmetry():
    scn = make_scenario(rcs_bounds=(0.9, 0.9), seed=4)
    x = np.random.default_rng(2).random(8)
    swapped = np.concatenate([x[4:], x[:4]])
    a, b = objectives(x, scn), objectives(swapped, scn)
    assert a[0] == pytest.approx(b[0], rel=1e-13)
    assert a[1] == pytest.approx(b[1], rel=1e-12)


def test_zero_comm_power_penalizes_f1_only(default_scenario):
    x = np.array([0.2, 0.3, 0.8, 0.0, 0.7, 0.6, 0.9, 0.0])
    f, degenerate = evaluate(x, default_scenario)
    assert degenerate
    assert f[0] == UTILITY_PENALTY
    assert np.isfinite(f[1]) and f[1] < math.log(CRB_PENALTY)


def test_single_uav_always_crb_penalty():
    scn = make_scenario(num_uavs=1)
    for x in np.random.default_rng(0).random((20, 4)):
        assert objectives(x, scn)[1] >= math.log(CRB_PENALTY)


def test_scenario_validation():
    with pytest.raises(ValueError):
        tiny_scenario(users=((5000.0, 0.0),))
    with pytest.raises(ValueError):
        Scenario(2, 1, 100.0, np.zeros((1, 2)), -1, 1, 1.0, 100.0, np.zeros((2, 1, 2)), consts())


def test_scenario_hash_tracks_physics():
    a, b = make_scenario(seed=1), make_scenario(seed=1)
    assert a.hash() == b.hash()
    assert make_scenario(seed=2).hash() != a.hash()
    assert make_scenario(seed=1, noise_dbm=-100).hash() != a.hash()
