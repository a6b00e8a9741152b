"""Static percolation: one-arm probabilities, largest cluster, ever-open graph."""

import itertools
import math
from collections import deque

import numpy as np
import pytest

from dynperc import _kernels
from dynperc.environment import ever_open_params
from dynperc.lattice import (
    HYPERCUBIC,
    TRIANGULAR,
    LatticeKind,
    neighbors,
    unit_index,
    vertex_coords,
    vertex_index,
)
from dynperc.randomness import PURPOSE_ONEARM, PURPOSE_THETA, derive_key
from dynperc.staticperc import (
    P_C_TRIANGULAR_SITE,
    P_C_Z2_BOND,
    critical_window_p,
    h_cluster_compare,
    h_cluster_trial,
    one_arm_bfs,
    one_arm_estimate,
    one_arm_sweep,
    one_arm_trial,
    origin_in_largest,
    theta_config,
    theta_estimate,
    trial_keys,
)
from dynperc.stats import two_proportion_test

Z2 = LatticeKind(HYPERCUBIC, 2)
TRI = LatticeKind(TRIANGULAR)


def z2_bonds_in_ball(r):
    out = []
    for x in range(-r, r + 1):
        for y in range(-r, r + 1):
            if x + 1 <= r:
                out.append(((x, y), 0))
            if y + 1 <= r:
                out.append(((x, y), 1))
    return out


def exact_one_arm_by_enumeration(lk, r, units, p):
    """Sum of config probabilities over all 2^n unit configurations."""
    total = 0.0
    for bits in itertools.product((False, True), repeat=len(units)):
        cfg = dict(zip(units, bits))
        if one_arm_bfs(lk, r, cfg.__getitem__):
            k = sum(bits)
            total += p**k * (1 - p) ** (len(units) - k)
    return total


def test_one_arm_z2_r1_exact():
    units = z2_bonds_in_ball(1)
    assert len(units) == 12
    got = exact_one_arm_by_enumeration(Z2, 1, units, 0.5)
    assert got == pytest.approx(15.0 / 16.0, abs=1e-12)
    # origin touches the boundary iff any incident bond is open
    for p in (0.2, 0.7):
        got = exact_one_arm_by_enumeration(Z2, 1, units, p)
        assert got == pytest.approx(1 - (1 - p) ** 4, abs=1e-12)


def test_one_arm_triangular_r1_exact():
    units = [(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)]
    got = exact_one_arm_by_enumeration(TRI, 1, units, 0.5)
    assert got == pytest.approx(63.0 / 128.0, abs=1e-12)
    for p in (0.3, 0.8):
        got = exact_one_arm_by_enumeration(TRI, 1, units, p)
        assert got == pytest.approx(p * (1 - (1 - p) ** 6), abs=1e-12)


def test_one_arm_guards():
    with pytest.raises(ValueError):
        one_arm_bfs(LatticeKind(HYPERCUBIC, 2, 8), 2, lambda u: True)
    with pytest.raises(ValueError):
        one_arm_bfs(Z2, 0, lambda u: True)


def test_one_arm_monte_carlo_matches_exact():
    n = 20000
    row = one_arm_estimate(Z2, 1, 0.5, n, seed=5)
    assert abs(row.phat - 15.0 / 16.0) < 4 * math.sqrt((15 / 16) * (1 / 16) / n)
    assert row.ci_lo <= 15.0 / 16.0 <= row.ci_hi
    row = one_arm_estimate(TRI, 1, 0.5, n, seed=6)
    assert abs(row.phat - 63.0 / 128.0) < 4 * math.sqrt(0.25 / n)


def test_kernel_trials_match_reference():
    for lk, r, p in ((TRI, 4, 0.55), (Z2, 3, 0.45)):
        keys = trial_keys(11, PURPOSE_ONEARM, 0, 300)
        out = np.zeros(300, dtype=np.uint8)
        if lk.kind == TRIANGULAR:
            _kernels.onearm_tri_batch(r, p, keys, out)
        else:
            _kernels.onearm_z2_batch(r, p, keys, out)
        ref = np.array([one_arm_trial(lk, r, p, int(k)) for k in keys], dtype=np.uint8)
        assert np.array_equal(out, ref), (lk.kind, r)


def test_one_arm_coupling_monotone_in_radius():
    # a single trial key fixes the configuration, so reaching radius
    # r+1 implies reaching radius r
    for lk in (Z2, TRI):
        for i in range(500):
            key = derive_key(21, (PURPOSE_ONEARM, i))
            succ = [one_arm_trial(lk, r, 0.55, key) for r in (1, 2, 3, 4)]
            assert all(a >= b for a, b in zip(succ, succ[1:])), (lk.kind, i)


def test_one_arm_coupling_monotone_in_density():
    for lk in (Z2, TRI):
        for i in range(500):
            key = derive_key(22, (PURPOSE_ONEARM, i))
            succ = [one_arm_trial(lk, 3, p, key) for p in (0.3, 0.5, 0.7)]
            assert all(a <= b for a, b in zip(succ, succ[1:])), (lk.kind, i)


def test_one_arm_never_leaves_ball():
    for lk, r in ((Z2, 4), (TRI, 4)):
        for i in range(100):
            log = []
            one_arm_trial(lk, r, 0.55, derive_key(23, (i,)), query_log=log)
            for unit in log:
                if lk.kind == TRIANGULAR:
                    assert max(abs(c) for c in unit) <= r
                else:
                    (base, axis) = unit
                    tip = tuple(c + (1 if j == axis else 0) for j, c in enumerate(base))
                    assert max(abs(c) for c in base) <= r
                    assert max(abs(c) for c in tip) <= r


def test_one_arm_sweep_rules():
    rows = one_arm_sweep(TRI, [1, 2], 500, seed=9, rule="window")
    assert rows[0].p == 0.5 + 1.0
    assert rows[1].p == 0.5 + 2.0 ** (-0.75)
    rows = one_arm_sweep(TRI, [1], 500, seed=9)
    assert rows[0].p == P_C_TRIANGULAR_SITE
    with pytest.raises(ValueError):
        one_arm_sweep(TRI, [1], 500, seed=9, rule="adaptive")
    assert critical_window_p(0.5, 16) == 0.625
    assert P_C_Z2_BOND == 0.5


def cluster_size_at_origin(lk, config):
    """Independent origin-cluster size via BFS over open units."""
    site_mode = lk.kind == TRIANGULAR
    if site_mode and not config[0]:
        return 0
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for unit, w in neighbors(lk, vertex_coords(lk, v)):
            widx = vertex_index(lk, w)
            open_ = config[widx] if site_mode else config[unit_index(lk, unit)]
            if open_ and widx not in seen:
                seen.add(widx)
                queue.append(widx)
    return len(seen)


def test_origin_cluster_monotone_in_density():
    # same replica key, increasing p: open units only accumulate, so
    # the origin cluster can only grow
    grid = (0.2, 0.4, 0.6, 0.8, 1.0)
    for lk in (LatticeKind(TRIANGULAR, L=8), LatticeKind(HYPERCUBIC, 2, 8)):
        for rep in range(100):
            key = derive_key(31, (PURPOSE_THETA, rep))
            sizes = [cluster_size_at_origin(lk, theta_config(lk, key, p)) for p in grid]
            assert all(a <= b for a, b in zip(sizes, sizes[1:])), (lk.kind, rep)


def test_theta_degenerate_densities():
    tri = LatticeKind(TRIANGULAR, L=8)
    sq = LatticeKind(HYPERCUBIC, 2, 8)
    assert theta_estimate(tri, 1.0, 50, seed=1).theta_hat == 1.0
    assert theta_estimate(tri, 0.0, 50, seed=1).theta_hat == 0.0
    # with no open bond every vertex is its own cluster and the tie
    # breaks to the smallest vertex index, which is the origin
    assert theta_estimate(sq, 0.0, 50, seed=1).theta_hat == 1.0
    with pytest.raises(ValueError):
        theta_estimate(Z2, 0.5, 50, seed=1)


def test_theta_kernel_matches_reference():
    for lk in (LatticeKind(TRIANGULAR, L=6), LatticeKind(HYPERCUBIC, 2, 6)):
        keys = trial_keys(33, PURPOSE_THETA, 0, 300)
        out = np.zeros(300, dtype=np.uint8)
        if lk.kind == TRIANGULAR:
            _kernels.theta_tri_batch(lk.L, 0.55, keys, out)
        else:
            _kernels.theta_z2_batch(lk.L, 0.55, keys, out)
        ref = np.array(
            [origin_in_largest(lk, theta_config(lk, int(k), 0.55)) for k in keys],
            dtype=np.uint8,
        )
        assert np.array_equal(out, ref), lk.kind


def test_theta_increases_with_density():
    lk = LatticeKind(TRIANGULAR, L=16)
    lo = theta_estimate(lk, 0.45, 500, seed=35)
    hi = theta_estimate(lk, 0.65, 500, seed=35)
    z, pv = two_proportion_test(hi.successes, 500, lo.successes, 500)
    assert hi.theta_hat > lo.theta_hat and z > 0


def test_h_cluster_mode_validation():
    with pytest.raises(ValueError):
        h_cluster_trial(TRI, 2, 0.5, 0.2, 5.0, derive_key(1), "both")


def test_h_cluster_t0_reduces_to_plain_percolation():
    assert ever_open_params(0.5, 0.2, 0.0) == 0.5
    cmp = h_cluster_compare(TRI, 8, 0.5, 0.2, 0.0, 5000, seed=41)
    assert cmp.p_ever == 0.5
    assert cmp.p_value > 1e-3


def test_h_cluster_kernel_matches_reference():
    r, p_c, mu, t = 4, 0.5, 0.2, 5.0
    keys = trial_keys(43, 7, 0, 200)  # PURPOSE_HCLUSTER_DYN
    out = np.zeros(200, dtype=np.uint8)
    _kernels.hcluster_dyn_tri_batch(r, p_c, mu, t, keys, out)
    ref = np.array(
        [h_cluster_trial(TRI, r, p_c, mu, t, int(k), "dynamical") for k in keys],
        dtype=np.uint8,
    )
    assert np.array_equal(out, ref)


def test_h_cluster_dyn_vs_static_square_lattice():
    # reference (pure python) path for the bond lattice
    cmp = h_cluster_compare(Z2, 2, 0.5, 0.2, 5.0, 3000, seed=47)
    assert cmp.p_value > 1e-3
    assert cmp.p_ever == ever_open_params(0.5, 0.2, 5.0)
    assert cmp.trials == 3000
