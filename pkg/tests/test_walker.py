"""Random walk on dynamical percolation: kernels vs reference, moments."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from dynperc.environment import EnvParams, TorusTrajectory
from dynperc.lattice import HYPERCUBIC, TRIANGULAR, LatticeKind
from dynperc.randomness import Stream
from dynperc.walker import (
    markov_type_ratios,
    msd_experiment,
    reference_msd_row,
    sigma_hat,
    sigma_sweep,
    simulate_walk,
    tail_survival,
)

Z2 = LatticeKind(HYPERCUBIC, 2)


CASES = [
    EnvParams(LatticeKind(HYPERCUBIC, 2, 6), 0.5, 0.2),
    EnvParams(LatticeKind(TRIANGULAR, L=5), 0.4, 0.3),
    EnvParams(LatticeKind(HYPERCUBIC, 3), 0.7, 0.1),
    EnvParams(LatticeKind(TRIANGULAR), 0.5, 0.05),
]


@pytest.mark.parametrize("params", CASES, ids=lambda p: f"{p.lattice.kind}-L{p.lattice.L}")
def test_kernel_matches_reference_exactly(params):
    cps = [1.0, 2.0, 5.0, 10.0]
    table = msd_experiment(params, cps, replicas=8, seed=42, keep_raw=True)
    for r in range(8):
        _, pos, g, l2, att = reference_msd_row(params, cps, 42, r)
        assert np.array_equal(table.raw_sq_graph[r], g)
        assert np.array_equal(table.raw_sq_l2[r], l2)
        assert np.array_equal(table.raw_attempts[r], att)


def test_all_closed_walker_frozen():
    params = EnvParams(Z2, 0.0, 0.2)
    table = msd_experiment(params, [5.0, 20.0], replicas=50, seed=1, keep_raw=True)
    assert np.all(table.raw_sq_graph == 0.0)
    assert np.all(table.raw_sq_l2 == 0.0)
    assert table.raw_attempts[:, -1].sum() > 0


def test_all_open_msd_normalization():
    # with every bond open the walk moves at every clock ring, so
    # E|X_t|^2 (euclidean) = E[#rings] = t
    params = EnvParams(Z2, 1.0, 0.1)
    table = msd_experiment(params, [100.0], replicas=10**5, seed=2, threads=1)
    assert abs(table.mean_sq_l2[0] - 100.0) < 1.8
    assert table.stderr_l2[0] < 0.5


def test_attempts_are_poisson():
    params = EnvParams(Z2, 0.5, 0.2)
    t = 50.0
    n = 10**4
    table = msd_experiment(params, [t], replicas=n, seed=3, keep_raw=True)
    att = table.raw_attempts[:, 0].astype(float)
    assert abs(att.mean() - t) < 4 * math.sqrt(t / n)
    assert abs(att.var() - t) < 4 * math.sqrt((2 * t * t + t) / n)
    # displacement can never beat the attempt count
    assert np.all(table.raw_sq_graph <= table.raw_attempts.astype(float) ** 2)


def test_thread_count_does_not_change_results():
    params = EnvParams(LatticeKind(TRIANGULAR, L=8), 0.6, 0.15)
    cps = [2.0, 8.0, 16.0]
    a = msd_experiment(params, cps, replicas=60, seed=7, threads=1, keep_raw=True)
    b = msd_experiment(params, cps, replicas=60, seed=7, threads=3, keep_raw=True)
    assert np.array_equal(a.raw_sq_graph, b.raw_sq_graph)
    assert np.array_equal(a.raw_sq_l2, b.raw_sq_l2)
    assert np.array_equal(a.mean_sq_graph, b.mean_sq_graph)


def test_msd_input_validation():
    params = EnvParams(Z2, 0.5, 0.2)
    with pytest.raises(ValueError):
        msd_experiment(params, [1.0, 1.0], 10, 0)
    with pytest.raises(ValueError):
        msd_experiment(params, [0.0, 1.0], 10, 0)
    with pytest.raises(ValueError):
        msd_experiment(params, [], 10, 0)
    with pytest.raises(ValueError):
        msd_experiment(params, [1.0], 1, 0)
    with pytest.raises(ValueError):
        msd_experiment(EnvParams(LatticeKind(HYPERCUBIC, 6), 0.5, 0.2), [1.0], 10, 0)


def test_simulate_walk_checkpoint_validation():
    params = EnvParams(Z2, 0.5, 0.2)
    from dynperc.walker import lazy_environment

    with pytest.raises(ValueError):
        simulate_walk(params, lazy_environment(params, 0), [3.0, 2.0], Stream.from_labels(0))


def test_sigma_hat_all_open():
    params = EnvParams(Z2, 1.0, 0.1)
    table = msd_experiment(params, [50.0, 100.0, 150.0, 200.0], replicas=2000, seed=5)
    s = sigma_hat(table)
    assert abs(s.value_l2 - 1.0) < 0.05
    assert s.ci_lo_l2 < s.value_l2 < s.ci_hi_l2
    assert s.t == 200.0
    assert s.slope_diagnostic > 0


def test_sigma_hat_needs_replicas():
    params = EnvParams(Z2, 0.5, 0.2)
    table = msd_experiment(params, [5.0], replicas=50, seed=5)
    with pytest.raises(ValueError):
        sigma_hat(table)


def test_sigma_sweep_seeds_differ_per_mu():
    lat = LatticeKind(HYPERCUBIC, 2)
    rows = sigma_sweep(lat, 0.5, [0.1, 0.2], [10.0, 20.0], 150, seed=11)
    assert [mu for mu, _ in rows] == [0.1, 0.2]
    assert rows[0][1].value != rows[1][1].value


def test_tail_survival_handcrafted():
    sq = np.array([0.0, 1.0, 4.0, 9.0, 16.0, 25.0])
    rows = tail_survival(sq, [1, 2, 3])
    want_k = {1: 5, 2: 4, 3: 3}
    for L, phat, lo, hi, k in rows:
        assert k == want_k[int(L)]
        assert phat == k / 6
        assert lo <= phat <= hi


def test_markov_type_trivial_multiplier():
    params = EnvParams(Z2, 0.5, 0.2)
    rows = markov_type_ratios(params, 10.0, [1], 200, seed=13)
    (k, r, lo, hi), = rows
    assert k == 1
    assert r == 1.0
    assert hi - lo == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        markov_type_ratios(params, 10.0, [0], 200, seed=13)


def test_markov_type_all_open_ratio_near_one():
    # MSD is exactly linear at p = 1, so every ratio concentrates at 1
    params = EnvParams(Z2, 1.0, 0.1)
    rows = markov_type_ratios(params, 50.0, [2, 4], 2000, seed=17)
    for k, r, lo, hi in rows:
        assert 0.9 < r < 1.1
        assert lo < r < hi


def test_determinism_and_seed_sensitivity():
    params = EnvParams(Z2, 0.5, 0.2)
    a = msd_experiment(params, [5.0, 10.0], 40, seed=19, keep_raw=True)
    b = msd_experiment(params, [5.0, 10.0], 40, seed=19, keep_raw=True)
    c = msd_experiment(params, [5.0, 10.0], 40, seed=20, keep_raw=True)
    assert np.array_equal(a.raw_sq_graph, b.raw_sq_graph)
    assert not np.array_equal(a.raw_sq_graph, c.raw_sq_graph)


def test_lazy_and_trajectory_environments_agree_in_law():
    lk = LatticeKind(HYPERCUBIC, 2, 6)
    params = EnvParams(lk, 0.6, 0.2)
    t = 10.0
    n = 500
    from dynperc.walker import lazy_environment

    lazy_final = np.empty(n)
    for r in range(n):
        env = lazy_environment(params, 23, r)
        _, _, l2, _ = simulate_walk(params, env, [t], Stream.from_labels(23, (2, r)))
        lazy_final[r] = l2[0]
    traj_final = np.empty(n)
    for r in range(n):
        traj = TorusTrajectory.generate(params, 0.0, t, 24, (r,))
        _, _, l2, _ = simulate_walk(params, traj, [t], Stream.from_labels(24, (2, r)))
        traj_final[r] = l2[0]
    assert sps.ks_2samp(lazy_final, traj_final).pvalue > 1e-3
    se = math.sqrt(lazy_final.var() / n + traj_final.var() / n)
    assert abs(lazy_final.mean() - traj_final.mean()) < 4 * se
