"""Static percolation estimators.

One-arm probabilities P(origin connected to the boundary of B_r inside
B_r), largest-cluster membership density on tori (the finite-volume
stand-in for theta(p)), and the ever-open subgraph H of a dynamical
environment over [0, t], which is itself a static percolation sample at
density p + (1-p)(1 - exp(-mu t p)).

Conventions, fixed by the exactly-enumerable small cases:
- triangular site one-arm requires the origin itself to be open
  (P = 63/128 at r = 1, p = 1/2);
- Z^2 bond one-arm has no origin factor (P = 15/16 at r = 1, p = 1/2);
- only units with both endpoints inside B_r are ever examined.

Every trial draws one uniform per unit as a pure function of
(trial key, unit), so a trial is a monotone coupling: raising p can
only add open units, and the same trial at a larger radius explores the
same configuration.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import lattice as lat
from .environment import ever_open_params, sample_ever_open_unit
from .randomness import (
    PURPOSE_HCLUSTER_DYN,
    PURPOSE_HCLUSTER_STATIC,
    PURPOSE_ONEARM,
    PURPOSE_THETA,
    Stream,
    derive_key,
    stream_value,
    subkey,
    uniform_from_bits,
    unit_uniform,
)
from .stats import wilson_interval

P_C_TRIANGULAR_SITE = 0.5
P_C_Z2_BOND = 0.5


def critical_window_p(p_c, r, exponent=0.75):
    """Near-critical density p_c + r^(-exponent) used by window sweeps."""
    return p_c + r ** (-exponent)


# reference implementation (any d, pluggable openness)

def one_arm_bfs(lk, r, is_open, query_log=None):
    """BFS one-arm indicator with openness delegated to is_open(unit).

    Pure connectivity: the outcome does not depend on exploration
    order.  query_log, if given, collects every unit examined (used to
    verify nothing outside B_r is ever touched).
    """
    if lk.is_torus:
        raise ValueError("one-arm trials live on the infinite lattice")
    if r < 1:
        raise ValueError("radius must be >= 1")
    org = lat.origin(lk)
    site_mode = lk.kind == lat.TRIANGULAR

    def examine(unit):
        if query_log is not None:
            query_log.append(unit)
        return is_open(unit)

    if site_mode and not examine(org):
        return False
    seen = {org}
    sampled_bonds = {}
    queue = deque([org])
    while queue:
        v = queue.popleft()
        for unit, w in lat.neighbors(lk, v):
            if max(abs(c) for c in w) > r:
                continue
            if site_mode:
                if w in seen:
                    continue
                seen.add(w)
                if not examine(unit):
                    continue
            else:
                if unit not in sampled_bonds:
                    sampled_bonds[unit] = examine(unit)
                if not sampled_bonds[unit]:
                    continue
                if w in seen:
                    continue
                seen.add(w)
            if max(abs(c) for c in w) == r:
                return True
            queue.append(w)
    return False


def one_arm_trial(lk, r, p, trial_key, query_log=None):
    """One coupled-uniform one-arm trial (reference path)."""
    def is_open(unit):
        return unit_uniform(trial_key, lat.pack_unit(lk, unit)) < p

    return one_arm_bfs(lk, r, is_open, query_log)


def trial_keys(seed, purpose, lo, hi):
    return np.array([derive_key(seed, (purpose, i)) for i in range(lo, hi)],
                    dtype=np.uint64)


def _onearm_chunk(args, lo, hi):
    lk, r, p, seed = args
    keys = trial_keys(seed, PURPOSE_ONEARM, lo, hi)
    out = np.zeros(hi - lo, dtype=np.uint8)
    if lk.kind == lat.TRIANGULAR:
        _kernels.onearm_tri_batch(r, p, keys, out)
    elif lk.d == 2:
        _kernels.onearm_z2_batch(r, p, keys, out)
    else:
        for i in range(lo, hi):
            out[i - lo] = one_arm_trial(lk, r, p, keys[i - lo])
    return out


@dataclass
class OneArmRow:
    r: int
    p: float
    trials: int
    successes: int
    phat: float
    ci_lo: float
    ci_hi: float


def one_arm_estimate(lk, r, p, trials, seed, threads=1):
    """Monte Carlo one-arm probability with a Wilson interval.

    Trial i draws from streams labeled (onearm, i) with no radius or
    density in the label, so estimates across r and p are coupled.
    """
    from .parallel import map_chunks

    parts = map_chunks(_onearm_chunk, (lk, r, p, seed), trials, threads)
    succ = int(np.concatenate(parts).sum())
    lo, hi = wilson_interval(succ, trials)
    return OneArmRow(r, p, trials, succ, succ / trials, lo, hi)


def one_arm_sweep(lk, radii, trials, seed, p=None, rule="fixed", threads=1,
                  window_exponent=0.75):
    """One-arm estimates over a radius grid.

    rule 'fixed' uses the given p throughout; rule 'window' tracks the
    near-critical densities p_c + r^(-window_exponent).
    """
    if rule not in ("fixed", "window"):
        raise ValueError(f"unknown p rule {rule!r}")
    p_c = P_C_TRIANGULAR_SITE if lk.kind == lat.TRIANGULAR else P_C_Z2_BOND
    rows = []
    for r in radii:
        pr = (p if p is not None else p_c) if rule == "fixed" else \
            critical_window_p(p_c, r, window_exponent)
        rows.append(one_arm_estimate(lk, r, pr, trials, seed, threads))
    return rows


# largest-cluster membership on tori

def theta_config(lk, rep_key, p):
    """The unit states replica rep_key sees (counter = unit index)."""
    n = lat.n_units(lk)
    return np.array(
        [uniform_from_bits(stream_value(rep_key, i)) < p for i in range(n)],
        dtype=np.uint8,
    )


def origin_in_largest(lk, config):
    """Reference largest-cluster membership check (pure Python BFS).

    Ties between equal-size clusters break toward the smallest minimum
    vertex index.  Site lattices cluster open sites only; bond lattices
    cluster all vertices through open bonds.
    """
    n = lk.n_vertices
    site_mode = lk.kind == lat.TRIANGULAR
    label = np.full(n, -1, dtype=np.int64)
    best = (-1, n, -1)  # (size, minv, root) best-first comparison below
    comp = 0
    for start in range(n):
        if label[start] != -1:
            continue
        if site_mode and config[start] == 0:
            continue
        stack = [start]
        label[start] = comp
        size = 0
        minv = start
        while stack:
            v = stack.pop()
            size += 1
            coords = lat.vertex_coords(lk, v)
            for unit, w in lat.neighbors(lk, coords):
                widx = lat.vertex_index(lk, w)
                open_ = config[widx] if site_mode else config[lat.unit_index(lk, unit)]
                if not open_ or label[widx] != -1:
                    continue
                if site_mode and config[widx] == 0:
                    continue
                label[widx] = comp
                stack.append(widx)
        if (size, -minv) > (best[0], -best[1]):
            best = (size, minv, comp)
        comp += 1
    if site_mode and config[0] == 0:
        return False
    if best[2] == -1:
        return False
    return label[0] == best[2]


@dataclass
class ThetaResult:
    theta_hat: float
    ci_lo: float
    ci_hi: float
    replicas: int
    successes: int


def _theta_chunk(args, lo, hi):
    lk, p, seed = args
    keys = trial_keys(seed, PURPOSE_THETA, lo, hi)
    out = np.zeros(hi - lo, dtype=np.uint8)
    if lk.kind == lat.TRIANGULAR:
        _kernels.theta_tri_batch(lk.L, p, keys, out)
    elif lk.d == 2:
        _kernels.theta_z2_batch(lk.L, p, keys, out)
    else:
        for i in range(hi - lo):
            out[i] = origin_in_largest(lk, theta_config(lk, int(keys[i]), p))
    return out


def theta_estimate(lk, p, replicas, seed, threads=1):
    """P(origin in the largest cluster) on a torus, by Monte Carlo."""
    from .parallel import map_chunks

    if not lk.is_torus:
        raise ValueError("theta_estimate needs a torus")
    parts = map_chunks(_theta_chunk, (lk, p, seed), replicas, threads)
    succ = int(np.concatenate(parts).sum())
    lo, hi = wilson_interval(succ, replicas)
    return ThetaResult(succ / replicas, lo, hi, replicas, succ)


# ever-open subgraph H over [0, t]

def h_cluster_trial(lk, r, p_c, mu, t, trial_key, mode):
    """Reference one-arm trial in H (see module docstring for modes).

    'dynamical' samples each unit's initial state and refresh history;
    'static' draws one uniform against the ever-open density.  Both are
    exact samples of the same law.
    """
    if mode == "static":
        return one_arm_trial(lk, r, ever_open_params(p_c, mu, t), trial_key)
    if mode != "dynamical":
        raise ValueError(f"unknown mode {mode!r}")

    def is_open(unit):
        s = Stream(subkey(trial_key, lat.pack_unit(lk, unit)))
        return sample_ever_open_unit(p_c, mu, t, s)

    return one_arm_bfs(lk, r, is_open)


def _hcluster_chunk(args, lo, hi):
    lk, r, p_c, mu, t, seed, mode = args
    purpose = PURPOSE_HCLUSTER_DYN if mode == "dynamical" else PURPOSE_HCLUSTER_STATIC
    keys = trial_keys(seed, purpose, lo, hi)
    out = np.zeros(hi - lo, dtype=np.uint8)
    if lk.kind == lat.TRIANGULAR:
        if mode == "dynamical":
            _kernels.hcluster_dyn_tri_batch(r, p_c, mu, t, keys, out)
        else:
            _kernels.onearm_tri_batch(r, ever_open_params(p_c, mu, t), keys, out)
    else:
        for i in range(hi - lo):
            out[i] = h_cluster_trial(lk, r, p_c, mu, t, int(keys[i]), mode)
    return out


@dataclass
class HClusterComparison:
    mu: float
    t: float
    r: int
    p_ever: float
    trials: int
    successes_dyn: int
    successes_static: int
    z: float
    p_value: float


def h_cluster_compare(lk, r, p_c, mu, t, trials, seed, threads=1):
    """Dynamical-mode vs static-equivalent-mode one-arm rates in H,
    with a pooled two-proportion test of their equality."""
    from .parallel import map_chunks
    from .stats import two_proportion_test

    parts_d = map_chunks(_hcluster_chunk, (lk, r, p_c, mu, t, seed, "dynamical"), trials, threads)
    parts_s = map_chunks(_hcluster_chunk, (lk, r, p_c, mu, t, seed, "static"), trials, threads)
    kd = int(np.concatenate(parts_d).sum())
    ks = int(np.concatenate(parts_s).sum())
    z, pv = two_proportion_test(kd, trials, ks, trials)
    return HClusterComparison(mu, t, r, ever_open_params(p_c, mu, t), trials, kd, ks, z, pv)
