"""Rate-1 random walk on a dynamical percolation environment.

The walker attempts moves at the ring times of an independent rate-1
Poisson clock: it picks one of the 2d (or 6) directions uniformly and
crosses iff the corresponding unit is open at that instant.  Positions
are tracked unwrapped (in Z^d / axial coordinates) even on a torus, so
displacement from the origin is always well defined; the environment is
queried with wrapped coordinates.

simulate_walk is the readable reference implementation over any object
with a query(unit, t) method; msd_experiment drives the numba kernels
for throughput and agrees with the reference draw for draw.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from . import lattice as lat
from .parallel import map_chunks
from .randomness import PURPOSE_ENV_UNIT, PURPOSE_WALK, Stream, derive_key
from .environment import EnvParams, LazyEnvironment


def simulate_walk(params, env, checkpoints, walk_stream):
    """Reference event-driven walk; returns per-checkpoint snapshots.

    checkpoints must be strictly increasing positive times.  Returns
    (positions, sq_graph, sq_l2, attempts) with one row per checkpoint;
    the position at a checkpoint reflects every attempt at time <= it.
    """
    lk = params.lattice
    checkpoints = list(checkpoints)
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    steps = lat.step_vectors(lk)
    degree = lk.degree
    pos = lat.origin(lk)
    t = 0.0
    attempts = 0
    ci = 0
    out_pos, out_g, out_l2, out_att = [], [], [], []

    def record():
        out_pos.append(pos)
        inf = lat.LatticeKind(lk.kind, lk.d)  # unwrapped displacement
        out_g.append(lat.graph_distance(inf, lat.origin(lk), pos) ** 2)
        out_l2.append(lat.sq_euclidean(inf, pos))
        out_att.append(attempts)

    while True:
        t_next = t + walk_stream.exponential(1.0)
        while ci < len(checkpoints) and checkpoints[ci] < t_next:
            record()
            ci += 1
        if ci >= len(checkpoints):
            break
        t = t_next
        attempts += 1
        k = walk_stream.uniform_int(degree)
        step = steps[k]
        dest = lat.add(pos, step)
        if lk.kind == lat.HYPERCUBIC:
            axis, positive = k >> 1, (k & 1) == 1
            unit = lat.canonical_bond(lk, pos, axis, positive)
        else:
            unit = lat.wrap(lk, dest)
        if env.query(unit, t):
            pos = dest
    return out_pos, np.array(out_g, float), np.array(out_l2, float), np.array(out_att)


@dataclass
class MsdTable:
    """Mean squared displacement at each checkpoint, with raw
    per-replica squared displacements kept for tail statistics."""

    params: EnvParams
    checkpoints: np.ndarray
    mean_sq_graph: np.ndarray
    stderr_graph: np.ndarray
    mean_sq_l2: np.ndarray
    stderr_l2: np.ndarray
    replicas: int
    seed: int
    raw_sq_graph: np.ndarray = None
    raw_sq_l2: np.ndarray = None
    raw_attempts: np.ndarray = None


def _replica_keys(seed, lo, hi):
    ekeys = np.array([derive_key(seed, (PURPOSE_ENV_UNIT, r)) for r in range(lo, hi)],
                     dtype=np.uint64)
    wkeys = np.array([derive_key(seed, (PURPOSE_WALK, r)) for r in range(lo, hi)],
                     dtype=np.uint64)
    return ekeys, wkeys


def _msd_chunk(args, lo, hi):
    params, cps, seed = args
    lk = params.lattice
    n = hi - lo
    ncp = len(cps)
    g = np.empty((n, ncp))
    l2 = np.empty((n, ncp))
    att = np.empty((n, ncp), dtype=np.int64)
    ekeys, wkeys = _replica_keys(seed, lo, hi)
    L = lk.L or 0
    if lk.kind == lat.TRIANGULAR:
        _kernels.walk_msd_tri(L, params.p, params.mu, cps, ekeys, wkeys, g, l2, att)
    else:
        _kernels.walk_msd_hyper(lk.d, L, params.p, params.mu, cps, ekeys, wkeys, g, l2, att)
    return g, l2, att


def msd_experiment(params, checkpoints, replicas, seed, threads=1, keep_raw=False):
    """Mean squared displacement over independent replicas.

    Replica r draws from streams labeled (purpose, r) under the master
    seed, so results do not depend on execution order or thread count.
    """
    lk = params.lattice
    if lk.d > 5:
        raise ValueError("walk kernels support d <= 5")
    if replicas < 2:
        raise ValueError("need at least two replicas")
    cps = np.asarray(checkpoints, dtype=np.float64)
    if cps.ndim != 1 or len(cps) == 0 or np.any(np.diff(cps) <= 0) or cps[0] <= 0:
        raise ValueError("checkpoints must be strictly increasing positive times")
    parts = map_chunks(_msd_chunk, (params, cps, seed), replicas, threads)
    g = np.concatenate([p[0] for p in parts], axis=0)
    l2 = np.concatenate([p[1] for p in parts], axis=0)
    att = np.concatenate([p[2] for p in parts], axis=0)
    sg = g.std(axis=0, ddof=1) / math.sqrt(replicas) if replicas > 1 else np.zeros(len(cps))
    sl = l2.std(axis=0, ddof=1) / math.sqrt(replicas) if replicas > 1 else np.zeros(len(cps))
    return MsdTable(
        params, cps, g.mean(axis=0), sg, l2.mean(axis=0), sl, replicas, seed,
        raw_sq_graph=g if keep_raw else None,
        raw_sq_l2=l2 if keep_raw else None,
        raw_attempts=att if keep_raw else None,
    )


@dataclass
class SigmaHat:
    """Diffusion-constant estimate sigma^2 = MSD(t)/t at the last
    checkpoint, with a linearity diagnostic from the top half.

    Graph distance (L1 on Z^d) is the primary estimate; the squared
    Euclidean norm gives value_l2, which for simple random walk equals
    the number of moves and is the cleaner normalization check.
    """

    value: float
    ci_lo: float
    ci_hi: float
    value_l2: float
    ci_lo_l2: float
    ci_hi_l2: float
    slope_diagnostic: float
    t: float


def sigma_hat(table):
    if table.replicas < 100:
        raise ValueError("sigma_hat needs >= 100 replicas for a usable CI")
    t = table.checkpoints[-1]
    v = table.mean_sq_graph[-1] / t
    half = 1.96 * table.stderr_graph[-1] / t
    v2 = table.mean_sq_l2[-1] / t
    half2 = 1.96 * table.stderr_l2[-1] / t
    k = max(2, len(table.checkpoints) // 2)
    xs = table.checkpoints[-k:]
    ys = table.mean_sq_graph[-k:]
    slope = np.polyfit(xs, ys, 1)[0] if len(xs) >= 2 else float("nan")
    return SigmaHat(v, v - half, v + half, v2, v2 - half2, v2 + half2,
                    float(slope), float(t))


def sigma_sweep(lattice, p, mus, checkpoints, replicas, seed, threads=1,
                allow_large_mu=False):
    """sigma_hat across a mu grid; each mu gets its own label space."""
    rows = []
    for i, mu in enumerate(mus):
        params = EnvParams(lattice, p, mu, allow_large_mu=allow_large_mu)
        table = msd_experiment(params, checkpoints, replicas, seed + i, threads)
        rows.append((mu, sigma_hat(table)))
    return rows


def tail_survival(sq_dists, levels):
    """Empirical P(dist >= L) with Wilson intervals, from squared
    displacements at a fixed time."""
    from .stats import wilson_interval

    n = len(sq_dists)
    rows = []
    for L in levels:
        k = int(np.sum(sq_dists >= float(L) * float(L)))
        lo, hi = wilson_interval(k, n)
        rows.append((float(L), k / n, lo, hi, k))
    return rows


def markov_type_ratios(params, s, ks, replicas, seed, threads=1):
    """Ratios E[dist^2 at ks] / (k E[dist^2 at s]) with 95% CIs via the
    delta method (replica covariance between numerator and denominator).
    """
    ks = list(ks)
    if any(k < 1 for k in ks):
        raise ValueError("multipliers must be >= 1")
    cps = sorted({float(s)} | {float(k * s) for k in ks})
    table = msd_experiment(params, cps, replicas, seed, threads, keep_raw=True)
    col = {c: j for j, c in enumerate(cps)}
    base = table.raw_sq_graph[:, col[float(s)]]
    mb = base.mean()
    rows = []
    for k in ks:
        top = table.raw_sq_graph[:, col[float(k * s)]]
        mt = top.mean()
        r = mt / (k * mb)
        cov = np.cov(top, base, ddof=1)
        ga = 1.0 / (k * mb)
        gb = -mt / (k * mb * mb)
        var = (ga * ga * cov[0, 0] + 2 * ga * gb * cov[0, 1] + gb * gb * cov[1, 1]) / replicas
        half = 1.96 * math.sqrt(max(var, 0.0))
        rows.append((int(k), float(r), float(r - half), float(r + half)))
    return rows


def lazy_environment(params, seed, replica=0):
    """The LazyEnvironment a given replica of msd_experiment sees."""
    return LazyEnvironment(params, derive_key(seed, (PURPOSE_ENV_UNIT, replica)))


def reference_msd_row(params, checkpoints, seed, replica):
    """One replica via the pure-Python path (same streams as the
    kernels; used by tests and --dump-env)."""
    env = lazy_environment(params, seed, replica)
    walk_stream = Stream.from_labels(seed, (PURPOSE_WALK, replica))
    pos, g, l2, att = simulate_walk(params, env, checkpoints, walk_stream)
    return env, pos, g, l2, att
