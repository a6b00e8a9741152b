"""Evolving-set machinery for the walk on dynamical percolation.

The chain observed at integer times is a time-inhomogeneous Markov
chain whose one-step kernel P_{n+1} is the ordered product, over the
environment's constant intervals inside [n, n+1], of uniformized
exponentials exp(dt (J - I)); J is the single-attempt matrix of a
frozen configuration (1/(2d) per open incident bond, the closed
fraction on the diagonal).  Everything here is exact up to a declared
series tolerance: no time discretization anywhere.

Given a kernel and a set S, the evolving set moves to
S' = {y : Q(S,y) >= U} with Q(S,y) the mass S pushes into y and U
uniform on (0,1].  Q takes finitely many values, so the transition is
a finite list of breakpoints; |S'| is then a martingale, and the
conditioned-to-survive (Doob) version picks level set B_j with
probability gap_j |B_j| / |S|.  The Diaconis-Fill coupling advances a
walker x together with S so that x stays uniform on S given the set
trajectory.

Two scales are supported: dense kernels on tori of side <= 8, where
inequalities are verified exactly, and a sampled scan on sides up to
128 (d = 2), where the same one-step kernel acts on indicator vectors
and the walker step is drawn by direct event-driven simulation.
"""

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import lattice as lat
from .environment import EnvParams, TorusTrajectory
from .parallel import map_chunks
from .randomness import (
    PURPOSE_DF,
    PURPOSE_EVOLVE,
    PURPOSE_GROWTH,
    PURPOSE_INSTANCE,
    PURPOSE_WALK,
    Stream,
    derive_key,
)
from .stats import loglog_fit

DENSE_MAX_SIDE = 8
SCAN_MAX_SIDE = 128
SERIES_TOL = 1e-14
ROW_SUM_TOL = 1e-12


def _check_dense(lk):
    if lk.kind != lat.HYPERCUBIC or not lk.is_torus:
        raise ValueError("evolving-set machinery runs on hypercubic tori")
    if lk.L > DENSE_MAX_SIDE:
        raise ValueError(f"dense kernels limited to side <= {DENSE_MAX_SIDE}")


_ENDS_CACHE = {}


def _bond_ends(lk):
    """(n_units, 2) vertex-index endpoints of every bond, in canonical
    bond order."""
    key = (lk.kind, lk.d, lk.L)
    ends = _ENDS_CACHE.get(key)
    if ends is None:
        units = lat.torus_units(lk)
        ends = np.empty((len(units), 2), dtype=np.int64)
        for b, (base, axis) in enumerate(units):
            step = tuple(1 if a == axis else 0 for a in range(lk.d))
            ends[b, 0] = lat.vertex_index(lk, base)
            ends[b, 1] = lat.vertex_index(lk, lat.wrap(lk, lat.add(base, step)))
        _ENDS_CACHE[key] = ends
    return ends


def _jump_matrix(lk, ends, cfg):
    nv = lk.n_vertices
    deg = 2 * lk.d
    inv = 1.0 / deg
    J = np.zeros((nv, nv))
    open_idx = np.flatnonzero(cfg == 1)
    a = ends[open_idx, 0]
    b = ends[open_idx, 1]
    np.add.at(J, (a, b), inv)
    np.add.at(J, (b, a), inv)
    open_cnt = np.bincount(a, minlength=nv) + np.bincount(b, minlength=nv)
    diag = np.arange(nv)
    J[diag, diag] = (deg - open_cnt) * inv
    return J


def _interval_factor(J, dt, tol):
    """exp(dt (J - I)) by the Poissonized series, truncated when the
    remaining Taylor mass drops below tol.  Row-stochastic up to the
    truncated tail; dt <= 1 keeps the tail bound valid."""
    nv = J.shape[0]
    edt = math.exp(-dt)
    acc = np.eye(nv) * edt
    term = np.eye(nv)
    coef = 1.0
    k = 0
    while True:
        rem = coef * dt / (k + 1.0) / (1.0 - dt / (k + 2.0))
        if edt * rem < tol:
            break
        k += 1
        coef *= dt / k
        term = term @ J
        acc += (edt * coef) * term
    return acc


def _product_from_config(traj, a, b, cfg, tol):
    """Ordered interval product over [a, b]; advances cfg in place to
    the configuration at b.  Refreshes that redraw a unit to its
    current state do not split intervals."""
    lk = traj.params.lattice
    ends = _bond_ends(lk)
    lo, hi = traj.events_in(a, b)
    P = None
    t_prev = a
    for i in range(lo, hi):
        u = traj.units[i]
        s = traj.states[i]
        if cfg[u] == s:
            continue
        dt = traj.times[i] - t_prev
        if dt > 0.0:
            f = _interval_factor(_jump_matrix(lk, ends, cfg), dt, tol)
            P = f if P is None else P @ f
        cfg[u] = s
        t_prev = traj.times[i]
    if b - t_prev > 0.0 or P is None:
        f = _interval_factor(_jump_matrix(lk, ends, cfg), b - t_prev, tol)
        P = f if P is None else P @ f
    return P


@dataclass
class QuenchedKernel:
    """Dense one-step matrix of the discretized walk, for the window
    [n, n+1] of one environment trajectory."""

    matrix: np.ndarray
    traj: TorusTrajectory
    n: float

    @property
    def n_vertices(self):
        return self.matrix.shape[0]


def _window_product(traj, a, b, tol=SERIES_TOL):
    _check_dense(traj.params.lattice)
    if not (traj.t0 <= a <= b <= traj.t1):
        raise ValueError(f"[{a}, {b}] outside trajectory window")
    cfg = traj.config_at(a).copy()
    return _product_from_config(traj, a, b, cfg, tol)


def quenched_kernel(traj, n, tol=SERIES_TOL):
    """One-step kernel over [n, n+1], exact to the series tolerance."""
    P = _window_product(traj, float(n), float(n) + 1.0, tol)
    err = np.max(np.abs(P.sum(axis=1) - 1.0))
    if err > ROW_SUM_TOL:
        raise RuntimeError(f"kernel row sums off by {err:.3e}")
    return QuenchedKernel(P, traj, float(n))


def _breakpoints(qc):
    """Distinct positive levels of a clipped mass vector, descending,
    with level-set sizes and threshold gaps.

    For u in (values[j+1], values[j]] the level set {y : qc_y >= u} has
    exactly counts[j] members, so gaps[j] is the chance of landing in
    level j under a uniform threshold."""
    pos = qc[qc > 0.0]
    values = np.unique(pos)[::-1]
    asc = np.sort(pos)
    counts = asc.size - np.searchsorted(asc, values, side="left")
    gaps = values - np.append(values[1:], 0.0)
    return values, counts, gaps


@dataclass
class ThresholdProfile:
    """All evolving-set transitions out of S under one kernel.

    q[y] is the mass S pushes into y; the threshold rule only ever
    compares against u <= 1, so levels are clipped there.  values are
    the distinct positive clipped levels in decreasing order, counts
    the nested level-set sizes, gaps the threshold mass of each level;
    1 - values[0] is the absorption (empty next set) probability.
    """

    q: np.ndarray
    s_size: int
    values: np.ndarray
    counts: np.ndarray
    gaps: np.ndarray
    _qc: np.ndarray = field(repr=False, default=None)

    @property
    def g_empty(self):
        return max(0.0, 1.0 - float(self.values[0]))

    def set_at(self, u):
        """Level set {y : Q(S,y) >= u} for a threshold u in (0, 1]."""
        if not 0.0 < u <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")
        return np.flatnonzero(self._qc >= u)

    def martingale_sum(self):
        """Breakpoint integral of |B(u)| du over (0,1]; equals |S| when
        no level exceeds 1 (always true for doubly stochastic kernels)."""
        return float(np.sum(self.gaps * self.counts))

    def doob_weights(self):
        """Level probabilities of the survival-conditioned transition."""
        return self.gaps * self.counts / self.s_size

    def doob_sample(self, stream):
        w = self.gaps * self.counts
        total = float(w.sum())
        u = stream.uniform01() * total
        j = min(int(np.searchsorted(np.cumsum(w), u, side="left")),
                len(w) - 1)
        return self.set_at(float(self.values[j]))


def threshold_profile(P, S):
    """Transition profile of the evolving set out of S under kernel P."""
    matrix = P.matrix if isinstance(P, QuenchedKernel) else np.asarray(P)
    S = np.unique(np.asarray(S, dtype=np.int64))
    if S.size == 0:
        raise ValueError("S must be nonempty")
    if S.size and (S[0] < 0 or S[-1] >= matrix.shape[0]):
        raise ValueError("vertex index out of range")
    q = matrix[S].sum(axis=0)
    qc = np.minimum(q, 1.0)
    values, counts, gaps = _breakpoints(qc)
    return ThresholdProfile(q, int(S.size), values, counts, gaps, _qc=qc)


def evolve_plain(profile, u):
    """One plain evolving-set transition at threshold u; may return the
    empty set (absorbing)."""
    return profile.set_at(u)


def evolve_doob(profile, stream):
    """One transition of the survival-conditioned evolving set."""
    return profile.doob_sample(stream)


@dataclass
class EvolvingState:
    """Walker position coupled with its evolving set; the walker is a
    member of the set at all times."""

    x: int
    members: np.ndarray

    def __post_init__(self):
        self.members = np.unique(np.asarray(self.members, dtype=np.int64))
        if not _contains(self.members, self.x):
            raise AssertionError("walker outside its evolving set")


def _contains(sorted_arr, v):
    i = np.searchsorted(sorted_arr, v)
    return i < len(sorted_arr) and sorted_arr[i] == v


def df_step(P, state, stream, profile=None):
    """One step of the walker/evolving-set coupling.

    Draws y from the walker row P(x, .), then a threshold uniform on
    (0, Q(S, y)), and returns (y, level set at that threshold).  The
    conditioning through Q(S, y) is exactly what keeps the walker
    inside the set, and that membership is re-checked every call.
    """
    if profile is None:
        profile = threshold_profile(P, state.members)
    matrix = P.matrix if isinstance(P, QuenchedKernel) else np.asarray(P)
    row_cum = np.cumsum(matrix[state.x])
    u1 = stream.uniform01() * row_cum[-1]
    y = min(int(np.searchsorted(row_cum, u1, side="left")), len(row_cum) - 1)
    qy = min(float(profile.q[y]), 1.0)
    if qy <= 0.0:
        raise AssertionError("walker stepped to a vertex with no set mass")
    u2 = stream.uniform01() * qy
    members = profile.set_at(u2)
    if not _contains(members, y):
        raise AssertionError("walker left its evolving set")
    return EvolvingState(y, members)


def df_chain(traj, steps, stream, x0=0, tol=SERIES_TOL, collect=False):
    """Run the coupling from ({x0}, x0) through integer windows
    [0, steps]; returns the final state (and the visited states when
    collect is set).  Builds each window kernel incrementally so long
    chains stay linear in the event count."""
    lk = traj.params.lattice
    _check_dense(lk)
    if not (traj.t0 <= 0.0 and steps <= traj.t1):
        raise ValueError("trajectory window too short for the chain")
    cfg = traj.config_at(0.0).copy()
    state = EvolvingState(x0, np.array([x0], dtype=np.int64))
    history = [state]
    for m in range(int(steps)):
        P = _product_from_config(traj, float(m), float(m) + 1.0, cfg, tol)
        state = df_step(P, state, stream)
        if collect:
            history.append(state)
    return (state, history) if collect else state


def phi_S(P, S):
    """Escape mass of S under one kernel, with its boundary-activity
    lower bound.

    Returns (phi, bound): phi = (1/|S|) sum_{x in S, y not in S} P(x,y)
    and bound = (1/(2 d e |S|)) * integral over the window of the open
    boundary-bond count, computed exactly from the trajectory's event
    times.  Both are undefined for empty or full S.
    """
    if not isinstance(P, QuenchedKernel):
        raise TypeError("phi_S needs a QuenchedKernel (trajectory context)")
    traj, n = P.traj, P.n
    lk = traj.params.lattice
    nv = lk.n_vertices
    S = np.unique(np.asarray(S, dtype=np.int64))
    if S.size == 0 or S.size == nv:
        raise ValueError("escape mass undefined for empty or full S")
    mask = np.zeros(nv, dtype=bool)
    mask[S] = True
    phi = float(P.matrix[S][:, ~mask].sum()) / S.size
    ends = _bond_ends(lk)
    straddle = np.flatnonzero(mask[ends[:, 0]] != mask[ends[:, 1]])
    total = 0.0
    for b in straddle:
        total += _open_time(traj, int(b), n, n + 1.0)
    bound = total / (2.0 * lk.d * math.e * S.size)
    return phi, bound


def _open_time(traj, unit, a, b):
    """Exact open occupation time of one unit over [a, b]."""
    uoff, utimes, ustates, _ = traj.csr()
    lo, hi = int(uoff[unit]), int(uoff[unit + 1])
    j = bisect.bisect_right(utimes, a, lo, hi)
    s = traj.init[unit] if j == lo else ustates[j - 1]
    t_prev = a
    total = 0.0
    while j < hi and utimes[j] <= b:
        if s == 1:
            total += utimes[j] - t_prev
        s = ustates[j]
        t_prev = utimes[j]
        j += 1
    if s == 1:
        total += b - t_prev
    return total


def drift_check(P, S, profile=None):
    """Verify the one-step contraction of the conditioned set process.

    lhs is the exact conditional expectation of |S'|^{-1/2} for the
    survival-conditioned transition (breakpoint sum (1/|S|) sum_j
    gap_j sqrt(|B_j|)); rhs is (1 - phi^2/6) |S|^{-1/2}.  Returns
    (lhs, rhs, passed) with passed = lhs <= rhs + 1e-12.
    """
    matrix = P.matrix if isinstance(P, QuenchedKernel) else np.asarray(P)
    S = np.unique(np.asarray(S, dtype=np.int64))
    if profile is None:
        profile = threshold_profile(P, S)
    lhs = float(np.sum(profile.gaps * np.sqrt(profile.counts))) / S.size
    nv = matrix.shape[0]
    mask = np.zeros(nv, dtype=bool)
    mask[S] = True
    comp = np.flatnonzero(~mask)
    phi = float(matrix[S][:, comp].sum()) / S.size if comp.size else 0.0
    rhs = (1.0 - phi * phi / 6.0) / math.sqrt(S.size)
    return lhs, rhs, lhs <= rhs + 1e-12


@dataclass
class DriftRow:
    instance: int
    side: int
    mu: float
    p: float
    phi: float
    phi_bound: float
    lhs: float
    rhs: float
    passed: bool


def drift_suite(n_instances, seed, sides=(4, 6), mus=(0.05, 0.2),
                ps=(0.3, 0.5, 0.8)):
    """Random verification instances for the drift and boundary-bound
    inequalities: random torus side/mu/p from the given grids, a fresh
    one-window trajectory, and a uniformly random proper subset S."""
    rows = []
    for i in range(n_instances):
        pick = Stream.from_labels(seed, (PURPOSE_INSTANCE, i, PURPOSE_EVOLVE))
        side = sides[pick.uniform_int(len(sides))]
        mu = mus[pick.uniform_int(len(mus))]
        p = ps[pick.uniform_int(len(ps))]
        lk = lat.LatticeKind(lat.HYPERCUBIC, 2, side)
        params = EnvParams(lk, p, mu)
        traj = TorusTrajectory.generate(params, 0.0, 1.0, seed,
                                        labels=(PURPOSE_INSTANCE, i))
        nv = lk.n_vertices
        while True:
            mask = np.array([pick.bernoulli(0.5) for _ in range(nv)])
            if 0 < mask.sum() < nv:
                break
        S = np.flatnonzero(mask)
        P = quenched_kernel(traj, 0)
        phi, bound = phi_S(P, S)
        lhs, rhs, ok = drift_check(P, S)
        rows.append(DriftRow(i, side, mu, p, phi, bound, lhs, rhs, ok))
    return rows


def df_key_check(params, n_steps, runs, seed, fs=None, tol=SERIES_TOL):
    """Estimator-equality check for the coupling on one fixed
    trajectory: for each test function f, the walker estimator
    mean f(X_n) must agree with the set estimator mean of the
    S_n-average of f.  Returns (name, walker est, set est, z) rows;
    the difference has mean zero conditionally on the set trajectory,
    so |z| stays at ordinary Gaussian scale when the coupling is right.
    """
    lk = params.lattice
    _check_dense(lk)
    nv = lk.n_vertices
    if fs is None:
        f0 = np.array([1.0 if lat.vertex_coords(lk, v)[0] == 0 else 0.0
                       for v in range(nv)])
        fs = {"first_coord_zero": f0}
    traj = TorusTrajectory.generate(params, 0.0, float(n_steps), seed,
                                    labels=(PURPOSE_DF,))
    kernels = []
    cfg = traj.config_at(0.0).copy()
    for m in range(n_steps):
        kernels.append(_product_from_config(traj, float(m), float(m) + 1.0,
                                            cfg, tol))
    row_cums = [np.cumsum(K, axis=1) for K in kernels]
    profiles = [dict() for _ in range(n_steps)]
    names = sorted(fs)
    fmat = np.stack([np.asarray(fs[k], dtype=float) for k in names])
    walk_vals = np.empty((runs, len(names)))
    set_vals = np.empty((runs, len(names)))
    for r in range(runs):
        stream = Stream.from_labels(seed, (PURPOSE_DF, r))
        x = 0
        members = np.array([0], dtype=np.int64)
        for m in range(n_steps):
            key = members.tobytes()
            prof = profiles[m].get(key)
            if prof is None:
                prof = threshold_profile(kernels[m], members)
                profiles[m][key] = prof
            cum = row_cums[m][x]
            u1 = stream.uniform01() * cum[-1]
            x = min(int(np.searchsorted(cum, u1, side="left")), nv - 1)
            qy = min(float(prof.q[x]), 1.0)
            if qy <= 0.0:
                raise AssertionError("walker stepped to a vertex with no set mass")
            u2 = stream.uniform01() * qy
            members = prof.set_at(u2)
            if not _contains(members, x):
                raise AssertionError("walker left its evolving set")
        walk_vals[r] = fmat[:, x]
        set_vals[r] = fmat[:, members].mean(axis=1)
    rows = []
    for j, name in enumerate(names):
        d = walk_vals[:, j] - set_vals[:, j]
        sd = float(d.std(ddof=1))
        z = 0.0 if sd == 0.0 else float(d.mean()) / (sd / math.sqrt(runs))
        rows.append((name, float(walk_vals[:, j].mean()),
                     float(set_vals[:, j].mean()), z))
    return rows


# ---------------------------------------------------------------------------
# sampled scan on larger tori (d = 2)

_SCAN_CACHE = {}


def _scan_tables(L):
    """Neighbor tables for the side-L square torus: column order -x,
    +x, -y, +y; nbr_bond[v, k] is the bond crossed toward column k."""
    tabs = _SCAN_CACHE.get(L)
    if tabs is None:
        n = L * L
        nbr_vert = np.empty((n, 4), dtype=np.int64)
        nbr_bond = np.empty((n, 4), dtype=np.int64)
        for x in range(L):
            for y in range(L):
                v = x * L + y
                xm = ((x - 1) % L) * L + y
                xp = ((x + 1) % L) * L + y
                ym = x * L + (y - 1) % L
                yp = x * L + (y + 1) % L
                nbr_vert[v] = (xm, xp, ym, yp)
                nbr_bond[v] = (2 * xm, 2 * v, 2 * ym + 1, 2 * v + 1)
        tabs = (nbr_vert, nbr_bond)
        _SCAN_CACHE[L] = tabs
    return tabs


def _check_scan(lk):
    if lk.kind != lat.HYPERCUBIC or lk.d != 2 or not lk.is_torus:
        raise ValueError("scans run on two-dimensional square tori")
    if lk.L > SCAN_MAX_SIDE:
        raise ValueError(f"scans limited to side <= {SCAN_MAX_SIDE}")


def _open_degrees(L, cfg, nbr_vert):
    n = L * L
    idx = np.flatnonzero(cfg == 1)
    va = idx >> 1
    vb = nbr_vert[va, 2 * (idx & 1) + 1]
    deg = np.bincount(va, minlength=n) + np.bincount(vb, minlength=n)
    return deg.astype(np.float64)


@dataclass
class ScanRun:
    """Per-window record of one coupled walker/set run over [0, T]."""

    good: np.ndarray
    excellent: np.ndarray
    sizes: np.ndarray
    overlaps: np.ndarray
    boundary_counts: np.ndarray
    boundary_integrals: np.ndarray

    @property
    def good_fraction(self):
        return float(self.good.mean())

    @property
    def excellent_fraction(self):
        return float(self.excellent.mean())


def scan_run(traj, theta_hat, walk_key, df_stream, tol=SERIES_TOL):
    """Drive the coupling across [t0, t1] at scan scale.

    Window m is good when the set's overlap with the current largest
    open cluster reaches half of theta_hat times the set size (a
    single open vertex does not count as a cluster), and excellent
    when the open boundary-bond integral over the window is at least
    half the count at its start.  The walker endpoint is simulated
    event by event; the set update applies the same window kernel to
    the indicator vector, so both are exact draws.
    """
    lk = traj.params.lattice
    _check_scan(lk)
    L = lk.L
    n = L * L
    T = int(round(traj.t1 - traj.t0))
    if traj.t0 != 0.0 or traj.t1 != float(T) or T < 1:
        raise ValueError("scan needs an integer window [0, T]")
    nbr_vert, nbr_bond = _scan_tables(L)
    uoff, utimes, ustates, _ = traj.csr()
    cfg = traj.config_at(0.0).copy()
    open_deg = _open_degrees(L, cfg, nbr_vert)
    parent = np.empty(n, dtype=np.int64)
    csize = np.empty(n, dtype=np.int64)
    cminv = np.empty(n, dtype=np.int64)
    v = np.empty(n, dtype=np.float64)
    w = np.empty(n, dtype=np.float64)
    wn = np.empty(n, dtype=np.float64)
    mask = np.zeros(n, dtype=np.uint8)
    mask[0] = 1
    x = 0
    size = 1
    walk_ctr = np.zeros(1, dtype=np.uint64)
    key = np.uint64(walk_key)
    good = np.zeros(T, dtype=bool)
    excellent = np.zeros(T, dtype=bool)
    sizes = np.zeros(T, dtype=np.int64)
    overlaps = np.zeros(T, dtype=np.int64)
    bcounts = np.zeros(T, dtype=np.int64)
    bints = np.zeros(T, dtype=np.float64)
    for m in range(T):
        best = _kernels.largest_cluster_labels(L, cfg, parent, csize, cminv)
        overlap = int(np.count_nonzero((parent == best) & (mask == 1)))
        cnt, integral = _kernels.boundary_stats(
            L, mask, cfg, nbr_vert, traj.init, uoff, utimes, ustates, m)
        sizes[m] = size
        overlaps[m] = overlap
        bcounts[m] = cnt
        bints[m] = integral
        good[m] = csize[best] >= 2 and overlap >= 0.5 * theta_hat * size
        excellent[m] = integral >= 0.5 * cnt
        y = _kernels.walk_window(x, m, nbr_vert, nbr_bond, traj.init,
                                 uoff, utimes, ustates, key, walk_ctr)
        v[:] = mask
        lo, hi = traj.events_in(float(m), float(m) + 1.0)
        _kernels.window_action(v, m, cfg, open_deg, nbr_vert, nbr_bond,
                               traj.times, traj.units, traj.states,
                               lo, hi, w, wn, tol)
        qc = np.minimum(v, 1.0)
        qy = float(qc[y])
        if qy <= 0.0:
            raise AssertionError("walker stepped to a vertex with no set mass")
        u2 = df_stream.uniform01() * qy
        new_mask = qc >= u2
        if not new_mask[y]:
            raise AssertionError("walker left its evolving set")
        mask = new_mask.astype(np.uint8)
        size = int(np.count_nonzero(new_mask))
        x = int(y)
    return ScanRun(good, excellent, sizes, overlaps, bcounts, bints)


@dataclass
class ScanResult:
    """Aggregate of independent scan runs."""

    theta_hat: float
    T: int
    good_fractions: np.ndarray
    excellent_fractions: np.ndarray
    good_by_m: np.ndarray
    excellent_by_m: np.ndarray
    runs: int

    def t_of_n(self, n):
        """Window count after which the conditioned set should have
        reached size n: ceil(8 n / theta_hat)."""
        return math.ceil(8.0 * n / self.theta_hat)


def _scan_chunk(args, lo, hi):
    params, T, theta_hat, seed = args
    out = []
    for i in range(lo, hi):
        traj = TorusTrajectory.generate(params, 0.0, float(T), seed,
                                        labels=(PURPOSE_EVOLVE, i))
        walk_key = derive_key(seed, (PURPOSE_EVOLVE, i, PURPOSE_WALK))
        df_stream = Stream.from_labels(seed, (PURPOSE_EVOLVE, i, PURPOSE_DF))
        out.append(scan_run(traj, theta_hat, walk_key, df_stream))
    return out


def good_excellent_scan(params, T, theta_hat, seed, runs=1, threads=1):
    """Fractions of good and excellent windows across independent runs
    of the coupling on [0, T]."""
    if not 0.0 < theta_hat <= 1.0:
        raise ValueError("theta_hat must lie in (0, 1]")
    _check_scan(params.lattice)
    chunks = map_chunks(_scan_chunk, (params, int(T), theta_hat, seed),
                        runs, threads)
    all_runs = [r for part in chunks for r in part]
    gf = np.array([r.good_fraction for r in all_runs])
    ef = np.array([r.excellent_fraction for r in all_runs])
    gm = np.stack([r.good for r in all_runs]).mean(axis=0)
    em = np.stack([r.excellent for r in all_runs]).mean(axis=0)
    return ScanResult(theta_hat, int(T), gf, ef, gm, em, runs)


@dataclass
class GrowthResult:
    """Doob-evolving set sizes over independent runs, with the
    power-law fit of the mean size against the window index."""

    m_grid: np.ndarray
    sizes: np.ndarray
    size_mean: np.ndarray
    size_q10: np.ndarray
    size_q90: np.ndarray
    fit: object
    c1: float
    c2: float

    def hitting_fraction(self, c1, power):
        """Fraction of runs whose final size exceeds c1 * n^power."""
        n = int(self.m_grid[-1])
        return float(np.mean(self.sizes[:, -1] > c1 * n ** power))


def _growth_chunk(args, lo, hi):
    params, n_steps, seed, tol = args
    L = params.lattice.L
    n = L * L
    nbr_vert, nbr_bond = _scan_tables(L)
    out = np.empty((hi - lo, n_steps + 1), dtype=np.int64)
    for idx, i in enumerate(range(lo, hi)):
        traj = TorusTrajectory.generate(params, 0.0, float(n_steps), seed,
                                        labels=(PURPOSE_GROWTH, i))
        stream = Stream.from_labels(seed, (PURPOSE_GROWTH, i, PURPOSE_EVOLVE))
        uoff, utimes, ustates, _ = traj.csr()
        cfg = traj.config_at(0.0).copy()
        open_deg = _open_degrees(L, cfg, nbr_vert)
        v = np.empty(n, dtype=np.float64)
        w = np.empty(n, dtype=np.float64)
        wn = np.empty(n, dtype=np.float64)
        mask = np.zeros(n, dtype=np.float64)
        mask[0] = 1.0
        size = 1
        out[idx, 0] = 1
        for m in range(n_steps):
            v[:] = mask
            lo_e, hi_e = traj.events_in(float(m), float(m) + 1.0)
            _kernels.window_action(v, m, cfg, open_deg, nbr_vert, nbr_bond,
                                   traj.times, traj.units, traj.states,
                                   lo_e, hi_e, w, wn, tol)
            qc = np.minimum(v, 1.0)
            values, counts, gaps = _breakpoints(qc)
            wts = gaps * counts
            u = stream.uniform01() * float(wts.sum())
            j = min(int(np.searchsorted(np.cumsum(wts), u, side="left")),
                    len(wts) - 1)
            sel = qc >= values[j]
            mask[:] = 0.0
            mask[sel] = 1.0
            size = int(np.count_nonzero(sel))
            out[idx, m + 1] = size
    return out


def growth_experiment(params, n_steps, seed, runs=1, threads=1,
                      fit_window=None, tol=SERIES_TOL):
    """Size trajectory of the survival-conditioned evolving set started
    from a single vertex.

    Reports per-window mean and 10/90 percentiles over runs and fits
    log mean-size against log window index over fit_window (defaults
    to the upper three quarters, stopping short of torus saturation).
    c1 is half the fitted prefactor; c2 the fraction of runs whose
    final size clears c1 * n^slope.
    """
    _check_scan(params.lattice)
    sizes = np.concatenate(
        map_chunks(_growth_chunk, (params, int(n_steps), seed, tol),
                   runs, threads), axis=0)
    m_grid = np.arange(n_steps + 1)
    mean = sizes.mean(axis=0)
    q10 = np.quantile(sizes, 0.1, axis=0)
    q90 = np.quantile(sizes, 0.9, axis=0)
    if fit_window is None:
        fit_window = (max(2, n_steps // 4), n_steps)
    lo, hi = fit_window
    keep = (m_grid >= lo) & (m_grid <= hi)
    fit = loglog_fit(m_grid[keep], mean[keep])
    fit.cutoff = float(lo)
    c1 = 0.5 * math.exp(fit.intercept)
    c2 = float(np.mean(sizes[:, -1] > c1 * n_steps ** fit.slope))
    return GrowthResult(m_grid, sizes, mean, q10, q90, fit, c1, c2)
