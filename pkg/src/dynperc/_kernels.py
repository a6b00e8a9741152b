"""numba kernels for the hot loops.

Everything here mirrors the pure-Python implementations exactly: the
same keyed-hash stream primitives (see randomness.py), the same draw
order, the same unit packing.  Tests assert bit-for-bit agreement
between the two paths on small cases, so the kernels can be treated as
a fast interchangeable backend rather than a parallel implementation.

Numbered streams are carried as (key, one-element uint64 counter
array); per-unit streams recompute their subkey on every query instead
of caching it (one extra mix).
"""

import math

import numpy as np
from numba import njit, types
from numba.typed import Dict

U64 = np.uint64
I64 = np.int64
MASK = U64(0xFFFFFFFFFFFFFFFF)
GOLD = U64(0x9E3779B97F4A7C15)
FOLDC = U64(0xD1B54A32D192ED03)
M1 = U64(0xBF58476D1CE4E5B9)
M2 = U64(0x94D049BB133111EB)
TWO_NEG52 = 2.0 ** -52

_ENV_VAL = types.Tuple((types.float64, types.uint64, types.uint64))


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * M1
    z = (z ^ (z >> U64(27))) * M2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _subkey(key, label):
    return _mix64((key ^ _mix64(label + GOLD)) + FOLDC)


@njit(cache=True, inline="always")
def _sval(key, counter):
    return _mix64(_mix64(counter * GOLD + GOLD) ^ key)


@njit(cache=True, inline="always")
def _u01(x):
    return (np.float64(x >> U64(12)) + 0.5) * TWO_NEG52


@njit(cache=True, inline="always")
def _next_unif(key, ctr):
    v = _sval(key, ctr[0])
    ctr[0] += U64(1)
    return _u01(v)


@njit(cache=True, inline="always")
def _next_expo(key, ctr, rate):
    return -math.log(_next_unif(key, ctr)) / rate


@njit(cache=True, inline="always")
def _next_below(key, ctr, n):
    # uniform integer in [0, n), tail rejection
    n64 = U64(n)
    m = (MASK % n64 + U64(1)) % n64
    if m == U64(0):
        v = _sval(key, ctr[0])
        ctr[0] += U64(1)
        return np.int64(v % n64)
    threshold = U64(0) - m
    while True:
        v = _sval(key, ctr[0])
        ctr[0] += U64(1)
        if v < threshold:
            return np.int64(v % n64)


@njit(cache=True)
def _next_poisson(key, ctr, mean):
    if mean <= 0.0:
        return np.int64(0)
    if mean <= 10.0:
        p = math.exp(-mean)
        f = p
        k = np.int64(0)
        u = _next_unif(key, ctr)
        while u > f and p > 0.0:
            k += 1
            p *= mean / k
            f += p
        return k
    sq = math.sqrt(2.0 * mean)
    alxm = math.log(mean)
    g = mean * alxm - math.lgamma(mean + 1.0)
    while True:
        while True:
            y = math.tan(math.pi * _next_unif(key, ctr))
            em = sq * y + mean
            if em >= 0.0:
                break
        em = math.floor(em)
        t = 0.9 * (1.0 + y * y) * math.exp(em * alxm - math.lgamma(em + 1.0) - g)
        if _next_unif(key, ctr) <= t:
            return np.int64(em)


@njit(cache=True)
def rng_probe(key, counters, kind):
    """Test hook: raw draws at given counters (0 u64, 1 uniform, 2 expo)."""
    n = counters.shape[0]
    out = np.empty(n, dtype=np.float64)
    ctr = np.zeros(1, dtype=np.uint64)
    for i in range(n):
        ctr[0] = counters[i]
        if kind == 0:
            out[i] = np.float64(_sval(key, ctr[0]))
        elif kind == 1:
            out[i] = _next_unif(key, ctr)
        else:
            out[i] = _next_expo(key, ctr, 1.0)
    return out


@njit(cache=True)
def rng_probe_seq(key, n, kind, arg):
    """Test hook: sequential draws (0 below-arg ints, 1 poisson(arg))."""
    out = np.empty(n, dtype=np.int64)
    ctr = np.zeros(1, dtype=np.uint64)
    for i in range(n):
        if kind == 0:
            out[i] = _next_below(key, ctr, np.int64(arg))
        else:
            out[i] = _next_poisson(key, ctr, arg)
    return out


# unit packing (must match lattice.pack_unit)

@njit(cache=True, inline="always")
def _pack2(axis_field, x, y):
    # d = 2: 30 bits per coordinate, 3-bit axis field on top
    half = np.int64(1) << np.int64(29)
    acc = np.int64(axis_field)
    acc = (acc << np.int64(30)) | (x + half)
    acc = (acc << np.int64(30)) | (y + half)
    return U64(acc)


@njit(cache=True, inline="always")
def _unit_unif2(key, axis_field, x, y):
    return _u01(_sval(_subkey(key, _pack2(axis_field, x, y)), U64(0)))


# lazy environment query, shared by the walk kernels

@njit(cache=True, inline="always")
def _env_query(env, env_key, packed, t, p, mu):
    if packed in env:
        last, st, cnt = env[packed]
        ukey = _subkey(env_key, packed)
        dt = t - last
        q = -math.expm1(-mu * dt)
        u = _u01(_sval(ukey, cnt))
        cnt += U64(1)
        state = st
        if u < q:
            u2 = _u01(_sval(ukey, cnt))
            cnt += U64(1)
            state = U64(1) if u2 < p else U64(0)
        env[packed] = (t, state, cnt)
        return state == U64(1)
    ukey = _subkey(env_key, packed)
    u = _u01(_sval(ukey, U64(0)))
    state = U64(1) if u < p else U64(0)
    env[packed] = (t, state, U64(1))
    return state == U64(1)


@njit(cache=True)
def walk_msd_hyper(d, L, p, mu, cps, env_keys, walk_keys,
                   out_graph, out_l2, out_att):
    """Rate-1 walk on Z^d (L=0) or the L-torus, lazily sampled bonds.

    Records squared graph and Euclidean displacement of the unwrapped
    position plus the attempt count at each checkpoint time.  One row
    per replica; replicas are fully independent streams.
    """
    R = env_keys.shape[0]
    ncp = cps.shape[0]
    bits = np.int64((63 - 3) // d)
    half = np.int64(1) << (bits - np.int64(1))
    pos = np.zeros(d, dtype=np.int64)
    base = np.zeros(d, dtype=np.int64)
    ctr = np.zeros(1, dtype=np.uint64)
    for rep in range(R):
        env = Dict.empty(key_type=types.uint64, value_type=_ENV_VAL)
        ekey = env_keys[rep]
        wkey = walk_keys[rep]
        ctr[0] = U64(0)
        for i in range(d):
            pos[i] = 0
        t = 0.0
        attempts = np.int64(0)
        ci = 0
        while True:
            t_next = t + _next_expo(wkey, ctr, 1.0)
            while ci < ncp and cps[ci] < t_next:
                g = np.int64(0)
                l2 = np.int64(0)
                for i in range(d):
                    g += abs(pos[i])
                    l2 += pos[i] * pos[i]
                out_graph[rep, ci] = np.float64(g * g)
                out_l2[rep, ci] = np.float64(l2)
                out_att[rep, ci] = attempts
                ci += 1
            if ci >= ncp:
                break
            t = t_next
            attempts += 1
            k = _next_below(wkey, ctr, np.int64(2 * d))
            axis = k >> 1
            positive = (k & 1) == 1
            # canonical bond base: v for +axis, v - e_axis for -axis
            for i in range(d):
                base[i] = pos[i]
            if not positive:
                base[axis] -= 1
            if L > 0:
                for i in range(d):
                    base[i] = ((base[i] % L) + L) % L
            acc = np.int64(axis + 1)
            for i in range(d):
                acc = (acc << bits) | (base[i] + half)
            if _env_query(env, ekey, U64(acc), t, p, mu):
                pos[axis] += 1 if positive else -1


TRI_DX = np.array([-1, 1, 0, 0, -1, 1], dtype=np.int64)
TRI_DY = np.array([0, 0, -1, 1, 1, -1], dtype=np.int64)


@njit(cache=True, inline="always")
def _tri_dist(dx, dy):
    if dx * dy >= 0:
        return abs(dx) + abs(dy)
    return max(abs(dx), abs(dy))


@njit(cache=True)
def walk_msd_tri(L, p, mu, cps, env_keys, walk_keys,
                 out_graph, out_l2, out_att):
    """Rate-1 walk on the triangular lattice, lazily sampled sites."""
    R = env_keys.shape[0]
    ncp = cps.shape[0]
    ctr = np.zeros(1, dtype=np.uint64)
    for rep in range(R):
        env = Dict.empty(key_type=types.uint64, value_type=_ENV_VAL)
        ekey = env_keys[rep]
        wkey = walk_keys[rep]
        ctr[0] = U64(0)
        x = np.int64(0)
        y = np.int64(0)
        t = 0.0
        attempts = np.int64(0)
        ci = 0
        while True:
            t_next = t + _next_expo(wkey, ctr, 1.0)
            while ci < ncp and cps[ci] < t_next:
                g = _tri_dist(x, y)
                ex = np.float64(x) + 0.5 * np.float64(y)
                ey = np.float64(y) * 0.8660254037844386
                out_graph[rep, ci] = np.float64(g * g)
                out_l2[rep, ci] = ex * ex + ey * ey
                out_att[rep, ci] = attempts
                ci += 1
            if ci >= ncp:
                break
            t = t_next
            attempts += 1
            k = _next_below(wkey, ctr, np.int64(6))
            wx = x + TRI_DX[k]
            wy = y + TRI_DY[k]
            qx = wx
            qy = wy
            if L > 0:
                qx = ((qx % L) + L) % L
                qy = ((qy % L) + L) % L
            if _env_query(env, ekey, _pack2(0, qx, qy), t, p, mu):
                x = wx
                y = wy


# static percolation: one-arm BFS with generation stamps

@njit(cache=True)
def onearm_tri_batch(r, p, trial_keys, out):
    """Triangular site one-arm: origin open and connected to the
    boundary of B_r inside B_r.  Site uniforms are keyed by global
    coordinates, so trials couple monotonely across p and r."""
    W = 2 * r + 1
    n = W * W
    stamp = np.full(n, -1, dtype=np.int64)
    qx = np.empty(n, dtype=np.int64)
    qy = np.empty(n, dtype=np.int64)
    for ti in range(trial_keys.shape[0]):
        key = trial_keys[ti]
        success = False
        if _unit_unif2(key, 0, 0, 0) < p:
            stamp[r * W + r] = ti
            qx[0] = 0
            qy[0] = 0
            head = 0
            tail = 1
            while head < tail and not success:
                x = qx[head]
                y = qy[head]
                head += 1
                for k in range(6):
                    wx = x + TRI_DX[k]
                    wy = y + TRI_DY[k]
                    if wx < -r or wx > r or wy < -r or wy > r:
                        continue
                    idx = (wx + r) * W + (wy + r)
                    if stamp[idx] == ti:
                        continue
                    stamp[idx] = ti
                    if _unit_unif2(key, 0, wx, wy) < p:
                        if max(abs(wx), abs(wy)) == r:
                            success = True
                            break
                        qx[tail] = wx
                        qy[tail] = wy
                        tail += 1
        out[ti] = 1 if success else 0


@njit(cache=True)
def onearm_z2_batch(r, p, trial_keys, out):
    """Z^2 bond one-arm: origin connected to boundary of B_r using only
    bonds with both endpoints in B_r."""
    W = 2 * r + 1
    n = W * W
    reached = np.full(n, -1, dtype=np.int64)
    bond_stamp = np.full(2 * n, -1, dtype=np.int64)
    bond_open = np.zeros(2 * n, dtype=np.uint8)
    qx = np.empty(n, dtype=np.int64)
    qy = np.empty(n, dtype=np.int64)
    dx4 = np.array([-1, 1, 0, 0], dtype=np.int64)
    dy4 = np.array([0, 0, -1, 1], dtype=np.int64)
    for ti in range(trial_keys.shape[0]):
        key = trial_keys[ti]
        success = False
        reached[r * W + r] = ti
        qx[0] = 0
        qy[0] = 0
        head = 0
        tail = 1
        while head < tail and not success:
            x = qx[head]
            y = qy[head]
            head += 1
            for k in range(4):
                wx = x + dx4[k]
                wy = y + dy4[k]
                if wx < -r or wx > r or wy < -r or wy > r:
                    continue
                axis = 0 if k < 2 else 1
                bx = x if (k & 1) == 1 else wx
                by = y if (k & 1) == 1 else wy
                bidx = ((bx + r) * W + (by + r)) * 2 + axis
                if bond_stamp[bidx] != ti:
                    bond_stamp[bidx] = ti
                    u = _unit_unif2(key, axis + 1, bx, by)
                    bond_open[bidx] = 1 if u < p else 0
                if bond_open[bidx] == 0:
                    continue
                widx = (wx + r) * W + (wy + r)
                if reached[widx] == ti:
                    continue
                reached[widx] = ti
                if max(abs(wx), abs(wy)) == r:
                    success = True
                    break
                qx[tail] = wx
                qy[tail] = wy
                tail += 1
        out[ti] = 1 if success else 0


@njit(cache=True, inline="always")
def _ever_open2(key, axis_field, x, y, p, mu, t):
    """Dynamical ever-open indicator for one unit over [0, t]: open at
    time 0, or opened by one of its N ~ Poisson(mu t) refreshes."""
    ukey = _subkey(key, _pack2(axis_field, x, y))
    ctr = np.zeros(1, dtype=np.uint64)
    if _next_unif(ukey, ctr) < p:
        return True
    nref = _next_poisson(ukey, ctr, mu * t)
    for _ in range(nref):
        if _next_unif(ukey, ctr) < p:
            return True
    return False


@njit(cache=True)
def hcluster_dyn_tri_batch(r, p, mu, t, trial_keys, out):
    """One-arm in the ever-open subgraph H of [0, t], triangular sites,
    sampling each site's refresh history on first contact."""
    W = 2 * r + 1
    n = W * W
    stamp = np.full(n, -1, dtype=np.int64)
    qx = np.empty(n, dtype=np.int64)
    qy = np.empty(n, dtype=np.int64)
    for ti in range(trial_keys.shape[0]):
        key = trial_keys[ti]
        success = False
        if _ever_open2(key, 0, 0, 0, p, mu, t):
            stamp[r * W + r] = ti
            qx[0] = 0
            qy[0] = 0
            head = 0
            tail = 1
            while head < tail and not success:
                x = qx[head]
                y = qy[head]
                head += 1
                for k in range(6):
                    wx = x + TRI_DX[k]
                    wy = y + TRI_DY[k]
                    if wx < -r or wx > r or wy < -r or wy > r:
                        continue
                    idx = (wx + r) * W + (wy + r)
                    if stamp[idx] == ti:
                        continue
                    stamp[idx] = ti
                    if _ever_open2(key, 0, wx, wy, p, mu, t):
                        if max(abs(wx), abs(wy)) == r:
                            success = True
                            break
                        qx[tail] = wx
                        qy[tail] = wy
                        tail += 1
        out[ti] = 1 if success else 0


# largest-cluster membership (union-find, union by size)

@njit(cache=True, inline="always")
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True, inline="always")
def _union(parent, size, minv, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    if minv[rb] < minv[ra]:
        minv[ra] = minv[rb]


@njit(cache=True)
def theta_z2_batch(L, p, rep_keys, out):
    """Bond percolation on the L-torus: is the origin in the largest
    cluster (ties broken toward smallest minimum vertex index)?"""
    n = L * L
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    minv = np.empty(n, dtype=np.int64)
    for rep in range(rep_keys.shape[0]):
        key = rep_keys[rep]
        for i in range(n):
            parent[i] = i
            size[i] = 1
            minv[i] = i
        for v in range(n):
            x = v // L
            y = v % L
            for axis in range(2):
                bidx = U64(v * 2 + axis)
                if _u01(_sval(key, bidx)) < p:
                    if axis == 0:
                        w = ((x + 1) % L) * L + y
                    else:
                        w = x * L + (y + 1) % L
                    _union(parent, size, minv, v, w)
        best = -1
        best_size = 0
        best_minv = 0
        for i in range(n):
            if parent[i] == i:
                if size[i] > best_size or (size[i] == best_size and minv[i] < best_minv):
                    best = i
                    best_size = size[i]
                    best_minv = minv[i]
        out[rep] = 1 if _find(parent, 0) == best else 0


@njit(cache=True)
def theta_tri_batch(L, p, rep_keys, out):
    """Site percolation on the triangular L-torus: origin open and in
    the largest open cluster."""
    n = L * L
    parent = np.empty(n, dtype=np.int64)
    size = np.empty(n, dtype=np.int64)
    minv = np.empty(n, dtype=np.int64)
    open_site = np.empty(n, dtype=np.uint8)
    for rep in range(rep_keys.shape[0]):
        key = rep_keys[rep]
        for i in range(n):
            parent[i] = i
            size[i] = 1
            minv[i] = i
            open_site[i] = 1 if _u01(_sval(key, U64(i))) < p else 0
        for v in range(n):
            if open_site[v] == 0:
                continue
            x = v // L
            y = v % L
            # three forward directions cover every adjacency once
            for k in (1, 3, 5):
                wx = (x + TRI_DX[k]) % L
                wy = (y + TRI_DY[k]) % L
                w = wx * L + wy
                if open_site[w] == 1:
                    _union(parent, size, minv, v, w)
        best = -1
        best_size = 0
        best_minv = 0
        for i in range(n):
            if open_site[i] == 1 and parent[i] == i:
                if size[i] > best_size or (size[i] == best_size and minv[i] < best_minv):
                    best = i
                    best_size = size[i]
                    best_minv = minv[i]
        member = 0
        if open_site[0] == 1 and best >= 0 and _find(parent, 0) == best:
            member = 1
        out[rep] = member


# torus trajectories: exact event-driven refresh record

@njit(cache=True)
def gen_traj_events(init_key, evt_key, n_units_, mu, p, t0, t1):
    """Initial Bernoulli(p) states plus the full refresh record on
    [t0, t1]: exponential gaps at total rate mu * n_units, uniform unit,
    Bernoulli(p) new state.  Event times are strictly increasing."""
    n_units = np.int64(n_units_)
    init = np.empty(n_units, dtype=np.uint8)
    for i in range(n_units):
        init[i] = 1 if _u01(_sval(init_key, U64(i))) < p else 0
    rate = mu * np.float64(n_units)
    cap = np.int64(rate * (t1 - t0) * 1.25 + 64.0)
    times = np.empty(cap, dtype=np.float64)
    units = np.empty(cap, dtype=np.int64)
    states = np.empty(cap, dtype=np.uint8)
    ctr = np.zeros(1, dtype=np.uint64)
    t = t0
    cnt = np.int64(0)
    while True:
        t = t + _next_expo(evt_key, ctr, rate)
        if t >= t1:
            break
        if cnt == cap:
            cap = cap * 2
            t2 = np.empty(cap, dtype=np.float64)
            u2 = np.empty(cap, dtype=np.int64)
            s2 = np.empty(cap, dtype=np.uint8)
            t2[:cnt] = times[:cnt]
            u2[:cnt] = units[:cnt]
            s2[:cnt] = states[:cnt]
            times = t2
            units = u2
            states = s2
        times[cnt] = t
        units[cnt] = _next_below(evt_key, ctr, n_units)
        states[cnt] = 1 if _next_unif(evt_key, ctr) < p else 0
        cnt += 1
    return init, times[:cnt].copy(), units[:cnt].copy(), states[:cnt].copy()


@njit(cache=True, inline="always")
def _unit_state_at(unit, t, init, uoff, utimes, ustates):
    """State of one unit at time t from its sorted event list."""
    lo = uoff[unit]
    hi = uoff[unit + 1]
    # rightmost event with time <= t
    while lo < hi:
        mid = (lo + hi) // 2
        if utimes[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    if lo == uoff[unit]:
        return init[unit]
    return ustates[lo - 1]


# evolving-set scan machinery on the Z^2 bond torus
# vertices v = x*L + y, bonds b = v*2 + axis (axis 0: +x, 1: +y)

@njit(cache=True)
def expT_action(v, dt, config, open_deg, nbr_vert, nbr_bond, w, wn, tol):
    """In-place v <- v expm(dt (J - I)) for the uniformized attempt
    matrix J of a fixed bond configuration; J is symmetric so the left
    action reuses the right-action stencil.  Truncated when the
    remaining Taylor mass is below tol."""
    n = v.shape[0]
    for i in range(n):
        w[i] = v[i]
    edt = math.exp(-dt)
    coef = 1.0
    total = edt
    for i in range(n):
        v[i] = v[i] * edt
    k = 0
    while True:
        # tail bound: sum_{j>k} dt^j/j! <= coef*dt/(k+1) / (1 - dt/(k+2))
        rem = coef * dt / (k + 1.0) / (1.0 - dt / (k + 2.0))
        if edt * rem < tol:
            break
        k += 1
        coef = coef * dt / k
        for i in range(n):
            s = w[i] * (4.0 - open_deg[i]) * 0.25
            for kk in range(4):
                if config[nbr_bond[i, kk]] == 1:
                    s += 0.25 * w[nbr_vert[i, kk]]
            wn[i] = s
        c = edt * coef
        for i in range(n):
            v[i] += c * wn[i]
            w[i] = wn[i]
    return v


@njit(cache=True)
def window_action(v, m, config, open_deg, nbr_vert, nbr_bond,
                  ev_times, ev_units, ev_states, lo, hi, w, wn, tol):
    """v <- v P_{m+1} for the quenched one-step kernel on [m, m+1].

    Applies the ordered product of interval exponentials, advancing
    config and open_deg in place through the window's events (events
    that resample a unit to its current state do not split intervals).
    """
    t_prev = np.float64(m)
    for idx in range(lo, hi):
        b = ev_units[idx]
        s = ev_states[idx]
        if config[b] == s:
            continue
        dt = ev_times[idx] - t_prev
        if dt > 0.0:
            expT_action(v, dt, config, open_deg, nbr_vert, nbr_bond, w, wn, tol)
        config[b] = s
        va = b // 2
        axis = b & 1
        vb = nbr_vert[va, 2 * axis + 1]
        if s == 1:
            open_deg[va] += 1
            open_deg[vb] += 1
        else:
            open_deg[va] -= 1
            open_deg[vb] -= 1
        t_prev = ev_times[idx]
    dt = np.float64(m) + 1.0 - t_prev
    if dt > 0.0:
        expT_action(v, dt, config, open_deg, nbr_vert, nbr_bond, w, wn, tol)
    return v


@njit(cache=True)
def walk_window(x_idx, m, nbr_vert, nbr_bond, init, uoff, utimes, ustates,
                key, ctr):
    """One unit-time window of the rate-1 walk through the trajectory,
    starting at vertex x_idx at time m; returns the endpoint.  This is
    an exact sample from the quenched kernel row P_{m+1}(x, .)."""
    t = np.float64(m)
    pos = x_idx
    while True:
        t = t + _next_expo(key, ctr, 1.0)
        if t >= np.float64(m) + 1.0:
            break
        k = _next_below(key, ctr, 4)
        b = nbr_bond[pos, k]
        if _unit_state_at(b, t, init, uoff, utimes, ustates) == 1:
            pos = nbr_vert[pos, k]
    return pos


@njit(cache=True)
def largest_cluster_labels(L, config, parent, size, minv):
    """Cluster labels of the open subgraph; returns the root label of
    the largest cluster (ties toward smallest minimum vertex)."""
    n = L * L
    for i in range(n):
        parent[i] = i
        size[i] = 1
        minv[i] = i
    for v in range(n):
        x = v // L
        y = v % L
        if config[2 * v] == 1:
            _union(parent, size, minv, v, ((x + 1) % L) * L + y)
        if config[2 * v + 1] == 1:
            _union(parent, size, minv, v, x * L + (y + 1) % L)
    best = 0
    best_size = 0
    best_minv = 0
    for i in range(n):
        if parent[i] == i:
            if size[i] > best_size or (size[i] == best_size and minv[i] < best_minv):
                best = i
                best_size = size[i]
                best_minv = minv[i]
    for i in range(n):
        parent[i] = _find(parent, i)
    return best


@njit(cache=True)
def boundary_stats(L, mask, config, nbr_vert, init, uoff, utimes, ustates, m):
    """(open boundary-bond count at time m, integral over [m, m+1] of
    the open boundary-bond count) for the set given by mask."""
    n = L * L
    cnt = np.int64(0)
    integral = 0.0
    for v in range(n):
        for axis in range(2):
            w = nbr_vert[v, 2 * axis + 1]
            if mask[v] == mask[w]:
                continue
            b = 2 * v + axis
            if config[b] == 1:
                cnt += 1
            # exact piecewise integration of this bond's state
            lo = uoff[b]
            hi = uoff[b + 1]
            while lo < hi:
                mid = (lo + hi) // 2
                if utimes[mid] <= np.float64(m):
                    lo = mid + 1
                else:
                    hi = mid
            s = config[b]
            t_prev = np.float64(m)
            j = lo
            while j < uoff[b + 1] and utimes[j] <= np.float64(m) + 1.0:
                if s == 1:
                    integral += utimes[j] - t_prev
                s = ustates[j]
                t_prev = utimes[j]
                j += 1
            if s == 1:
                integral += np.float64(m) + 1.0 - t_prev
    return cnt, integral


@njit(cache=True)
def apply_events(config, open_deg, nbr_vert, ev_units, ev_states, lo, hi):
    """Advance a bond configuration (and open-degree table) through
    events [lo, hi)."""
    for idx in range(lo, hi):
        b = ev_units[idx]
        s = ev_states[idx]
        if config[b] == s:
            continue
        config[b] = s
        va = b // 2
        axis = b & 1
        vb = nbr_vert[va, 2 * axis + 1]
        if s == 1:
            open_deg[va] += 1
            open_deg[vb] += 1
        else:
            open_deg[va] -= 1
            open_deg[vb] -= 1
