"""Dynamical percolation environments, sampled exactly.

Each refreshing unit (a bond of Z^d or a site of the triangular
lattice) carries an independent rate-mu Poisson clock; at every ring
the unit's state is redrawn Bernoulli(p).  Started from product
Bernoulli(p) the process is stationary and reversible, and the state of
a unit at two times s < t decorrelates like exp(-mu (t - s)).

Two exact representations are provided.

LazyEnvironment materializes nothing up front.  It keeps one record
(last query time, state, draw counter) per unit ever touched; a query
at a later time resamples the state with probability
1 - exp(-mu dt), which is the chance of at least one ring during the
gap, under which the state is Bernoulli(p) no matter how many rings
occurred.  This collapse is what makes exact simulation on an infinite
lattice possible.  Per-unit query times must be non-decreasing.

TorusTrajectory realizes the complete refresh record of a finite torus
over a time window [t0, t1] (initial states plus a time-ordered event
list), supporting state lookup at arbitrary times in the window, in any
order.  The walker and the evolving-set machinery consume these.

Both draw from counter-based streams keyed by unit, so a unit's
history never depends on which other units were touched first.
"""

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import lattice as lat
from .randomness import (
    PURPOSE_TRAJ_EVENTS,
    PURPOSE_TRAJ_INIT,
    Stream,
    stream_value,
    subkey,
    uniform_from_bits,
)

MU_MAX = math.exp(-1.0)


@dataclass(frozen=True)
class EnvParams:
    """Model parameters: lattice, open density p, refresh rate mu.

    mu is capped at 1/e (the regime the scaling statements cover);
    allow_large_mu lifts the cap for exploratory runs.
    """

    lattice: lat.LatticeKind
    p: float
    mu: float
    allow_large_mu: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} outside [0, 1]")
        if self.mu <= 0.0:
            raise ValueError(f"mu={self.mu} must be positive")
        if self.mu > MU_MAX and not self.allow_large_mu:
            raise ValueError(
                f"mu={self.mu} exceeds 1/e = {MU_MAX:.6f}; pass allow_large_mu to override"
            )


def resample_probability(mu, dt):
    """P(at least one refresh in a gap of length dt)."""
    if dt < 0.0:
        raise ValueError("negative time gap")
    return -math.expm1(-mu * dt)


def ever_open_params(p, mu, t):
    """Density of the ever-open subgraph H over [0, t].

    A unit misses H only if it starts closed and every refresh draws
    closed; refreshes drawing open thin to a Poisson process of rate
    mu p, so the miss probability is (1-p) exp(-mu t p).
    """
    return p + (1.0 - p) * (-math.expm1(-mu * t * p))


def sample_ever_open_unit(p, mu, t, stream):
    """Dynamical-route sample of one unit's ever-open indicator:
    initial state, then its Poisson(mu t) refresh outcomes."""
    if stream.uniform01() < p:
        return True
    n = stream.poisson(mu * t)
    for _ in range(n):
        if stream.uniform01() < p:
            return True
    return False


class LazyEnvironment:
    """Exact lazily-sampled environment keyed by (seed, labels).

    Units must be canonical (see lattice.neighbors); per-unit query
    times must be non-decreasing.  Different units may be queried at
    arbitrary relative times.
    """

    def __init__(self, params, env_key):
        self.params = params
        self.env_key = env_key
        self.records = {}

    def query(self, unit, t):
        """State (True = open) of a unit at time t >= 0."""
        rec = self.records.get(unit)
        p = self.params.p
        if rec is None:
            ukey = subkey(self.env_key, lat.pack_unit(self.params.lattice, unit))
            u = uniform_from_bits(stream_value(ukey, 0))
            state = u < p
            self.records[unit] = [t, state, ukey, 1]
            return state
        last, state, ukey, counter = rec
        if t < last:
            raise ValueError(
                f"unit {unit} queried at t={t} after t={last}; per-unit queries must be non-decreasing"
            )
        q = resample_probability(self.params.mu, t - last)
        u = uniform_from_bits(stream_value(ukey, counter))
        counter += 1
        if u < q:
            u2 = uniform_from_bits(stream_value(ukey, counter))
            counter += 1
            state = u2 < p
        rec[0] = t
        rec[1] = state
        rec[3] = counter
        return state

    def dump_records(self):
        """Sampled records as (unit, last_time, state, draws) sorted by
        packed unit id; for --dump-env debugging output."""
        out = []
        for unit, rec in self.records.items():
            out.append((lat.pack_unit(self.params.lattice, unit), unit, rec[0], int(rec[1]), rec[3]))
        out.sort()
        return [(u, t, s, c) for _, u, t, s, c in out]


@dataclass
class TorusTrajectory:
    """Full refresh record of a torus environment on [t0, t1].

    init[i] is the state of unit i (canonical index order) at t0;
    events are strictly increasing in time.  State lookups are exact
    and side-effect free, so any time in the window may be queried in
    any order.
    """

    params: EnvParams
    t0: float
    t1: float
    init: np.ndarray
    times: np.ndarray
    units: np.ndarray
    states: np.ndarray
    _csr: tuple = field(default=None, repr=False)

    @classmethod
    def generate(cls, params, t0, t1, master_seed, labels=()):
        if not params.lattice.is_torus:
            raise ValueError("trajectories require a torus")
        if t1 < t0:
            raise ValueError("t1 < t0")
        n = lat.n_units(params.lattice)
        init_key = Stream.from_labels(master_seed, (*labels, PURPOSE_TRAJ_INIT)).key
        evt_key = Stream.from_labels(master_seed, (*labels, PURPOSE_TRAJ_EVENTS)).key
        init, times, units, states = _kernels.gen_traj_events(
            np.uint64(init_key), np.uint64(evt_key), n, params.mu, params.p, t0, t1
        )
        return cls(params, t0, t1, init, times, units, states)

    @property
    def n_events(self):
        return len(self.times)

    def _check_time(self, t):
        if not self.t0 <= t <= self.t1:
            raise ValueError(f"t={t} outside trajectory window [{self.t0}, {self.t1}]")

    def csr(self):
        """Per-unit event lists: (offsets, times, states, event index)."""
        if self._csr is None:
            n = lat.n_units(self.params.lattice)
            order = np.argsort(self.units, kind="stable")
            counts = np.bincount(self.units, minlength=n)
            uoff = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=uoff[1:])
            self._csr = (uoff, self.times[order], self.states[order], order)
        return self._csr

    def config_at(self, t):
        """Configuration (uint8 per unit) at time t; right-continuous
        in t: an event at exactly t is already applied."""
        self._check_time(t)
        hi = np.searchsorted(self.times, t, side="right")
        cfg = self.init.copy()
        cfg[self.units[:hi]] = self.states[:hi]
        return cfg

    def unit_state_at(self, idx, t):
        self._check_time(t)
        uoff, utimes, ustates, _ = self.csr()
        lo, hi = uoff[idx], uoff[idx + 1]
        j = bisect.bisect_right(utimes, t, lo, hi)
        if j == lo:
            return bool(self.init[idx])
        return bool(ustates[j - 1])

    def query(self, unit, t):
        """Walker-facing lookup by canonical unit tuple."""
        return self.unit_state_at(lat.unit_index(self.params.lattice, unit), t)

    def events_in(self, a, b):
        """Index range [lo, hi) of events with a < time <= b."""
        lo = np.searchsorted(self.times, a, side="right")
        hi = np.searchsorted(self.times, b, side="right")
        return int(lo), int(hi)

    def ever_open_mask(self, t):
        """Per-unit indicator of membership in the ever-open subgraph
        H over [t0, t]."""
        self._check_time(t)
        hi = np.searchsorted(self.times, t, side="right")
        mask = self.init.astype(bool).copy()
        opened = self.units[:hi][self.states[:hi] == 1]
        mask[opened] = True
        return mask
