"""Shared independent oracles for kernel verification.

These rebuild the single-attempt matrix from the public lattice API and
integrate it with scipy's expm, so agreement with the package's series
kernels is a genuine cross-check rather than a self-comparison.
"""

import numpy as np
from scipy.linalg import expm as scipy_expm

from dynperc.environment import EnvParams, TorusTrajectory
from dynperc.lattice import neighbors, unit_index, vertex_coords, vertex_index


def still_trajectory(lk, cfg, t1=1.0, p=0.5, mu=0.2):
    """A trajectory with no refresh events and a chosen initial config."""
    return TorusTrajectory(
        EnvParams(lk, p, mu),
        0.0,
        float(t1),
        np.asarray(cfg, dtype=np.uint8),
        np.empty(0, dtype=np.float64),
        np.empty(0, dtype=np.int64),
        np.empty(0, dtype=np.uint8),
    )


def attempt_matrix(lk, cfg):
    """Single-attempt matrix from the lattice API: 1/(2d) per open
    incident bond, closed fraction on the diagonal."""
    nv = lk.n_vertices
    deg = lk.degree
    J = np.zeros((nv, nv))
    for v in range(nv):
        coords = vertex_coords(lk, v)
        vi = vertex_index(lk, coords)
        for unit, w in neighbors(lk, coords):
            if cfg[unit_index(lk, unit)]:
                J[vi, vertex_index(lk, w)] += 1.0 / deg
        J[vi, vi] = 1.0 - J[vi].sum()
    return J


def expm_oracle(lk, traj, a, b):
    """Ordered product of scipy matrix exponentials, splitting at every
    event time regardless of whether the state changes."""
    cuts = [a] + [float(t) for t in traj.times if a < t <= b] + [b]
    P = np.eye(lk.n_vertices)
    for lo, hi in zip(cuts, cuts[1:]):
        if hi == lo:
            continue
        J = attempt_matrix(lk, traj.config_at(lo))
        P = P @ scipy_expm((J - np.eye(lk.n_vertices)) * (hi - lo))
    return P
