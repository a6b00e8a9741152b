"""Exact-sampling simulation and verification engine for random walk
on dynamical percolation.

The environment is a product of independent two-state refresh
processes over lattice units (bonds of Z^d, sites of the triangular
lattice); the walker attempts nearest-neighbor moves through open
units.  Everything is sampled exactly from counter-based streams, so
every experiment is reproducible bit for bit from (seed, labels) and
independent of execution order and worker count.
"""

from .environment import EnvParams
from .lattice import HYPERCUBIC, TRIANGULAR, LatticeKind

__version__ = "0.1.0"

__all__ = ["EnvParams", "LatticeKind", "HYPERCUBIC", "TRIANGULAR",
           "__version__"]
