"""Lattice geometry for Z^d and the triangular lattice.

Points are integer coordinate tuples.  Triangular sites use axial
coordinates: (x, y) embeds as x + y * exp(i*pi/3) in the plane, so the
six neighbors of the origin are (+-1, 0), (0, +-1), (1, -1), (-1, 1).

The environment's refreshing units are bonds on hypercubic lattices and
sites on the triangular lattice.  A bond is identified by its canonical
form (base, axis): the endpoint from which the bond points in the
positive axis direction.  On a torus the base is wrapped, so both
endpoints of a bond name the same unit.

Balls B_r are coordinate boxes: all points with every |coordinate| <= r,
with boundary exactly the points where the largest |coordinate| equals
r.  On the triangular lattice this gives |boundary of B_r| = 8r.
Ball predicates read coordinates literally (infinite-lattice semantics).
"""

from dataclasses import dataclass
import itertools

HYPERCUBIC = "hypercubic"
TRIANGULAR = "triangular"

# Triangular steps in canonical order: axes (1,0), (0,1), (1,-1),
# negative direction before positive within each axis.
TRI_STEPS = ((-1, 0), (1, 0), (0, -1), (0, 1), (-1, 1), (1, -1))


@dataclass(frozen=True)
class LatticeKind:
    """A lattice family member: kind, dimension, optional torus side.

    L is None for the infinite lattice, otherwise the torus side
    (L >= 3 so that the 2d neighbors of a vertex are distinct).
    """

    kind: str
    d: int = 2
    L: int | None = None

    def __post_init__(self):
        if self.kind not in (HYPERCUBIC, TRIANGULAR):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == TRIANGULAR and self.d != 2:
            raise ValueError("triangular lattice is two-dimensional")
        if self.kind == HYPERCUBIC and self.d < 2:
            raise ValueError("hypercubic lattice needs d >= 2")
        if self.L is not None and self.L < 3:
            raise ValueError("torus side must be >= 3")

    @property
    def degree(self):
        return 6 if self.kind == TRIANGULAR else 2 * self.d

    @property
    def is_torus(self):
        return self.L is not None

    @property
    def n_vertices(self):
        if not self.is_torus:
            raise ValueError("infinite lattice has no vertex count")
        return self.L ** self.d


def origin(lat):
    return (0,) * lat.d


def step_vectors(lat):
    """Neighbor steps in canonical order (axis-major, minus before plus)."""
    if lat.kind == TRIANGULAR:
        return TRI_STEPS
    steps = []
    for axis in range(lat.d):
        e = [0] * lat.d
        e[axis] = -1
        steps.append(tuple(e))
        e = [0] * lat.d
        e[axis] = 1
        steps.append(tuple(e))
    return tuple(steps)


def wrap(lat, v):
    if not lat.is_torus:
        return tuple(v)
    L = lat.L
    return tuple(c % L for c in v)


def add(v, step):
    return tuple(a + b for a, b in zip(v, step))


def canonical_bond(lat, v, axis, positive):
    """Canonical unit for the bond at v along +-axis.

    The bond between v and v + e_axis is ((wrapped v), axis); the bond
    between v and v - e_axis is ((wrapped v - e_axis), axis).  Both
    endpoints therefore resolve a shared bond to the same unit.
    """
    if positive:
        base = v
    else:
        base = tuple(c - (1 if i == axis else 0) for i, c in enumerate(v))
    return (wrap(lat, base), axis)


def neighbors(lat, v):
    """List of (unit, neighbor) pairs in canonical order.

    The unit is what the environment must be queried about to cross:
    the canonical bond on hypercubic lattices, the destination site on
    the triangular lattice.  Neighbor coordinates are wrapped on tori.
    """
    out = []
    if lat.kind == TRIANGULAR:
        for step in TRI_STEPS:
            w = wrap(lat, add(v, step))
            out.append((w, w))
        return out
    for axis in range(lat.d):
        for positive in (False, True):
            step = tuple((1 if positive else -1) if i == axis else 0 for i in range(lat.d))
            w = wrap(lat, add(v, step))
            out.append((canonical_bond(lat, v, axis, positive), w))
    return out


def _tri_dist(dx, dy):
    # steps (1,0), (0,1), (1,-1) and negatives; if the signs agree the
    # mixed step does not help
    if dx * dy >= 0:
        return abs(dx) + abs(dy)
    return max(abs(dx), abs(dy))


def graph_distance(lat, u, v):
    """Graph distance with every unit open (closed form, exact)."""
    delta = [b - a for a, b in zip(u, v)]
    if lat.kind == HYPERCUBIC:
        if not lat.is_torus:
            return sum(abs(c) for c in delta)
        L = lat.L
        return sum(min(abs(c) % L, L - abs(c) % L) for c in delta)
    if not lat.is_torus:
        return _tri_dist(*delta)
    L = lat.L
    dx = delta[0] % L
    dy = delta[1] % L
    return min(
        _tri_dist(dx - a * L, dy - b * L) for a in (0, 1) for b in (0, 1)
    )


def embed(lat, v):
    """Cartesian embedding used for Euclidean displacement."""
    if lat.kind == TRIANGULAR:
        x, y = v
        return (x + 0.5 * y, y * (3.0 ** 0.5) / 2.0)
    return tuple(float(c) for c in v)


def sq_euclidean(lat, v):
    e = embed(lat, v)
    return sum(c * c for c in e)


def ball_membership(lat, r, v):
    """'interior', 'boundary', or 'outside' for the ball B_r around 0."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    m = max(abs(c) for c in v)
    if m > r:
        return "outside"
    return "boundary" if m == r else "interior"


def ball_points(lat, r):
    """All points of B_r (coordinate box of side 2r+1)."""
    return [p for p in itertools.product(range(-r, r + 1), repeat=lat.d)]


def boundary_points(lat, r):
    return [p for p in ball_points(lat, r) if max(abs(c) for c in p) == r]


# torus indexing (used by the evolving-set machinery and trajectories)

def vertex_index(lat, v):
    idx = 0
    for c in v:
        idx = idx * lat.L + (c % lat.L)
    return idx


def vertex_coords(lat, idx):
    cs = []
    for _ in range(lat.d):
        cs.append(idx % lat.L)
        idx //= lat.L
    return tuple(reversed(cs))


def bond_index(lat, unit):
    base, axis = unit
    return vertex_index(lat, base) * lat.d + axis


def torus_units(lat):
    """All refreshing units of a torus in canonical index order."""
    if lat.kind == TRIANGULAR:
        return [vertex_coords(lat, i) for i in range(lat.n_vertices)]
    out = []
    for i in range(lat.n_vertices):
        v = vertex_coords(lat, i)
        for axis in range(lat.d):
            out.append((v, axis))
    return out


def n_units(lat):
    if lat.kind == TRIANGULAR:
        return lat.n_vertices
    return lat.n_vertices * lat.d


def unit_index(lat, unit):
    if lat.kind == TRIANGULAR:
        return vertex_index(lat, unit)
    return bond_index(lat, unit)


# unit packing for per-unit random streams

def coord_bits(d):
    """Bits per coordinate when packing a unit into 63 bits (3 for axis)."""
    return (63 - 3) // d


def pack_unit(lat, unit):
    """Pack a unit into a nonnegative int64 label for stream keying.

    Sites pack with axis field 0; bonds carry their axis + 1.  Signed
    coordinates are offset into [0, 2**bits); the same packing is
    mirrored in the numba kernels.
    """
    if lat.kind == TRIANGULAR:
        coords, axis_field = unit, 0
    else:
        coords, axis_field = unit[0], unit[1] + 1
    bits = coord_bits(lat.d)
    half = 1 << (bits - 1)
    acc = axis_field
    for c in coords:
        s = c + half
        if not 0 <= s < (1 << bits):
            raise ValueError(f"coordinate {c} out of packable range for d={lat.d}")
        acc = (acc << bits) | s
    return acc
