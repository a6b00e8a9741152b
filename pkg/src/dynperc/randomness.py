"""Counter-based splittable random streams.

Every random draw in the engine is a pure function of
(master_seed, label path, counter).  A stream is addressed by a label
path such as (PURPOSE_WALK, replica_index); its key is a 64-bit hash of
the path, and the n-th value of the stream is a keyed hash of n.  No
stream ever touches global state, so results are independent of replica
execution order, thread count, and process boundaries, which is what
makes byte-identical reruns possible.

The hash is the splitmix64 finalizer (Steele, Lea, Flood 2014) applied
to a Weyl sequence and xored with the stream key, the same construction
SplittableRandom uses.  State per stream is 128 bits: 64-bit key plus
64-bit counter.

Distribution draws are built on uniform01 only:

- uniform01: 53-bit mantissa, strictly inside (0, 1)
- exponential: inverse CDF, -log(u)/rate
- poisson: inversion by cumulative search for mean <= 10, otherwise
  the Lorentzian comparison-function rejection method
- uniform_int: modulo with rejection of the biased tail
- bernoulli: uniform01() < q

The numba kernels in _kernels.py mirror these bit for bit; tests assert
exact agreement between the two paths.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / golden ratio, odd
FOLD = 0xD1B54A32D192ED03
TWO_NEG52 = 2.0 ** -52

# Purpose tags: first element of every label path.  Keeps streams for
# different uses of the same replica index disjoint.
PURPOSE_ENV_UNIT = 1
PURPOSE_WALK = 2
PURPOSE_TRAJ_INIT = 3
PURPOSE_TRAJ_EVENTS = 4
PURPOSE_ONEARM = 5
PURPOSE_THETA = 6
PURPOSE_HCLUSTER_DYN = 7
PURPOSE_HCLUSTER_STATIC = 8
PURPOSE_EVOLVE = 9
PURPOSE_DF = 10
PURPOSE_INSTANCE = 11
PURPOSE_GROWTH = 12


def mix64(z):
    """splitmix64 finalizer; bijection on 64-bit ints."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def subkey(key, label):
    """Derive a child key from a parent key and one integer label."""
    return mix64(((key ^ mix64((label + GOLDEN) & MASK64)) + FOLD) & MASK64)


def derive_key(master_seed, labels=()):
    """Fold a label path into a 64-bit stream key.

    Distinct paths collide with probability ~2**-64 per pair; the fold
    is order- and length-sensitive.
    """
    k = mix64((master_seed + GOLDEN) & MASK64)
    for lab in labels:
        k = subkey(k, lab)
    return k


def stream_value(key, counter):
    """The counter-th 64-bit value of the stream with the given key."""
    return mix64(mix64((counter * GOLDEN + GOLDEN) & MASK64) ^ key)


def uniform_from_bits(x):
    """Map a 64-bit value to a double in the open interval (0, 1).

    Uses the top 52 bits so every output (2k+1) * 2**-53 is exactly
    representable; with 53 bits the largest value would round to 1.0.
    """
    return ((x >> 12) + 0.5) * TWO_NEG52


def unit_uniform(key, packed_unit):
    """One uniform attached to a lattice unit under a trial key.

    Pure in (key, packed_unit): re-querying the same unit in the same
    trial returns the same value, and the value does not depend on the
    exploration order.  This is what makes one-arm trials monotone
    couplings across p and across radii.
    """
    return uniform_from_bits(stream_value(subkey(key, packed_unit), 0))


class Stream:
    """Sequential view of a counter-based stream.

    Mutable convenience wrapper: holds (key, counter) and advances the
    counter as draws are made.  Cheap to create; create one per
    (purpose, replica) rather than sharing.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key, counter=0):
        self.key = key & MASK64
        self.counter = counter

    @classmethod
    def from_labels(cls, master_seed, labels=()):
        return cls(derive_key(master_seed, labels))

    def spawn(self, label):
        """Independent child stream; does not consume from this one."""
        return Stream(subkey(self.key, label))

    def u64(self):
        v = stream_value(self.key, self.counter)
        self.counter += 1
        return v

    def uniform01(self):
        """Uniform double strictly inside (0, 1)."""
        return uniform_from_bits(self.u64())

    def uniforms(self, n):
        """Bulk uniforms as a numpy array; same sequence as n calls to
        uniform01()."""
        counters = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        x = _mix64_np(counters * np.uint64(GOLDEN) + np.uint64(GOLDEN))
        x = _mix64_np(x ^ np.uint64(self.key))
        return ((x >> np.uint64(12)).astype(np.float64) + 0.5) * TWO_NEG52

    def bernoulli(self, q):
        return self.uniform01() < q

    def exponential(self, rate=1.0):
        if rate <= 0.0:
            raise ValueError("rate must be positive")
        return -math.log(self.uniform01()) / rate

    def poisson(self, mean):
        if mean < 0.0:
            raise ValueError("mean must be nonnegative")
        if mean == 0.0:
            return 0
        if mean <= 10.0:
            # inversion: walk the CDF
            p = math.exp(-mean)
            f = p
            k = 0
            u = self.uniform01()
            while u > f and p > 0.0:
                k += 1
                p *= mean / k
                f += p
            return k
        # rejection with a Lorentzian hat (Numerical Recipes 7.3)
        sq = math.sqrt(2.0 * mean)
        alxm = math.log(mean)
        g = mean * alxm - math.lgamma(mean + 1.0)
        while True:
            while True:
                y = math.tan(math.pi * self.uniform01())
                em = sq * y + mean
                if em >= 0.0:
                    break
            em = math.floor(em)
            t = 0.9 * (1.0 + y * y) * math.exp(em * alxm - math.lgamma(em + 1.0) - g)
            if self.uniform01() <= t:
                return int(em)

    def uniform_int(self, n):
        """Uniform integer in [0, n); unbiased via tail rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        m = ((MASK64 % n) + 1) % n  # 2**64 mod n
        if m == 0:
            return self.u64() % n
        threshold = (1 << 64) - m
        while True:
            x = self.u64()
            if x < threshold:
                return x % n


def _mix64_np(z):
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))
