"""Deterministic chunked parallelism.

Work is split into contiguous index chunks mapped over a fork pool;
every chunk computes per-index rows that are concatenated back in index
order, and all statistical aggregation happens on the merged arrays.
Because every random draw is keyed by (seed, labels, index), outputs
are byte-identical for any thread count, which tests assert.
"""

import multiprocessing
import os


def chunk_ranges(n, threads, chunk_size=None):
    if chunk_size is None:
        chunk_size = max(1, min(512, -(-n // (max(threads, 1) * 4))))
    return [(lo, min(lo + chunk_size, n)) for lo in range(0, n, chunk_size)]


def map_chunks(worker, args, n, threads):
    """worker(args, lo, hi) -> list/array of per-index rows for [lo, hi).

    worker must be a module-level function (it crosses the fork).
    Returns the concatenated list of chunk results in index order.
    """
    ranges = chunk_ranges(n, threads)
    if threads <= 1 or len(ranges) == 1:
        return [worker(args, lo, hi) for lo, hi in ranges]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(min(threads, os.cpu_count() or 1)) as pool:
        return pool.starmap(worker, [(args, lo, hi) for lo, hi in ranges])
