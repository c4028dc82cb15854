"""Independent brute-force oracles shared by unit and acceptance tests."""

import itertools

import numpy as np


def all_assignments(n_keys, n_workers):
    if n_keys == 0:
        return np.zeros((1, 0), dtype=np.int8)
    grid = np.array(list(itertools.product(range(n_workers), repeat=n_keys)), dtype=np.int8)
    return grid


_cache = {}


def balanced_assignments(n_keys, n_workers):
    key = (n_keys, n_workers)
    if key not in _cache:
        grid = all_assignments(n_keys, n_workers)
        counts = np.stack([(grid == w).sum(axis=1) for w in range(n_workers)], axis=1)
        ok = counts.max(axis=1) - counts.min(axis=1) <= 1
        _cache[key] = grid[ok]
    return _cache[key]


def brute_force_min_moves(current, workers):
    """Fewest keys whose owner changes over every balanced assignment."""
    keys = sorted(current)
    workers = sorted(workers)
    grid = balanced_assignments(len(keys), len(workers))
    index = {w: i for i, w in enumerate(workers)}
    cur = np.array([index.get(current[k], -1) for k in keys], dtype=np.int8)
    if len(keys) == 0:
        return 0
    return int((grid != cur).sum(axis=1).min())


def floor_translate(checkpoints, src, default):
    """Linear scan: dst of the last checkpoint with src_offset <= src."""
    best = None
    for ck in checkpoints:
        if ck.src_offset <= src and (best is None or ck.src_offset > best.src_offset):
            best = ck
    return default if best is None else best.dst_offset
