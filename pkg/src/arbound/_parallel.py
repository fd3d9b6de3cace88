"""Seeded, worker-count-independent fan-out helpers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def seed_sequence(seed) -> np.random.SeedSequence:
    """SeedSequence for an int or a copy of an existing one.

    The copy matters: ``spawn`` on a shared object advances its counter, so
    two calls with the same object would otherwise see different children.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    return np.random.SeedSequence(seed)


def chunked_seeds(seed, total: int, chunk: int):
    """Split ``total`` draws into fixed chunks, each with its own seed substream."""
    n_chunks = -(-total // chunk)
    children = seed_sequence(seed).spawn(n_chunks)
    sizes = [chunk] * (n_chunks - 1) + [total - chunk * (n_chunks - 1)]
    return list(zip(children, sizes))


def map_ordered(fn, items, workers: int = 1):
    """``list(map(fn, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
