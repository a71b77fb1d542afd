"""Thread-count handling for per-feature and per-trial parallelism.

The ``KSEL_THREADS`` environment variable caps the worker count (default:
all cores).  Parallelism only affects speed: results are collected in
submission order, so outputs are identical at any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

ENV_THREADS = "KSEL_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map, threaded when more than one worker is allowed."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
