import os
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

THREADS_ENV = 'POTLAB_THREADS'


def thread_count(requested: Optional[int] = None) -> int:
    """
    Resolve the worker thread count.

    POTLAB_THREADS caps the requested count; without a request the
    cap itself is used. Everything falls back to 1.
    """
    base = int(requested) if requested is not None and int(requested) >= 1 else None
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
            if cap >= 1:
                return cap if base is None else max(1, min(base, cap))
            logger.warning(f"Ignoring non-positive {THREADS_ENV}={raw}")
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={raw}")
    return base if base is not None else 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Map fn over items, returning results in input order.

    Callers reduce the returned list in index order, which keeps results
    identical for any thread count.
    """
    items = list(items)
    workers = thread_count(threads)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def substream(seed: int, *index: int) -> np.random.Generator:
    """Independent generator for (seed, index...)"""
    return np.random.default_rng([int(seed), *[int(i) for i in index]])
