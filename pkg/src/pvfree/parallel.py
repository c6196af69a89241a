"""Order-preserving fan-out over a process pool."""

import os
from concurrent.futures import ProcessPoolExecutor

ENV_VAR = "PVFREE_THREADS"


def worker_count(requested=None):
    """Explicit request, else $PVFREE_THREADS, else the processor count."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def map_ordered(func, items, workers=None):
    """``[func(x) for x in items]``, possibly computed in parallel.

    Results come back in input order; each item is computed independently,
    so the output does not depend on the number of workers.
    """
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
