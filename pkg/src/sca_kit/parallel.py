"""Order-preserving parallel map used for independent seeded tasks."""

import os
from concurrent.futures import ProcessPoolExecutor


def default_jobs() -> int:
    env = os.environ.get("SCA_KIT_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def pmap(fn, items, jobs=1):
    """``[fn(x) for x in items]``, optionally across worker processes.

    Results come back in input order, so reductions over them do not depend
    on scheduling.
    """
    items = list(items)
    if jobs is None:
        jobs = default_jobs()
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
