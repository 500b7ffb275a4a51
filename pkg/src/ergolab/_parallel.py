"""Deterministic worker-pool helper.

Results are returned in input order, so worker count never affects
payloads; per-task randomness must be seeded from task indices upstream.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, items, workers=1):
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
