"""Optional thread fan-out for independent per-agent computations.

The only environment knob the package reads is HETCOVER_THREADS. Results are
assembled in index order, so output is identical whatever the thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ValidationError

ENV_VAR = "HETCOVER_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, n)


def map_indexed(fn, n):
    """Evaluate fn(0..n-1), returning results in index order."""
    workers = min(thread_count(), n) if n else 1
    if workers <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))
