from __future__ import annotations

import os
from typing import Optional

THREADS_ENV = "HARPER_ENT_THREADS"


def worker_count(requested: Optional[int] = None) -> int:
    """Thread pool size: explicit request, else HARPER_ENT_THREADS, else min(4, cpus)."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return max(1, min(4, os.cpu_count() or 1))
