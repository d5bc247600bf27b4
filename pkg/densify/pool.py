"""
Worker pool for trial-level parallelism.

Work is cut into fixed index chunks that do not depend on the number of
workers, and the per-chunk results come back in chunk order.  Combined with
``SeedSchedule`` streams keyed by trial index this makes every aggregate
independent of ``--threads``.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

from densify.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

T = TypeVar("T")

DEFAULT_CHUNK = 256


class TrialPool:
    """Thread pool running ``fn(start, stop)`` over index chunks."""

    def __init__(self, threads: int = 1, chunk_size: int = DEFAULT_CHUNK):
        if threads < 1:
            raise InvalidArgumentError(f"threads must be >= 1, got {threads}")
        if chunk_size < 1:
            raise InvalidArgumentError(f"chunk_size must be >= 1, got {chunk_size}")
        self.threads = threads
        self.chunk_size = chunk_size
        self._executor: Optional[ThreadPoolExecutor] = None
        if threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix="densify")

    # ------------------------------------------------------------------ #
    def map_chunks(
        self,
        fn: Callable[[int, int], T],
        n_items: int,
        chunk_size: Optional[int] = None,
    ) -> List[T]:
        """Apply *fn* to consecutive ``[start, stop)`` chunks of ``range(n_items)``."""
        size = chunk_size or self.chunk_size
        bounds = [(start, min(start + size, n_items)) for start in range(0, n_items, size)]
        if self._executor is None or len(bounds) == 1:
            return [fn(a, b) for a, b in bounds]
        futures = [self._executor.submit(fn, a, b) for a, b in bounds]
        return [f.result() for f in futures]

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "TrialPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


SERIAL = TrialPool(threads=1)


def resolve(pool: Optional[TrialPool]) -> TrialPool:
    return SERIAL if pool is None else pool
