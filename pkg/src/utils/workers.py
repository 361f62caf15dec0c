"""Ordered thread-pool map shared by the per-cell stages of the pipeline."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

logger = logging.getLogger(__name__)


def map_ordered(fn: Callable, items: Sequence, threads: int = 1, progress_callback: Optional[Callable] = None,
                label: str = "items") -> List:
    """Apply ``fn`` over ``items`` with a thread pool; results keep input order.

    ``progress_callback(percent, message)`` is called after each item.  The
    first failure is logged and re-raised.
    """
    total = len(items)
    results = [None] * total
    done = 0

    def report():
        if progress_callback:
            progress_callback(done / total * 100 if total else 100, f"{label}: {done}/{total}")

    if threads <= 1 or total <= 1:
        for i, item in enumerate(items):
            results[i] = fn(item)
            done += 1
            report()
        return results
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(fn, item): i for i, item in enumerate(items)}
        for future, i in futures.items():
            try:
                results[i] = future.result()
            except Exception:
                logger.error(f"{label}: item {i} failed", exc_info=True)
                raise
            done += 1
            report()
    return results
