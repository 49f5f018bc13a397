"""
Workers Module

Order-preserving fan-out of independent tasks (grid points, trials) over a
thread pool. Results come back in input order, so reports never depend on
which worker finished first.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None, name: str = "kreiss-lab") -> List[R]:
    """
    Apply fn to every item, in order.

    Args:
        fn: task function; must not depend on shared mutable state
        items: task inputs
        threads: worker count; None or 1 runs inline

    Returns:
        [fn(item) for item in items]
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(threads, len(items))
    logger.debug(f"{name}: {len(items)} tasks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix=name) as executor:
        return list(executor.map(fn, items))
