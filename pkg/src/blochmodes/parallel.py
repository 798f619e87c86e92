"""Order-preserving fan-out over a thread pool.

The heavy lifting is LAPACK, which releases the GIL, so threads are enough.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, TypeVar

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Sequence[T], *, workers: int = 1) -> list[R]:
    """Apply ``func`` to every item and return the results in input order.

    Parameters
    ----------
    func : Callable
        The task; must be safe to run concurrently.
    items : Sequence
        Task inputs.
    workers : int, optional
        Thread count; ``1`` (the default) runs serially in the calling thread.

    Returns
    -------
    list
        ``[func(item) for item in items]``, whatever the completion order.
    """
    if workers < 1:
        msg = f"workers must be at least 1, got {workers}"
        raise ValueError(msg)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("fanning %d tasks out over %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
