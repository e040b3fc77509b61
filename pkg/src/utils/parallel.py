"""
Order-preserving parallel map capped by MCPSEL_THREADS
"""
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed
from joblib.parallel import cpu_count

from src.config import settings

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply fn to every item, returning results in input order

    Results are identical to the sequential map; reductions over the
    returned list stay deterministic.
    """
    items = list(items)
    workers = settings.THREADS if threads is None else threads
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    workers = min(cpu_count(), workers, len(items))
    return Parallel(n_jobs=workers, backend="threading")(delayed(fn)(x) for x in items)
