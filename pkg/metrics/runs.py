from typing import List, Tuple

import numpy as np


def zero_runs(bits) -> List[Tuple[int, int]]:
    """Maximal runs of zeros as (start, end) pairs, end exclusive."""
    arr = np.asarray(bits)
    if arr.size == 0:
        return []
    is_zero = np.concatenate(([0], (arr == 0).astype(np.int8), [0]))
    edges = np.diff(is_zero)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def long_zero_runs(bits, threshold: int) -> List[Tuple[int, int]]:
    return [(s, e) for s, e in zero_runs(bits) if e - s >= threshold]


def max_zero_run(bits) -> int:
    runs = zero_runs(bits)
    return max((e - s for s, e in runs), default=0)
