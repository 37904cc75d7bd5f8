"""
Exact Hamming and insertion/deletion distances.

Distances consumed by predicates are returned as `Fraction` so threshold checks
never flicker on float rounding.
"""
from fractions import Fraction
from typing import Tuple, Union

import numpy as np

from models.data_models import BitString, SymbolString
from models.errors import EmptyInput, EmptyReference, LengthMismatch

Word = Union[BitString, SymbolString]

# Above this many DP cells the anti-diagonal numpy sweep beats the row loop.
_ROW_DP_CELLS = 4096


def _symbols(word: Word) -> Tuple[np.ndarray, int]:
    if isinstance(word, BitString):
        return word.bits, 2
    if isinstance(word, SymbolString):
        return word.symbols, word.q
    arr = np.asarray(word)
    return arr, int(arr.max()) + 1 if arr.size else 2


def hamming_fractional(x: Word, y: Word) -> Fraction:
    """Fraction of positions at which x and y differ."""
    xs, xq = _symbols(x)
    ys, yq = _symbols(y)
    if xs.size != ys.size:
        raise LengthMismatch(f"hamming distance of lengths {xs.size} and {ys.size}")
    if isinstance(x, (BitString, SymbolString)) and isinstance(y, (BitString, SymbolString)) and xq != yq:
        raise LengthMismatch(f"alphabet sizes differ: {xq} != {yq}")
    if xs.size == 0:
        raise EmptyInput("hamming distance of empty words")
    return Fraction(int(np.count_nonzero(xs != ys)), int(xs.size))


def hamming_raw(x: Word, y: Word) -> int:
    xs, _ = _symbols(x)
    ys, _ = _symbols(y)
    if xs.size != ys.size:
        raise LengthMismatch(f"hamming distance of lengths {xs.size} and {ys.size}")
    return int(np.count_nonzero(xs != ys))


def _lcs_rows(a, b) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for jj, cb in enumerate(b, 1):
            if ca == cb:
                cur.append(prev[jj - 1] + 1)
            else:
                cur.append(prev[jj] if prev[jj] > cur[jj - 1] else cur[jj - 1])
        prev = cur
    return prev[-1]


def _lcs_wavefront(a: np.ndarray, b: np.ndarray) -> int:
    # Sweep anti-diagonals d = i + j; each diagonal only needs the previous two.
    if a.size > b.size:
        a, b = b, a
    n, m = a.size, b.size
    if n == 0:
        return 0
    br = b[::-1]
    bufs = [np.zeros(n + 1, dtype=np.int32) for _ in range(3)]
    prev2, prev1, cur = bufs
    for d in range(2, n + m + 1):
        lo = max(1, d - m)
        hi = min(n, d - 1)
        if lo <= hi:
            match = a[lo - 1:hi] == br[m - d + lo:m - d + hi + 1]
            best = np.maximum(prev1[lo - 1:hi], prev1[lo:hi + 1])
            cur[lo:hi + 1] = np.where(match, prev2[lo - 1:hi] + 1, best)
        prev2, prev1, cur = prev1, cur, prev2
    return int(prev1[n])


def lcs_length(x: Word, y: Word) -> int:
    xs, _ = _symbols(x)
    ys, _ = _symbols(y)
    if xs.size * ys.size <= _ROW_DP_CELLS:
        return _lcs_rows(xs.tolist(), ys.tolist())
    return _lcs_wavefront(np.ascontiguousarray(xs), np.ascontiguousarray(ys))


def edit_raw(x: Word, y: Word) -> int:
    """
    Minimum number of insertions plus deletions turning x into y.
    A substitution is not an atomic operation and costs 2.
    """
    xs, _ = _symbols(x)
    ys, _ = _symbols(y)
    if xs.size == ys.size and np.array_equal(xs, ys):
        return 0
    return int(xs.size + ys.size - 2 * lcs_length(x, y))


def edit_fractional(x: Word, y: Word) -> Fraction:
    """edit_raw normalised by 2|x|; x is the uncorrupted reference."""
    xs, _ = _symbols(x)
    if xs.size == 0:
        raise EmptyReference("edit distance against an empty reference")
    return Fraction(edit_raw(x, y), 2 * int(xs.size))
