import threading
from typing import Iterable, Union

import numpy as np

from models.data_models import BitString, SymbolString

OUT_OF_RANGE_SYMBOL = 0


class QueryOracle:
    """
    Query access to a (possibly corrupted) word.

    Every symbol read is charged once. Reads outside [0, length) return
    OUT_OF_RANGE_SYMBOL: insertion/deletion channels change lengths and
    decoders must keep running on the shorter word.
    """

    def __init__(self, word: Union[BitString, SymbolString, np.ndarray]):
        if isinstance(word, BitString):
            self._data = word.bits
        elif isinstance(word, SymbolString):
            self._data = word.symbols
        else:
            self._data = np.asarray(word)
        self._lock = threading.Lock()
        self._count = 0

    @property
    def length(self) -> int:
        return int(self._data.size)

    @property
    def query_count(self) -> int:
        return self._count

    def _charge(self, amount: int) -> None:
        with self._lock:
            self._count += amount

    def read(self, pos: int) -> int:
        self._charge(1)
        if 0 <= pos < self._data.size:
            return int(self._data[pos])
        return OUT_OF_RANGE_SYMBOL

    def read_many(self, positions: Iterable[int]) -> np.ndarray:
        idx = np.asarray(list(positions) if not isinstance(positions, np.ndarray) else positions, dtype=np.int64)
        self._charge(int(idx.size))
        out = np.full(idx.size, OUT_OF_RANGE_SYMBOL, dtype=self._data.dtype if self._data.size else np.uint8)
        inside = (idx >= 0) & (idx < self._data.size)
        out[inside] = self._data[idx[inside]]
        return out

    def read_range(self, start: int, count: int) -> np.ndarray:
        """Contiguous read of `count` symbols; every one is charged."""
        count = max(0, int(count))
        self._charge(count)
        out = np.full(count, OUT_OF_RANGE_SYMBOL, dtype=self._data.dtype if self._data.size else np.uint8)
        lo = max(start, 0)
        hi = min(start + count, self._data.size)
        if lo < hi:
            out[lo - start:hi - start] = self._data[lo:hi]
        return out


class CallbackOracle(QueryOracle):
    """
    Oracle whose reads are answered by a function instead of a stored word.
    Used to simulate access to a word that only exists implicitly, e.g. the
    Hamming codeword behind a compiled insertion/deletion codeword.
    """

    def __init__(self, length: int, fetch):
        super().__init__(np.zeros(0, dtype=np.uint8))
        self._length = int(length)
        self._fetch = fetch

    @property
    def length(self) -> int:
        return self._length

    def read(self, pos: int) -> int:
        self._charge(1)
        if 0 <= pos < self._length:
            return int(self._fetch(pos))
        return OUT_OF_RANGE_SYMBOL

    def read_many(self, positions: Iterable[int]) -> np.ndarray:
        return np.array([self.read(int(p)) for p in positions], dtype=np.uint8)

    def read_range(self, start: int, count: int) -> np.ndarray:
        return self.read_many(range(start, start + max(0, int(count))))


class CountingView(QueryOracle):
    """Forwards reads to a shared oracle while keeping a private query count."""

    def __init__(self, base: QueryOracle):
        super().__init__(np.zeros(0, dtype=np.uint8))
        self.base = base

    @property
    def length(self) -> int:
        return self.base.length

    def read(self, pos: int) -> int:
        self._charge(1)
        return self.base.read(pos)

    def read_many(self, positions: Iterable[int]) -> np.ndarray:
        values = self.base.read_many(positions)
        self._charge(int(values.size))
        return values

    def read_range(self, start: int, count: int) -> np.ndarray:
        values = self.base.read_range(start, count)
        self._charge(int(values.size))
        return values
