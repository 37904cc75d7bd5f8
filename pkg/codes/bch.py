"""
Shortened binary BCH codes used as the per-block code of the private LDC.

The code is chosen from the length and payload alone: the smallest primitive
length 2^r - 1 >= length, then the largest designed radius t whose parity
still leaves room for the payload. Codewords are systematic, payload first;
bits past payload + parity are zero filler the decoder ignores.
"""
import logging
import math
from functools import lru_cache
from typing import Optional

import galois
import numpy as np

from models.errors import DecodeFailure, InvalidParameter, LengthMismatch


def _bch(n: int, t: int) -> Optional[galois.BCH]:
    try:
        return galois.BCH(n, d=2 * t + 1)
    except ValueError:
        return None


class ShortenedBCH:
    """
    Systematic shortened BCH code of the given length carrying `payload` bits.
    Corrects up to `t` bit errors per codeword; more raises DecodeFailure.
    """

    def __init__(self, length: int, payload: int):
        if not 1 <= payload < length:
            raise InvalidParameter(f"need 1 <= payload < length, got {payload}, {length}")
        self.length = length
        self.payload = payload
        self.r = max(3, math.ceil(math.log2(length + 1)))
        n = (1 << self.r) - 1
        room = length - payload

        # parity grows with t, so bisect for the largest t that fits
        best, lo, hi = None, 1, room
        while lo <= hi:
            mid = (lo + hi) // 2
            code = _bch(n, mid)
            if code is not None and code.n - code.k <= room:
                best, lo = code, mid + 1
            else:
                hi = mid - 1
        if best is None:
            raise InvalidParameter(f"no BCH code of length {length} corrects errors for payload {payload}")
        self.code = best
        self.t = int(best.t)
        self.parity = int(best.n - best.k)
        self.used = payload + self.parity
        logging.debug("BCH(%d, %d) shortened to %d/%d: t=%d parity=%d", best.n, best.k, self.used, length,
                      self.t, self.parity)

    def encode(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size != self.payload:
            raise LengthMismatch(f"BCH payload must be {self.payload} bits, got {bits.size}")
        word = np.zeros(self.length, dtype=np.uint8)
        word[:self.used] = self.code.encode(galois.GF2(bits)).view(np.ndarray)
        return word

    def decode(self, received: np.ndarray) -> np.ndarray:
        received = np.asarray(received, dtype=np.uint8)
        if received.size != self.length:
            raise LengthMismatch(f"BCH word must be {self.length} bits, got {received.size}")
        message, corrected = self.code.decode(galois.GF2(received[:self.used] & 1), errors=True)
        if int(corrected) < 0:
            raise DecodeFailure(f"more than t={self.t} errors in a BCH block")
        return message.view(np.ndarray).astype(np.uint8)


@lru_cache(maxsize=None)
def block_code(length: int, payload: int) -> ShortenedBCH:
    return ShortenedBCH(length, payload)
