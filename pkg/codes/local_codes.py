"""
Hamming locally decodable codes: the decoder interface and the Hadamard code.
"""
from typing import Optional, Protocol

import numpy as np

from codes.oracle import QueryOracle
from config import DEFAULT_REPETITIONS
from models.data_models import BitString, LocalCodeSpec, SymbolString
from models.errors import InvalidParameter, MessageTooLong, OracleLengthMismatch

HADAMARD_MAX_K = 20


class LocalDecoder(Protocol):
    k: int
    locality: int

    def local_decode(self, oracle: QueryOracle, i: int, rng: np.random.Generator) -> int:
        ...


def hadamard_encode(msg: BitString) -> BitString:
    """Position a (binary order, msg[0] paired with the top bit of a) holds <msg, a> mod 2."""
    k = msg.length
    if k < 1:
        raise InvalidParameter("Hadamard message must have at least one bit")
    if k > HADAMARD_MAX_K:
        raise MessageTooLong(f"k={k} exceeds the Hadamard cap of {HADAMARD_MAX_K}")
    a = np.arange(1 << k, dtype=np.int64)
    parity = np.zeros(1 << k, dtype=np.uint8)
    for t in range(k):
        if msg.bits[t]:
            parity ^= ((a >> (k - 1 - t)) & 1).astype(np.uint8)
    return BitString(parity)


def hadamard_local_decode(oracle: QueryOracle, i: int, rng: np.random.Generator,
                          k: Optional[int] = None) -> int:
    length = oracle.length
    if k is None:
        k = length.bit_length() - 1
    if length != 1 << k or k < 1:
        raise OracleLengthMismatch(f"oracle length {length} is not 2^k for k={k}")
    if not 0 <= i < k:
        raise InvalidParameter(f"index {i} outside [0, {k})")
    a = int(rng.integers(0, length))
    partner = a ^ (1 << (k - 1 - i))
    return oracle.read(a) ^ oracle.read(partner)


class HadamardCode:
    """2-query Hadamard LDC; succeeds with probability >= 1 - 2*rho."""

    def __init__(self, k: int, rho: float = 0.1):
        if k > HADAMARD_MAX_K:
            raise MessageTooLong(f"k={k} exceeds the Hadamard cap of {HADAMARD_MAX_K}")
        self.k = k
        self.locality = 2
        self.spec = LocalCodeSpec(k=k, K=1 << k, ell=2, rho=rho, p=1 - 2 * rho)

    def encode(self, msg: BitString) -> BitString:
        return hadamard_encode(msg)

    def local_decode(self, oracle: QueryOracle, i: int, rng: np.random.Generator) -> int:
        return hadamard_local_decode(oracle, i, rng, k=self.k)


def decode_all(code: LocalDecoder, oracle: QueryOracle, rng: np.random.Generator,
               repetitions: int = DEFAULT_REPETITIONS) -> SymbolString:
    """Majority of `repetitions` independent local decodes at every index."""
    if repetitions < 1:
        raise InvalidParameter("repetitions must be positive")
    out = np.zeros(code.k, dtype=np.int64)
    for i in range(code.k):
        ones = sum(code.local_decode(oracle, i, rng) for _ in range(repetitions))
        out[i] = 1 if 2 * ones > repetitions else 0
    return SymbolString(out, 2)
