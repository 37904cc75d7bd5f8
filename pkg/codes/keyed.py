"""
Keyed position permutation and symbol pad of the private code.

The permutation is a balanced Feistel network over the smallest even-bit
power-of-two domain covering [K], restricted to [K] by cycle walking. Round
functions are full lookup tables derived with HMAC-SHA256, so each round is a
keyed random function on the half-domain and the whole permutation is
evaluated with numpy in one pass.
"""
import hashlib
import hmac
import struct
from functools import lru_cache

import numpy as np

from models.data_models import SecretKey
from models.errors import InvalidParameter

FEISTEL_ROUNDS = 4


def _round_tables(seed: bytes, half_bits: int, rounds: int) -> np.ndarray:
    size = 1 << half_bits
    tables = np.zeros((rounds, size), dtype=np.int64)
    width = (half_bits + 7) // 8
    mask = size - 1
    for r in range(rounds):
        stream = bytearray()
        counter = 0
        while len(stream) < size * width:
            stream += hmac.new(seed, struct.pack("<II", r, counter), hashlib.sha256).digest()
            counter += 1
        raw = np.frombuffer(bytes(stream[:size * width]), dtype=np.uint8).reshape(size, width).astype(np.int64)
        values = np.zeros(size, dtype=np.int64)
        for byte in range(width):
            values = (values << 8) | raw[:, byte]
        tables[r] = values & mask
    return tables


@lru_cache(maxsize=256)
def permutation_table(seed: bytes, K: int, rounds: int = FEISTEL_ROUNDS) -> np.ndarray:
    """pi[u] = position of codeword symbol u after permutation."""
    if K < 1:
        raise InvalidParameter("permutation domain must be non-empty")
    d = max(2, (K - 1).bit_length())
    if d % 2:
        d += 1
    half = d // 2
    mask = (1 << half) - 1
    tables = _round_tables(seed, half, rounds)

    x = np.arange(1 << d, dtype=np.int64)
    left, right = x >> half, x & mask
    for r in range(rounds):
        left, right = right, left ^ tables[r][right]
    full = (left << half) | right

    pi = full[:K].copy()
    outside = pi >= K
    while outside.any():
        pi[outside] = full[pi[outside]]
        outside = pi >= K
    pi.setflags(write=False)
    return pi


@lru_cache(maxsize=256)
def inverse_permutation_table(seed: bytes, K: int) -> np.ndarray:
    inv = np.argsort(permutation_table(seed, K))
    inv.setflags(write=False)
    return inv


@lru_cache(maxsize=256)
def pad_bits(seed: bytes, K: int) -> np.ndarray:
    """Counter-mode SHA-256 stream, K bits."""
    blocks = -(-K // 256)
    stream = b"".join(hashlib.sha256(seed + struct.pack("<Q", c)).digest() for c in range(blocks))
    bits = np.unpackbits(np.frombuffer(stream, dtype=np.uint8))[:K].copy()
    bits.setflags(write=False)
    return bits


def derive_subkey(sk: SecretKey, nonce: int) -> SecretKey:
    """Per-message key for the multi-message schedule."""
    tag = struct.pack("<Q", nonce)
    return SecretKey(
        lam=sk.lam,
        perm_seed=hmac.new(sk.perm_seed, b"perm" + tag, hashlib.sha256).digest(),
        pad_seed=hmac.new(sk.pad_seed, b"pad" + tag, hashlib.sha256).digest(),
    )
