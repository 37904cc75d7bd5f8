"""
One-time private Hamming LDC: per-block BCH encoding, then a keyed permutation
of all codeword positions, then a keyed pad.

The decoder for index i reads only the ell positions that hold the block of i,
so its locality equals the block length and errors a keyless channel places
land spread over blocks.
"""
import logging
import math
import secrets
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from codes.bch import block_code
from codes.keyed import derive_subkey, pad_bits, permutation_table
from codes.oracle import QueryOracle
from models.data_models import BitString, PrivateCodeParams, SecretKey, SEED_BYTES
from models.errors import DecodeFailure, InsufficientEntropy, InvalidParameter, LengthMismatch

MIN_LAMBDA = 16
FAILED = -1


def block_bits_for(lam: int, factor: int = 4) -> int:
    """Default block payload m = factor * ceil(log2 lambda) * 8."""
    return factor * math.ceil(math.log2(lam)) * 8


def gen(lam: int, rng: Optional[np.random.Generator] = None) -> SecretKey:
    """
    Key generation. Seeds come from the OS randomness source unless a seeded
    generator is supplied, which games use so runs replay exactly.
    """
    if lam < MIN_LAMBDA:
        raise InvalidParameter(f"security parameter {lam} below the floor of {MIN_LAMBDA}")
    if rng is not None:
        return SecretKey(lam, rng.bytes(SEED_BYTES), rng.bytes(SEED_BYTES))
    try:
        return SecretKey(lam, secrets.token_bytes(SEED_BYTES), secrets.token_bytes(SEED_BYTES))
    except (OSError, NotImplementedError) as e:
        raise InsufficientEntropy(f"randomness source failed: {e}") from e


class PrivateLDC:
    codec_id = "priv-hamming-v1"
    randomized = False

    def __init__(self, k: int, lam: int, m: Optional[int] = None,
                 inner_rate: Fraction = Fraction(1, 4), p: float = 0.99, eps: float = 0.001):
        if k < 1:
            raise InvalidParameter("message length must be positive")
        m = m or block_bits_for(lam)
        ell = Fraction(m) / Fraction(inner_rate)
        if ell.denominator != 1:
            raise InvalidParameter(f"block length m/inner_rate = {ell} is not an integer")
        self.block = block_code(int(ell), m)
        self.params = PrivateCodeParams(k=k, m=m, ell=int(ell), correctable=self.block.t, lam=lam, p=p, eps=eps)
        self.k = k
        self.locality = self.params.ell
        logging.debug("private code k=%d m=%d ell=%d K=%d t=%d", k, m, self.params.ell,
                      self.params.K, self.block.t)

    @property
    def K(self) -> int:
        return self.params.K

    def pad_message(self, x: BitString) -> np.ndarray:
        if x.length != self.k:
            raise LengthMismatch(f"message has {x.length} bits, code expects {self.k}")
        padded = np.zeros(self.params.padded_k, dtype=np.uint8)
        padded[:self.k] = x.bits
        return padded

    def encode(self, x: BitString, sk: SecretKey) -> BitString:
        p = self.params
        blocks = self.pad_message(x).reshape(p.blocks, p.m)
        stacked = np.concatenate([self.block.encode(row) for row in blocks])
        word = np.empty(p.K, dtype=np.uint8)
        word[permutation_table(sk.perm_seed, p.K)] = stacked
        return BitString(word ^ pad_bits(sk.pad_seed, p.K))

    def block_positions(self, j: int, sk: SecretKey) -> np.ndarray:
        ell = self.params.ell
        return permutation_table(sk.perm_seed, self.params.K)[j * ell:(j + 1) * ell]

    def decode_block(self, oracle: QueryOracle, j: int, sk: SecretKey) -> np.ndarray:
        positions = self.block_positions(j, sk)
        values = oracle.read_many(positions).astype(np.uint8)
        values ^= pad_bits(sk.pad_seed, self.params.K)[positions]
        return self.block.decode(values)

    def local_decode(self, oracle: QueryOracle, i: int, sk: SecretKey) -> int:
        if not 0 <= i < self.k:
            raise InvalidParameter(f"index {i} outside [0, {self.k})")
        m = self.params.m
        return int(self.decode_block(oracle, i // m, sk)[i % m])

    def decode_word(self, oracle: QueryOracle, sk: SecretKey) -> np.ndarray:
        """One decoder run per block; FAILED marks indices of blocks that raised DecodeFailure."""
        p = self.params
        out = np.full(p.padded_k, FAILED, dtype=np.int64)
        for j in range(p.blocks):
            try:
                out[j * p.m:(j + 1) * p.m] = self.decode_block(oracle, j, sk)
            except DecodeFailure:
                continue
        return out[:self.k]

    def derive(self, sk: SecretKey, nonce: int) -> SecretKey:
        return derive_subkey(sk, nonce)

    def decoder(self, sk: SecretKey) -> "KeyedDecoder":
        return KeyedDecoder(self, sk)


class KeyedDecoder:
    """Binds a key to a private code so it fits the generic local-decoder interface."""

    def __init__(self, code: PrivateLDC, sk: SecretKey):
        self.code = code
        self.sk = sk
        self.k = code.k
        self.locality = code.locality

    def local_decode(self, oracle: QueryOracle, i: int, rng: Optional[np.random.Generator] = None) -> int:
        return self.code.local_decode(oracle, i, self.sk)


class PrivateSession:
    """
    Multi-message use of one key: message number `nonce` is encoded under the
    subkey derived from (sk, nonce). Encoder and decoder share the counter.

    `code` is anything with derive(sk, nonce) and encode(x, sk, ...); extra
    encode arguments are passed through. With `reuse_key` every message is
    encoded under sk itself, the one-time key used many times.
    """

    def __init__(self, code, sk: SecretKey, reuse_key: bool = False):
        self.code = code
        self.sk = sk
        self.reuse_key = reuse_key
        self.counter = 0

    def encode(self, x: BitString, *args) -> Tuple[int, BitString]:
        nonce = self.counter
        self.counter += 1
        return nonce, self.code.encode(x, self.key_for(nonce), *args)

    def key_for(self, nonce: int) -> SecretKey:
        return self.sk if self.reuse_key else self.code.derive(self.sk, nonce)
