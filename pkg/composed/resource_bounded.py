"""
Resource-bounded insertion/deletion LDC.

The Hamming layer is the private code keyed by KDF(f(r)), where f is the
iterated random oracle of depth T+1 and r travels in the clear as a suffix of
repeated block-code copies. Anyone can decode; a party limited to T oracle
rounds cannot learn the key before it must commit to its corruption.
"""
import hashlib
import logging
import math
from collections import Counter
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from channels.metering import CostMeter, OracleRegistry, safe_function_eval
from codes.bch import block_code
from codes.oracle import CallbackOracle, QueryOracle
from codes.private_ldc import PrivateLDC
from compiler.insdel_compiler import compile, make_compiler_params, recover, recover_all
from config import DEFAULT_EPS, DEFAULT_P, DEFAULT_P_FIN
from models.data_models import BitString, SafeFunctionSpec, SecretKey, SymbolString
from models.errors import DecodeFailure, InvalidParameter

SUFFIX_SAMPLES = 5


def kdf(s: bytes, lam: int, registry: OracleRegistry, meter: Optional[CostMeter] = None) -> SecretKey:
    """Key from H(s || "kdf"), stretched to both seeds."""
    root = registry.query(s + b"kdf", meter)
    return SecretKey(
        lam,
        hashlib.sha256(root + b"perm").digest(),
        hashlib.sha256(root + b"pad").digest(),
    )


class ResourceBoundedCode:
    codec_id = "rb-insdel-v1"
    randomized = True
    keyed = False

    def __init__(self, k: int, lam: int, T: int, registry: OracleRegistry, m: Optional[int] = None,
                 inner_rate: Fraction = Fraction(1, 4), p: float = DEFAULT_P, p_fin: float = DEFAULT_P_FIN,
                 eps: float = DEFAULT_EPS, **compiler_options):
        if T < 0:
            raise InvalidParameter("round hardness T must be non-negative")
        self.lam = lam
        self.registry = registry
        self.safe = SafeFunctionSpec(T=T, out_bits=lam)
        self.hamming = PrivateLDC(k, lam, m=m, inner_rate=inner_rate, p=p, eps=eps)
        hp = self.hamming.params
        if lam > hp.m:
            raise InvalidParameter(f"seed of {lam} bits does not fit a {hp.m}-bit block")
        self.r_code = block_code(hp.ell, hp.m)
        copies = max(SUFFIX_SAMPLES, math.ceil(2 * hp.K / hp.ell))
        self.copies = copies if copies % 2 else copies + 1
        self.hamming_length = hp.K + self.copies * hp.ell
        self.compiler = make_compiler_params(self.hamming_length, 2, **compiler_options)
        self.k = k
        self.n = self.compiler.n
        self.hamming_locality = (1 + SUFFIX_SAMPLES) * hp.ell
        self.locality = self.hamming_locality * self.compiler.recover_query_cap
        self.p, self.p_fin, self.eps = p, p_fin, eps
        logging.debug("%s: k=%d T=%d copies=%d n=%d", self.codec_id, k, T, self.copies, self.n)

    def sample_seed(self, rng: np.random.Generator) -> bytes:
        raw = bytearray(rng.bytes(math.ceil(self.lam / 8)))
        spare = 8 * len(raw) - self.lam
        if spare:
            raw[-1] &= (0xFF << spare) & 0xFF
        return bytes(raw)

    def key_from_seed(self, r: bytes, meter: Optional[CostMeter] = None) -> SecretKey:
        s = safe_function_eval(r, self.safe, self.registry, meter)
        return kdf(s, self.lam, self.registry, meter)

    def _seed_block(self, r: bytes) -> np.ndarray:
        bits = np.zeros(self.hamming.params.m, dtype=np.uint8)
        bits[:self.lam] = np.unpackbits(np.frombuffer(r, dtype=np.uint8))[:self.lam]
        return bits

    def hamming_encode(self, x: BitString, rng: np.random.Generator) -> Tuple[SymbolString, bytes]:
        """(private encoding under KDF(f(r)) followed by the copies of BCH(r), r)."""
        r = self.sample_seed(rng)
        sk = self.key_from_seed(r)
        body = self.hamming.encode(x, sk)
        suffix = np.tile(self.r_code.encode(self._seed_block(r)), self.copies)
        return SymbolString(np.concatenate([body.bits, suffix]), 2), r

    def encode(self, x: BitString, rng: np.random.Generator) -> BitString:
        word, _ = self.hamming_encode(x, rng)
        return compile(word, self.compiler)

    def read_seed(self, oracle: QueryOracle, rng: np.random.Generator) -> bytes:
        """Majority over SUFFIX_SAMPLES random copies of the seed block."""
        ell, K = self.hamming.params.ell, self.hamming.params.K
        picks = rng.choice(self.copies, size=min(SUFFIX_SAMPLES, self.copies), replace=False)
        votes: Counter = Counter()
        for copy in sorted(picks.tolist()):
            start = K + copy * ell
            try:
                block = self.r_code.decode(oracle.read_range(start, ell).astype(np.uint8))
            except DecodeFailure:
                continue
            votes[np.packbits(block[:self.lam]).tobytes()] += 1
        if not votes:
            raise DecodeFailure("no copy of the seed block decoded")
        return votes.most_common(1)[0][0]

    def hamming_decode(self, oracle: QueryOracle, i: int, rng: np.random.Generator,
                       meter: Optional[CostMeter] = None) -> int:
        sk = self.key_from_seed(self.read_seed(oracle, rng), meter)
        return self.hamming.local_decode(oracle, i, sk)

    def hamming_view(self, oracle: QueryOracle, rng: np.random.Generator) -> CallbackOracle:
        return CallbackOracle(self.hamming_length, lambda u: recover(oracle, u, self.compiler, rng))

    def local_decode(self, oracle: QueryOracle, i: int, sk: Optional[SecretKey] = None,
                     rng: Optional[np.random.Generator] = None, meter: Optional[CostMeter] = None) -> int:
        """Keyless; `sk` is accepted and ignored so games can drive every code alike."""
        rng = rng if rng is not None else np.random.default_rng()
        return self.hamming_decode(self.hamming_view(oracle, rng), i, rng, meter)

    def decode_block(self, oracle: QueryOracle, j: int, sk: Optional[SecretKey] = None,
                     rng: Optional[np.random.Generator] = None) -> np.ndarray:
        rng = rng if rng is not None else np.random.default_rng()
        view = self.hamming_view(oracle, rng)
        return self.hamming.decode_block(view, j, self.key_from_seed(self.read_seed(view, rng)))

    def decode_word(self, oracle: QueryOracle, sk: Optional[SecretKey] = None, seed: int = 0) -> np.ndarray:
        word = QueryOracle(recover_all(oracle, self.compiler, seed=seed))
        rng = np.random.default_rng((seed, self.hamming_length))
        key = self.key_from_seed(self.read_seed(word, rng))
        return self.hamming.decode_word(word, key)


def rb_hamming_encode(code: ResourceBoundedCode, x: BitString, rng: np.random.Generator) -> SymbolString:
    return code.hamming_encode(x, rng)[0]


def rb_hamming_decode(code: ResourceBoundedCode, oracle: QueryOracle, i: int, rng: np.random.Generator,
                      meter: Optional[CostMeter] = None) -> int:
    return code.hamming_decode(oracle, i, rng, meter)


def rb_insdel_encode(code: ResourceBoundedCode, x: BitString, rng: np.random.Generator) -> BitString:
    return code.encode(x, rng)


def rb_insdel_decode(code: ResourceBoundedCode, oracle: QueryOracle, i: int, rng: np.random.Generator,
                     meter: Optional[CostMeter] = None) -> int:
    return code.local_decode(oracle, i, rng=rng, meter=meter)
