"""
Uniform view of every code the games can drive: key generation, encoding,
whole-word decoding and the distance the Fool predicate uses.
"""
from typing import Optional

import numpy as np

from codes.oracle import QueryOracle
from codes.private_ldc import PrivateLDC, gen
from composed.private_insdel import PrivateInsdelCode
from composed.resource_bounded import ResourceBoundedCode
from metrics.distances import edit_fractional, hamming_fractional
from models.data_models import BitString, SecretKey
from models.errors import InvalidParameter


class GameCode:
    metric = "hamming"
    keyed = True

    def __init__(self, code):
        self.code = code
        self.k = code.k
        self.randomized = code.randomized
        self.codec_id = getattr(code, "codec_id", type(code).__name__)

    def gen(self, rng: np.random.Generator) -> Optional[SecretKey]:
        raise NotImplementedError

    def derive(self, sk: Optional[SecretKey], nonce: int) -> Optional[SecretKey]:
        return self.code.derive(sk, nonce) if sk is not None else None

    def encode(self, x: BitString, sk: Optional[SecretKey], rng: np.random.Generator) -> BitString:
        return self.code.encode(x, sk)

    def decode_word(self, word: BitString, sk: Optional[SecretKey], seed: int) -> np.ndarray:
        return self.code.decode_word(QueryOracle(word), sk, seed)

    def distance(self, y: BitString, y_corrupted: BitString) -> float:
        if self.metric == "edit":
            return float(edit_fractional(y, y_corrupted))
        if y.length != y_corrupted.length:
            return 1.0
        return float(hamming_fractional(y, y_corrupted))


class HammingGameCode(GameCode):
    def gen(self, rng):
        return gen(self.code.params.lam, rng)

    def decode_word(self, word, sk, seed):
        return self.code.decode_word(QueryOracle(word), sk)


class InsdelGameCode(GameCode):
    metric = "edit"

    def gen(self, rng):
        return self.code.gen(rng)


class ResourceBoundedGameCode(GameCode):
    metric = "edit"
    keyed = False

    def gen(self, rng):
        return None

    def derive(self, sk, nonce):
        return None

    def encode(self, x, sk, rng):
        return self.code.encode(x, rng)


class PlantedCode:
    """
    Identity encoding whose decoder returns each bit correctly with probability
    exactly `success`. Used to check estimator coverage against a known truth.
    """
    randomized = True
    codec_id = "planted"

    def __init__(self, k: int, success: float):
        if not 0 <= success <= 1:
            raise InvalidParameter("planted success probability must lie in [0, 1]")
        self.k = k
        self.success = success

    def derive(self, sk, nonce):
        return sk

    def encode(self, x: BitString, sk=None) -> BitString:
        return x

    def decode_word(self, oracle: QueryOracle, sk=None, seed: int = 0) -> np.ndarray:
        bits = oracle.read_range(0, self.k).astype(np.int64)
        wrong = np.random.default_rng(seed).random(self.k) >= self.success
        return np.where(wrong, 1 - bits, bits)


class PlantedGameCode(GameCode):
    keyed = False

    def gen(self, rng):
        return None


def adapt(code) -> GameCode:
    if isinstance(code, GameCode):
        return code
    if isinstance(code, PrivateLDC):
        return HammingGameCode(code)
    if isinstance(code, PrivateInsdelCode):
        return InsdelGameCode(code)
    if isinstance(code, ResourceBoundedCode):
        return ResourceBoundedGameCode(code)
    if isinstance(code, PlantedCode):
        return PlantedGameCode(code)
    raise InvalidParameter(f"no game adapter for {type(code).__name__}")
