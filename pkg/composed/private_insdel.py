"""
Private insertion/deletion LDC: the private Hamming code run through the compiler.
"""
import logging
from fractions import Fraction
from typing import Optional

import numpy as np

from codes.oracle import CallbackOracle, QueryOracle
from codes.private_ldc import PrivateLDC, gen
from compiler.insdel_compiler import compile, make_compiler_params, recover, recover_all
from config import DEFAULT_EPS, DEFAULT_P, DEFAULT_P_FIN, DEFAULT_RHO_FIN
from models.data_models import BitString, CompilerGuarantee, ComposedParams, SecretKey
from models.errors import InvalidParameter


def eps_fin_of(eps: float, p: float, p_fin: float, theta1: float = 0.0, theta2: float = 0.0) -> float:
    """eps / (1 - p_fin/p - theta1/p - theta2)."""
    if not 0 < p_fin < p <= 1:
        raise InvalidParameter(f"need 0 < p_fin < p <= 1, got p_fin={p_fin}, p={p}")
    denominator = 1 - (p_fin / p) - (theta1 / p) - theta2
    if denominator <= 0:
        raise InvalidParameter(f"failure rates leave no room: denominator {denominator}")
    return eps / denominator


def gen_fin(lam: int, rng: Optional[np.random.Generator] = None) -> SecretKey:
    return gen(lam, rng)


class PrivateInsdelCode:
    codec_id = "priv-insdel-v1"
    randomized = True
    keyed = True

    def __init__(self, k: int, lam: int, m: Optional[int] = None, inner_rate: Fraction = Fraction(1, 4),
                 p: float = DEFAULT_P, p_fin: float = DEFAULT_P_FIN, eps: float = DEFAULT_EPS,
                 guarantee: Optional[CompilerGuarantee] = None, **compiler_options):
        self.lam = lam
        self.hamming = PrivateLDC(k, lam, m=m, inner_rate=inner_rate, p=p, eps=eps)
        self.compiler = make_compiler_params(self.hamming.K, 2, **compiler_options)
        self.k = k
        self.n = self.compiler.n
        self.locality = self.hamming.locality * self.compiler.recover_query_cap
        self.p, self.p_fin, self.eps = p, p_fin, eps
        self.guarantee = guarantee
        logging.debug("%s: k=%d K=%d n=%d ell_fin=%d", self.codec_id, k, self.hamming.K, self.n, self.locality)

    @property
    def params(self) -> ComposedParams:
        g = self.guarantee
        theta1, theta2 = (g.theta1_hat, g.theta2_hat) if g else (0.0, 0.0)
        return ComposedParams(
            ell_fin=self.locality,
            rho_fin=g.rho_fin if g else DEFAULT_RHO_FIN,
            p_fin=self.p_fin,
            eps_fin=eps_fin_of(self.eps, self.p, self.p_fin, theta1, theta2),
            n=self.n,
        )

    def gen(self, rng: Optional[np.random.Generator] = None) -> SecretKey:
        return gen_fin(self.lam, rng)

    def derive(self, sk: SecretKey, nonce: int) -> SecretKey:
        return self.hamming.derive(sk, nonce)

    def encode(self, x: BitString, sk: SecretKey) -> BitString:
        return compile(self.hamming.encode(x, sk), self.compiler)

    def hamming_view(self, oracle: QueryOracle, rng: np.random.Generator) -> CallbackOracle:
        """The Hamming codeword behind `oracle`, each read answered by recover."""
        return CallbackOracle(self.hamming.K, lambda u: recover(oracle, u, self.compiler, rng))

    def local_decode(self, oracle: QueryOracle, i: int, sk: SecretKey,
                     rng: Optional[np.random.Generator] = None) -> int:
        rng = rng if rng is not None else np.random.default_rng()
        return self.hamming.local_decode(self.hamming_view(oracle, rng), i, sk)

    dec_fin = local_decode

    def decode_block(self, oracle: QueryOracle, j: int, sk: SecretKey,
                     rng: Optional[np.random.Generator] = None) -> np.ndarray:
        """One Hamming block through recover; reads at most ell_fin symbols of `oracle`."""
        rng = rng if rng is not None else np.random.default_rng()
        return self.hamming.decode_block(self.hamming_view(oracle, rng), j, sk)

    def decode_word(self, oracle: QueryOracle, sk: SecretKey, seed: int = 0) -> np.ndarray:
        """All k bits from one recover pass and one decoder run per block."""
        word = recover_all(oracle, self.compiler, seed=seed)
        return self.hamming.decode_word(QueryOracle(word), sk)


def encode_fin(code: PrivateInsdelCode, x: BitString, sk: SecretKey) -> BitString:
    return code.encode(x, sk)


def dec_fin(code: PrivateInsdelCode, oracle: QueryOracle, i: int, sk: SecretKey,
            rng: Optional[np.random.Generator] = None) -> int:
    return code.local_decode(oracle, i, sk, rng)
