from fractions import Fraction

import numpy as np
import pytest

from channels.adversaries import ChannelContext, KeyAwareBlockAdversary
from channels.channels import random_insdel
from channels.metering import CostMeter, OracleRegistry
from codes.oracle import CountingView, QueryOracle
from composed.private_insdel import PrivateInsdelCode, dec_fin, encode_fin, eps_fin_of, gen_fin
from composed.resource_bounded import (ResourceBoundedCode, kdf, rb_hamming_decode, rb_hamming_encode,
                                       rb_insdel_decode, rb_insdel_encode)
from compiler.insdel_compiler import decompile
from config import DEFAULT_RHO_FIN
from models.data_models import BitString, CompilerGuarantee
from game.estimation import estimate_fool
from models.errors import InvalidParameter
from models.reports import NO


@pytest.fixture(scope="module")
def insdel_code():
    return PrivateInsdelCode(128, 16, m=16)


@pytest.fixture(scope="module")
def rb_code():
    return ResourceBoundedCode(32, 16, 2, OracleRegistry(16, salt=b"tests"), m=16)


def test_eps_fin_matches_independent_arithmetic():
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 100:
        p = float(rng.uniform(0.6, 1.0))
        p_fin = float(rng.uniform(0.1, p))
        theta1 = float(rng.uniform(0, 0.05))
        theta2 = float(rng.uniform(0, 0.05))
        eps = float(rng.uniform(1e-4, 1e-2))
        F = Fraction
        denominator = 1 - F(p_fin) / F(p) - F(theta1) / F(p) - F(theta2)
        if denominator < Fraction(1, 10):
            continue
        expected = float(F(eps) / denominator)
        assert eps_fin_of(eps, p, p_fin, theta1, theta2) == pytest.approx(expected, rel=1e-12)
        checked += 1


@pytest.mark.parametrize("p, p_fin, theta1, theta2", [
    (0.9, 0.95, 0, 0),
    (0.9, 0.0, 0, 0),
    (1.2, 0.9, 0, 0),
    (0.99, 0.9, 0.05, 0.05),
])
def test_eps_fin_rejects_impossible_rates(p, p_fin, theta1, theta2):
    with pytest.raises(InvalidParameter):
        eps_fin_of(0.001, p, p_fin, theta1, theta2)


def test_composed_parameters(insdel_code):
    params = insdel_code.params
    assert params.ell_fin == insdel_code.hamming.locality * insdel_code.compiler.recover_query_cap
    assert params.n == insdel_code.n == insdel_code.compiler.n
    assert params.rho_fin == DEFAULT_RHO_FIN
    guarantee = CompilerGuarantee(theta1_hat=0.01, theta2_hat=0.02, theta2_ci=(0.0, 0.05), rho_fin=0.003,
                                  trials=200, seed=0)
    calibrated = PrivateInsdelCode(128, 16, m=16, guarantee=guarantee).params
    assert calibrated.rho_fin == 0.003
    assert calibrated.eps_fin == pytest.approx(eps_fin_of(0.001, 0.99, 0.9, 0.01, 0.02))


def test_composed_round_trip(insdel_code, rng):
    x = BitString.random(insdel_code.k, rng)
    sk = insdel_code.gen(rng)
    word = encode_fin(insdel_code, x, sk)
    assert word.length == insdel_code.n
    assert decompile(word, insdel_code.compiler) == insdel_code.hamming.encode(x, sk)
    assert insdel_code.decode_word(QueryOracle(word), sk, seed=1).tolist() == x.bits.tolist()


def test_dec_fin_locality(insdel_code, rng):
    x = BitString.random(insdel_code.k, rng)
    sk = gen_fin(16, rng)
    oracle = QueryOracle(insdel_code.encode(x, sk))
    for i in (0, 63, 127):
        view = CountingView(oracle)
        assert dec_fin(insdel_code, view, i, sk, rng) == x[i]
        assert view.query_count <= insdel_code.locality


def test_decode_block(insdel_code, rng):
    x = BitString.random(insdel_code.k, rng)
    sk = insdel_code.gen(rng)
    oracle = QueryOracle(insdel_code.encode(x, sk))
    assert insdel_code.decode_block(oracle, 3, sk, rng).tolist() == x.bits[48:64].tolist()


def test_derived_keys_decode_their_own_messages(insdel_code, rng):
    x = BitString.random(insdel_code.k, rng)
    sk = insdel_code.gen(rng)
    sub = insdel_code.derive(sk, 5)
    word = insdel_code.encode(x, sub)
    assert word != insdel_code.encode(x, sk)
    assert insdel_code.decode_word(QueryOracle(word), sub).tolist() == x.bits.tolist()


def test_key_aware_attack_survives_compilation(insdel_code, rng):
    x = BitString.random(insdel_code.k, rng)
    sk = insdel_code.gen(rng)
    word = insdel_code.encode(x, sk)
    ctx = ChannelContext(code=insdel_code, x=x, rate=0.01, rng=rng, sk=sk)
    attacked = KeyAwareBlockAdversary(hamming_rate=0.05, flips=insdel_code.hamming.params.correctable + 1)(ctx, word)
    decoded = insdel_code.decode_word(QueryOracle(attacked), sk)
    m = insdel_code.hamming.params.m
    assert decoded[:m].tolist() != x.bits[:m].tolist()
    assert decoded[m:].tolist() == x.bits[m:].tolist()


def test_rb_layout(rb_code):
    hp = rb_code.hamming.params
    assert rb_code.copies % 2 == 1 and rb_code.copies >= 5
    assert rb_code.hamming_length == hp.K + rb_code.copies * hp.ell
    assert rb_code.compiler.K == rb_code.hamming_length
    assert rb_code.hamming_locality == 6 * hp.ell
    assert rb_code.locality == rb_code.hamming_locality * rb_code.compiler.recover_query_cap


def test_rb_parameters_are_checked():
    registry = OracleRegistry(32)
    with pytest.raises(InvalidParameter):
        ResourceBoundedCode(32, 32, 2, registry, m=16)
    with pytest.raises(InvalidParameter):
        ResourceBoundedCode(32, 16, -1, OracleRegistry(16), m=16)


def test_rb_hamming_layer_carries_the_seed(rb_code, rng):
    x = BitString.random(rb_code.k, rng)
    word, r = rb_code.hamming_encode(x, np.random.default_rng(9))
    assert word.length == rb_code.hamming_length
    assert rb_code.read_seed(QueryOracle(word.to_bits()), rng) == r
    assert rb_hamming_encode(rb_code, x, np.random.default_rng(9)) == word
    for i in (0, 31):
        assert rb_hamming_decode(rb_code, QueryOracle(word.to_bits()), i, rng) == x[i]


def test_rb_seed_survives_a_damaged_copy(rb_code, rng):
    x = BitString.random(rb_code.k, rng)
    word, r = rb_code.hamming_encode(x, rng)
    bits = word.to_bits().bits.copy()
    K, ell = rb_code.hamming.params.K, rb_code.hamming.params.ell
    bits[K:K + ell] ^= 1
    assert rb_code.read_seed(QueryOracle(BitString(bits)), rng) == r


def test_rb_key_derivation(rb_code):
    r = b"\x12\x34"
    meter = CostMeter()
    sk = rb_code.key_from_seed(r, meter)
    assert sk == rb_code.key_from_seed(r)
    assert meter.rounds == rb_code.safe.T + 2
    other = ResourceBoundedCode(32, 16, 2, OracleRegistry(16, salt=b"other"), m=16)
    assert other.key_from_seed(r) != sk
    assert kdf(b"\x00\x01", 16, rb_code.registry) != kdf(b"\x00\x02", 16, rb_code.registry)


def test_rb_round_trip_is_keyless(rb_code, rng):
    x = BitString.random(rb_code.k, rng)
    word = rb_insdel_encode(rb_code, x, rng)
    assert word.length == rb_code.n
    oracle = QueryOracle(word)
    assert rb_code.decode_word(oracle, seed=2).tolist() == x.bits.tolist()
    assert rb_code.decode_block(oracle, 1, rng=rng).tolist() == x.bits[16:32].tolist()
    meter = CostMeter()
    assert rb_insdel_decode(rb_code, oracle, 5, rng, meter) == x[5]
    assert meter.rounds == rb_code.safe.T + 2


@pytest.mark.slow
def test_full_size_code_holds_at_the_default_channel_rate():
    code = PrivateInsdelCode(1024, 64)
    rng = np.random.default_rng(17)
    x = BitString.random(code.k, rng)
    sk = code.gen(rng)
    y = code.encode(x, sk)
    assert code.decode_word(QueryOracle(y), sk, seed=0).tolist() == x.bits.tolist()
    y_corrupted = random_insdel(y, DEFAULT_RHO_FIN, rng)
    verdict = estimate_fool(code, sk, x, y, y_corrupted, DEFAULT_RHO_FIN, 0.9, trials=150, seed=17, workers=4)
    assert verdict.distance_ok
    assert verdict.fooled == NO
    assert verdict.worst_success_lower >= 0.9
