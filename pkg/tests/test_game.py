import numpy as np
import pytest

from channels.adversaries import (ChannelContext, KeyAwareBlockAdversary, SafeFunctionAdversary,
                                  TranscriptCorrelatingAdversary, get_adversary)
from channels.metering import CostMeter, OracleRegistry
from codes.oracle import QueryOracle
from codes.private_ldc import PrivateSession, gen
from composed.private_insdel import PrivateInsdelCode
from composed.resource_bounded import ResourceBoundedCode
from game.codes import PlantedCode, adapt
from game.estimation import clopper_pearson, estimate_fool
from game.games import c_secure_game, one_time_game, play_round, priv_ldc_game, rb_residual, win_rate
from models.data_models import BitString, CostBudget
from models.errors import InvalidParameter
from models.reports import INCONCLUSIVE, NO, YES, FoolVerdict


@pytest.fixture(scope="module")
def rb_code():
    return ResourceBoundedCode(32, 16, 2, OracleRegistry(16, salt=b"games"), m=16)


def safe_adversary(code):
    return SafeFunctionAdversary(hamming_rate=0.05, flips=code.hamming.params.correctable + 1)


def planted_verdict(success, k=4, trials=200, seed=3):
    code = PlantedCode(k, success)
    x = BitString.random(k, np.random.default_rng(seed))
    return estimate_fool(code, None, x, x, x, rho=0.1, p=0.9, trials=trials, seed=seed)


def test_clopper_pearson_edges():
    low, high = clopper_pearson(0, 100, 0.95)
    assert low == 0.0 and 0 < high < 0.05
    low, high = clopper_pearson(100, 100, 0.95)
    assert high == 1.0 and 0.95 < low < 1
    with pytest.raises(InvalidParameter):
        clopper_pearson(0, 0, 0.95)


def test_planted_decoder_always_right_is_not_fooled():
    verdict = planted_verdict(1.0)
    assert verdict.fooled == NO
    assert verdict.worst_success_lower > 0.9
    assert verdict.trials == 200


def test_planted_coin_flip_decoder_is_fooled():
    verdict = planted_verdict(0.5)
    assert verdict.fooled == YES
    assert verdict.worst_success_upper < 0.9


def test_planted_decoder_at_threshold_is_never_cleared():
    assert planted_verdict(0.9).fooled in (YES, INCONCLUSIVE)


def test_planted_intervals_cover_the_truth():
    misses = 0
    for seed in range(20):
        verdict = planted_verdict(0.7, k=1, seed=seed)
        if not verdict.worst_success_lower <= 0.7 <= verdict.worst_success_upper:
            misses += 1
    assert misses <= 4


def test_randomized_codes_need_enough_trials():
    with pytest.raises(InvalidParameter):
        planted_verdict(1.0, trials=99)
    with pytest.raises(InvalidParameter):
        PlantedCode(4, 1.5)


def test_far_corruption_is_not_fooling(small_ldc, small_key, message):
    y = small_ldc.encode(message, small_key)
    far = BitString(y.bits ^ 1)
    verdict = estimate_fool(small_ldc, small_key, message, y, far, rho=0.1, p=0.9)
    assert verdict.fooled == NO
    assert not verdict.distance_ok
    assert verdict.trials == 0


def test_length_change_is_far_under_hamming(small_ldc, small_key, message):
    y = small_ldc.encode(message, small_key)
    assert adapt(small_ldc).distance(y, BitString(y.bits[1:])) == 1.0


def test_deterministic_code_uses_one_run(small_ldc, small_key, message):
    y = small_ldc.encode(message, small_key)
    verdict = estimate_fool(small_ldc, small_key, message, y, y, rho=0.1, p=0.9, trials=1)
    assert verdict.fooled == NO
    assert verdict.trials == 1
    assert verdict.worst_success_lower == verdict.worst_success_upper == 1.0


def test_key_aware_adversary_wins_one_time_game(small_ldc, message):
    rho = small_ldc.params.rho
    verdict = one_time_game(small_ldc, KeyAwareBlockAdversary(flips=small_ldc.params.correctable + 1), message, rho,
                            0.9, seed=5)
    assert verdict.distance_ok
    assert verdict.fooled == YES
    assert verdict.worst_index < small_ldc.params.m


def test_keyless_flips_lose_one_time_game(small_ldc, message):
    rho = small_ldc.params.rho
    verdict = one_time_game(small_ldc, get_adversary("random_flip"), message, rho, 0.9, seed=5)
    assert verdict.distance == pytest.approx(rho)
    assert verdict.fooled == NO


def test_reused_key_loses_to_transcript(small_ldc):
    report = priv_ldc_game(small_ldc, TranscriptCorrelatingAdversary(), 3, small_ldc.params.rho, 0.9,
                           seed=11, multi_time=False)
    assert [r.verdict.fooled for r in report.rounds[:2]] == [NO, NO]
    assert report.rounds[2].verdict.fooled == YES
    assert report.win
    assert report.rounds[1].x == "1" + "0" * (small_ldc.k - 1)


def test_fresh_subkeys_hold_against_transcript(small_ldc):
    report = priv_ldc_game(small_ldc, TranscriptCorrelatingAdversary(), 3, small_ldc.params.rho, 0.9,
                           seed=11, multi_time=True)
    assert not report.win
    assert report.win == any(r.verdict.fooled == YES for r in report.rounds)
    assert report.meters["rounds"] == 3


def test_game_replays_from_its_seed(small_ldc):
    args = (small_ldc, get_adversary("random_flip"), 2, small_ldc.params.rho, 0.9)
    first = priv_ldc_game(*args, seed=4)
    second = priv_ldc_game(*args, seed=4)
    assert first.to_dict() == second.to_dict()
    assert priv_ldc_game(*args, seed=5).rounds[0].y != first.rounds[0].y


@pytest.mark.parametrize("multi_time", [True, False])
def test_rounds_encode_through_a_session(small_ldc, multi_time):
    report = priv_ldc_game(small_ldc, get_adversary("identity"), 3, small_ldc.params.rho, 0.9, seed=4,
                           multi_time=multi_time)
    session = PrivateSession(small_ldc, gen(small_ldc.params.lam, np.random.default_rng((4, 0))),
                             reuse_key=not multi_time)
    for record in report.rounds:
        nonce, y = session.encode(BitString.from_str(record.x))
        assert nonce == record.round
        assert str(y) == record.y


def test_sixteen_round_game_replays(small_ldc):
    args = (small_ldc, get_adversary("random_flip"), 16, small_ldc.params.rho, 0.9)
    first = priv_ldc_game(*args, seed=21)
    assert len(first.rounds) == 16
    assert [r.seed for r in first.rounds] == [[21, i + 1] for i in range(16)]
    assert priv_ldc_game(*args, seed=21).to_dict() == first.to_dict()


def test_game_is_won_exactly_when_some_round_fools():
    code = PlantedCode(4, 0.85)
    outcomes = set()
    for seed in range(100):
        report = priv_ldc_game(code, get_adversary("identity"), 3, 0.1, 0.9, seed=seed)
        fooled = [r.verdict.fooled for r in report.rounds]
        assert report.win == (YES in fooled)
        outcomes.add(report.win)
    assert outcomes == {True, False}


@pytest.mark.parametrize("h", [0, 65])
def test_round_count_is_bounded(small_ldc, h):
    with pytest.raises(InvalidParameter):
        priv_ldc_game(small_ldc, get_adversary("identity"), h, 0.01, 0.9)


def test_safe_function_attack_breaks_unbounded_decoding(rb_code, rng):
    x = BitString.random(rb_code.k, rng)
    y = rb_code.encode(x, rng)
    meter = CostMeter()
    adversary = safe_adversary(rb_code)
    ctx = ChannelContext(code=rb_code, x=x, rate=0.05, rng=rng, meter=meter, registry=rb_code.registry)
    attacked = adversary(ctx, y)
    assert meter.rounds == rb_code.safe.T + 3
    rb_code.registry.check_depth_soundness(adversary.held_digests, meter)
    decoded = rb_code.decode_word(QueryOracle(attacked))
    assert decoded[:16].tolist() != x.bits[:16].tolist()
    assert decoded[16:].tolist() == x.bits[16:].tolist()


def test_round_budget_stops_safe_function_attack(rb_code, rng):
    x = BitString.random(rb_code.k, rng)
    budget = CostBudget(max_parallel_rounds=rb_code.safe.T)
    verdict = c_secure_game(rb_code, safe_adversary(rb_code), budget, x, 0.1, 0.9, seed=2)
    assert verdict.fooled == NO
    assert verdict.aborted == "budget_exceeded:rounds"


@pytest.mark.slow
def test_unbounded_safe_function_attack_wins(rb_code, rng):
    x = BitString.random(rb_code.k, rng)
    record = play_round(rb_code, safe_adversary(rb_code), x, 0.1, 0.9, seed=2)
    assert record.verdict.aborted is None
    assert record.verdict.fooled == YES


@pytest.mark.slow
def test_key_aware_adversary_wins_against_composed_code():
    code = PrivateInsdelCode(128, 16, m=16)
    x = BitString.random(code.k, np.random.default_rng(8))
    verdict = one_time_game(code, KeyAwareBlockAdversary(hamming_rate=0.05, flips=code.hamming.params.correctable + 1),
                            x, 0.1, 0.9, seed=8)
    assert verdict.fooled == YES


def test_win_rate():
    verdicts = [FoolVerdict(0.0, True, 0, 0.0, 0.1, YES)] * 3 + [FoolVerdict(0.0, True, 0, 0.95, 1.0, NO)]
    rate, low, high = win_rate(verdicts)
    assert rate == 0.75
    assert low < 0.75 < high
    with pytest.raises(InvalidParameter):
        win_rate([])


def test_rb_residual(rb_code):
    assert rb_residual(rb_code, 4) == pytest.approx(4 * rb_code.safe.T * 2.0 ** -16)


@pytest.mark.slow
def test_key_awareness_separates_attack_from_keyless_channels(small_ldc):
    rho = small_ldc.params.rho
    attack = KeyAwareBlockAdversary(flips=small_ldc.params.correctable + 1)

    def games(adversary, count):
        return [one_time_game(small_ldc, adversary, BitString.random(small_ldc.k, np.random.default_rng(seed)),
                              rho, 0.9, seed=seed) for seed in range(count)]

    assert win_rate(games(attack, 200))[0] >= 0.95
    for name in ("random_flip", "bursty"):
        assert win_rate(games(get_adversary(name), 1000))[0] <= 0.01
