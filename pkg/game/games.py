"""
Security experiments: the one-time game, the multi-round adaptive game with a
shared key, and the game against resource-bounded adversaries.
"""
import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np

from channels.adversaries import Adversary, ChannelContext
from channels.metering import CostMeter, safe_function_delta
from codes.private_ldc import PrivateSession
from config import MAX_GAME_ROUNDS
from game.codes import adapt
from game.estimation import clopper_pearson, estimate_fool
from models.data_models import BitString, CostBudget
from models.errors import BudgetExceeded, InvalidParameter
from models.reports import NO, YES, FoolVerdict, GameReport, RoundRecord


def _round_rng(seed: int, round_no: int) -> np.random.Generator:
    return np.random.default_rng((seed, round_no))


def play_round(code, adversary: Adversary, x: BitString, rho: float, p: float, trials: int = 100,
               confidence: float = 0.95, seed: int = 0, rate: Optional[float] = None,
               budget: Optional[CostBudget] = None, workers: int = 1) -> RoundRecord:
    """
    Fresh key, one encoding, one corruption, one Fool estimate. With a budget
    the adversary is keyless and metered: running out of budget ends the round
    as non-fooling, and digests it reports holding are checked against the
    rounds it paid for.
    """
    gc = adapt(code)
    rng = _round_rng(seed, 0)
    sk = gc.gen(rng)
    y = gc.encode(x, sk, rng)
    meter = CostMeter(budget)
    registry = getattr(gc.code, "registry", None)
    ctx = ChannelContext(code=gc.code, x=x, rate=rho if rate is None else rate, rng=rng, meter=meter,
                         sk=sk if budget is None else None, registry=registry)
    try:
        y_corrupted = adversary(ctx, y)
    except BudgetExceeded as e:
        logging.info("adversary %s stopped: %s", adversary.name, e)
        verdict = FoolVerdict(0.0, True, -1, 1.0, 1.0, NO, 0, aborted=f"budget_exceeded:{e.counter}")
        return RoundRecord(0, str(x), str(y), str(y), verdict, [seed, 0])
    if registry is not None and getattr(adversary, "held_digests", None):
        registry.check_depth_soundness(adversary.held_digests, meter)
    verdict = estimate_fool(gc, sk, x, y, y_corrupted, rho, p, trials, confidence, seed, workers)
    return RoundRecord(0, str(x), str(y), str(y_corrupted), verdict, [seed, 0])


def one_time_game(code, adversary: Adversary, x: BitString, rho: float, p: float, trials: int = 100,
                  confidence: float = 0.95, seed: int = 0, rate: Optional[float] = None,
                  workers: int = 1) -> FoolVerdict:
    return play_round(code, adversary, x, rho, p, trials, confidence, seed, rate, None, workers).verdict


def priv_ldc_game(code, adversary: Adversary, h: int, rho: float, p: float, trials: int = 100,
                  confidence: float = 0.95, seed: int = 0, rate: Optional[float] = None,
                  multi_time: bool = True, workers: int = 1) -> GameReport:
    """
    h adaptive rounds under one key. Round i encodes with the subkey for nonce
    i when `multi_time`, otherwise with the key itself. The adversary wins if
    any round's verdict is yes; every round is recorded regardless.
    """
    if not 1 <= h <= MAX_GAME_ROUNDS:
        raise InvalidParameter(f"rounds must lie in [1, {MAX_GAME_ROUNDS}], got {h}")
    gc = adapt(code)
    session = PrivateSession(gc, gc.gen(_round_rng(seed, 0)), reuse_key=not multi_time)
    meter = CostMeter()
    transcript: List[Tuple[BitString, BitString]] = []
    records: List[RoundRecord] = []
    for i in range(h):
        rng = _round_rng(seed, i + 1)
        x = adversary.choose_message(gc.k, list(transcript), rng)
        nonce, y = session.encode(x, rng)
        key = session.key_for(nonce)
        ctx = ChannelContext(code=gc.code, x=x, rate=rho if rate is None else rate, rng=rng, meter=meter,
                             sk=key, transcript=list(transcript))
        y_corrupted = adversary(ctx, y)
        verdict = estimate_fool(gc, key, x, y, y_corrupted, rho, p, trials, confidence,
                                seed=seed * 1_000_003 + i, workers=workers)
        records.append(RoundRecord(i, str(x), str(y), str(y_corrupted), verdict, [seed, i + 1]))
        transcript.append((x, y))
        logging.info("round %d/%d: distance=%.5f verdict=%s", i + 1, h, verdict.distance, verdict.fooled)
    return GameReport(
        game="priv_ldc",
        codec=gc.codec_id,
        rounds=records,
        win=any(r.verdict.fooled == YES for r in records),
        seed=seed,
        multi_time=multi_time,
        meters=meter.snapshot().to_dict(),
    )


def c_secure_game(code, adversary: Adversary, budget: CostBudget, x: BitString, rho: float, p: float,
                  trials: int = 100, confidence: float = 0.95, seed: int = 0, rate: Optional[float] = None,
                  workers: int = 1) -> FoolVerdict:
    """Keyless adversary under `budget`; BudgetExceeded counts as a non-fooling round."""
    return play_round(code, adversary, x, rho, p, trials, confidence, seed, rate, budget, workers).verdict


def win_rate(verdicts: Iterable[FoolVerdict], confidence: float = 0.95) -> Tuple[float, float, float]:
    """Fraction of yes verdicts with its exact binomial interval."""
    verdicts = list(verdicts)
    if not verdicts:
        raise InvalidParameter("no games to summarize")
    wins = sum(v.fooled == YES for v in verdicts)
    low, high = clopper_pearson(wins, len(verdicts), confidence)
    return wins / len(verdicts), low, high


def rb_residual(code, queries: int) -> float:
    """q*T*2^-lam for a resource-bounded code, the guessing term reported next to its games."""
    return safe_function_delta(queries, code.safe.T, code.lam)
