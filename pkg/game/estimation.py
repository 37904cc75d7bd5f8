"""
Estimation of the Fool predicate.

Condition 1 (closeness) is checked exactly. Condition 2 (some index decodes
correctly with probability below p) is bounded with exact binomial intervals,
union-bounded over the k indices so the family-wise error stays at
1 - confidence. Deterministic decoders are decided by a single run.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.stats import binomtest
from tqdm import tqdm

from game.codes import adapt
from models.data_models import BitString, SecretKey
from models.errors import InvalidParameter
from models.reports import INCONCLUSIVE, NO, YES, FoolVerdict

MIN_TRIALS = 100


@lru_cache(maxsize=4096)
def clopper_pearson(successes: int, trials: int, confidence: float) -> Tuple[float, float]:
    """Two-sided exact binomial interval."""
    if trials < 1:
        raise InvalidParameter("need at least one trial")
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="exact")
    return float(ci.low), float(ci.high)


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence((seed, trial)).generate_state(1)[0])


def estimate_fool(code, sk: Optional[SecretKey], x: BitString, y: BitString, y_corrupted: BitString,
                  rho: float, p: float, trials: int = MIN_TRIALS, confidence: float = 0.95,
                  seed: int = 0, workers: int = 1, progress: bool = False) -> FoolVerdict:
    gc = adapt(code)
    if not 0 < confidence < 1:
        raise InvalidParameter("confidence must lie in (0, 1)")
    distance = gc.distance(y, y_corrupted)
    if distance > rho:
        return FoolVerdict(distance, False, -1, 0.0, 1.0, NO, 0)

    truth = x.bits.astype(np.int64)
    if not gc.randomized:
        decoded = gc.decode_word(y_corrupted, sk, seed)
        success = (decoded == truth).astype(float)
        worst = int(np.argmin(success))
        s = float(success[worst])
        return FoolVerdict(distance, True, worst, s, s, YES if s < p else NO, 1)

    if trials < MIN_TRIALS:
        raise InvalidParameter(f"randomized decoders need at least {MIN_TRIALS} trials, got {trials}")
    successes = np.zeros(gc.k, dtype=np.int64)

    def one(trial: int) -> np.ndarray:
        return gc.decode_word(y_corrupted, sk, trial_seed(seed, trial)) == truth

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(one, t) for t in range(trials)]
            for future in tqdm(as_completed(futures), total=trials, disable=not progress, desc="trials"):
                successes += future.result()
    else:
        for t in tqdm(range(trials), disable=not progress, desc="trials"):
            successes += one(t)

    per_index = 1 - (1 - confidence) / gc.k
    bounds = np.array([clopper_pearson(int(s), trials, per_index) for s in successes])
    worst = int(np.argmin(bounds[:, 1]))
    lower, upper = bounds[worst]
    if upper < p:
        fooled = YES
    elif bool(np.all(bounds[:, 0] >= p)):
        fooled = NO
    else:
        fooled = INCONCLUSIVE
    logging.debug("fool estimate: distance=%.5f worst=%d [%.4f, %.4f] -> %s",
                  distance, worst, lower, upper, fooled)
    return FoolVerdict(distance, True, worst, float(lower), float(upper), fooled, trials)
