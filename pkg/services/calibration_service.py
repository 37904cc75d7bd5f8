"""
Measured stand-ins for the compiler's failure rates and the closure overhead.

theta2: how often recover_all of a corrupted compiled word misses more than a
rho fraction of the source bits. theta1: how much worse a single composed
local decode does than the Hamming decoder run on recover_all output. The
closure overhead is what the reduction adversary spends on top of the
adversary it wraps, fitted as c * log2(n)^e.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from channels.adversaries import ChannelContext, get_adversary, reduction_adversary
from channels.metering import CostMeter
from codes.oracle import QueryOracle
from compiler.insdel_compiler import compile, make_compiler_params, recover_all
from composed.private_insdel import PrivateInsdelCode
from config import default_workers
from game.estimation import clopper_pearson, trial_seed
from metrics.distances import hamming_fractional
from models.data_models import BitString, CompilerGuarantee, CompilerParams
from models.errors import DecodeFailure

FAILURE_TARGET = 0.01


def transfer_trial(params: CompilerParams, channel: str, rate: float, rho: float, seed: int, trial: int
                   ) -> Dict[str, Any]:
    """One edit-to-Hamming transfer sample on a random source word."""
    rng = np.random.default_rng((seed, trial))
    source = BitString.random(params.K, rng)
    adversary = get_adversary(channel)
    corrupted = adversary(ChannelContext(code=None, x=source, rate=rate, rng=rng), compile(source, params))
    recovered = recover_all(QueryOracle(corrupted), params, seed=trial_seed(seed, trial))
    ham = float(hamming_fractional(recovered, source))
    return {'trial': trial, 'hamming': ham, 'failed': ham > rho}


class CalibrationService:
    def __init__(self, params: CompilerParams, rho: float, max_workers: Optional[int] = None):
        self.params = params
        self.rho = rho
        self.max_workers = max_workers or default_workers()

    def _fan_out(self, fn, trials: int, progress: bool, desc: str) -> List[Dict[str, Any]]:
        results = []
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(fn, t): t for t in range(trials)}
            for future in tqdm(as_completed(futures), total=trials, disable=not progress, desc=desc):
                try:
                    results.append(future.result())
                except Exception as e:
                    logging.error("Calibration trial %d failed: %s", futures[future], e)
        return sorted(results, key=lambda r: r['trial'])

    def transfer_point(self, channel: str, rate: float, trials: int, seed: int, confidence: float = 0.95,
                       progress: bool = False) -> Dict[str, Any]:
        results = self._fan_out(lambda t: transfer_trial(self.params, channel, rate, self.rho, seed, t),
                                trials, progress, f"rate {rate}")
        failures = sum(r['failed'] for r in results)
        low, high = clopper_pearson(failures, max(1, len(results)), confidence)
        return {
            'rate': rate,
            'trials': len(results),
            'failures': failures,
            'theta_hat': failures / max(1, len(results)),
            'ci_low': low,
            'ci_high': high,
        }

    def sweep(self, channel: str, rates: Sequence[float], trials: int, seed: int, confidence: float = 0.95,
              progress: bool = False) -> pd.DataFrame:
        rows = [self.transfer_point(channel, r, trials, seed, confidence, progress) for r in sorted(rates)]
        return pd.DataFrame(rows, columns=['rate', 'trials', 'failures', 'theta_hat', 'ci_low', 'ci_high'])

    @staticmethod
    def rho_fin_from(sweep: pd.DataFrame, target: float = FAILURE_TARGET) -> float:
        """Largest swept rate such that it and every smaller rate fail at most `target`."""
        best = 0.0
        for row in sweep.sort_values('rate').itertuples():
            if row.theta_hat > target:
                break
            best = float(row.rate)
        return best

    def theta1(self, code: PrivateInsdelCode, channel: str, rate: float, trials: int, seed: int,
               confidence: float = 0.95) -> Dict[str, float]:
        """
        Per trial: one composed local decode of a random index, and the Hamming
        decoder on recover_all output for the same index and corrupted word.
        theta1_hat is how much more often the second one is right.
        """
        def one(t: int) -> Dict[str, Any]:
            rng = np.random.default_rng((seed, t))
            x = BitString.random(code.k, rng)
            sk = code.gen(rng)
            word = compile(code.hamming.encode(x, sk), code.compiler)
            corrupted = get_adversary(channel)(ChannelContext(code=code, x=x, rate=rate, rng=rng), word)
            i = int(rng.integers(0, code.k))
            oracle = QueryOracle(corrupted)
            try:
                composed_ok = code.local_decode(oracle, i, sk, rng) == x[i]
            except DecodeFailure:
                composed_ok = False
            hamming = QueryOracle(recover_all(oracle, code.compiler, seed=trial_seed(seed, t)))
            try:
                hamming_ok = code.hamming.local_decode(hamming, i, sk) == x[i]
            except DecodeFailure:
                hamming_ok = False
            return {'trial': t, 'composed': composed_ok, 'hamming': hamming_ok}

        results = self._fan_out(one, trials, False, "theta1")
        n = max(1, len(results))
        gap = sum(r['hamming'] and not r['composed'] for r in results)
        low, high = clopper_pearson(gap, n, confidence)
        composed = sum(r['composed'] for r in results) / n
        hamming = sum(r['hamming'] for r in results) / n
        return {'theta1_hat': max(0.0, hamming - composed), 'ci_low': low, 'ci_high': high}

    def guarantee(self, sweep: pd.DataFrame, trials: int, seed: int,
                  theta1: Optional[Dict[str, float]] = None) -> CompilerGuarantee:
        rho_fin = self.rho_fin_from(sweep)
        row = sweep[sweep['rate'] == rho_fin]
        if row.empty:
            theta2, ci = 0.0, (0.0, 0.0)
        else:
            theta2 = float(row['theta_hat'].iloc[0])
            ci = (float(row['ci_low'].iloc[0]), float(row['ci_high'].iloc[0]))
        theta1 = theta1 or {'theta1_hat': 0.0, 'ci_low': 0.0, 'ci_high': 0.0}
        return CompilerGuarantee(theta1_hat=theta1['theta1_hat'], theta2_hat=theta2, theta2_ci=ci,
                                 rho_fin=rho_fin, trials=trials, seed=seed,
                                 theta1_ci=(theta1['ci_low'], theta1['ci_high']))


def closure_overhead(Ks: Sequence[int], channel: str = "random_insdel", rate: float = 0.0, seed: int = 0,
                     **compiler_options) -> Dict[str, Any]:
    """
    Reduction-adversary overhead for each Hamming length K, and the fit
    rounds ~ c * log2(n)^e: `c4` is c with e fixed at 4, `exponent` and `c_fit`
    come from a least-squares line in log-log space.
    """
    rows = []
    for K in Ks:
        params = make_compiler_params(K, 2, **compiler_options)
        rng = np.random.default_rng((seed, K))
        y = BitString.random(K, rng)
        wrapper = reduction_adversary(get_adversary(channel), params, seed=seed)
        wrapper(ChannelContext(code=None, x=y, rate=rate, rng=rng, meter=CostMeter()), y)
        overhead = wrapper.last_overhead
        log_n = math.log2(params.n)
        rows.append({'K': K, 'n': params.n, 'rounds': overhead.rounds, 'steps': overhead.steps,
                     'queries': overhead.queries, 'space': overhead.space,
                     'c4': overhead.rounds / log_n ** 4})
    frame = pd.DataFrame(rows)
    result: Dict[str, Any] = {'points': frame, 'c4': float(frame['c4'].max()) if len(frame) else 0.0}
    if len(frame) >= 2:
        slope, intercept = np.polyfit(np.log(np.log2(frame['n'])), np.log(frame['rounds']), 1)
        result.update(exponent=float(slope), c_fit=float(math.exp(intercept)))
    return result
