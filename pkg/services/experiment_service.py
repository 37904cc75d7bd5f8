import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from channels.adversaries import get_adversary
from channels.metering import OracleRegistry
from codes.private_ldc import PrivateLDC
from composed.private_insdel import PrivateInsdelCode
from composed.resource_bounded import ResourceBoundedCode
from config import DEFAULT_RHO_FIN, default_workers
from game.games import play_round, priv_ldc_game, rb_residual, win_rate
from models.data_models import BitString, CostBudget
from models.reports import YES, ExperimentConfig, GameReport

BATCH_SIZE = 16
KEYED_OPTIONS = ("key_aware_block", "transcript_correlating", "safe_function")
FLIP_OPTIONS = ("key_aware_block", "safe_function")


def build_code(config: ExperimentConfig, registry: Optional[OracleRegistry] = None):
    """The code named by config.codec, with the config's parameters."""
    compiler_options = dict(b=config.b, beta=config.beta, amp=config.amp)
    if config.codec == "priv-hamming-v1":
        return PrivateLDC(config.k, config.lam, m=config.m)
    if config.codec == "priv-insdel-v1":
        return PrivateInsdelCode(config.k, config.lam, m=config.m, p_fin=config.p, **compiler_options)
    registry = registry or OracleRegistry(config.lam, salt=config.seed.to_bytes(8, "little", signed=True))
    return ResourceBoundedCode(config.k, config.lam, config.T, registry, m=config.m, p_fin=config.p,
                               **compiler_options)


def default_rho(code, config: ExperimentConfig) -> float:
    if config.rho is not None:
        return config.rho
    if isinstance(code, PrivateLDC):
        return code.params.rho
    return DEFAULT_RHO_FIN


def build_adversary(config: ExperimentConfig):
    options: Dict[str, Any] = {}
    if config.channel in KEYED_OPTIONS and config.hamming_rate is not None:
        options["hamming_rate"] = config.hamming_rate
    if config.channel in FLIP_OPTIONS and config.flips is not None:
        options["flips"] = config.flips
    if config.channel == "subprocess":
        options["command"] = config.adversary_cmd
    return get_adversary(config.channel, **options)


def game_seed(config: ExperimentConfig, index: int) -> int:
    return config.seed + index


def run_game_task(config: ExperimentConfig, index: int) -> Dict[str, Any]:
    """
    Plays game number `index` of a run. Every task builds its own code and
    adversary, so tasks share nothing but the config.
    """
    try:
        code = build_code(config)
        adversary = build_adversary(config)
        seed = game_seed(config, index)
        rho = default_rho(code, config)
        if config.game == "priv_ldc":
            report = priv_ldc_game(code, adversary, config.rounds, rho, config.p, config.trials,
                                   config.confidence, seed, config.rate, config.multi_time)
        else:
            budget = CostBudget(max_parallel_rounds=config.budget_rounds) if config.game == "c_secure" else None
            x = BitString.random(config.k, np.random.default_rng([seed, 1]))
            record = play_round(code, adversary, x, rho, config.p, config.trials, config.confidence, seed,
                                config.rate, budget)
            report = GameReport(game=config.game, codec=code.codec_id, rounds=[record],
                                win=record.verdict.fooled == YES, seed=seed, multi_time=False)
        if isinstance(code, ResourceBoundedCode):
            report.extras["safe_function_delta_per_query"] = rb_residual(code, 1)
        return {'success': True, 'index': index, 'report': report}
    except Exception as e:
        logging.error("Error in game %d: %s", index, e)
        return {'success': False, 'index': index, 'error': str(e)}


class ExperimentService:
    def __init__(self, config: ExperimentConfig, max_workers: Optional[int] = None):
        self.config = config
        self.max_workers = max_workers or default_workers()

    def run_games(self, progress: bool = False) -> List[GameReport]:
        """All config.games games, fanned out in batches; failed games are logged and skipped."""
        total = self.config.games
        results: Dict[int, GameReport] = {}
        logging.info("Running %d %s game(s) with %d workers", total, self.config.game, self.max_workers)
        with tqdm(total=total, disable=not progress, desc="games") as bar:
            for start in range(0, total, BATCH_SIZE):
                batch = range(start, min(total, start + BATCH_SIZE))
                with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                    futures = {executor.submit(run_game_task, self.config, i): i for i in batch}
                    for future in as_completed(futures):
                        result = future.result()
                        bar.update(1)
                        if result['success']:
                            results[result['index']] = result['report']
                        else:
                            logging.warning("Game %d failed: %s", result['index'], result.get('error'))
        return [results[i] for i in sorted(results)]

    def summarize(self, reports: List[GameReport]) -> Dict[str, Any]:
        summary: Dict[str, Any] = {"games": len(reports), "wins": sum(r.win for r in reports)}
        if reports:
            verdicts = [next((r.verdict for r in rep.rounds if r.verdict.fooled == YES), rep.rounds[-1].verdict)
                        for rep in reports]
            rate, low, high = win_rate(verdicts, self.config.confidence)
            summary.update(win_rate=rate, ci_low=low, ci_high=high)
        summary["budget_aborts"] = sum(any(r.verdict.aborted for r in rep.rounds) for rep in reports)
        return summary
