"""
Corruption channels. Every channel maps (word, rate, rng) to a corrupted word
and stays within its distance bound: fractional edit distance for the
insertion/deletion channels, fractional Hamming distance for the flip channels.
"""
from typing import Callable, Optional

import numpy as np

from codes.private_ldc import PrivateLDC
from compiler.insdel_compiler import compile, decompile
from config import DEFAULT_BUFFER
from metrics.runs import zero_runs
from models.data_models import BitString, CompilerParams, SecretKey
from models.errors import BudgetTooSmall, InvalidParameter

DEFAULT_BURST = 8

Channel = Callable[[BitString, float, np.random.Generator], BitString]


def _check_rate(rate: float) -> None:
    if not 0 <= rate <= 1:
        raise InvalidParameter(f"channel rate {rate} outside [0, 1]")


def edit_budget(length: int, rate: float) -> int:
    return int(np.floor(rate * 2 * length))


def flip_budget(length: int, rate: float) -> int:
    return int(np.floor(rate * length))


def identity(word: BitString, rate: float = 0.0, rng: Optional[np.random.Generator] = None) -> BitString:
    return word


def random_insdel(word: BitString, rate: float, rng: np.random.Generator) -> BitString:
    """floor(rate*2*|word|) operations, each a deletion or an insertion of a random bit at a uniform position."""
    _check_rate(rate)
    ops = edit_budget(word.length, rate)
    bits = word.bits.tolist()
    for _ in range(ops):
        if bits and rng.random() < 0.5:
            del bits[int(rng.integers(0, len(bits)))]
        else:
            bits.insert(int(rng.integers(0, len(bits) + 1)), int(rng.integers(0, 2)))
    return BitString(np.array(bits, dtype=np.uint8))


def zero_run_killer(word: BitString, rate: float, rng: np.random.Generator,
                    threshold: int = DEFAULT_BUFFER // 2) -> BitString:
    """
    Same edit budget as random_insdel, spent on the longest zero run each time.
    A run of at least `threshold` zeros gets a 1 after every threshold - 1
    zeros, so no piece of it is still long enough to pass for a buffer. When
    the budget left cannot finish a run, or no long run is left, a zero of the
    longest run is deleted instead.
    """
    _check_rate(rate)
    if threshold < 2:
        raise InvalidParameter(f"run threshold {threshold} must be at least 2")
    ops = edit_budget(word.length, rate)
    bits = np.array(word.bits, dtype=np.uint8)
    while ops > 0:
        runs = zero_runs(bits)
        if not runs:
            break
        longest = max(e - s for s, e in runs)
        tied = [(s, e) for s, e in runs if e - s == longest]
        s, e = tied[int(rng.integers(0, len(tied)))]
        cuts = -(-longest // (threshold - 1)) - 1
        if longest < threshold or cuts > ops:
            bits = np.delete(bits, s)
            ops -= 1
            continue
        bits = np.insert(bits, s + (threshold - 1) * np.arange(1, cuts + 1), 1)
        ops -= cuts
    return BitString(bits)


def random_flip(word: BitString, rate: float, rng: np.random.Generator) -> BitString:
    """Exactly floor(rate*|word|) distinct positions flipped."""
    _check_rate(rate)
    count = flip_budget(word.length, rate)
    bits = np.array(word.bits, dtype=np.uint8)
    if count:
        bits[rng.choice(word.length, size=count, replace=False)] ^= 1
    return BitString(bits)


def bursty_flip(word: BitString, rate: float, rng: np.random.Generator, burst: int = DEFAULT_BURST) -> BitString:
    """The random_flip budget spent in bursts of `burst` consecutive positions."""
    _check_rate(rate)
    count = flip_budget(word.length, rate)
    hit = np.zeros(word.length, dtype=bool)
    while int(hit.sum()) < count:
        remaining = count - int(hit.sum())
        start = int(rng.integers(0, max(1, word.length - burst + 1)))
        span = np.flatnonzero(~hit[start:start + burst])[:remaining] + start
        hit[span] = True
    return BitString(word.bits ^ hit.astype(np.uint8))


def key_aware_block_attack(word: BitString, sk: SecretKey, code: PrivateLDC, rate: float,
                           block: int = 0, flips: Optional[int] = None) -> BitString:
    """
    Flip every position of one block, located through the key. `flips` limits
    the attack to the first that many positions of the block; a game that has
    to stay within rho passes correctable + 1. Raises BudgetTooSmall when the
    flips do not fit floor(rate*K).
    """
    _check_rate(rate)
    if rate == 0:
        return word
    flips = code.params.ell if flips is None else flips
    if not 1 <= flips <= code.params.ell:
        raise InvalidParameter(f"cannot flip {flips} positions of a {code.params.ell}-bit block")
    budget = flip_budget(word.length, rate)
    if flips > budget:
        raise BudgetTooSmall(f"attack needs {flips} flips, rate {rate} allows {budget}")
    bits = np.array(word.bits, dtype=np.uint8)
    bits[code.block_positions(block, sk)[:flips]] ^= 1
    return BitString(bits)


def lift_to_insdel(attack: Callable[[BitString], BitString], params: CompilerParams) -> Callable[[BitString], BitString]:
    """Run a Hamming-level attack on an uncorrupted compiled word and compile the result."""
    def lifted(word: BitString) -> BitString:
        return compile(attack(decompile(word, params)), params)

    return lifted
