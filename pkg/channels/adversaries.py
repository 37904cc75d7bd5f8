"""
Adversaries: channels wrapped with metering, key-aware and transcript-based
attacks, the white-box safe-function attack, the reduction adversary that
turns an insertion/deletion adversary into a Hamming one, and the registry
that resolves adversaries by string ID.
"""
import logging
import math
import struct
import subprocess
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from channels.channels import (bursty_flip, flip_budget, identity, key_aware_block_attack, random_flip,
                               random_insdel, zero_run_killer)
from channels.metering import CostMeter, MeterSnapshot, OracleRegistry, safe_function_eval
from codes.oracle import QueryOracle
from codes.private_ldc import PrivateLDC
from compiler.insdel_compiler import compile, decompile, recover_all
from composed.resource_bounded import kdf
from metrics.distances import edit_fractional, hamming_fractional
from models.data_models import BitString, CompilerParams, SecretKey
from models.errors import ChannelBoundViolation, ContainerFormatError, InvalidParameter, UnknownChannel


@dataclass
class ChannelContext:
    """Everything an adversary may see in one round. `sk` is set only for key-aware adversaries."""
    code: Any
    x: BitString
    rate: float
    rng: np.random.Generator
    meter: CostMeter = field(default_factory=CostMeter)
    sk: Optional[SecretKey] = None
    transcript: List[Tuple[BitString, BitString]] = field(default_factory=list)
    registry: Optional[OracleRegistry] = None


def hamming_layer(code) -> Tuple[PrivateLDC, Optional[CompilerParams]]:
    """The private Hamming code inside `code` and the compiler wrapped around it, if any."""
    if isinstance(code, PrivateLDC):
        return code, None
    return code.hamming, code.compiler


def to_hamming(code, word: BitString) -> BitString:
    _, params = hamming_layer(code)
    return decompile(word, params) if params is not None else word


def from_hamming(code, word: BitString) -> BitString:
    _, params = hamming_layer(code)
    return compile(word, params) if params is not None else word


class Adversary(ABC):
    name = "adversary"
    key_aware = False
    metric = "edit"

    def choose_message(self, k: int, transcript: Sequence[Tuple[BitString, BitString]],
                       rng: np.random.Generator) -> BitString:
        return BitString.random(k, rng)

    @abstractmethod
    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        ...

    def __call__(self, ctx: ChannelContext, y: BitString) -> BitString:
        if not self.key_aware:
            ctx = replace(ctx, sk=None)
        ctx.meter.charge(steps=y.length, rounds=1, space=2)
        out = self.corrupt(ctx, y)
        if config.CHECK_CHANNELS:
            self.check_bound(y, out, ctx.rate)
        return out

    def check_bound(self, y: BitString, out: BitString, rate: float) -> None:
        pass


class ChannelAdversary(Adversary):
    def __init__(self, name: str, channel: Callable, metric: str, **options):
        self.name = name
        self.channel = channel
        self.metric = metric
        self.options = options

    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        return self.channel(y, ctx.rate, ctx.rng, **self.options)

    def check_bound(self, y: BitString, out: BitString, rate: float) -> None:
        if self.metric == "edit":
            achieved = edit_fractional(y, out) if y.length else 0
        else:
            achieved = hamming_fractional(y, out) if y.length else 0
        if achieved > rate:
            logging.error("channel %s exceeded its bound: %s > %s", self.name, float(achieved), rate)
            raise ChannelBoundViolation(f"{self.name}: distance {float(achieved)} above rate {rate}")


class KeyAwareBlockAdversary(Adversary):
    """Separation witness: uses the key to put one block past its correction radius."""
    name = "key_aware_block"
    key_aware = True
    metric = "hamming"

    def __init__(self, block: int = 0, flips: Optional[int] = None, hamming_rate: Optional[float] = None):
        self.block = block
        self.flips = flips
        self.hamming_rate = hamming_rate

    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        if ctx.sk is None:
            raise InvalidParameter("key-aware adversary run without a key")
        ldc, _ = hamming_layer(ctx.code)
        rate = self.hamming_rate if self.hamming_rate is not None else ctx.rate
        word = to_hamming(ctx.code, y)
        return from_hamming(ctx.code, key_aware_block_attack(word, ctx.sk, ldc, rate, self.block, self.flips))


class TranscriptCorrelatingAdversary(Adversary):
    """
    Asks for 0^k and then e_0, XORs the two codewords it was shown and, from the
    third round on, flips positions of that difference in the fresh codeword.
    Under a reused key the difference is exactly the support of one block.
    """
    name = "transcript_correlating"
    metric = "hamming"

    def __init__(self, hamming_rate: Optional[float] = None):
        self.hamming_rate = hamming_rate

    def choose_message(self, k, transcript, rng) -> BitString:
        bits = np.zeros(k, dtype=np.uint8)
        if len(transcript) == 1:
            bits[0] = 1
        return BitString(bits)

    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        if len(ctx.transcript) < 2:
            return y
        first = to_hamming(ctx.code, ctx.transcript[0][1])
        second = to_hamming(ctx.code, ctx.transcript[1][1])
        word = to_hamming(ctx.code, y)
        if first.length != word.length or second.length != word.length:
            return y
        support = np.flatnonzero(first.bits ^ second.bits)
        rate = self.hamming_rate if self.hamming_rate is not None else ctx.rate
        budget = flip_budget(word.length, rate)
        if support.size > budget:
            support = np.sort(ctx.rng.choice(support, size=budget, replace=False))
        bits = np.array(word.bits, dtype=np.uint8)
        bits[support] ^= 1
        return from_hamming(ctx.code, BitString(bits))


class SafeFunctionAdversary(Adversary):
    """
    White-box attack on the resource-bounded code: reads r, evaluates the safe
    function under its own meter to get the key, then breaks one block.
    """
    name = "safe_function"
    metric = "hamming"

    def __init__(self, hamming_rate: Optional[float] = None, flips: Optional[int] = None):
        self.hamming_rate = hamming_rate
        self.flips = flips
        self.held_digests: List[bytes] = []

    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        code = ctx.code
        word = decompile(y, code.compiler)
        r = code.read_seed(QueryOracle(word), ctx.rng)
        s = safe_function_eval(r, code.safe, code.registry, ctx.meter)
        sk = kdf(s, code.lam, code.registry, ctx.meter)
        self.held_digests = [s]
        rate = self.hamming_rate if self.hamming_rate is not None else ctx.rate
        attacked = key_aware_block_attack(word, sk, code.hamming, rate, 0, self.flips)
        return compile(attacked, code.compiler)


class SubprocessAdversary(Adversary):
    """
    External adversary speaking length-prefixed frames over stdin/stdout:
    u32 little-endian bit count, then the bits packed MSB first. Only frames
    are metered.
    """
    name = "subprocess"

    def __init__(self, command: Sequence[str], timeout: float = 60):
        self.command = list(command)
        self.timeout = timeout

    @staticmethod
    def encode_frame(word: BitString) -> bytes:
        return struct.pack("<I", word.length) + word.packed()

    @staticmethod
    def decode_frame(data: bytes) -> BitString:
        if len(data) < 4:
            raise ContainerFormatError("adversary reply shorter than a frame header")
        (nbits,) = struct.unpack("<I", data[:4])
        if len(data) - 4 != (nbits + 7) // 8:
            raise ContainerFormatError(f"adversary reply does not hold exactly {nbits} bits")
        return BitString.from_packed(data[4:], nbits)

    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        try:
            result = subprocess.run(self.command, input=self.encode_frame(y), capture_output=True,
                                    timeout=self.timeout, check=True)
        except (OSError, subprocess.SubprocessError) as e:
            logging.error("external adversary %s failed: %s", self.command, e)
            raise
        ctx.meter.charge(steps=2)
        return self.decode_frame(result.stdout)


class ReductionAdversary(Adversary):
    """
    Hamming-level adversary built from an insertion/deletion one: compile the
    Hamming codeword, let the wrapped adversary corrupt it, recover every bit.
    Compile and recover costs go to the same meter as the wrapped adversary;
    `last_overhead` holds what the wrapper itself spent on the latest call.
    """
    metric = "hamming"

    def __init__(self, inner: Adversary, params: CompilerParams, seed: int = 0, workers: int = 1):
        self.inner = inner
        self.params = params
        self.seed = seed
        self.workers = workers
        self.name = f"reduction({inner.name})"
        self.key_aware = inner.key_aware
        self.last_overhead = MeterSnapshot()

    def corrupt(self, ctx: ChannelContext, y: BitString) -> BitString:
        meter = ctx.meter
        start = meter.snapshot()
        n = self.params.n
        meter.charge(steps=n, rounds=max(1, math.ceil(math.log2(n))), space=1)
        compiled = compile(y, self.params)
        before_inner = meter.snapshot()
        corrupted = self.inner(ctx, compiled)
        after_inner = meter.snapshot()
        out = recover_all(QueryOracle(corrupted), self.params, seed=self.seed, meter=meter, workers=self.workers)
        total = meter.snapshot().minus(start)
        inner_cost = after_inner.minus(before_inner)
        self.last_overhead = MeterSnapshot(total.steps - inner_cost.steps, total.rounds - inner_cost.rounds,
                                           max(total.space, 2), total.queries - inner_cost.queries)
        return out


def reduction_adversary(inner: Adversary, params: CompilerParams, seed: int = 0, workers: int = 1
                        ) -> ReductionAdversary:
    return ReductionAdversary(inner, params, seed, workers)


def _subprocess_adversary(command: Optional[Sequence[str]] = None, timeout: float = 60) -> SubprocessAdversary:
    if not command:
        raise InvalidParameter("the subprocess adversary needs a command to run")
    return SubprocessAdversary(command, timeout)


_FACTORIES: Dict[str, Callable[..., Adversary]] = {
    "identity": lambda **o: ChannelAdversary("identity", identity, "edit"),
    "random_flip": lambda **o: ChannelAdversary("random_flip", random_flip, "hamming"),
    "bursty": lambda **o: ChannelAdversary("bursty", bursty_flip, "hamming", **o),
    "random_insdel": lambda **o: ChannelAdversary("random_insdel", random_insdel, "edit"),
    "zero_run_killer": lambda **o: ChannelAdversary("zero_run_killer", zero_run_killer, "edit"),
    "key_aware_block": lambda **o: KeyAwareBlockAdversary(**o),
    "transcript_correlating": lambda **o: TranscriptCorrelatingAdversary(**o),
    "safe_function": lambda **o: SafeFunctionAdversary(**o),
    "subprocess": _subprocess_adversary,
}


def channel_ids() -> List[str]:
    return list(_FACTORIES)


def get_adversary(name: str, **options) -> Adversary:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise UnknownChannel(f"unknown channel {name!r}; known: {', '.join(_FACTORIES)}") from None
    return factory(**options)
