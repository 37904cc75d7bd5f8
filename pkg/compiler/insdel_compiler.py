"""
Hamming-to-insertion/deletion compiler.

compile lays the binary expansion of a Hamming codeword out as blocks
0^beta + inner_encode(header(t) + payload_t). recover reads one bit of that
expansion back out of a corrupted compiled word by locating buffers and running
a noisy binary search over block headers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple, Union

import numpy as np

from codes.oracle import CountingView, QueryOracle
from compiler.inner_code import inner_decode, inner_encode
from config import (DEFAULT_AMP, DEFAULT_BLOCK_BITS, DEFAULT_BUFFER, DEFAULT_DELTA_IN,
                    DEFAULT_PROBE_FACTOR)
from metrics.runs import zero_runs
from models.data_models import BitString, CompilerParams, InnerCodeSpec, SymbolString
from models.errors import InnerDecodeFailure, InvalidParameter, LengthMismatch, TooManyBlocks

WINDOW_RETRIES = 3       # candidate buffers decoded per probe


def make_compiler_params(K: int, q2: int = 2, b: int = DEFAULT_BLOCK_BITS, beta: int = DEFAULT_BUFFER,
                         delta_in: float = DEFAULT_DELTA_IN, amp: int = DEFAULT_AMP,
                         probe_factor: int = DEFAULT_PROBE_FACTOR,
                         idx_bits: Optional[int] = None) -> CompilerParams:
    """
    Layout for K symbols over q2. Headers number blocks 0..blocks-1, so a
    header of idx_bits bits holds up to 2^idx_bits blocks and TooManyBlocks is
    raised only past that; 2 blocks behind a 1-bit header is a valid layout.
    """
    if K < 1:
        raise InvalidParameter("compiled codeword length K must be positive")
    if b < 1 or amp < 1 or probe_factor < 1:
        raise InvalidParameter("b, amp and probe_factor must be positive")
    width = max(1, math.ceil(math.log2(q2)))
    blocks = max(1, -(-K * width // b))
    if idx_bits is None:
        idx_bits = max(1, math.ceil(math.log2(blocks)))
    if blocks > (1 << idx_bits):
        raise TooManyBlocks(f"{blocks} blocks do not fit a {idx_bits}-bit header")
    inner = InnerCodeSpec(payload_len=idx_bits + b, delta_in=delta_in)
    if beta < 2 * inner.max_zero_run + 2:
        raise InvalidParameter(f"buffer length {beta} too short for zero runs of {inner.max_zero_run}")
    return CompilerParams(K=K, q2=q2, b=b, beta=beta, idx_bits=idx_bits, inner=inner, amp=amp,
                          probe_factor=probe_factor)


def _source_bits(c: Union[SymbolString, BitString], params: CompilerParams) -> np.ndarray:
    if isinstance(c, BitString):
        c = SymbolString.from_bits(c)
    if c.length != params.K:
        raise LengthMismatch(f"compiler expects {params.K} symbols, got {c.length}")
    if c.q > params.q2:
        raise InvalidParameter(f"alphabet {c.q} larger than configured q2={params.q2}")
    expanded = SymbolString(c.symbols, params.q2).to_bits().bits
    padded = np.zeros(params.blocks * params.b, dtype=np.uint8)
    padded[:expanded.size] = expanded
    return padded


def compile(c: Union[SymbolString, BitString], params: CompilerParams) -> BitString:
    """Deterministic; output length params.n."""
    source = _source_bits(c, params).reshape(params.blocks, params.b)
    buffer = BitString.zeros(params.beta)
    parts = []
    for t, payload in enumerate(source):
        header = BitString.from_int(t, params.idx_bits)
        parts.append(buffer)
        parts.append(inner_encode(header + BitString(payload), params.inner))
    return BitString.concat(parts)


def decompile(word: BitString, params: CompilerParams) -> BitString:
    """Exact inverse of compile on uncorrupted words: the first source_bits bits of the expansion."""
    if word.length != params.n:
        raise LengthMismatch(f"compiled word has {word.length} bits, layout needs {params.n}")
    out = []
    for t in range(params.blocks):
        start = t * params.period
        if word.bits[start:start + params.beta].any():
            raise InnerDecodeFailure(f"buffer of block {t} is not all zeros")
        codeword = word[start + params.beta:start + params.period]
        payload = inner_decode(codeword, params.inner)
        if payload is None or inner_encode(payload, params.inner) != codeword:
            raise InnerDecodeFailure(f"block {t} is not an inner codeword")
        if payload[:params.idx_bits].to_int() != t:
            raise InnerDecodeFailure(f"block {t} carries header {payload[:params.idx_bits].to_int()}")
        out.append(payload[params.idx_bits:])
    return BitString.concat(out)[:params.source_bits]


def buffer_candidates(segment: np.ndarray, threshold: int) -> List[Tuple[int, int]]:
    """Zero runs of at least `threshold` bits that are followed by a 1 inside the segment."""
    return [(s, e) for s, e in zero_runs(segment) if e - s >= threshold and e < segment.size]


def codeword_anchors(segment: np.ndarray, params: CompilerParams) -> List[Tuple[int, int]]:
    """
    (buffer start, codeword start) pairs in a probe segment, by position: zero
    runs of at least run_threshold bits followed by a 1, plus sync-length runs
    of ones that no such zero run leads into. A sync anchor's buffer start is
    where its buffer would sit, beta bits earlier.
    """
    anchors = buffer_candidates(segment, params.run_threshold)
    starts = [end for _, end in anchors]
    for s, e in zero_runs(segment == 0):  # runs of ones
        if e - s >= len(params.inner.sync) and all(abs(s - known) > 1 for known in starts):
            anchors.append((s - params.beta, s))
    return sorted(anchors, key=lambda anchor: anchor[1])


def _clamp(value: int, lo: int, hi: int) -> int:
    return max(lo, min(int(value), hi))


def _search(oracle: QueryOracle, t: int, params: CompilerParams, rng: np.random.Generator
            ) -> Tuple[Optional[np.ndarray], int]:
    """One noisy binary search for block t. Returns (payload bits or None, probes used)."""
    N = oracle.length
    if N == 0:
        return None, 0
    P, beta, w = params.period, params.beta, params.scan_width
    window = params.inner.codeword_len + 2 * params.inner.radius
    scale = N / params.n
    lo, hi = 0, N
    guess = int(t * P * scale) - int(rng.integers(1, beta + 1))
    for probe in range(1, params.probe_cap + 1):
        start = _clamp(guess, 0, N - 1)
        segment = oracle.read_range(start, min(w, N - start))
        found = None
        for run_start, codeword_start in codeword_anchors(segment, params)[:WINDOW_RETRIES]:
            payload = inner_decode(segment[codeword_start:codeword_start + window], params.inner)
            if payload is not None:
                found = (start + run_start, payload)
                break
        if found is None:
            if hi - lo <= w:
                lo, hi = 0, N
            guess = lo + (hi - lo) // 4 + int(rng.integers(0, max(1, (hi - lo) // 2)))
            continue

        position, payload = found
        header = payload[:params.idx_bits].to_int()
        if header == t:
            return payload.bits[params.idx_bits:], probe
        if header < t:
            lo = max(lo, position + 1)
        else:
            hi = min(hi, position)
        if lo >= hi:
            lo, hi = 0, N
        guess = position + int((t - header) * P * scale)
        if abs(t - header) <= 2:
            guess -= int(rng.integers(0, beta // 2 + 1))
        if not lo <= guess < hi:
            guess = lo + (hi - lo) // 4 + int(rng.integers(0, max(1, (hi - lo) // 2)))
    return None, params.probe_cap


def recover_traced(oracle: QueryOracle, j: int, params: CompilerParams, rng: np.random.Generator
                   ) -> Tuple[int, int]:
    """recover, also returning the probe depth of the longest of its amp searches."""
    if not 0 <= j < params.source_bits:
        raise InvalidParameter(f"bit index {j} outside [0, {params.source_bits})")
    t, offset = divmod(j, params.b)
    votes, depth = 0, 0
    for _ in range(params.amp):
        payload, probes = _search(oracle, t, params, rng)
        depth = max(depth, probes)
        votes += int(payload[offset]) if payload is not None else 0
    return (1 if 2 * votes > params.amp else 0), depth


def recover(oracle: QueryOracle, j: int, params: CompilerParams, rng: np.random.Generator) -> int:
    """
    Bit j of the binary expansion behind the compiled word the oracle exposes,
    by majority over amp independent searches. Aborted searches vote 0.
    """
    return recover_traced(oracle, j, params, rng)[0]


def recover_all(oracle: QueryOracle, params: CompilerParams, seed: int = 0, meter=None,
                workers: int = 1) -> BitString:
    """
    All source bits, index j searched with default_rng((seed, j)). With a meter,
    the summed queries are charged as steps and the deepest search as rounds.
    """
    def one(j: int) -> Tuple[int, int, int]:
        view = CountingView(oracle)
        bit, depth = recover_traced(view, j, params, np.random.default_rng((seed, j)))
        return bit, depth, view.query_count

    indices = range(params.source_bits)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(one, indices))
    else:
        results = [one(j) for j in indices]

    bits = np.array([r[0] for r in results], dtype=np.uint8)
    queries = sum(r[2] for r in results)
    rounds = max((r[1] for r in results), default=0)
    logging.debug("recover_all: %d bits, %d queries, %d rounds", bits.size, queries, rounds)
    if meter is not None:
        meter.charge(steps=queries, rounds=rounds, queries=queries, space=2)
    return BitString(bits)

