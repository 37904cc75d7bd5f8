"""
Inner insertion/deletion code of the compiler.

Codeword = sync "1111" + Manchester(payload) + Manchester(CRC-8(payload)),
with Manchester 0 -> "01", 1 -> "10". Interior zero runs never exceed 2.

Decoding aligns a window against the code structure with a trellis over
Manchester pairs. A backward pass gives, for every pair stage and window
offset, the cheapest completion; a forward search then walks label prefixes in
lexicographic order under a cost budget, raising the budget one edit at a time
until a CRC-valid payload appears or the radius is exhausted.
"""
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np

from models.data_models import BitString, InnerCodeSpec
from models.errors import LengthMismatch

CRC_POLY = 0x07
MAX_PAIR_SPAN = 4        # window bits one Manchester pair may absorb
SEARCH_NODE_CAP = 4096
_INF = 1 << 30


def crc8(bits) -> int:
    """CRC-8, polynomial x^8 + x^2 + x + 1, zero init, bits fed MSB first."""
    reg = 0
    for bit in bits:
        feedback = ((reg >> 7) & 1) ^ int(bit)
        reg = (reg << 1) & 0xFF
        if feedback:
            reg ^= CRC_POLY
    return reg


def _crc_bits(bits, width: int = 8) -> List[int]:
    value = crc8(bits)
    return [(value >> (width - 1 - t)) & 1 for t in range(width)]


def manchester(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    out = np.empty(2 * bits.size, dtype=np.uint8)
    out[0::2] = bits
    out[1::2] = 1 - bits
    return out


def inner_encode(payload: BitString, spec: InnerCodeSpec) -> BitString:
    if payload.length != spec.payload_len:
        raise LengthMismatch(f"inner payload must be {spec.payload_len} bits, got {payload.length}")
    sync = np.frombuffer(spec.sync.encode("ascii"), dtype=np.uint8) - ord("0")
    return BitString(np.concatenate([
        sync,
        manchester(payload.bits),
        manchester(_crc_bits(payload.bits, spec.crc_bits)),
    ]))


def _pair_costs(w: np.ndarray):
    """cost[c][L][q]: edit cost of Manchester pair for bit c against w[q:q+L]."""
    size = w.size
    padded = np.concatenate([w.astype(np.int8), np.full(MAX_PAIR_SPAN, 2, dtype=np.int8)])
    shifted = [padded[o:o + size + 1] for o in range(MAX_PAIR_SPAN)]
    q = np.arange(size + 1)
    costs = [[], []]
    for span in range(MAX_PAIR_SPAN + 1):
        valid = q + span <= size
        if span == 0:
            lcs = [np.zeros(size + 1, dtype=np.int64)] * 2
        else:
            has01 = np.zeros(size + 1, dtype=bool)
            has10 = np.zeros(size + 1, dtype=bool)
            for i in range(span):
                for j in range(i + 1, span):
                    has01 |= (shifted[i] == 0) & (shifted[j] == 1)
                    has10 |= (shifted[i] == 1) & (shifted[j] == 0)
            lcs = [np.where(has01, 2, 1), np.where(has10, 2, 1)]
        for c in (0, 1):
            costs[c].append(np.where(valid, 2 + span - 2 * lcs[c], _INF).astype(np.int64))
    return costs


class _TrellisSearch:
    def __init__(self, window: np.ndarray, spec: InnerCodeSpec):
        self.spec = spec
        self.h = spec.payload_len
        self.stages = spec.payload_len + spec.crc_bits
        self.size = window.size
        self.costs = _pair_costs(window)
        self.cost_lists = [[arr.tolist() for arr in per_c] for per_c in self.costs]

        sync_len = len(spec.sync)
        ones = np.concatenate([[0], np.cumsum(window, dtype=np.int64)])
        reach = np.arange(self.size + 1)
        self.sync_cost = np.where(
            reach <= sync_len + spec.radius,
            sync_len + reach - 2 * np.minimum(sync_len, ones),
            _INF,
        )

        self.tail = [None] * (self.stages + 1)
        self.tail[self.stages] = np.zeros(self.size + 1, dtype=np.int64)
        for s in range(self.stages - 1, -1, -1):
            nxt = self.tail[s + 1]
            best = np.full(self.size + 1, _INF, dtype=np.int64)
            for c in (0, 1):
                for span in range(MAX_PAIR_SPAN + 1):
                    if span > self.size:
                        break
                    cand = self.costs[c][span][:self.size + 1 - span] + nxt[span:]
                    np.minimum(best[:self.size + 1 - span], cand, out=best[:self.size + 1 - span])
            self.tail[s] = best
        self.tail_lists = [arr.tolist() for arr in self.tail]
        self.optimum = int(np.min(self.sync_cost + self.tail[0]))
        self.nodes = 0

    def _walk(self, s: int, frontier: Dict[int, int], labels: List[int], budget: int) -> Optional[List[int]]:
        self.nodes += 1
        if self.nodes > SEARCH_NODE_CAP:
            return None
        if s == self.stages:
            payload = labels[:self.h]
            return labels if labels[self.h:] == _crc_bits(payload, self.spec.crc_bits) else None
        if s >= self.h:
            choices = (self._forced[s - self.h],)
        else:
            choices = (0, 1)
        tail = self.tail_lists[s + 1]
        for c in choices:
            step = self.cost_lists[c]
            nxt: Dict[int, int] = {}
            for q, acc in frontier.items():
                for span in range(MAX_PAIR_SPAN + 1):
                    q2 = q + span
                    if q2 > self.size:
                        break
                    value = acc + step[span][q]
                    if value + tail[q2] <= budget and value < nxt.get(q2, _INF):
                        nxt[q2] = value
            if not nxt:
                continue
            if s + 1 == self.h:
                self._forced = _crc_bits(labels[:self.h - 1] + [c], self.spec.crc_bits)
            found = self._walk(s + 1, nxt, labels + [c], budget)
            if found is not None:
                return found
        return None

    def run(self) -> Optional[List[int]]:
        radius = self.spec.radius
        if self.optimum > radius:
            return None
        start = {q: int(v) for q, v in enumerate(self.sync_cost.tolist()) if v < _INF}
        for budget in range(self.optimum, radius + 1):
            self._forced = _crc_bits([], self.spec.crc_bits) if self.h == 0 else None
            found = self._walk(0, start, [], budget)
            if found is not None:
                return found
            if self.nodes > SEARCH_NODE_CAP:
                return None
        return None


@lru_cache(maxsize=65536)
def _decode_cached(raw: bytes, payload_len: int, delta_in: float) -> Optional[bytes]:
    spec = InnerCodeSpec(payload_len=payload_len, delta_in=delta_in)
    window = np.frombuffer(raw, dtype=np.uint8)
    labels = _TrellisSearch(window, spec).run()
    if labels is None:
        return None
    return bytes(labels[:payload_len])


def inner_decode(window, spec: InnerCodeSpec) -> Optional[BitString]:
    """
    Payload of the cheapest CRC-valid alignment within the radius, ties to the
    lexicographically smaller payload; None when no such payload exists.
    """
    bits = window.bits if isinstance(window, BitString) else np.asarray(window, dtype=np.uint8)
    bits = np.ascontiguousarray(bits[:2 * spec.codeword_len], dtype=np.uint8)
    if spec.sync != "1111" or spec.crc_bits != 8:
        raise LengthMismatch("only the 1111-sync, CRC-8 layout is supported")
    result = _decode_cached(bits.tobytes(), spec.payload_len, spec.delta_in)
    if result is None:
        return None
    return BitString(np.frombuffer(result, dtype=np.uint8))
