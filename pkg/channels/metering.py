"""
Cost metering for resource-bounded adversaries, and the shared random oracle.

A CostMeter counts steps, parallel rounds, peak live words and oracle queries
against a CostBudget. The OracleRegistry answers random-oracle queries from a
lazily filled table and remembers, for every digest it hands out, how many
sequential oracle rounds were needed to reach it.
"""
import hashlib
import math
import threading
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional

from models.data_models import CostBudget, SafeFunctionSpec
from models.errors import BudgetExceeded, DepthViolation, InvalidParameter, RegistryUnavailable


@dataclass
class MeterSnapshot:
    steps: int = 0
    rounds: int = 0
    space: int = 0
    queries: int = 0

    def minus(self, other: "MeterSnapshot") -> "MeterSnapshot":
        return MeterSnapshot(self.steps - other.steps, self.rounds - other.rounds,
                             self.space - other.space, self.queries - other.queries)

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


_LIMITS = (("steps", "max_steps"), ("rounds", "max_parallel_rounds"),
           ("space", "max_space_units"), ("queries", "max_oracle_queries"))


class CostMeter:
    """
    Monotone counters. Every charge costs at least one step; space is the peak
    number of simultaneously live words. Crossing any limit raises BudgetExceeded.
    """

    def __init__(self, budget: Optional[CostBudget] = None):
        self.budget = budget or CostBudget.unlimited()
        self._lock = threading.Lock()
        self._now = MeterSnapshot()

    def charge(self, steps: int = 1, rounds: int = 0, space: int = 0, queries: int = 0) -> None:
        if min(steps, rounds, space, queries) < 0:
            raise InvalidParameter("meter charges must be non-negative")
        with self._lock:
            self._now.steps += max(1, steps)
            self._now.rounds += rounds
            self._now.space = max(self._now.space, space)
            self._now.queries += queries
            current = self.snapshot_unlocked()
        for counter, limit_name in _LIMITS:
            limit = getattr(self.budget, limit_name)
            value = getattr(current, counter)
            if limit is not None and value > limit:
                raise BudgetExceeded(counter, limit, value)

    def snapshot_unlocked(self) -> MeterSnapshot:
        return MeterSnapshot(**asdict(self._now))

    def snapshot(self) -> MeterSnapshot:
        with self._lock:
            return self.snapshot_unlocked()

    @property
    def rounds(self) -> int:
        return self._now.rounds


class OracleRegistry:
    """
    Random oracle with digests of `lam` bits. First touch of an input samples
    its digest (a salted SHA-256, truncated) under a lock; later touches return
    the stored value.
    """

    def __init__(self, lam: int, salt: bytes = b"", available: bool = True):
        if lam < 8:
            raise InvalidParameter("oracle digests need at least 8 bits")
        self.lam = lam
        self.digest_bytes = math.ceil(lam / 8)
        self.salt = salt
        self.available = available
        self._table: Dict[bytes, bytes] = {}
        self._depth: Dict[bytes, int] = {}
        self._lock = threading.Lock()
        self.total_queries = 0

    def _sample(self, data: bytes) -> bytes:
        raw = bytearray(hashlib.sha256(self.salt + data).digest()[:self.digest_bytes])
        spare = 8 * self.digest_bytes - self.lam
        if spare:
            raw[-1] &= (0xFF << spare) & 0xFF
        return bytes(raw)

    def depth(self, data: bytes) -> int:
        """Oracle rounds behind `data`: that of the digest it equals, else 0."""
        with self._lock:
            return self._depth.get(data, 0)

    def query_batch(self, inputs: Iterable[bytes], meter: Optional[CostMeter] = None) -> List[bytes]:
        """One parallel round: all inputs are answered together."""
        if not self.available:
            raise RegistryUnavailable("random oracle registry is not available")
        inputs = [bytes(x) for x in inputs]
        if meter is not None:
            meter.charge(steps=len(inputs), rounds=1, queries=len(inputs))
        parents = [self.depth(x) for x in inputs]
        out = []
        with self._lock:
            self.total_queries += len(inputs)
            for data, parent in zip(inputs, parents):
                digest = self._table.get(data)
                if digest is None:
                    digest = self._sample(data)
                    self._table[data] = digest
                    self._depth.setdefault(digest, parent + 1)
                out.append(digest)
        return out

    def query(self, data: bytes, meter: Optional[CostMeter] = None) -> bytes:
        return self.query_batch([data], meter)[0]

    def check_depth_soundness(self, outputs: Iterable[bytes], meter: CostMeter) -> None:
        """Raise DepthViolation if a metered party outputs a digest deeper than its rounds."""
        rounds = meter.snapshot().rounds
        for data in outputs:
            d = self.depth(bytes(data))
            if d > rounds:
                raise DepthViolation(f"digest of depth {d} produced within {rounds} rounds")


def safe_function_eval(r: bytes, spec: SafeFunctionSpec, registry: OracleRegistry,
                       meter: Optional[CostMeter] = None) -> bytes:
    """T+1 chained oracle calls; the result has depth T+1 (plus any depth of r)."""
    if spec.kind != "iterated-oracle":
        raise InvalidParameter(f"unsupported safe function kind {spec.kind!r}")
    value = r
    for _ in range(spec.T + 1):
        value = registry.query(value, meter)
    return value


def safe_function_delta(q: int, T: int, lam: int) -> float:
    """Residual probability q*T*2^-lam that a bounded party guesses the safe function."""
    return q * T * 2.0 ** (-lam)
