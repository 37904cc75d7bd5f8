import hashlib
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from models.errors import InvalidParameter, KeyMismatch, LengthMismatch


@dataclass(frozen=True, eq=False)
class BitString:
    """Variable-length binary word. Bits live unpacked in a read-only uint8 array."""
    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=np.uint8).reshape(-1)
        if arr.size and int(arr.max()) > 1:
            raise InvalidParameter("BitString symbols must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        text = text.replace(" ", "")
        if any(ch not in "01" for ch in text):
            raise InvalidParameter(f"not a bit string: {text!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BitString":
        return cls(rng.integers(0, 2, size=n, dtype=np.uint8))

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitString":
        if value < 0 or (width < value.bit_length()):
            raise InvalidParameter(f"{value} does not fit in {width} bits")
        return cls([(value >> (width - 1 - t)) & 1 for t in range(width)])

    @classmethod
    def from_packed(cls, data: bytes, nbits: int) -> "BitString":
        unpacked = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        if unpacked.size < nbits:
            raise LengthMismatch(f"{len(data)} bytes cannot hold {nbits} bits")
        return cls(unpacked[:nbits])

    @classmethod
    def concat(cls, parts: Iterable["BitString"]) -> "BitString":
        arrays = [p.bits for p in parts]
        if not arrays:
            return cls.zeros(0)
        return cls(np.concatenate(arrays))

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def length(self) -> int:
        return int(self.bits.size)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitString(self.bits[index])
        if not 0 <= index < self.bits.size:
            raise IndexError(f"bit index {index} outside [0, {self.bits.size})")
        return int(self.bits[index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self.bits.size == other.bits.size and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.bits.size, self.bits.tobytes()))

    def __add__(self, other: "BitString") -> "BitString":
        return BitString(np.concatenate([self.bits, other.bits]))

    def __str__(self) -> str:
        return (self.bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self) -> str:
        text = str(self)
        if len(text) > 64:
            text = text[:61] + "..."
        return f"BitString({text!r}, len={self.length})"

    def xor(self, other: "BitString") -> "BitString":
        if other.length != self.length:
            raise LengthMismatch(f"{self.length} != {other.length}")
        return BitString(self.bits ^ other.bits)

    def to_int(self) -> int:
        value = 0
        for bit in self.bits:
            value = (value << 1) | int(bit)
        return value

    def packed(self) -> bytes:
        return np.packbits(self.bits).tobytes()

    def weight(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True, eq=False)
class SymbolString:
    """Word over an alphabet of size q."""
    symbols: np.ndarray
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise InvalidParameter("alphabet size q must be at least 2")
        arr = np.array(self.symbols, dtype=np.int64).reshape(-1)
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= self.q):
            raise InvalidParameter(f"symbol outside [0, {self.q})")
        arr.setflags(write=False)
        object.__setattr__(self, "symbols", arr)

    @classmethod
    def from_bits(cls, word: BitString) -> "SymbolString":
        return cls(word.bits.astype(np.int64), 2)

    @property
    def bits_per_symbol(self) -> int:
        return max(1, math.ceil(math.log2(self.q)))

    def to_bits(self) -> BitString:
        """Binary expansion, ceil(log2 q) bits per symbol, most significant bit first."""
        width = self.bits_per_symbol
        shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
        expanded = (self.symbols[:, None] >> shifts[None, :]) & 1
        return BitString(expanded.reshape(-1))

    def __len__(self) -> int:
        return int(self.symbols.size)

    @property
    def length(self) -> int:
        return int(self.symbols.size)

    def __getitem__(self, index: int) -> int:
        if not 0 <= index < self.symbols.size:
            raise IndexError(f"symbol index {index} outside [0, {self.symbols.size})")
        return int(self.symbols[index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolString):
            return NotImplemented
        return self.q == other.q and bool(np.array_equal(self.symbols, other.symbols))

    def __hash__(self) -> int:
        return hash((self.q, self.symbols.tobytes()))


Word = Union[BitString, SymbolString]


@dataclass(frozen=True)
class LocalCodeSpec:
    k: int
    K: int
    q1: int = 2
    q2: int = 2
    ell: int = 2
    rho: float = 0.0
    p: float = 1.0

    def __post_init__(self):
        problems = []
        if not (self.K >= self.k >= 1):
            problems.append("need K >= k >= 1")
        if self.ell < 1:
            problems.append("need ell >= 1")
        if not (0 <= self.rho < 0.5):
            problems.append("need 0 <= rho < 1/2")
        if not (0.5 < self.p <= 1):
            problems.append("need 1/2 < p <= 1")
        if problems:
            raise InvalidParameter(", ".join(problems))


KEY_VERSION = 0x01
SEED_BYTES = 32


@dataclass(frozen=True)
class SecretKey:
    lam: int
    perm_seed: bytes = field(repr=False)
    pad_seed: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.perm_seed) != SEED_BYTES or len(self.pad_seed) != SEED_BYTES:
            raise InvalidParameter(f"key seeds must be {SEED_BYTES} bytes")

    def to_bytes(self) -> bytes:
        """Version byte 0x01, lambda as little-endian u32, then both seeds."""
        return bytes([KEY_VERSION]) + struct.pack("<I", self.lam) + self.perm_seed + self.pad_seed

    @classmethod
    def from_bytes(cls, data: bytes) -> "SecretKey":
        expected = 1 + 4 + 2 * SEED_BYTES
        if len(data) != expected or data[0] != KEY_VERSION:
            raise KeyMismatch("unrecognised key encoding")
        (lam,) = struct.unpack("<I", data[1:5])
        return cls(lam, data[5:5 + SEED_BYTES], data[5 + SEED_BYTES:])

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()[:16]


@dataclass(frozen=True)
class PrivateCodeParams:
    k: int
    m: int
    ell: int
    correctable: int
    lam: int
    p: float = 0.99
    eps: float = 0.001

    @property
    def blocks(self) -> int:
        return -(-self.k // self.m)

    @property
    def padded_k(self) -> int:
        return self.blocks * self.m

    @property
    def K(self) -> int:
        return self.blocks * self.ell

    @property
    def inner_rate(self) -> Fraction:
        return Fraction(self.m, self.ell)

    @property
    def delta_b(self) -> float:
        return self.correctable / self.ell

    @property
    def rho(self) -> float:
        """Tolerated fractional Hamming error: a quarter of the per-block radius."""
        return self.delta_b / 4


@dataclass(frozen=True)
class InnerCodeSpec:
    payload_len: int
    delta_in: float = 0.1
    sync: str = "1111"
    crc_bits: int = 8
    max_zero_run: int = 2

    @property
    def codeword_len(self) -> int:
        return len(self.sync) + 2 * self.payload_len + 2 * self.crc_bits

    @property
    def radius(self) -> int:
        return int(math.floor(self.delta_in * self.codeword_len))


@dataclass(frozen=True)
class CompilerParams:
    K: int
    q2: int
    b: int
    beta: int
    idx_bits: int
    inner: InnerCodeSpec
    amp: int = 3
    probe_factor: int = 4

    @property
    def bits_per_symbol(self) -> int:
        return max(1, math.ceil(math.log2(self.q2)))

    @property
    def source_bits(self) -> int:
        return self.K * self.bits_per_symbol

    @property
    def blocks(self) -> int:
        return max(1, -(-self.source_bits // self.b))

    @property
    def period(self) -> int:
        return self.beta + self.inner.codeword_len

    @property
    def n(self) -> int:
        return self.blocks * self.period

    @property
    def scan_width(self) -> int:
        """w = beta + 2 * codeword_len: bits read per probe."""
        return self.beta + 2 * self.inner.codeword_len

    @property
    def run_threshold(self) -> int:
        return -(-self.beta // 2)

    @property
    def probe_cap(self) -> int:
        return self.probe_factor * max(1, math.ceil(math.log2(self.blocks)))

    @property
    def recover_query_cap(self) -> int:
        return self.amp * self.probe_cap * self.scan_width


@dataclass(frozen=True)
class CompilerGuarantee:
    theta1_hat: float
    theta2_hat: float
    theta2_ci: Sequence[float]
    rho_fin: float
    trials: int
    seed: int
    theta1_ci: Sequence[float] = (0.0, 0.0)


@dataclass(frozen=True)
class ComposedParams:
    ell_fin: int
    rho_fin: float
    p_fin: float
    eps_fin: float
    n: int


@dataclass(frozen=True)
class SafeFunctionSpec:
    T: int
    out_bits: int
    kind: str = "iterated-oracle"


@dataclass(frozen=True)
class CostBudget:
    max_steps: Optional[int] = None
    max_parallel_rounds: Optional[int] = None
    max_space_units: Optional[int] = None
    max_oracle_queries: Optional[int] = None

    @classmethod
    def unlimited(cls) -> "CostBudget":
        return cls()
