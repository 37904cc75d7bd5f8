"""
Compiled-word container files.

Layout (little endian): magic "IDLC", version u8, K u32, q2 u16, b u16,
beta u16, idx_bits u8, nbits u32, then the word packed MSB first. The header
describes the layout only and is never sent through a channel; corrupted words
keep the header of their source and record their own bit count.

Run metadata (codec, config, key fingerprint, achieved distance) goes to a
JSON sidecar next to the container.
"""
import json
import os
import struct
from dataclasses import dataclass
from typing import Any, Dict, Optional

from models.data_models import BitString, CompilerParams
from models.errors import ContainerFormatError

MAGIC = b"IDLC"
VERSION = 1
_HEADER = struct.Struct("<4sBIHHHBI")


@dataclass(frozen=True)
class ContainerHeader:
    K: int
    q2: int
    b: int
    beta: int
    idx_bits: int
    nbits: int

    @classmethod
    def for_params(cls, params: CompilerParams, nbits: int) -> "ContainerHeader":
        return cls(params.K, params.q2, params.b, params.beta, params.idx_bits, nbits)


def pack(word: BitString, header: ContainerHeader) -> bytes:
    if header.nbits != word.length:
        raise ContainerFormatError(f"header says {header.nbits} bits, word has {word.length}")
    head = _HEADER.pack(MAGIC, VERSION, header.K, header.q2, header.b, header.beta,
                        header.idx_bits, header.nbits)
    return head + word.packed()


def unpack(data: bytes):
    if len(data) < _HEADER.size:
        raise ContainerFormatError("file shorter than the container header")
    magic, version, K, q2, b, beta, idx_bits, nbits = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")
    body = data[_HEADER.size:]
    if len(body) != (nbits + 7) // 8:
        raise ContainerFormatError(f"body of {len(body)} bytes does not hold exactly {nbits} bits")
    return BitString.from_packed(body, nbits), ContainerHeader(K, q2, b, beta, idx_bits, nbits)


def sidecar_path(path: str) -> str:
    return str(path) + ".json"


def write_container(path: str, word: BitString, header: ContainerHeader,
                    meta: Optional[Dict[str, Any]] = None) -> None:
    with open(path, "wb") as f:
        f.write(pack(word, header))
    if meta is not None:
        with open(sidecar_path(path), "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2)


def read_container(path: str):
    """(word, header, sidecar dict or {})."""
    with open(path, "rb") as f:
        word, header = unpack(f.read())
    meta: Dict[str, Any] = {}
    if os.path.exists(sidecar_path(path)):
        with open(sidecar_path(path), encoding="utf-8") as f:
            meta = json.load(f)
    return word, header, meta
