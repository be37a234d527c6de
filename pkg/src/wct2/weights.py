"""Versioned binary container for named float32 tensors.

Layout (all integers little-endian):

    magic   8 bytes  "WCT2WTS\\0"
    u32     format version (currently 1)
    u32     tensor count
    per tensor:
        u16      name length
        bytes    UTF-8 name
        u8       dtype tag (0 = float32)
        u8       ndim
        u32[ndim] dims
        bytes    row-major little-endian payload
    u32     CRC32 of everything after the magic

save() writes tensors in lexicographic name order, so identical stores
produce identical bytes. load() validates magic, version, structure, and
checksum before returning anything.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import (
    BadMagicError,
    ChecksumError,
    ContractViolation,
    MissingTensorError,
    TruncatedPayloadError,
    VersionMismatchError,
)

MAGIC = b"WCT2WTS\0"
VERSION = 1
DTYPE_F32 = 0


class WeightStore:
    """Ordered map of tensor name -> float32 ndarray."""

    def __init__(self, tensors: dict[str, np.ndarray] | None = None) -> None:
        self._tensors: dict[str, np.ndarray] = {}
        if tensors:
            for name, tensor in tensors.items():
                self.add(name, tensor)

    def add(self, name: str, tensor) -> None:
        if name in self._tensors:
            raise ContractViolation(f"duplicate tensor name {name!r}")
        arr = np.ascontiguousarray(tensor, dtype=np.float32)
        arr.setflags(write=False)
        self._tensors[name] = arr

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> list[str]:
        return list(self._tensors)

    def get(self, name: str) -> np.ndarray:
        try:
            return self._tensors[name]
        except KeyError:
            raise MissingTensorError(f"tensor {name!r} is missing from the weight store") from None

    def items(self):
        return self._tensors.items()

    @property
    def parameter_count(self) -> int:
        return sum(t.size for t in self._tensors.values())


def save(store: WeightStore, path) -> None:
    """Write the container; byte-deterministic for identical store contents."""
    body = bytearray()
    body += struct.pack("<I", VERSION)
    names = sorted(store.names())
    body += struct.pack("<I", len(names))
    for name in names:
        tensor = store.get(name)
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ContractViolation(f"tensor name too long: {name!r}")
        body += struct.pack("<H", len(encoded))
        body += encoded
        body += struct.pack("<BB", DTYPE_F32, tensor.ndim)
        body += struct.pack(f"<{tensor.ndim}I", *tensor.shape)
        body += tensor.astype("<f4").tobytes()
    crc = zlib.crc32(bytes(body)) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(body)
        fh.write(struct.pack("<I", crc))


def load(path) -> WeightStore:
    """Read and validate a container; never returns a partial store."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) or blob[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{path}: not a weight container (bad magic)")
    if len(blob) < len(MAGIC) + 4 + 4 + 4:
        raise TruncatedPayloadError(f"{path}: container too short for header and checksum")
    body = blob[len(MAGIC) : -4]
    (stored_crc,) = struct.unpack("<I", blob[-4:])

    offset = 0

    def take(count: int, what: str) -> bytes:
        nonlocal offset
        if offset + count > len(body):
            raise TruncatedPayloadError(f"{path}: truncated while reading {what}")
        chunk = body[offset : offset + count]
        offset += count
        return chunk

    (version,) = struct.unpack("<I", take(4, "version"))
    if version != VERSION:
        raise VersionMismatchError(f"{path}: container version {version}, expected {VERSION}")
    (count,) = struct.unpack("<I", take(4, "tensor count"))
    parsed: list[tuple[str, tuple[int, ...], bytes]] = []
    for index in range(count):
        (name_len,) = struct.unpack("<H", take(2, f"name length of tensor {index}"))
        name = take(name_len, f"name of tensor {index}").decode("utf-8")
        dtype_tag, ndim = struct.unpack("<BB", take(2, f"dtype/ndim of {name!r}"))
        if dtype_tag != DTYPE_F32:
            raise VersionMismatchError(f"{path}: tensor {name!r} has unsupported dtype tag {dtype_tag}")
        dims = struct.unpack(f"<{ndim}I", take(4 * ndim, f"dims of {name!r}"))
        element_count = 1
        for d in dims:
            element_count *= d
        payload = take(4 * element_count, f"payload of {name!r}")
        parsed.append((name, dims, payload))
    if offset != len(body):
        raise TruncatedPayloadError(f"{path}: {len(body) - offset} unexpected trailing bytes before checksum")

    actual_crc = zlib.crc32(body) & 0xFFFFFFFF
    if actual_crc != stored_crc:
        raise ChecksumError(f"{path}: checksum mismatch (stored {stored_crc:08x}, computed {actual_crc:08x})")

    store = WeightStore()
    for name, dims, payload in parsed:
        store.add(name, np.frombuffer(payload, dtype="<f4").reshape(dims))
    return store
