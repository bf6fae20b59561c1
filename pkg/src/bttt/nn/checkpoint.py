"""Versioned binary checkpoint format.

Layout (all integers little-endian):

    magic   8 bytes  b"BTTTNET\\x01"
    version u32
    cfg_len u32, then cfg_len bytes of config JSON (UTF-8)
    n_rec   u32
    n_rec records:  u16 name_len | name UTF-8 | u8 rank | rank*u32 dims |
                    row-major float32 payload
    crc32   u32 over everything preceding it

Records are written in sorted-name order, so re-serialization is
byte-stable.  load() verifies the checksum and returns (config dict,
{name: float32 array}).
"""
from __future__ import annotations

import json
import struct
import zlib

import numpy as np


MAGIC = b"BTTTNET\x01"
VERSION = 1


class CorruptCheckpoint(Exception):
    pass


class VersionMismatch(Exception):
    pass


def save(path, config: dict, arrays: dict[str, np.ndarray]) -> None:
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<I", VERSION)
    cfg = json.dumps(config, sort_keys=True).encode()
    buf += struct.pack("<I", len(cfg)) + cfg
    buf += struct.pack("<I", len(arrays))
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f4")
        nb = name.encode()
        buf += struct.pack("<H", len(nb)) + nb
        buf += struct.pack("<B", arr.ndim)
        buf += struct.pack(f"<{arr.ndim}I", *arr.shape)
        buf += arr.tobytes()
    buf += struct.pack("<I", zlib.crc32(bytes(buf)))
    with open(path, "wb") as f:
        f.write(buf)


def load(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < len(MAGIC) + 12 or raw[: len(MAGIC)] != MAGIC:
        raise CorruptCheckpoint(f"{path}: not a checkpoint file")
    if zlib.crc32(raw[:-4]) != struct.unpack("<I", raw[-4:])[0]:
        raise CorruptCheckpoint(f"{path}: checksum mismatch (truncated or corrupted)")
    off = len(MAGIC)

    def take(fmt):
        nonlocal off
        size = struct.calcsize(fmt)
        vals = struct.unpack_from(fmt, raw, off)
        off += size
        return vals if len(vals) > 1 else vals[0]

    version = take("<I")
    if version != VERSION:
        raise VersionMismatch(f"{path}: format version {version}, expected {VERSION}")
    cfg_len = take("<I")
    try:
        config = json.loads(raw[off:off + cfg_len].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptCheckpoint(f"{path}: bad config block: {e}") from None
    off += cfg_len
    arrays = {}
    for _ in range(take("<I")):
        try:
            name_len = take("<H")
            name = raw[off:off + name_len].decode()
            off += name_len
            rank = take("<B")
            shape = take(f"<{rank}I") if rank else ()
            if rank == 1:
                shape = (shape,)
            count = int(np.prod(shape)) if shape else 1
            payload = np.frombuffer(raw, dtype="<f4", count=count, offset=off)
            off += count * 4
        except (struct.error, ValueError) as e:
            raise CorruptCheckpoint(f"{path}: truncated record: {e}") from None
        arrays[name] = payload.reshape(shape).copy()
    return config, arrays
