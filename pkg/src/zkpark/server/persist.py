"""Append-only state log.

Each record is ``u32 length | u8 type | payload | u32 crc32`` (little-endian;
length counts type + payload). Replay stops at the first short or
checksum-failing record, which is how a write torn by a crash shows up.
"""

from __future__ import annotations

import os
import struct
import threading
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from ..algebra.field import decode_int, encode_int

LEAF_INSERT = 1
EPOCH_ROTATE = 2
NF_INSERT = 3

_HEAD = struct.Struct("<IB")
_CRC = struct.Struct("<I")


@dataclass(frozen=True)
class LeafRecord:
    leaf_index: int
    commitment: int
    uid: bytes
    registered_at: float


@dataclass(frozen=True)
class EpochRecord:
    epoch_id: int
    nu: int
    started_at: float
    duration: float


@dataclass(frozen=True)
class NullifierRecord:
    epoch_id: int
    nf: int


def encode_record(rec) -> bytes:
    if isinstance(rec, LeafRecord):
        kind = LEAF_INSERT
        payload = (
            struct.pack("<Q", rec.leaf_index)
            + encode_int(rec.commitment)
            + struct.pack("<H", len(rec.uid))
            + rec.uid
            + struct.pack("<d", rec.registered_at)
        )
    elif isinstance(rec, EpochRecord):
        kind = EPOCH_ROTATE
        payload = struct.pack("<Q", rec.epoch_id) + encode_int(rec.nu) + struct.pack("<dd", rec.started_at, rec.duration)
    elif isinstance(rec, NullifierRecord):
        kind = NF_INSERT
        payload = struct.pack("<Q", rec.epoch_id) + encode_int(rec.nf)
    else:
        raise TypeError(f"cannot log {type(rec).__name__}")
    body = bytes([kind]) + payload
    return struct.pack("<I", len(body)) + body + _CRC.pack(zlib.crc32(body))


def _decode_payload(kind: int, p: bytes):
    if kind == LEAF_INSERT:
        (idx,) = struct.unpack_from("<Q", p, 0)
        commitment = decode_int(p[8:40])
        (ulen,) = struct.unpack_from("<H", p, 40)
        uid = p[42:42 + ulen]
        (at,) = struct.unpack_from("<d", p, 42 + ulen)
        return LeafRecord(idx, commitment, bytes(uid), at)
    if kind == EPOCH_ROTATE:
        (eid,) = struct.unpack_from("<Q", p, 0)
        started, duration = struct.unpack_from("<dd", p, 40)
        return EpochRecord(eid, decode_int(p[8:40]), started, duration)
    if kind == NF_INSERT:
        (eid,) = struct.unpack_from("<Q", p, 0)
        return NullifierRecord(eid, decode_int(p[8:40]))
    raise ValueError(f"unknown record type {kind}")


def read_records(data: bytes) -> tuple[list, int]:
    """Decode whole records; returns (records, bytes consumed)."""
    out = []
    off = 0
    while off + _HEAD.size <= len(data):
        (length,) = struct.unpack_from("<I", data, off)
        end = off + 4 + length + _CRC.size
        if length < 1 or end > len(data):
            break
        body = data[off + 4:off + 4 + length]
        (crc,) = _CRC.unpack_from(data, off + 4 + length)
        if zlib.crc32(body) != crc:
            break
        try:
            out.append(_decode_payload(body[0], body[1:]))
        except (ValueError, struct.error):
            break
        off = end
    return out, off


class StateLog:
    """Writer side; ``fsync`` trades throughput for durability of every record."""

    def __init__(self, path: str | os.PathLike, fsync: bool = True):
        self.path = Path(path)
        self.fsync = fsync
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        # drop a torn tail so new records are not appended after garbage
        if self.path.exists():
            data = self.path.read_bytes()
            _, good = read_records(data)
            if good != len(data):
                with open(self.path, "r+b") as fh:
                    fh.truncate(good)
        self._fh = open(self.path, "ab")

    def replay(self) -> list:
        return read_records(self.path.read_bytes())[0]

    def append(self, rec) -> None:
        blob = encode_record(rec)
        with self._lock:
            self._fh.write(blob)
            self._fh.flush()
            if self.fsync:
                os.fsync(self._fh.fileno())

    def close(self) -> None:
        with self._lock:
            self._fh.close()


def iter_log(path: str | os.PathLike) -> Iterator:
    yield from read_records(Path(path).read_bytes())[0]
