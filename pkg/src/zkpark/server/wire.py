"""Wire format: 4-byte big-endian length, then a UTF-8 JSON object.

Field elements travel as ``hex32``: the hex of their 32-byte little-endian
encoding. Byte strings (uid, proof) are standard base64.
"""

from __future__ import annotations

import base64
import binascii
import json
import socket
import struct

from ..algebra.field import BYTES, decode_int, encode_int
from ..errors import DecodeError
from ..merkle import MerklePath

MAX_MESSAGE = 1 << 20
_LEN = struct.Struct(">I")


def hex32(value: int) -> str:
    return encode_int(value).hex()


def from_hex32(text) -> int:
    if not isinstance(text, str) or len(text) != 2 * BYTES:
        raise DecodeError("expected 64 hex characters")
    try:
        return decode_int(bytes.fromhex(text))
    except ValueError as exc:
        raise DecodeError(str(exc)) from None


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def from_b64(text) -> bytes:
    if not isinstance(text, str):
        raise DecodeError("expected a base64 string")
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError) as exc:
        raise DecodeError(f"bad base64: {exc}") from None


def path_to_json(path: MerklePath) -> dict:
    return {"siblings": [hex32(s) for s in path.siblings], "index": path.index}


def path_from_json(obj) -> MerklePath:
    try:
        siblings = tuple(from_hex32(s) for s in obj["siblings"])
        index = obj["index"]
    except (KeyError, TypeError) as exc:
        raise DecodeError(f"bad path object: {exc}") from None
    if not isinstance(index, int) or isinstance(index, bool):
        raise DecodeError("path index must be an integer")
    try:
        return MerklePath(siblings, index)
    except ValueError as exc:
        raise DecodeError(str(exc)) from None


def encode_message(obj: dict) -> bytes:
    body = json.dumps(obj, separators=(",", ":"), sort_keys=True).encode("utf-8")
    if len(body) > MAX_MESSAGE:
        raise DecodeError(f"message of {len(body)} bytes exceeds {MAX_MESSAGE}")
    return _LEN.pack(len(body)) + body


def decode_body(body: bytes) -> dict:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"bad JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DecodeError("message must be a JSON object")
    return obj


def _recv_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            if buf:
                raise ConnectionError("connection closed mid-message")
            return None
        buf += chunk
    return bytes(buf)


def recv_message(sock: socket.socket) -> dict | None:
    """Next message, or None on a clean EOF between messages."""
    head = _recv_exact(sock, _LEN.size)
    if head is None:
        return None
    (length,) = _LEN.unpack(head)
    if length > MAX_MESSAGE:
        raise DecodeError(f"announced message length {length} exceeds {MAX_MESSAGE}")
    body = _recv_exact(sock, length)
    if body is None:
        raise ConnectionError("connection closed mid-message")
    return decode_body(body)


def send_message(sock: socket.socket, obj: dict) -> None:
    sock.sendall(encode_message(obj))


def parse_addr(addr: str, default_host: str = "127.0.0.1") -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep:
        host, port = default_host, addr
    try:
        return host or default_host, int(port)
    except ValueError:
        raise DecodeError(f"bad address {addr!r}, expected host:port") from None
