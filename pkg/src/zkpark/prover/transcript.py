"""Fiat-Shamir transcript over SHA-512.

Every absorption is framed as ``len(label) || label || len(data) || data`` and
chained into a running 64-byte state. A challenge squeezes
``SHA512(state || "challenge" || label)``, reduces the 64 bytes mod r and
feeds the squeezed block back into the state.
"""

from __future__ import annotations

import hashlib

from ..algebra.field import R, encode_int

PROTOCOL_TAG = b"zkpark-plonk-v1"


class Transcript:
    def __init__(self, tag: bytes = PROTOCOL_TAG):
        self.state = hashlib.sha512(tag).digest()

    def _mix(self, *parts: bytes) -> None:
        h = hashlib.sha512(self.state)
        for part in parts:
            h.update(len(part).to_bytes(4, "little"))
            h.update(part)
        self.state = h.digest()

    def absorb(self, label: bytes, data: bytes) -> None:
        self._mix(label, data)

    def absorb_scalar(self, label: bytes, value: int) -> None:
        self._mix(label, encode_int(value))

    def absorb_point(self, label: bytes, point) -> None:
        self._mix(label, point.to_bytes())

    def challenge(self, label: bytes) -> int:
        out = hashlib.sha512(self.state + b"challenge" + label).digest()
        self._mix(b"squeezed", out)
        return int.from_bytes(out, "little") % R
