"""User secrets, identity commitments and per-epoch nullifier hashes."""

from __future__ import annotations

import os
import secrets
from dataclasses import dataclass

from .algebra.field import BYTES, R, decode_int, encode_int
from .errors import ArgumentError, DecodeError
from .poseidon import hash1_int, hash2_int

MAX_UID_BYTES = 64
_LANE_BYTES = 31


class IdentitySecret:
    """The user's private key sk (a nonzero field element).

    ``repr``/``str`` never show the value, so secrets cannot leak into logs.
    """

    __slots__ = ("_sk",)

    def __init__(self, sk: int):
        sk = int(sk) % R
        if sk == 0:
            raise ArgumentError("identity secret must be nonzero")
        self._sk = sk

    @property
    def sk(self) -> int:
        return self._sk

    def __repr__(self):
        return "IdentitySecret(<redacted>)"

    __str__ = __repr__

    def __eq__(self, other):
        if not isinstance(other, IdentitySecret):
            return NotImplemented
        return secrets.compare_digest(encode_int(self._sk), encode_int(other._sk))

    def __hash__(self):
        return hash(("IdentitySecret", self._sk))

    def public_key(self) -> int:
        """pk = H1(sk); stands in for the user's public key."""
        return hash1_int(self._sk)

    def to_bytes(self) -> bytes:
        return encode_int(self._sk)

    @classmethod
    def from_bytes(cls, data: bytes) -> IdentitySecret:
        try:
            return cls(decode_int(data))
        except ArgumentError as exc:
            raise DecodeError(str(exc)) from None


def keygen(rng=None) -> IdentitySecret:
    """Uniform nonzero sk. ``rng`` is for reproducible tests only; default is the OS CSPRNG."""
    while True:
        v = secrets.randbelow(R) if rng is None else rng.randrange(R)
        if v:
            return IdentitySecret(v)


def encode_uid(uid: bytes) -> int:
    """Injective map from a 1..64 byte UID to one field element.

    Up to 31 bytes: little-endian value plus a length tag ``len << 248``
    (stays below r). Longer UIDs are cut into 31-byte lanes which are
    chained with H2, and the length is absorbed last with one more H2.
    """
    if not isinstance(uid, (bytes, bytearray)):
        raise ArgumentError("uid must be bytes")
    if not 1 <= len(uid) <= MAX_UID_BYTES:
        raise ArgumentError(f"uid must be 1..{MAX_UID_BYTES} bytes, got {len(uid)}")
    if len(uid) <= _LANE_BYTES:
        return int.from_bytes(uid, "little") + (len(uid) << 248)
    lanes = [int.from_bytes(uid[i:i + _LANE_BYTES], "little") for i in range(0, len(uid), _LANE_BYTES)]
    acc = lanes[0]
    for lane in lanes[1:]:
        acc = hash2_int(acc, lane)
    return hash2_int(acc, len(uid))


@dataclass(frozen=True)
class IdentityCommitment:
    value: int

    def to_bytes(self) -> bytes:
        return encode_int(self.value)


def commitment_from_parts(pk: int, uid_field: int) -> int:
    return hash2_int(pk, hash1_int(uid_field))


def commitment(secret: IdentitySecret, uid: bytes) -> IdentityCommitment:
    """H2(H1(sk), H1(encode(uid)))."""
    return IdentityCommitment(commitment_from_parts(secret.public_key(), encode_uid(uid)))


@dataclass(frozen=True)
class EpochNullifier:
    nu: int
    epoch_id: int


@dataclass(frozen=True)
class NullifierHash:
    value: int


def nullifier_hash(secret: IdentitySecret, nu) -> NullifierHash:
    """H2(sk, nu): one value per identity per epoch."""
    return NullifierHash(hash2_int(secret.sk, int(nu) % R))


def write_keyfile(path: str | os.PathLike, secret: IdentitySecret) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "wb") as fh:
        fh.write(secret.to_bytes())
    os.chmod(path, 0o600)


def read_keyfile(path: str | os.PathLike) -> IdentitySecret:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) != BYTES:
        raise DecodeError(f"keyfile must hold exactly {BYTES} bytes")
    return IdentitySecret.from_bytes(data)


__all__ = [
    "IdentitySecret",
    "IdentityCommitment",
    "EpochNullifier",
    "NullifierHash",
    "keygen",
    "encode_uid",
    "commitment",
    "commitment_from_parts",
    "nullifier_hash",
    "write_keyfile",
    "read_keyfile",
]
