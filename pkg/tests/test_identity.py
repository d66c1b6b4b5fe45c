import os
import random
import stat

import pytest

from zkpark.algebra.field import R
from zkpark.errors import ArgumentError, DecodeError
from zkpark.identity import (
    IdentitySecret,
    commitment,
    encode_uid,
    keygen,
    nullifier_hash,
    read_keyfile,
    write_keyfile,
)
from zkpark.poseidon import hash1_int, hash2_int


def test_keygen_distinct_and_canonical():
    a, b = keygen(), keygen()
    assert a != b
    assert 0 < a.sk < R


def test_keygen_collision_scan():
    seen = {keygen().sk for _ in range(10_000)}
    assert len(seen) == 10_000


def test_zero_secret_rejected():
    with pytest.raises(ArgumentError):
        IdentitySecret(0)
    with pytest.raises(ArgumentError):
        IdentitySecret(R)


def test_secret_is_redacted():
    s = IdentitySecret(123456789)
    assert "123456789" not in repr(s)
    assert "123456789" not in str(s)
    assert f"{s.sk:x}" not in repr(s)


def test_uid_encoding_short():
    assert encode_uid(b"\x01") == 1 + (1 << 248)
    assert encode_uid(b"ab") == int.from_bytes(b"ab", "little") + (2 << 248)
    assert encode_uid(b"\xff" * 31) < R


def test_uid_encoding_injective_on_prefixes():
    # same little-endian value, different length
    assert encode_uid(b"a") != encode_uid(b"a\x00")
    assert encode_uid(b"x" * 31) != encode_uid(b"x" * 32)
    r = random.Random(1)
    uids = {bytes(r.randrange(256) for _ in range(r.randrange(1, 65))) for _ in range(2000)}
    assert len({encode_uid(u) for u in uids}) == len(uids)


def test_uid_bounds():
    encode_uid(b"z" * 64)
    with pytest.raises(ArgumentError):
        encode_uid(b"z" * 65)
    with pytest.raises(ArgumentError):
        encode_uid(b"")
    with pytest.raises(ArgumentError):
        commitment(keygen(), b"z" * 65)


def test_commitment_formula():
    s = IdentitySecret(42)
    uid = b"CAR-001"
    expected = hash2_int(hash1_int(42), hash1_int(int.from_bytes(uid, "little") + (len(uid) << 248)))
    assert commitment(s, uid).value == expected
    assert commitment(s, uid) == commitment(s, uid)
    assert len(commitment(s, uid).to_bytes()) == 32


def test_commitment_uid_sensitivity():
    r = random.Random(2)
    s = keygen(r)
    values = {commitment(s, f"vehicle-{i}".encode()).value for i in range(200)}
    assert len(values) == 200


def test_commitment_binding_scan():
    # 10^5 random (sk, uid) pairs, no commitment collision
    r = random.Random(3)
    seen = set()
    for i in range(100_000):
        seen.add(commitment(keygen(r), r.randbytes(r.randrange(1, 65))).value)
    assert len(seen) == 100_000


def test_nullifier_hash_properties():
    r = random.Random(4)
    s, t = keygen(r), keygen(r)
    nu1, nu2 = r.randrange(R), r.randrange(R)
    assert nullifier_hash(s, nu1) == nullifier_hash(s, nu1)
    assert nullifier_hash(s, nu1).value == hash2_int(s.sk, nu1)
    assert nullifier_hash(s, nu1) != nullifier_hash(s, nu2)
    assert nullifier_hash(s, nu1) != nullifier_hash(t, nu1)
    for _ in range(200):
        a, b = keygen(r), r.randrange(R)
        assert nullifier_hash(a, b) != nullifier_hash(a, r.randrange(R))


def test_keyfile_round_trip_and_mode(tmp_path):
    s = keygen()
    path = tmp_path / "id.key"
    write_keyfile(path, s)
    assert stat.S_IMODE(os.stat(path).st_mode) == 0o600
    assert path.stat().st_size == 32
    assert read_keyfile(path) == s


def test_keyfile_corrupt(tmp_path):
    path = tmp_path / "bad.key"
    path.write_bytes(b"\x01" * 31)
    with pytest.raises(DecodeError):
        read_keyfile(path)
    path.write_bytes(b"\x00" * 32)
    with pytest.raises(DecodeError):
        read_keyfile(path)
