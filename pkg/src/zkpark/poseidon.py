"""Poseidon permutation over F_r (t = 3, R_F = 8, R_P = 57, x^5 S-box).

Constants are not taken from any published Poseidon deployment. They are
derived from a SHA-256 counter stream seeded with ``zkpark-poseidon-v1``:
block ``i`` is ``SHA256(tag || i as 8-byte LE)``, read little-endian, masked to
254 bits and rejected when >= r. The first ``t*(R_F+R_P)`` accepted values are
the round constants (round-major, lane-minor); the next ``t`` are the Cauchy
``xs``, the next ``t`` the ``ys``, and ``mds[i][j] = 1 / (xs[i] + ys[j])``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from gmpy2 import mpz

from .algebra.field import R, FieldElement, as_ints, encode_int, inv_mod
from .errors import ArgumentError, ConfigError

SEED_TAG = b"zkpark-poseidon-v1"
DOMAIN_HASH1 = 1
DOMAIN_HASH2 = 2

_MASK_254 = (1 << 254) - 1


def constant_stream(tag: bytes = SEED_TAG):
    counter = 0
    while True:
        block = hashlib.sha256(tag + counter.to_bytes(8, "little")).digest()
        counter += 1
        v = int.from_bytes(block, "little") & _MASK_254
        if v < R:
            yield v


def _determinant(matrix: list[list[int]]) -> int:
    m = [row[:] for row in matrix]
    n = len(m)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = det * m[col][col] % R
        inv = inv_mod(m[col][col])
        for r in range(col + 1, n):
            f = m[r][col] * inv % R
            if f:
                for c in range(col, n):
                    m[r][c] = (m[r][c] - f * m[col][c]) % R
    return det % R


@dataclass(frozen=True)
class PoseidonParams:
    width: int
    full_rounds: int
    partial_rounds: int
    alpha: int
    mds: tuple[tuple[int, ...], ...]
    round_constants: tuple[int, ...]

    def __post_init__(self):
        t = self.width
        if self.full_rounds % 2:
            raise ConfigError("full_rounds must be even")
        if len(self.round_constants) != t * (self.full_rounds + self.partial_rounds):
            raise ConfigError("round_constants must have length t*(R_F+R_P)")
        if len(self.mds) != t or any(len(row) != t for row in self.mds):
            raise ConfigError("mds must be t x t")
        if _determinant([list(row) for row in self.mds]) == 0:
            raise ConfigError("mds matrix is singular")

    @property
    def n_rounds(self) -> int:
        return self.full_rounds + self.partial_rounds

    def is_full_round(self, rnd: int) -> bool:
        half = self.full_rounds // 2
        return rnd < half or rnd >= half + self.partial_rounds

    def round_constant(self, rnd: int, lane: int) -> int:
        return self.round_constants[rnd * self.width + lane]

    @classmethod
    def generate(cls, width=3, full_rounds=8, partial_rounds=57, alpha=5, tag=SEED_TAG):
        stream = constant_stream(tag)
        rc = tuple(next(stream) for _ in range(width * (full_rounds + partial_rounds)))
        while True:
            xs = [next(stream) for _ in range(width)]
            ys = [next(stream) for _ in range(width)]
            sums = [(x + y) % R for x in xs for y in ys]
            if len(set(xs)) == width and len(set(ys)) == width and all(sums):
                break
        mds = tuple(tuple(inv_mod(x + y) for y in ys) for x in xs)
        return cls(width, full_rounds, partial_rounds, alpha, mds, rc)


@lru_cache(maxsize=1)
def default_params() -> PoseidonParams:
    return PoseidonParams.generate()


def permute_ints(state: Sequence[int], params: PoseidonParams | None = None) -> list[int]:
    params = params or default_params()
    t = params.width
    if len(state) != t:
        raise ArgumentError(f"state must have {t} lanes, got {len(state)}")
    if t == 3 and params.alpha == 5:
        return list(_permute3(params)(*state))
    s = [v % R for v in state]
    mds = params.mds
    rc = params.round_constants
    alpha = params.alpha
    for rnd in range(params.n_rounds):
        base = rnd * t
        s = [(s[i] + rc[base + i]) % R for i in range(t)]
        if params.is_full_round(rnd):
            s = [pow(v, alpha, R) for v in s]
        else:
            s[0] = pow(s[0], alpha, R)
        s = [sum(m * v for m, v in zip(row, s)) % R for row in mds]
    return s


@lru_cache(maxsize=4)
def _permute3(params: PoseidonParams):
    """Unrolled width-3 permutation on gmpy2 integers (about 2x faster than int)."""
    q = mpz(R)
    (m00, m01, m02), (m10, m11, m12), (m20, m21, m22) = [[mpz(v) for v in row] for row in params.mds]
    rc = [mpz(v) for v in params.round_constants]
    half = params.full_rounds // 2
    n_partial = params.partial_rounds

    def full(s0, s1, s2, i):
        s0 += rc[i]
        s1 += rc[i + 1]
        s2 += rc[i + 2]
        t = s0 * s0 % q
        s0 = t * t % q * s0
        t = s1 * s1 % q
        s1 = t * t % q * s1
        t = s2 * s2 % q
        s2 = t * t % q * s2
        return (m00 * s0 + m01 * s1 + m02 * s2) % q, (m10 * s0 + m11 * s1 + m12 * s2) % q, (m20 * s0 + m21 * s1 + m22 * s2) % q

    def perm(s0, s1, s2):
        s0, s1, s2 = mpz(s0) % q, mpz(s1) % q, mpz(s2) % q
        i = 0
        for _ in range(half):
            s0, s1, s2 = full(s0, s1, s2, i)
            i += 3
        for _ in range(n_partial):
            s0 += rc[i]
            s1 += rc[i + 1]
            s2 += rc[i + 2]
            i += 3
            t = s0 * s0 % q
            s0 = t * t % q * s0 % q
            s0, s1, s2 = (m00 * s0 + m01 * s1 + m02 * s2) % q, (m10 * s0 + m11 * s1 + m12 * s2) % q, (m20 * s0 + m21 * s1 + m22 * s2) % q
        for _ in range(half):
            s0, s1, s2 = full(s0, s1, s2, i)
            i += 3
        return int(s0), int(s1), int(s2)

    return perm


def permute(state: Sequence, params: PoseidonParams | None = None) -> list[FieldElement]:
    return [FieldElement(v) for v in permute_ints(as_ints(state), params)]


def _default_perm():
    global _DEFAULT_PERM
    if _DEFAULT_PERM is None:
        _DEFAULT_PERM = _permute3(default_params())
    return _DEFAULT_PERM


_DEFAULT_PERM = None


def hash2_int(a: int, b: int) -> int:
    return _default_perm()(DOMAIN_HASH2, a, b)[0]


def hash1_int(a: int) -> int:
    return _default_perm()(DOMAIN_HASH1, a, 0)[0]


def hash2(a, b) -> FieldElement:
    return FieldElement(hash2_int(int(a) % R, int(b) % R))


def hash1(a) -> FieldElement:
    return FieldElement(hash1_int(int(a) % R))


def params_dump(params: PoseidonParams | None = None) -> str:
    """Line-oriented hex dump of every constant (32-byte LE field encoding)."""
    params = params or default_params()
    lines = [
        f"width {params.width}",
        f"full_rounds {params.full_rounds}",
        f"partial_rounds {params.partial_rounds}",
        f"alpha {params.alpha}",
    ]
    for i, row in enumerate(params.mds):
        for j, v in enumerate(row):
            lines.append(f"mds {i} {j} {encode_int(v).hex()}")
    for i, v in enumerate(params.round_constants):
        lines.append(f"rc {i} {encode_int(v).hex()}")
    return "\n".join(lines) + "\n"
