"""Arithmetic in the BN254 scalar field F_r.

Hot loops elsewhere in the package work on plain ``int`` residues; this
module provides the public :class:`FieldElement` wrapper plus the handful of
int-level helpers those loops share.
"""

from __future__ import annotations

import secrets
from typing import Iterable, Sequence

from ..errors import DecodeError, DivisionByZero

#: Order of the BN254 G1/G2 groups, i.e. the scalar field modulus:
#: 21888242871839275222246405745257275088548364400416034343698204186575808495617
R = 21888242871839275222246405745257275088548364400416034343698204186575808495617

#: Multiplicative generator of F_r^*; every power-of-two root of unity is a power of it.
GENERATOR = 5

#: r - 1 = 2^28 * odd, so radix-2 domains go up to 2^28 points.
TWO_ADICITY = 28

BYTES = 32


def inv_mod(a: int) -> int:
    a %= R
    if a == 0:
        raise DivisionByZero("inverse of zero in F_r")
    return pow(a, -1, R)


def batch_inverse(values: Sequence[int]) -> list[int]:
    """Montgomery's trick: n inversions for the price of one plus 3n products."""
    n = len(values)
    prefix = [1] * (n + 1)
    acc = 1
    for i, v in enumerate(values):
        if v % R == 0:
            raise DivisionByZero(f"batch inverse: element {i} is zero")
        acc = acc * v % R
        prefix[i + 1] = acc
    inv = pow(acc, -1, R)
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = inv * prefix[i] % R
        inv = inv * values[i] % R
    return out


def encode_int(v: int) -> bytes:
    return (v % R).to_bytes(BYTES, "little")


def decode_int(data: bytes) -> int:
    if len(data) != BYTES:
        raise DecodeError(f"field element must be {BYTES} bytes, got {len(data)}")
    v = int.from_bytes(data, "little")
    if v >= R:
        raise DecodeError("non-canonical field element")
    return v


def random_int(rng=None, nonzero: bool = False) -> int:
    """Uniform residue from ``rng`` (a ``random.Random``) or the OS CSPRNG."""
    while True:
        v = secrets.randbelow(R) if rng is None else rng.randrange(R)
        if v or not nonzero:
            return v


def _coerce(other) -> int | None:
    if isinstance(other, FieldElement):
        return other.value
    if isinstance(other, int):
        return other % R
    return None


class FieldElement:
    """Canonical residue modulo :data:`R`. Immutable."""

    __slots__ = ("value",)

    def __init__(self, value: int = 0):
        object.__setattr__(self, "value", int(value) % R)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @classmethod
    def zero(cls) -> FieldElement:
        return cls(0)

    @classmethod
    def one(cls) -> FieldElement:
        return cls(1)

    @classmethod
    def random(cls, rng=None, nonzero: bool = False) -> FieldElement:
        return cls(random_int(rng, nonzero))

    @classmethod
    def from_bytes(cls, data: bytes) -> FieldElement:
        return cls(decode_int(data))

    def to_bytes(self) -> bytes:
        return encode_int(self.value)

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.value - o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(o - self.value)

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.value * inv_mod(o))

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(o * inv_mod(self.value))

    def __neg__(self):
        return FieldElement(-self.value)

    def __pow__(self, exponent: int):
        if exponent < 0:
            return FieldElement(pow(inv_mod(self.value), -exponent, R))
        return FieldElement(pow(self.value, exponent, R))

    def inv(self) -> FieldElement:
        return FieldElement(inv_mod(self.value))

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self.value == o

    def __hash__(self):
        return hash(("Fr", self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    __index__ = __int__

    def __repr__(self):
        return f"FieldElement({self.value})"


def as_ints(values: Iterable) -> list[int]:
    """Accept FieldElements or ints, return canonical ints."""
    return [v.value if isinstance(v, FieldElement) else int(v) % R for v in values]
