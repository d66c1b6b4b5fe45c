"""BN254 groups G1 (over F_p) and G2 (over F_p2, the sextic twist).

Points are stored in affine coordinates as plain ints; ``(0, 0)`` (which is on
neither curve) stands for the identity, matching the all-zero byte encoding.
Reference arithmetic is implemented here in Jacobian coordinates; bulk work
(MSM, pairings) is delegated to :mod:`.native` after validation.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import ArgumentError, DecodeError
from . import native
from .field import R, as_ints

#: Base field modulus of BN254:
#: 21888242871839275222246405745257275088696311157297823662689037894645226208583
P = 21888242871839275222246405745257275088696311157297823662689037894645226208583

G1_B = 3
G1_GEN = (1, 2)

G2_GEN = (
    (
        10857046999023057135944570762232829481370756359578518086990519993285655852781,
        11559732032986387107991004021392285783925812861821192530917403151452391805634,
    ),
    (
        8495653923123431417604973247489272438418190587263600148770280649306958101930,
        4082367875863433681332203403145435568316851327593401208105741076214120093531,
    ),
)

G1_BYTES = 64
G2_BYTES = 128


# --- F_p2 = F_p[u] / (u^2 + 1) -------------------------------------------------

def fp2_add(a, b):
    return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)


def fp2_sub(a, b):
    return ((a[0] - b[0]) % P, (a[1] - b[1]) % P)


def fp2_mul(a, b):
    t0 = a[0] * b[0]
    t1 = a[1] * b[1]
    return ((t0 - t1) % P, ((a[0] + a[1]) * (b[0] + b[1]) - t0 - t1) % P)


def fp2_sqr(a):
    return fp2_mul(a, a)


def fp2_inv(a):
    norm = (a[0] * a[0] + a[1] * a[1]) % P
    if norm == 0:
        raise ArgumentError("inverse of zero in F_p2")
    ni = pow(norm, -1, P)
    return (a[0] * ni % P, -a[1] * ni % P)


def fp2_scale(a, k):
    return (a[0] * k % P, a[1] * k % P)


FP2_ZERO = (0, 0)
FP2_ONE = (1, 0)
G2_B = fp2_mul((3, 0), fp2_inv((9, 1)))


# --- generic Jacobian arithmetic, parameterised by the coordinate field --------

class _Ops:
    def __init__(self, add, sub, mul, zero, one, inv, scale):
        self.add, self.sub, self.mul = add, sub, mul
        self.zero, self.one, self.inv, self.scale = zero, one, inv, scale


_FP = _Ops(
    lambda a, b: (a + b) % P,
    lambda a, b: (a - b) % P,
    lambda a, b: a * b % P,
    0,
    1,
    lambda a: pow(a, -1, P),
    lambda a, k: a * k % P,
)
_FP2 = _Ops(fp2_add, fp2_sub, fp2_mul, FP2_ZERO, FP2_ONE, fp2_inv, fp2_scale)


def _jac_double(F, pt):
    X, Y, Z = pt
    if Z == F.zero or Y == F.zero:
        return (F.one, F.one, F.zero)
    A = F.mul(X, X)
    B = F.mul(Y, Y)
    C = F.mul(B, B)
    D = F.scale(F.sub(F.sub(F.mul(F.add(X, B), F.add(X, B)), A), C), 2)
    E = F.scale(A, 3)
    X3 = F.sub(F.mul(E, E), F.scale(D, 2))
    Y3 = F.sub(F.mul(E, F.sub(D, X3)), F.scale(C, 8))
    Z3 = F.scale(F.mul(Y, Z), 2)
    return (X3, Y3, Z3)


def _jac_add(F, p1, p2):
    if p1[2] == F.zero:
        return p2
    if p2[2] == F.zero:
        return p1
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    Z1Z1 = F.mul(Z1, Z1)
    Z2Z2 = F.mul(Z2, Z2)
    U1 = F.mul(X1, Z2Z2)
    U2 = F.mul(X2, Z1Z1)
    S1 = F.mul(F.mul(Y1, Z2), Z2Z2)
    S2 = F.mul(F.mul(Y2, Z1), Z1Z1)
    if U1 == U2:
        if S1 == S2:
            return _jac_double(F, p1)
        return (F.one, F.one, F.zero)
    H = F.sub(U2, U1)
    Rr = F.sub(S2, S1)
    H2 = F.mul(H, H)
    H3 = F.mul(H2, H)
    U1H2 = F.mul(U1, H2)
    X3 = F.sub(F.sub(F.mul(Rr, Rr), H3), F.scale(U1H2, 2))
    Y3 = F.sub(F.mul(Rr, F.sub(U1H2, X3)), F.mul(S1, H3))
    Z3 = F.mul(F.mul(H, Z1), Z2)
    return (X3, Y3, Z3)


def _to_jac(F, xy):
    if xy is None:
        return (F.one, F.one, F.zero)
    return (xy[0], xy[1], F.one)


def _from_jac(F, pt):
    X, Y, Z = pt
    if Z == F.zero:
        return None
    zi = F.inv(Z)
    zi2 = F.mul(zi, zi)
    return (F.mul(X, zi2), F.mul(F.mul(Y, zi2), zi))


def _scalar_mul(F, xy, k: int):
    """Left-to-right double-and-add; ``k`` is used as given (not reduced)."""
    acc = (F.one, F.one, F.zero)
    base = _to_jac(F, xy)
    for bit in bin(k)[2:] if k > 0 else "":
        acc = _jac_double(F, acc)
        if bit == "1":
            acc = _jac_add(F, acc, base)
    return _from_jac(F, acc)


def g1_on_curve(x: int, y: int) -> bool:
    return (y * y - x * x * x - G1_B) % P == 0


def g2_on_curve(x, y) -> bool:
    lhs = fp2_sqr(y)
    rhs = fp2_add(fp2_mul(fp2_sqr(x), x), G2_B)
    return lhs == rhs


class G1Point:
    """Affine point on y^2 = x^3 + 3 over F_p. Immutable."""

    __slots__ = ("x", "y", "_native")

    def __init__(self, x: int, y: int, _checked: bool = False):
        if not _checked and (x, y) != (0, 0):
            if not (0 <= x < P and 0 <= y < P) or not g1_on_curve(x, y):
                raise ArgumentError("point is not on the BN254 G1 curve")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "_native", None)

    def __setattr__(self, name, value):
        raise AttributeError("G1Point is immutable")

    @classmethod
    def identity(cls) -> G1Point:
        return cls(0, 0, _checked=True)

    @classmethod
    def generator(cls) -> G1Point:
        return cls(*G1_GEN, _checked=True)

    @classmethod
    def from_native(cls, pt) -> G1Point:
        if pt.is_zero():
            return cls.identity()
        # the backend's projective handle is dropped on purpose: bulk MSMs
        # run much faster on handles rebuilt from affine coordinates (z = 1)
        return cls(int(pt.x), int(pt.y), _checked=True)

    def native(self):
        if self._native is None:
            pt = native.g1_identity() if self.is_identity() else native.g1(self.x, self.y)
            object.__setattr__(self, "_native", pt)
        return self._native

    def is_identity(self) -> bool:
        return self.x == 0 and self.y == 0

    def _affine(self):
        return None if self.is_identity() else (self.x, self.y)

    @classmethod
    def _wrap(cls, xy) -> G1Point:
        return cls.identity() if xy is None else cls(xy[0], xy[1], _checked=True)

    def __add__(self, other: G1Point) -> G1Point:
        if native.available():
            return G1Point.from_native(self.native() + other.native())
        return self.add_reference(other)

    def __neg__(self) -> G1Point:
        if self.is_identity():
            return self
        return G1Point(self.x, (-self.y) % P, _checked=True)

    def __sub__(self, other: G1Point) -> G1Point:
        return self + (-other)

    def __mul__(self, k) -> G1Point:
        k = int(k) % R
        if native.available():
            return G1Point.from_native(self.native() * k)
        return self.mul_reference(k)

    __rmul__ = __mul__

    def add_reference(self, other: G1Point) -> G1Point:
        acc = _jac_add(_FP, _to_jac(_FP, self._affine()), _to_jac(_FP, other._affine()))
        return G1Point._wrap(_from_jac(_FP, acc))

    def mul_reference(self, k: int) -> G1Point:
        """Pure-Python double-and-add, independent of the native backend."""
        return G1Point._wrap(_scalar_mul(_FP, self._affine(), k))

    def __eq__(self, other):
        if not isinstance(other, G1Point):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash(("G1", self.x, self.y))

    def __repr__(self):
        if self.is_identity():
            return "G1Point(identity)"
        return f"G1Point({self.x:#x}, {self.y:#x})"

    def to_bytes(self) -> bytes:
        return self.x.to_bytes(32, "little") + self.y.to_bytes(32, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> G1Point:
        if len(data) != G1_BYTES:
            raise DecodeError(f"G1 encoding must be {G1_BYTES} bytes, got {len(data)}")
        x = int.from_bytes(data[:32], "little")
        y = int.from_bytes(data[32:], "little")
        if x == 0 and y == 0:
            return cls.identity()
        if x >= P or y >= P or not g1_on_curve(x, y):
            raise DecodeError("G1 encoding is not a curve point")
        return cls(x, y, _checked=True)


class G2Point:
    """Affine point on the twist y^2 = x^3 + 3/(9+u) over F_p2, in the r-torsion."""

    __slots__ = ("x", "y", "_native")

    def __init__(self, x, y, _checked: bool = False):
        x = (int(x[0]), int(x[1]))
        y = (int(y[0]), int(y[1]))
        if not _checked and (x, y) != (FP2_ZERO, FP2_ZERO):
            if not all(0 <= c < P for c in x + y) or not g2_on_curve(x, y):
                raise ArgumentError("point is not on the BN254 G2 twist")
            if _scalar_mul(_FP2, (x, y), R) is not None:
                raise ArgumentError("point is not in the order-r subgroup of G2")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "_native", None)

    def __setattr__(self, name, value):
        raise AttributeError("G2Point is immutable")

    @classmethod
    def identity(cls) -> G2Point:
        return cls(FP2_ZERO, FP2_ZERO, _checked=True)

    @classmethod
    def generator(cls) -> G2Point:
        return cls(*G2_GEN, _checked=True)

    @classmethod
    def from_native(cls, pt) -> G2Point:
        if pt.is_zero():
            return cls.identity()
        out = cls(tuple(pt.x), tuple(pt.y), _checked=True)
        object.__setattr__(out, "_native", pt)
        return out

    def native(self):
        if self._native is None:
            if self.is_identity():
                pt = native.g2_generator() * 0
            else:
                pt = native.g2(self.x[0], self.x[1], self.y[0], self.y[1])
            object.__setattr__(self, "_native", pt)
        return self._native

    def is_identity(self) -> bool:
        return self.x == FP2_ZERO and self.y == FP2_ZERO

    def _affine(self):
        return None if self.is_identity() else (self.x, self.y)

    def __neg__(self) -> G2Point:
        if self.is_identity():
            return self
        return G2Point(self.x, fp2_sub(FP2_ZERO, self.y), _checked=True)

    def __add__(self, other: G2Point) -> G2Point:
        acc = _jac_add(_FP2, _to_jac(_FP2, self._affine()), _to_jac(_FP2, other._affine()))
        xy = _from_jac(_FP2, acc)
        return G2Point.identity() if xy is None else G2Point(*xy, _checked=True)

    def __mul__(self, k) -> G2Point:
        k = int(k) % R
        if native.available():
            return G2Point.from_native(self.native() * k)
        return self.mul_reference(k)

    __rmul__ = __mul__

    def mul_reference(self, k: int) -> G2Point:
        xy = _scalar_mul(_FP2, self._affine(), k)
        return G2Point.identity() if xy is None else G2Point(*xy, _checked=True)

    def __eq__(self, other):
        if not isinstance(other, G2Point):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash(("G2", self.x, self.y))

    def __repr__(self):
        if self.is_identity():
            return "G2Point(identity)"
        return f"G2Point({self.x[0]:#x}...)"

    def to_bytes(self) -> bytes:
        return b"".join(c.to_bytes(32, "little") for c in self.x + self.y)

    @classmethod
    def from_bytes(cls, data: bytes) -> G2Point:
        if len(data) != G2_BYTES:
            raise DecodeError(f"G2 encoding must be {G2_BYTES} bytes, got {len(data)}")
        c = [int.from_bytes(data[i:i + 32], "little") for i in range(0, 128, 32)]
        if not any(c):
            return cls.identity()
        try:
            return cls((c[0], c[1]), (c[2], c[3]))
        except ArgumentError as exc:
            raise DecodeError(str(exc)) from None


def msm(points: Sequence[G1Point], scalars: Sequence) -> G1Point:
    """Sum of scalars[i] * points[i]."""
    if len(points) != len(scalars):
        raise ArgumentError(f"msm: {len(points)} points but {len(scalars)} scalars")
    if not points:
        return G1Point.identity()
    ks = as_ints(scalars)
    if native.available():
        return G1Point.from_native(native.msm_g1([p.native() for p in points], ks))
    acc = G1Point.identity()
    for p, k in zip(points, ks):
        acc = acc.add_reference(p.mul_reference(k))
    return acc


def pairing_check(terms: Sequence[tuple[G1Point, G2Point]]) -> bool:
    """True iff the product of e(P_i, Q_i) is the identity of G_T."""
    for p, q in terms:
        if not isinstance(p, G1Point) or not isinstance(q, G2Point):
            raise DecodeError("pairing_check expects (G1Point, G2Point) pairs")
    if not terms:
        return True
    return native.pairing_product_is_one([p.native() for p, _ in terms], [q.native() for _, q in terms])
