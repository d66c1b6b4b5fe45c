"""Polynomials over F_r and radix-2 evaluation domains."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from ..errors import ArgumentError, ConfigError
from . import native
from .field import GENERATOR, R, TWO_ADICITY, FieldElement, as_ints, inv_mod

# Below this size the pure-Python transform beats the FFI round trip.
NATIVE_FFT_THRESHOLD = 1 << 10


def _trim(coeffs: list[int]) -> list[int]:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


class Polynomial:
    """Dense polynomial, lowest-degree coefficient first. Zero is ``()``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):
        self.coeffs: tuple[int, ...] = tuple(_trim(as_ints(coeffs)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def field_coeffs(self) -> list[FieldElement]:
        return [FieldElement(c) for c in self.coeffs]

    def __call__(self, x) -> FieldElement:
        return FieldElement(horner(self.coeffs, int(x)))

    def __add__(self, other: Polynomial) -> Polynomial:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % R
        return Polynomial(out)

    def __neg__(self) -> Polynomial:
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other) -> Polynomial:
        if not isinstance(other, Polynomial):
            s = int(other) % R
            return Polynomial([c * s for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Polynomial()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Polynomial([c % R for c in out])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial(degree={self.degree})"

    def divide_by_linear(self, root) -> tuple[Polynomial, FieldElement]:
        """Return (q, rem) with self = q * (X - root) + rem."""
        q, rem = divide_by_linear(list(self.coeffs), int(root) % R)
        return Polynomial(q), FieldElement(rem)


def horner(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % R
    return acc


def divide_by_linear(coeffs: list[int], root: int) -> tuple[list[int], int]:
    """Synthetic division by (X - root)."""
    if not coeffs:
        return [], 0
    n = len(coeffs)
    q = [0] * (n - 1)
    acc = 0
    for i in range(n - 1, 0, -1):
        acc = (acc * root + coeffs[i]) % R
        q[i - 1] = acc
    rem = (acc * root + coeffs[0]) % R
    return q, rem


@lru_cache(maxsize=None)
def root_of_unity(n: int) -> int:
    """omega = g^((r-1)/n) for the fixed generator g = 5."""
    if n < 1 or n & (n - 1):
        raise ConfigError(f"domain size must be a power of two, got {n}")
    if n.bit_length() - 1 > TWO_ADICITY:
        raise ConfigError(f"domain size 2^{n.bit_length() - 1} exceeds the field's 2-adicity")
    return pow(GENERATOR, (R - 1) // n, R)


@dataclass(frozen=True)
class EvaluationDomain:
    """H = {1, omega, ..., omega^(n-1)} for a power-of-two n."""

    size: int
    omega: int = field(init=False)
    omega_inv: int = field(init=False)
    size_inv: int = field(init=False)

    def __post_init__(self):
        omega = root_of_unity(self.size)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "omega_inv", inv_mod(omega))
        object.__setattr__(self, "size_inv", inv_mod(self.size))

    @property
    def log_size(self) -> int:
        return self.size.bit_length() - 1

    def element(self, i: int) -> int:
        return pow(self.omega, i % self.size, R)

    def elements(self) -> list[int]:
        out = [1] * self.size
        for i in range(1, self.size):
            out[i] = out[i - 1] * self.omega % R
        return out

    def vanishing_eval(self, zeta) -> FieldElement:
        return vanishing_poly_eval(self, zeta)

    def lagrange_eval(self, i: int, zeta: int) -> int:
        """L_i(zeta) = omega^i (zeta^n - 1) / (n (zeta - omega^i))."""
        wi = self.element(i)
        zeta %= R
        if zeta == wi:
            return 1
        zh = (pow(zeta, self.size, R) - 1) % R
        return wi * zh % R * inv_mod(self.size * (zeta - wi)) % R


def _bit_reverse(values: list[int]) -> list[int]:
    n = len(values)
    bits = n.bit_length() - 1
    out = [0] * n
    for i, v in enumerate(values):
        out[int(format(i, f"0{bits}b")[::-1], 2) if bits else 0] = v
    return out


def _fft_py(values: list[int], omega: int) -> list[int]:
    """Iterative Cooley-Tukey over F_r; len(values) must be a power of two."""
    n = len(values)
    a = _bit_reverse(values)
    half = 1
    while half < n:
        step = pow(omega, n // (2 * half), R)
        twiddles = [1] * half
        for k in range(1, half):
            twiddles[k] = twiddles[k - 1] * step % R
        for start in range(0, n, 2 * half):
            for k in range(half):
                u = a[start + k]
                v = a[start + k + half] * twiddles[k] % R
                a[start + k] = (u + v) % R
                a[start + k + half] = (u - v) % R
        half *= 2
    return a


def fft_ints(values: Sequence[int], n: int) -> list[int]:
    """Evaluate the coefficient vector ``values`` (len <= n) on the size-n domain."""
    if len(values) > n:
        raise ArgumentError(f"{len(values)} coefficients do not fit a domain of size {n}")
    omega = root_of_unity(n)
    padded = list(values) + [0] * (n - len(values))
    if n >= NATIVE_FFT_THRESHOLD and native.available():
        return native.fft(padded, n)
    return _fft_py(padded, omega)


def ifft_ints(values: Sequence[int], n: int) -> list[int]:
    if len(values) != n:
        raise ArgumentError(f"ifft expects exactly {n} evaluations, got {len(values)}")
    root_of_unity(n)
    if n >= NATIVE_FFT_THRESHOLD and native.available():
        return native.ifft(list(values), n)
    out = _fft_py(list(values), inv_mod(root_of_unity(n)))
    n_inv = inv_mod(n)
    return [v * n_inv % R for v in out]


def coset_fft_ints(coeffs: Sequence[int], n: int, shift: int = GENERATOR) -> list[int]:
    """Evaluate on shift * H_n."""
    scaled = []
    s = 1
    for c in coeffs:
        scaled.append(c * s % R)
        s = s * shift % R
    return fft_ints(scaled, n)


def coset_ifft_ints(evals: Sequence[int], n: int, shift: int = GENERATOR) -> list[int]:
    coeffs = ifft_ints(evals, n)
    s_inv = inv_mod(shift)
    s = 1
    for i in range(n):
        coeffs[i] = coeffs[i] * s % R
        s = s * s_inv % R
    return coeffs


def fft(poly: Polynomial, domain: EvaluationDomain) -> list[FieldElement]:
    """Evaluations ``[poly(omega^i) for i in range(n)]``."""
    return [FieldElement(v) for v in fft_ints(poly.coeffs, domain.size)]


def ifft(evals: Sequence, domain: EvaluationDomain) -> Polynomial:
    return Polynomial(ifft_ints(as_ints(evals), domain.size))


def vanishing_poly_eval(domain: EvaluationDomain, zeta) -> FieldElement:
    """Z_H(zeta) = zeta^n - 1."""
    return FieldElement(pow(int(zeta) % R, domain.size, R) - 1)
