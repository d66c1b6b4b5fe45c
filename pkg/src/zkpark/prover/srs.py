"""Powers-of-tau reference string from a seed (test/demo setup only)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..algebra import native
from ..algebra.curve import G1_BYTES, G2_BYTES, G1Point, G2Point
from ..algebra.field import R
from ..errors import DecodeError

_MAGIC = b"ZKPSRS01"


def tau_from_seed(tau_seed: bytes) -> int:
    """The secret tau. Only tests (as an evaluation oracle) should ever call this."""
    counter = 0
    while True:
        digest = hashlib.sha512(b"zkpark-srs-tau" + counter.to_bytes(4, "little") + tau_seed).digest()
        tau = int.from_bytes(digest, "little") % R
        if tau > 1:
            return tau
        counter += 1


@dataclass(eq=False)
class SRS:
    g1_powers: list[G1Point]
    g2_gen: G2Point
    g2_tau: G2Point
    #: the trapdoor was derived from a public seed; never use for real deployments
    unsafe_for_production: bool = True
    _native_g1: list = field(default=None, repr=False)

    @property
    def max_degree(self) -> int:
        return len(self.g1_powers) - 1

    def native_g1(self) -> list:
        if self._native_g1 is None:
            self._native_g1 = [p.native() for p in self.g1_powers]
        return self._native_g1

    def commit(self, coeffs: list[int]) -> G1Point:
        """KZG commitment [p(tau)]_1 for a coefficient vector."""
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) > len(self.g1_powers):
            raise ValueError(f"polynomial of degree {len(coeffs) - 1} exceeds SRS degree {self.max_degree}")
        return G1Point.from_native(native.msm_g1(self.native_g1()[: len(coeffs)], coeffs))

    def to_bytes(self) -> bytes:
        parts = [_MAGIC, len(self.g1_powers).to_bytes(8, "little")]
        parts += [p.to_bytes() for p in self.g1_powers]
        parts += [self.g2_gen.to_bytes(), self.g2_tau.to_bytes()]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> SRS:
        if data[:8] != _MAGIC or len(data) < 16:
            raise DecodeError("not an SRS blob")
        count = int.from_bytes(data[8:16], "little")
        expected = 16 + count * G1_BYTES + 2 * G2_BYTES
        if len(data) != expected:
            raise DecodeError(f"SRS blob should be {expected} bytes, got {len(data)}")
        off = 16
        g1 = []
        for _ in range(count):
            g1.append(G1Point.from_bytes(data[off:off + G1_BYTES]))
            off += G1_BYTES
        g2_gen = G2Point.from_bytes(data[off:off + G2_BYTES])
        g2_tau = G2Point.from_bytes(data[off + G2_BYTES:off + 2 * G2_BYTES])
        return cls(g1, g2_gen, g2_tau)


def trusted_setup(max_degree: int, tau_seed: bytes) -> SRS:
    """[tau^0]_1 .. [tau^max_degree]_1 plus [1]_2, [tau]_2.

    tau is derived from ``tau_seed`` and dropped afterwards, so the output is
    reproducible and, for the same reason, UNSAFE FOR PRODUCTION.
    """
    tau = tau_from_seed(tau_seed)
    gen = native.g1_generator()
    powers = []
    t = 1
    for _ in range(max_degree + 1):
        powers.append(G1Point.from_native(gen * t))
        t = t * tau % R
    g2 = G2Point.generator()
    srs = SRS(powers, g2, g2 * tau)
    del tau
    return srs
