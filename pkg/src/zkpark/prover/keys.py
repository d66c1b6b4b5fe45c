"""Circuit preprocessing into proving and verifying keys."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from gmpy2 import mpz

from ..algebra.curve import G1_BYTES, G2_BYTES, G1Point, G2Point
from ..algebra.field import GENERATOR, R, inv_mod
from ..algebra.poly import EvaluationDomain, coset_fft_ints, ifft_ints
from ..circuit import K1, K2, ConstraintSystem
from ..errors import CapacityError, ConfigError, DecodeError
from .srs import SRS

#: polynomial degree headroom needed above n: t_hi carries n + 6 coefficients
BLINDING_MARGIN = 6
SELECTORS = ("q_m", "q_l", "q_r", "q_o", "q_c")
PERMUTATIONS = ("s1", "s2", "s3")
COMMITMENT_ORDER = SELECTORS + PERMUTATIONS


@dataclass(frozen=True)
class VerifyingKey:
    n: int
    commitments: dict[str, G1Point]
    g2_gen: G2Point
    g2_tau: G2Point
    public_positions: tuple[int, ...]

    @property
    def domain(self) -> EvaluationDomain:
        return EvaluationDomain(self.n)

    def to_bytes(self) -> bytes:
        """domain size (u64 LE) | count (u32 LE) | G1 commitments | [1]_2 | [tau]_2 | publics."""
        parts = [self.n.to_bytes(8, "little"), len(COMMITMENT_ORDER).to_bytes(4, "little")]
        parts += [self.commitments[name].to_bytes() for name in COMMITMENT_ORDER]
        parts += [self.g2_gen.to_bytes(), self.g2_tau.to_bytes()]
        parts.append(len(self.public_positions).to_bytes(4, "little"))
        parts += [p.to_bytes(4, "little") for p in self.public_positions]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> VerifyingKey:
        try:
            n = int.from_bytes(data[0:8], "little")
            count = int.from_bytes(data[8:12], "little")
            if count != len(COMMITMENT_ORDER):
                raise DecodeError(f"expected {len(COMMITMENT_ORDER)} commitments, got {count}")
            off = 12
            comms = {}
            for name in COMMITMENT_ORDER:
                comms[name] = G1Point.from_bytes(data[off:off + G1_BYTES])
                off += G1_BYTES
            g2_gen = G2Point.from_bytes(data[off:off + G2_BYTES])
            g2_tau = G2Point.from_bytes(data[off + G2_BYTES:off + 2 * G2_BYTES])
            off += 2 * G2_BYTES
            n_pub = int.from_bytes(data[off:off + 4], "little")
            off += 4
            positions = tuple(int.from_bytes(data[off + 4 * i:off + 4 * i + 4], "little") for i in range(n_pub))
            off += 4 * n_pub
        except (IndexError, ValueError) as exc:
            if isinstance(exc, DecodeError):
                raise
            raise DecodeError(f"malformed verifying key: {exc}") from None
        if off != len(data):
            raise DecodeError("trailing bytes after verifying key")
        if n < 4 or n & (n - 1):
            raise DecodeError("verifying key domain size is not a power of two")
        return cls(n, comms, g2_gen, g2_tau, positions)

    def digest(self) -> bytes:
        return hashlib.sha256(self.to_bytes()).digest()


@dataclass(eq=False)
class ProvingKey:
    cs: ConstraintSystem
    srs: SRS
    domain: EvaluationDomain
    coeffs: dict[str, list[int]]  # selectors and s1..s3, coefficient form
    coset: dict[str, list]  # same polynomials plus "l1" on the 4n coset, as gmpy2 mpz
    sigma_evals: tuple[list[int], list[int], list[int]]
    vk: VerifyingKey
    vk_digest: bytes


def check_coset_shifts(n: int) -> None:
    """H, K1*H and K2*H must be pairwise disjoint."""
    for k in (K1, K2, K2 * inv_mod(K1)):
        if pow(k, n, R) == 1:
            raise ConfigError(f"coset shift {k} collides with the size-{n} domain")


def permutation_evals(cs: ConstraintSystem, domain: EvaluationDomain) -> tuple[list[int], list[int], list[int]]:
    n = domain.size
    elements = domain.elements()
    shifts = (1, K1, K2)
    ids = [shifts[s // n] * elements[s % n] % R for s in range(3 * n)]
    sigma = cs.copy_permutation
    return tuple([ids[sigma[col * n + i]] for i in range(n)] for col in range(3))


def preprocess(cs: ConstraintSystem, srs: SRS) -> tuple[ProvingKey, VerifyingKey]:
    n = cs.n_gates
    if srs.max_degree < n + BLINDING_MARGIN - 1:
        raise CapacityError(f"SRS degree {srs.max_degree} too small for {n} gates (need {n + BLINDING_MARGIN - 1})")
    check_coset_shifts(n)
    domain = EvaluationDomain(n)
    sig = permutation_evals(cs, domain)
    evals = {
        "q_m": list(cs.q_m),
        "q_l": list(cs.q_l),
        "q_r": list(cs.q_r),
        "q_o": list(cs.q_o),
        "q_c": list(cs.q_c),
        "s1": sig[0],
        "s2": sig[1],
        "s3": sig[2],
    }
    coeffs = {name: ifft_ints(v, n) for name, v in evals.items()}
    coset = {name: coset_fft_ints(c, 4 * n, GENERATOR) for name, c in coeffs.items()}
    l1_coeffs = [inv_mod(n)] * n  # Lagrange basis polynomial of row 0
    coset["l1"] = coset_fft_ints(l1_coeffs, 4 * n, GENERATOR)
    coset = {name: [mpz(v) for v in vals] for name, vals in coset.items()}
    commitments = {name: srs.commit(coeffs[name]) for name in COMMITMENT_ORDER}
    vk = VerifyingKey(n, commitments, srs.g2_gen, srs.g2_tau, tuple(cs.public_positions))
    pk = ProvingKey(cs, srs, domain, coeffs, coset, sig, vk, vk.digest())
    return pk, vk
