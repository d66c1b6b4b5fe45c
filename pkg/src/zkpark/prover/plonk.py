"""PLONK prover and verifier with KZG commitments.

Five prover rounds: blinded wire commitments, the permutation accumulator z,
the quotient t split into three chunks, evaluations at zeta, and two opening
proofs (at zeta and zeta*omega) over the linearisation polynomial r.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpz

from ..algebra.curve import G1_BYTES, G1Point, msm, pairing_check
from ..algebra.field import GENERATOR, R, batch_inverse, decode_int, encode_int, inv_mod
from ..algebra.poly import coset_fft_ints, coset_ifft_ints, divide_by_linear, horner, ifft_ints, root_of_unity
from ..circuit import K1, K2, PublicInputs, Witness, check_satisfied, wire_values
from ..errors import ArgumentError, DecodeError, UnsatisfiedWitness
from .keys import ProvingKey, VerifyingKey
from .transcript import Transcript

POINT_FIELDS = ("a", "b", "c", "z", "t_lo", "t_mid", "t_hi", "w_zeta", "w_zeta_omega")
EVAL_FIELDS = ("a_bar", "b_bar", "c_bar", "s1_bar", "s2_bar", "z_omega_bar")
PROOF_BYTES = len(POINT_FIELDS) * G1_BYTES + len(EVAL_FIELDS) * 32


@dataclass(frozen=True)
class Proof:
    a: G1Point
    b: G1Point
    c: G1Point
    z: G1Point
    t_lo: G1Point
    t_mid: G1Point
    t_hi: G1Point
    w_zeta: G1Point
    w_zeta_omega: G1Point
    a_bar: int
    b_bar: int
    c_bar: int
    s1_bar: int
    s2_bar: int
    z_omega_bar: int

    def to_bytes(self) -> bytes:
        parts = [getattr(self, f).to_bytes() for f in POINT_FIELDS]
        parts += [encode_int(getattr(self, f)) for f in EVAL_FIELDS]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> Proof:
        if not isinstance(data, (bytes, bytearray)) or len(data) != PROOF_BYTES:
            got = len(data) if isinstance(data, (bytes, bytearray)) else type(data).__name__
            raise DecodeError(f"proof must be {PROOF_BYTES} bytes, got {got}")
        data = bytes(data)
        values = {}
        off = 0
        for name in POINT_FIELDS:
            values[name] = G1Point.from_bytes(data[off:off + G1_BYTES])
            off += G1_BYTES
        for name in EVAL_FIELDS:
            values[name] = decode_int(data[off:off + 32])
            off += 32
        return cls(**values)


def serialize(proof: Proof) -> bytes:
    return proof.to_bytes()


def deserialize(data: bytes) -> Proof:
    return Proof.from_bytes(data)


@dataclass(frozen=True)
class Challenges:
    beta: int
    gamma: int
    alpha: int
    zeta: int
    v: int
    u: int


def _public_list(publics) -> list[int]:
    if isinstance(publics, PublicInputs):
        return publics.as_list()
    return [int(x) % R for x in publics]


def _start_transcript(vk_digest: bytes, publics: list[int]) -> Transcript:
    tr = Transcript()
    tr.absorb(b"vk", vk_digest)
    for x in publics:
        tr.absorb_scalar(b"public", x)
    return tr


def derive_challenges(vk_digest: bytes, publics, proof: Proof) -> Challenges:
    """Replay the Fiat-Shamir transcript for a finished proof."""
    tr = _start_transcript(vk_digest, _public_list(publics))
    for name in ("a", "b", "c"):
        tr.absorb_point(name.encode(), getattr(proof, name))
    beta = tr.challenge(b"beta")
    gamma = tr.challenge(b"gamma")
    tr.absorb_point(b"z", proof.z)
    alpha = tr.challenge(b"alpha")
    for name in ("t_lo", "t_mid", "t_hi"):
        tr.absorb_point(name.encode(), getattr(proof, name))
    zeta = tr.challenge(b"zeta")
    for name in EVAL_FIELDS:
        tr.absorb_scalar(name.encode(), getattr(proof, name))
    v = tr.challenge(b"v")
    tr.absorb_point(b"w_zeta", proof.w_zeta)
    tr.absorb_point(b"w_zeta_omega", proof.w_zeta_omega)
    u = tr.challenge(b"u")
    return Challenges(beta, gamma, alpha, zeta, v, u)


def _blind(coeffs: list[int], blinders: Sequence[int], n: int) -> list[int]:
    """coeffs + (b_0 X^(k-1) + ... + b_(k-1)) * (X^n - 1)."""
    k = len(blinders)
    out = list(coeffs) + [0] * (n + k - len(coeffs))
    for j, bj in enumerate(reversed(blinders)):  # bj multiplies X^j
        out[j] = (out[j] - bj) % R
        out[n + j] = (out[n + j] + bj) % R
    return out


def _lin(terms: Sequence[tuple[int, Sequence[int]]], length: int) -> list[int]:
    out = [0] * length
    for scale, vec in terms:
        if scale % R == 0:
            continue
        for i, x in enumerate(vec):
            out[i] += scale * x
    return [x % R for x in out]


def public_input_eval(domain_n: int, omega: int, positions: Sequence[int], publics: Sequence[int], zeta: int) -> int:
    """PI(zeta) = sum_i -x_i L_{pos_i}(zeta); only as many Lagrange terms as publics."""
    zh = (pow(zeta, domain_n, R) - 1) % R
    total = 0
    for pos, x in zip(positions, publics):
        wi = pow(omega, pos, R)
        if zeta == wi:
            total -= x
            continue
        total -= x * wi % R * zh % R * inv_mod(domain_n * (zeta - wi) % R)
    return total % R


def _quotient_evals(A, B, C, Z, PI, cos, beta, gamma, alpha, zh_inv, omega4) -> list[int]:
    """Numerator of t on the coset, divided pointwise by Z_H. gmpy2 carries the hot loop."""
    n4 = len(A)
    Rm = mpz(R)
    A, B, C, Z, PI = (list(map(mpz, v)) for v in (A, B, C, Z, PI))
    qm, ql, qr, qo, qc = (cos[k] for k in ("q_m", "q_l", "q_r", "q_o", "q_c"))
    s1c, s2c, s3c, l1c = (cos[k] for k in ("s1", "s2", "s3", "l1"))
    beta, gamma, alpha = mpz(beta), mpz(gamma), mpz(alpha)
    alpha2 = alpha * alpha % Rm
    zh_inv = [mpz(v) for v in zh_inv]
    omega4 = mpz(omega4)
    out = [0] * n4
    x = mpz(GENERATOR)
    for j in range(n4):
        aj, bj, cj, zj = A[j], B[j], C[j], Z[j]
        zw = Z[(j + 4) % n4]
        gate = qm[j] * aj % Rm * bj + ql[j] * aj + qr[j] * bj + qo[j] * cj + qc[j] + PI[j]
        ag, bg, cg = aj + gamma, bj + gamma, cj + gamma
        bx = beta * x
        perm1 = (ag + bx) * (bg + bx * K1) % Rm * (cg + bx * K2) % Rm * zj
        perm2 = (ag + beta * s1c[j]) * (bg + beta * s2c[j]) % Rm * (cg + beta * s3c[j]) % Rm * zw
        num = gate + alpha * ((perm1 - perm2) % Rm) + alpha2 * (zj - 1) % Rm * l1c[j]
        out[j] = int(num % Rm * zh_inv[j & 3] % Rm)
        x = x * omega4 % Rm
    return out


def prove(pk: ProvingKey, publics: PublicInputs, witness: Witness, rng=None) -> Proof:
    """``rng`` (anything with ``randrange``) is for reproducible tests; default is the OS CSPRNG."""
    cs = pk.cs
    if not check_satisfied(cs, witness, publics):
        raise UnsatisfiedWitness("witness does not satisfy the circuit for these public inputs")

    def rand() -> int:
        return secrets.randbelow(R) if rng is None else rng.randrange(R)

    n = pk.domain.size
    n4 = 4 * n
    omega = pk.domain.omega
    srs = pk.srs
    pub = _public_list(publics)
    tr = _start_transcript(pk.vk_digest, pub)

    # round 1: wires
    a_ev, b_ev, c_ev = wire_values(cs, witness)
    a_poly = _blind(ifft_ints(a_ev, n), [rand(), rand()], n)
    b_poly = _blind(ifft_ints(b_ev, n), [rand(), rand()], n)
    c_poly = _blind(ifft_ints(c_ev, n), [rand(), rand()], n)
    a_cm, b_cm, c_cm = srs.commit(a_poly), srs.commit(b_poly), srs.commit(c_poly)
    tr.absorb_point(b"a", a_cm)
    tr.absorb_point(b"b", b_cm)
    tr.absorb_point(b"c", c_cm)
    beta = tr.challenge(b"beta")
    gamma = tr.challenge(b"gamma")

    # round 2: permutation accumulator
    s1_ev, s2_ev, s3_ev = pk.sigma_evals
    nums = []
    dens = []
    w = 1
    bk1, bk2 = beta * K1 % R, beta * K2 % R
    for i in range(n):
        ai, bi, ci = a_ev[i] + gamma, b_ev[i] + gamma, c_ev[i] + gamma
        nums.append((ai + beta * w) * (bi + bk1 * w) % R * (ci + bk2 * w) % R)
        dens.append((ai + beta * s1_ev[i]) * (bi + beta * s2_ev[i]) % R * (ci + beta * s3_ev[i]) % R)
        w = w * omega % R
    dens_inv = batch_inverse(dens)
    z_ev = [1] * n
    acc = 1
    for i in range(n - 1):
        acc = acc * nums[i] % R * dens_inv[i] % R
        z_ev[i + 1] = acc
    if acc * nums[n - 1] % R * dens_inv[n - 1] % R != 1:
        raise UnsatisfiedWitness("copy constraints do not close")
    z_poly = _blind(ifft_ints(z_ev, n), [rand(), rand(), rand()], n)
    z_cm = srs.commit(z_poly)
    tr.absorb_point(b"z", z_cm)
    alpha = tr.challenge(b"alpha")

    # round 3: quotient on the coset GENERATOR * H_4n
    pi_ev = [0] * n
    for pos, x in zip(cs.public_positions, pub):
        pi_ev[pos] = -x % R
    pi_poly = ifft_ints(pi_ev, n)
    A = coset_fft_ints(a_poly, n4)
    B = coset_fft_ints(b_poly, n4)
    C = coset_fft_ints(c_poly, n4)
    Z = coset_fft_ints(z_poly, n4)
    PI = coset_fft_ints(pi_poly, n4)
    cos = pk.coset
    qm, ql, qr, qo, qc = cos["q_m"], cos["q_l"], cos["q_r"], cos["q_o"], cos["q_c"]
    s1c, s2c, s3c, l1c = cos["s1"], cos["s2"], cos["s3"], cos["l1"]
    omega4 = root_of_unity(n4)
    shift_n = pow(GENERATOR, n, R)
    zh_inv = batch_inverse([(shift_n * pow(omega4, n * j, R) - 1) % R for j in range(4)])
    t_ev = _quotient_evals(A, B, C, Z, PI, cos, beta, gamma, alpha, zh_inv, omega4)
    t_poly = coset_ifft_ints(t_ev, n4)
    if any(t_poly[3 * n + 6:]):
        raise UnsatisfiedWitness("quotient is not a polynomial; constraints are violated")
    t_lo, t_mid, t_hi = t_poly[:n], t_poly[n:2 * n], t_poly[2 * n:3 * n + 6]
    t_lo_cm, t_mid_cm, t_hi_cm = srs.commit(t_lo), srs.commit(t_mid), srs.commit(t_hi)
    tr.absorb_point(b"t_lo", t_lo_cm)
    tr.absorb_point(b"t_mid", t_mid_cm)
    tr.absorb_point(b"t_hi", t_hi_cm)
    zeta = tr.challenge(b"zeta")

    # round 4: evaluations
    alpha2 = alpha * alpha % R
    zeta_omega = zeta * omega % R
    coeffs = pk.coeffs
    a_bar = horner(a_poly, zeta)
    b_bar = horner(b_poly, zeta)
    c_bar = horner(c_poly, zeta)
    s1_bar = horner(coeffs["s1"], zeta)
    s2_bar = horner(coeffs["s2"], zeta)
    z_omega_bar = horner(z_poly, zeta_omega)
    evals = (a_bar, b_bar, c_bar, s1_bar, s2_bar, z_omega_bar)
    for name, val in zip(EVAL_FIELDS, evals):
        tr.absorb_scalar(name.encode(), val)
    v = tr.challenge(b"v")

    # round 5: linearisation and openings
    zh_zeta = (pow(zeta, n, R) - 1) % R
    l1_zeta = pk.domain.lagrange_eval(0, zeta)
    pi_zeta = public_input_eval(n, omega, cs.public_positions, pub, zeta)
    perm_a = (a_bar + beta * zeta + gamma) * (b_bar + bk1 * zeta + gamma) % R * (c_bar + bk2 * zeta + gamma) % R
    perm_b = (a_bar + beta * s1_bar + gamma) * (b_bar + beta * s2_bar + gamma) % R
    zeta_n = pow(zeta, n, R)
    r_len = n + 6
    r_poly = _lin(
        [
            (a_bar * b_bar, coeffs["q_m"]),
            (a_bar, coeffs["q_l"]),
            (b_bar, coeffs["q_r"]),
            (c_bar, coeffs["q_o"]),
            (1, coeffs["q_c"]),
            (alpha * perm_a + alpha2 * l1_zeta, z_poly),
            (-alpha * perm_b % R * beta % R * z_omega_bar, coeffs["s3"]),
            (-zh_zeta, t_lo),
            (-zh_zeta * zeta_n, t_mid),
            (-zh_zeta * zeta_n % R * zeta_n, t_hi),
        ],
        r_len,
    )
    r0 = (pi_zeta - alpha * perm_b % R * (c_bar + gamma) % R * z_omega_bar - alpha2 * l1_zeta) % R
    r_poly[0] = (r_poly[0] + r0) % R
    if horner(r_poly, zeta) != 0:
        raise UnsatisfiedWitness("linearisation polynomial does not vanish at zeta")
    v2 = v * v % R
    v3 = v2 * v % R
    v4 = v3 * v % R
    v5 = v4 * v % R
    w_num = _lin(
        [(1, r_poly), (v, a_poly), (v2, b_poly), (v3, c_poly), (v4, coeffs["s1"]), (v5, coeffs["s2"])],
        r_len,
    )
    w_num[0] = (w_num[0] - v * a_bar - v2 * b_bar - v3 * c_bar - v4 * s1_bar - v5 * s2_bar) % R
    w_zeta, rem = divide_by_linear(w_num, zeta)
    if rem:
        raise UnsatisfiedWitness("opening at zeta has a remainder")
    zw_num = list(z_poly)
    zw_num[0] = (zw_num[0] - z_omega_bar) % R
    w_zeta_omega, rem = divide_by_linear(zw_num, zeta_omega)
    if rem:
        raise UnsatisfiedWitness("opening at zeta*omega has a remainder")
    return Proof(
        a_cm, b_cm, c_cm, z_cm, t_lo_cm, t_mid_cm, t_hi_cm,
        srs.commit(w_zeta), srs.commit(w_zeta_omega),
        *evals,
    )


def verify(vk: VerifyingKey, publics, proof: Proof | bytes) -> bool:
    """True iff the KZG opening check holds with transcript-derived challenges.

    Byte input is decoded first; a malformed blob raises DecodeError.
    """
    if isinstance(proof, (bytes, bytearray)):
        proof = Proof.from_bytes(proof)
    pub = _public_list(publics)
    if len(pub) != len(vk.public_positions):
        raise ArgumentError(f"expected {len(vk.public_positions)} public inputs, got {len(pub)}")
    n = vk.n
    omega = vk.domain.omega
    ch = derive_challenges(vk.digest(), pub, proof)
    beta, gamma, alpha, zeta, v, u = ch.beta, ch.gamma, ch.alpha, ch.zeta, ch.v, ch.u
    zeta_n = pow(zeta, n, R)
    zh_zeta = (zeta_n - 1) % R
    if zh_zeta == 0:
        return False
    a_bar, b_bar, c_bar = proof.a_bar, proof.b_bar, proof.c_bar
    s1_bar, s2_bar, zw_bar = proof.s1_bar, proof.s2_bar, proof.z_omega_bar
    alpha2 = alpha * alpha % R
    l1_zeta = omega_pow_lagrange0(n, zeta, zh_zeta)
    pi_zeta = public_input_eval(n, omega, vk.public_positions, pub, zeta)
    perm_a = (a_bar + beta * zeta + gamma) * (b_bar + beta * K1 * zeta + gamma) % R * (c_bar + beta * K2 * zeta + gamma) % R
    perm_b = (a_bar + beta * s1_bar + gamma) * (b_bar + beta * s2_bar + gamma) % R
    r0 = (pi_zeta - alpha * perm_b % R * (c_bar + gamma) % R * zw_bar - alpha2 * l1_zeta) % R
    v2 = v * v % R
    v3 = v2 * v % R
    v4 = v3 * v % R
    v5 = v4 * v % R
    e_scalar = (-r0 + v * a_bar + v2 * b_bar + v3 * c_bar + v4 * s1_bar + v5 * s2_bar + u * zw_bar) % R
    cm = vk.commitments
    # rhs = zeta [W_z] + u zeta omega [W_zw] + [F] - [E]
    points = [
        cm["q_m"], cm["q_l"], cm["q_r"], cm["q_o"], cm["q_c"],
        proof.z, cm["s3"], proof.t_lo, proof.t_mid, proof.t_hi,
        proof.a, proof.b, proof.c, cm["s1"], cm["s2"],
        G1Point.generator(), proof.w_zeta, proof.w_zeta_omega,
    ]
    scalars = [
        a_bar * b_bar % R, a_bar, b_bar, c_bar, 1,
        (alpha * perm_a + alpha2 * l1_zeta + u) % R,
        -alpha * perm_b % R * beta % R * zw_bar % R,
        -zh_zeta % R, -zh_zeta * zeta_n % R, -zh_zeta * zeta_n % R * zeta_n % R,
        v, v2, v3, v4, v5,
        -e_scalar % R, zeta, u * zeta % R * omega % R,
    ]
    rhs = msm(points, scalars)
    lhs = msm([proof.w_zeta, proof.w_zeta_omega], [1, u])
    return pairing_check([(lhs, vk.g2_tau), (-rhs, vk.g2_gen)])


def omega_pow_lagrange0(n: int, zeta: int, zh_zeta: int) -> int:
    """L_0(zeta) = (zeta^n - 1) / (n (zeta - 1))."""
    return zh_zeta * inv_mod(n * (zeta - 1) % R) % R


__all__ = [
    "Proof",
    "PROOF_BYTES",
    "Challenges",
    "prove",
    "verify",
    "serialize",
    "deserialize",
    "derive_challenges",
    "public_input_eval",
]
