"""The membership circuit: PLONK gates q_L a + q_R b + q_O c + q_M ab + q_C = 0.

The circuit proves, for public (rh, nu, nf):

* pkh = H1(sk) is computed from the secret, so the prover knows sk;
* the leaf H2(pkh, H1(uid)) folds up the Merkle path to rh, with every
  direction bit constrained to {0, 1};
* nf = H2(sk, nu).

Poseidon is synthesised over symbolic linear combinations so that additions
and MDS multiplications cost nothing until a value has to enter a
multiplication gate; constants are folded at build time.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .algebra.field import R, inv_mod
from .errors import ArgumentError, ConfigError
from .identity import IdentitySecret, encode_uid
from .merkle import MAX_DEPTH, MIN_DEPTH, MerklePath
from .poseidon import DOMAIN_HASH1, DOMAIN_HASH2, PoseidonParams, default_params

ZERO_VAR = 0
N_PUBLIC = 3
# the two coset shifts for the b and c wire columns (the a column uses 1)
K1 = 2
K2 = 3


class LC:
    """Linear combination sum(coef * var) + const, used only while building."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: dict[int, int] | None = None, const: int = 0):
        self.terms = {v: c % R for v, c in (terms or {}).items() if c % R}
        self.const = const % R

    @classmethod
    def var(cls, v: int) -> LC:
        return cls({v: 1})

    def is_const(self) -> bool:
        return not self.terms

    def add_const(self, k: int) -> LC:
        return LC(self.terms, self.const + k)


def lc_combine(pairs: Sequence[tuple[int, LC]]) -> LC:
    terms: dict[int, int] = {}
    const = 0
    for coef, lc in pairs:
        for v, c in lc.terms.items():
            terms[v] = (terms.get(v, 0) + coef * c) % R
        const += coef * lc.const
    return LC(terms, const)


@dataclass(frozen=True)
class Gate:
    q_l: int
    q_r: int
    q_o: int
    q_m: int
    q_c: int
    a: int
    b: int
    c: int
    solve: bool  # c is a fresh variable computed from a and b


class Builder:
    def __init__(self, params: PoseidonParams | None = None):
        self.params = params or default_params()
        self.n_vars = 1  # variable 0 is the constant zero
        self.gates: list[Gate] = []
        self.inputs: dict[str, int] = {}

    def new_var(self) -> int:
        v = self.n_vars
        self.n_vars += 1
        return v

    def input(self, name: str) -> int:
        v = self.new_var()
        self.inputs[name] = v
        return v

    def emit(self, a, b, q_l=0, q_r=0, q_m=0, q_c=0) -> int:
        """New gate whose output c = q_l a + q_r b + q_m ab + q_c."""
        c = self.new_var()
        self.gates.append(Gate(q_l % R, q_r % R, R - 1, q_m % R, q_c % R, a, b, c, True))
        return c

    def check(self, a, b, c, q_l=0, q_r=0, q_o=0, q_m=0, q_c=0) -> None:
        self.gates.append(Gate(q_l % R, q_r % R, q_o % R, q_m % R, q_c % R, a, b, c, False))

    def materialize(self, lc: LC) -> int:
        items = list(lc.terms.items())
        if not items:
            return self.emit(ZERO_VAR, ZERO_VAR, q_c=lc.const)
        if len(items) == 1:
            v, coef = items[0]
            if coef == 1 and lc.const == 0:
                return v
            return self.emit(v, ZERO_VAR, q_l=coef, q_c=lc.const)
        (v1, c1), (v2, c2) = items[0], items[1]
        rest = items[2:]
        acc = self.emit(v1, v2, q_l=c1, q_r=c2, q_c=0 if rest else lc.const)
        for i, (v, c) in enumerate(rest):
            last = i == len(rest) - 1
            acc = self.emit(acc, v, q_l=1, q_r=c, q_c=lc.const if last else 0)
        return acc

    def sbox(self, lc: LC) -> LC:
        """x^5 in three multiplication gates; the input's affine part is folded in."""
        if lc.is_const():
            return LC(const=pow(lc.const, 5, R))
        if len(lc.terms) == 1:
            (v, alpha), = lc.terms.items()
            k = lc.const
        else:
            v, alpha, k = self.materialize(lc), 1, 0
        x2 = self.emit(v, v, q_l=2 * alpha * k, q_m=alpha * alpha, q_c=k * k)
        x4 = self.emit(x2, x2, q_m=1)
        x5 = self.emit(x4, v, q_l=k, q_m=alpha)
        return LC.var(x5)

    def poseidon(self, state: list[LC]) -> int:
        p = self.params
        t = p.width
        for rnd in range(p.n_rounds):
            state = [state[i].add_const(p.round_constant(rnd, i)) for i in range(t)]
            if p.is_full_round(rnd):
                state = [self.sbox(s) for s in state]
            else:
                state[0] = self.sbox(state[0])
            state = [lc_combine(list(zip(row, state))) for row in p.mds]
            if not p.is_full_round(rnd):
                for i in range(1, t):
                    if len(state[i].terms) >= 3:
                        state[i] = LC.var(self.materialize(state[i]))
        return self.materialize(state[0])

    def hash2(self, a: LC, b: LC) -> int:
        return self.poseidon([LC(const=DOMAIN_HASH2), a, b])

    def hash1(self, a: LC) -> int:
        return self.poseidon([LC(const=DOMAIN_HASH1), a, LC()])


@dataclass(frozen=True)
class ConstraintSystem:
    depth: int
    n_gates: int
    n_used: int
    n_vars: int
    q_l: tuple[int, ...]
    q_r: tuple[int, ...]
    q_o: tuple[int, ...]
    q_m: tuple[int, ...]
    q_c: tuple[int, ...]
    wire_a: tuple[int, ...]
    wire_b: tuple[int, ...]
    wire_c: tuple[int, ...]
    solve: tuple[bool, ...]
    copy_permutation: tuple[int, ...]
    public_positions: tuple[int, ...]
    inputs: tuple[tuple[str, int], ...]

    def input_var(self, name: str) -> int:
        return dict(self.inputs)[name]

    @property
    def wires(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        return self.wire_a, self.wire_b, self.wire_c

    def dump(self) -> str:
        """One line per gate: index, q_L q_R q_O q_M q_C, then the a b c variable ids."""
        lines = []
        for i in range(self.n_gates):
            sel = " ".join(
                str(q[i]) for q in (self.q_l, self.q_r, self.q_o, self.q_m, self.q_c)
            )
            lines.append(f"{i} {sel} {self.wire_a[i]} {self.wire_b[i]} {self.wire_c[i]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Witness:
    assignment: tuple[int, ...]


@dataclass(frozen=True)
class PublicInputs:
    rh: int
    nu: int
    nf: int

    def __post_init__(self):
        for name in ("rh", "nu", "nf"):
            object.__setattr__(self, name, int(getattr(self, name)) % R)

    def as_list(self) -> list[int]:
        return [self.rh, self.nu, self.nf]


def _copy_permutation(n: int, wires: Sequence[Sequence[int]], n_vars: int) -> tuple[int, ...]:
    slots_of: list[list[int]] = [[] for _ in range(n_vars)]
    for col, column in enumerate(wires):
        for row, var in enumerate(column):
            slots_of[var].append(col * n + row)
    sigma = [0] * (3 * n)
    for slots in slots_of:
        for k, s in enumerate(slots):
            sigma[s] = slots[(k + 1) % len(slots)]
    return tuple(sigma)


def compile_gates(builder: Builder, public_vars: Sequence[int], depth: int) -> ConstraintSystem:
    public_rows = [Gate(1, 0, 0, 0, 0, v, ZERO_VAR, ZERO_VAR, False) for v in public_vars]
    gates = public_rows + builder.gates
    n_used = len(gates)
    n = 4
    while n < n_used:
        n *= 2
    pad = Gate(0, 0, 0, 0, 0, ZERO_VAR, ZERO_VAR, ZERO_VAR, False)
    gates += [pad] * (n - n_used)
    wires = (
        tuple(g.a for g in gates),
        tuple(g.b for g in gates),
        tuple(g.c for g in gates),
    )
    return ConstraintSystem(
        depth=depth,
        n_gates=n,
        n_used=n_used,
        n_vars=builder.n_vars,
        q_l=tuple(g.q_l for g in gates),
        q_r=tuple(g.q_r for g in gates),
        q_o=tuple(g.q_o for g in gates),
        q_m=tuple(g.q_m for g in gates),
        q_c=tuple(g.q_c for g in gates),
        wire_a=wires[0],
        wire_b=wires[1],
        wire_c=wires[2],
        solve=tuple(g.solve for g in gates),
        copy_permutation=_copy_permutation(n, wires, builder.n_vars),
        public_positions=tuple(range(len(public_vars))),
        inputs=tuple(builder.inputs.items()),
    )


@lru_cache(maxsize=8)
def build_membership_circuit(depth: int) -> ConstraintSystem:
    if not MIN_DEPTH <= depth <= MAX_DEPTH:
        raise ConfigError(f"circuit depth must be in [{MIN_DEPTH}, {MAX_DEPTH}], got {depth}")
    b = Builder()
    sk = b.input("sk")
    uid = b.input("uid")
    nu = b.input("nu")
    siblings = [b.input(f"sibling_{i}") for i in range(depth)]
    bits = [b.input(f"bit_{i}") for i in range(depth)]

    b.check(ZERO_VAR, ZERO_VAR, ZERO_VAR, q_l=1)  # pins the zero variable
    pkh = b.hash1(LC.var(sk))
    uid_h = b.hash1(LC.var(uid))
    leaf = b.hash2(LC.var(pkh), LC.var(uid_h))
    cur = leaf
    for sib, bit in zip(siblings, bits):
        b.check(bit, bit, ZERO_VAR, q_l=-1, q_m=1)  # bit * (bit - 1) = 0
        diff = b.emit(sib, cur, q_l=1, q_r=-1)
        sel = b.emit(bit, diff, q_m=1)  # bit * (sib - cur)
        left = LC({cur: 1, sel: 1})  # bit ? sib : cur
        right = LC({sib: 1, sel: -1})  # bit ? cur : sib
        cur = b.hash2(left, right)
    nf = b.hash2(LC.var(sk), LC.var(nu))
    b.inputs["pkh"] = pkh
    b.inputs["leaf"] = leaf
    b.inputs["rh"] = cur
    b.inputs["nf"] = nf
    return compile_gates(b, [cur, nu, nf], depth)


@lru_cache(maxsize=4)
def build_hash_circuit(arity: int) -> ConstraintSystem:
    """Stand-alone Poseidon gadget (public output) used to compare with the native hash."""
    if arity not in (1, 2):
        raise ConfigError("arity must be 1 or 2")
    b = Builder()
    x = b.input("x")
    if arity == 1:
        out = b.hash1(LC.var(x))
    else:
        y = b.input("y")
        out = b.hash2(LC.var(x), LC.var(y))
    b.check(ZERO_VAR, ZERO_VAR, ZERO_VAR, q_l=1)
    b.inputs["out"] = out
    return compile_gates(b, [out], 0)


def solve(cs: ConstraintSystem, inputs: dict[str, int]) -> list[int]:
    """Run the gate program forward from the named inputs."""
    values = [0] * cs.n_vars
    for name, var in cs.inputs:
        if name in inputs:
            values[var] = inputs[name] % R
    q_l, q_r, q_m, q_c, q_o = cs.q_l, cs.q_r, cs.q_m, cs.q_c, cs.q_o
    wa, wb, wc = cs.wire_a, cs.wire_b, cs.wire_c
    for i in range(cs.n_used):
        if not cs.solve[i]:
            continue
        a = values[wa[i]]
        b = values[wb[i]]
        acc = q_l[i] * a + q_r[i] * b + q_m[i] * a * b + q_c[i]
        if q_o[i] == R - 1:
            values[wc[i]] = acc % R
        else:
            values[wc[i]] = -acc * inv_mod(q_o[i]) % R
    return values


def assign_witness(
    cs: ConstraintSystem,
    sk: IdentitySecret | int,
    uid: bytes | int,
    path: MerklePath,
    nu: int,
) -> tuple[Witness, PublicInputs]:
    if path.depth != cs.depth:
        raise ArgumentError(f"path has depth {path.depth}, circuit expects {cs.depth}")
    sk_int = sk.sk if isinstance(sk, IdentitySecret) else int(sk) % R
    uid_field = encode_uid(uid) if isinstance(uid, (bytes, bytearray)) else int(uid) % R
    inputs = {"sk": sk_int, "uid": uid_field, "nu": int(nu)}
    for i, (sib, bit) in enumerate(zip(path.siblings, path.index_bits())):
        inputs[f"sibling_{i}"] = sib
        inputs[f"bit_{i}"] = bit
    values = solve(cs, inputs)
    publics = PublicInputs(values[cs.input_var("rh")], nu, values[cs.input_var("nf")])
    return Witness(tuple(values)), publics


def wire_values(cs: ConstraintSystem, witness: Witness) -> tuple[list[int], list[int], list[int]]:
    vals = witness.assignment
    return (
        [vals[v] for v in cs.wire_a],
        [vals[v] for v in cs.wire_b],
        [vals[v] for v in cs.wire_c],
    )


def check_satisfied(cs: ConstraintSystem, witness: Witness, publics: PublicInputs | Sequence[int]) -> bool:
    """Direct evaluation of the relation: gates, copy cycles and public slots."""
    if len(witness.assignment) != cs.n_vars:
        return False
    pub = publics.as_list() if isinstance(publics, PublicInputs) else [int(x) % R for x in publics]
    if len(pub) != len(cs.public_positions):
        return False
    a, b, c = wire_values(cs, witness)
    n = cs.n_gates
    pi = [0] * n
    for row, x in zip(cs.public_positions, pub):
        pi[row] = -x
    for i in range(n):
        if (cs.q_l[i] * a[i] + cs.q_r[i] * b[i] + cs.q_o[i] * c[i] + cs.q_m[i] * a[i] * b[i] + cs.q_c[i] + pi[i]) % R:
            return False
    slots = a + b + c
    sigma = cs.copy_permutation
    if any(slots[s] != slots[sigma[s]] for s in range(3 * n)):
        return False
    return all(a[row] == x for row, x in zip(cs.public_positions, pub))
