import random
import subprocess
import sys

import pytest

from zkpark.algebra.field import R
from zkpark.circuit import (
    N_PUBLIC,
    PublicInputs,
    Witness,
    assign_witness,
    build_hash_circuit,
    build_membership_circuit,
    check_satisfied,
    solve,
)
from zkpark.errors import ArgumentError, ConfigError
from zkpark.identity import commitment, encode_uid, keygen, nullifier_hash
from zkpark.merkle import IncrementalMerkleTree, MerklePath, fold_path
from zkpark.poseidon import hash1_int, hash2_int


def honest_instance(depth, r, n_leaves=None):
    secret = keygen(r)
    uid = r.randbytes(r.randrange(1, 65))
    tree = IncrementalMerkleTree(depth)
    n_leaves = n_leaves or r.randrange(1, min(1 << depth, 12) + 1)
    mine = r.randrange(n_leaves)
    for i in range(n_leaves):
        tree.insert(commitment(secret, uid).value if i == mine else r.randrange(R))
    nu = r.randrange(R)
    return secret, uid, tree, mine, nu


def test_depth_bounds():
    for bad in (1, 33):
        with pytest.raises(ConfigError):
            build_membership_circuit(bad)


def test_gate_count_depth20():
    cs = build_membership_circuit(20)
    assert 2_000 <= cs.n_gates <= 25_000
    assert cs.n_gates & (cs.n_gates - 1) == 0
    assert cs.n_used <= cs.n_gates


def test_gate_count_deterministic():
    a = build_membership_circuit.__wrapped__(6)
    b = build_membership_circuit.__wrapped__(6)
    assert a.n_gates == b.n_gates and a.dump() == b.dump()


def test_gate_count_grows_linearly_with_depth():
    used = [build_membership_circuit(d).n_used for d in (4, 5, 6)]
    assert used[1] - used[0] == used[2] - used[1] > 0


def test_copy_permutation_is_bijection():
    cs = build_membership_circuit(2)
    sigma = cs.copy_permutation
    assert sorted(sigma) == list(range(3 * cs.n_gates))
    # every cycle links slots that carry the same variable
    wires = cs.wire_a + cs.wire_b + cs.wire_c
    assert all(wires[s] == wires[sigma[s]] for s in range(len(sigma)))


def test_public_positions():
    cs = build_membership_circuit(3)
    assert len(cs.public_positions) == N_PUBLIC == 3
    vars_at = [cs.wire_a[row] for row in cs.public_positions]
    assert vars_at == [cs.input_var("rh"), cs.input_var("nu"), cs.input_var("nf")]


@pytest.mark.parametrize("depth", [2, 4, 8])
def test_completeness_of_synthesis(depth):
    r = random.Random(depth)
    cs = build_membership_circuit(depth)
    for _ in range(50 if depth < 8 else 10):
        secret, uid, tree, idx, nu = honest_instance(depth, r)
        w, pub = assign_witness(cs, secret, uid, tree.path(idx), nu)
        assert check_satisfied(cs, w, pub)
        assert pub.rh == tree.root


def test_cross_module_rh_and_nf():
    r = random.Random(7)
    cs = build_membership_circuit(4)
    for _ in range(20):
        secret, uid, tree, idx, nu = honest_instance(4, r)
        path = tree.path(idx)
        w, pub = assign_witness(cs, secret, uid, path, nu)
        assert pub.rh == fold_path(commitment(secret, uid).value, path)
        assert pub.nf == nullifier_hash(secret, nu).value
        assert pub.nu == nu
        assert w.assignment[cs.input_var("leaf")] == commitment(secret, uid).value
        assert w.assignment[cs.input_var("pkh")] == secret.public_key()


def test_path_depth_mismatch():
    cs = build_membership_circuit(3)
    with pytest.raises(ArgumentError):
        assign_witness(cs, 5, b"x", MerklePath((0, 0), 0), 1)


def test_wrong_publics_rejected():
    r = random.Random(8)
    cs = build_membership_circuit(2)
    secret, uid, tree, idx, nu = honest_instance(2, r)
    w, pub = assign_witness(cs, secret, uid, tree.path(idx), nu)
    assert not check_satisfied(cs, w, PublicInputs(pub.rh + 1, pub.nu, pub.nf))
    assert not check_satisfied(cs, w, PublicInputs(pub.rh, pub.nu + 1, pub.nf))
    assert not check_satisfied(cs, w, PublicInputs(pub.rh, pub.nu, pub.nf + 1))
    assert not check_satisfied(cs, w, [pub.rh, pub.nu])
    assert not check_satisfied(cs, Witness(w.assignment[:-1]), pub)


def test_exhaustive_single_perturbation_depth2():
    # every variable of the depth-2 circuit, perturbed alone, breaks the relation
    r = random.Random(9)
    cs = build_membership_circuit(2)
    secret, uid, tree, idx, nu = honest_instance(2, r)
    w, pub = assign_witness(cs, secret, uid, tree.path(idx), nu)
    values = list(w.assignment)
    for var in range(cs.n_vars):
        bumped = list(values)
        bumped[var] = (bumped[var] + r.randrange(1, R)) % R
        assert not check_satisfied(cs, Witness(tuple(bumped)), pub), f"variable {var}"


def test_random_single_perturbations_depth4():
    r = random.Random(10)
    cs = build_membership_circuit(4)
    secret, uid, tree, idx, nu = honest_instance(4, r)
    w, pub = assign_witness(cs, secret, uid, tree.path(idx), nu)
    for _ in range(100):
        bumped = list(w.assignment)
        var = r.randrange(cs.n_vars)
        bumped[var] = (bumped[var] + r.randrange(1, R)) % R
        assert not check_satisfied(cs, Witness(tuple(bumped)), pub)


def test_index_bit_booleanity():
    r = random.Random(11)
    cs = build_membership_circuit(4)
    secret, uid, tree, idx, nu = honest_instance(4, r, n_leaves=16)
    w, pub = assign_witness(cs, secret, uid, tree.path(idx), nu)
    for i in range(4):
        # a non-boolean bit, with every downstream wire recomputed honestly,
        # still fails on the bit * (bit - 1) gate
        inputs = {"sk": secret.sk, "uid": encode_uid(uid), "nu": nu}
        path = tree.path(idx)
        for j in range(4):
            inputs[f"sibling_{j}"] = path.siblings[j]
            inputs[f"bit_{j}"] = path.index_bits()[j]
        inputs[f"bit_{i}"] = 2
        values = solve(cs, inputs)
        forged_pub = PublicInputs(values[cs.input_var("rh")], nu, values[cs.input_var("nf")])
        assert not check_satisfied(cs, Witness(tuple(values)), forged_pub)


def test_forgery_for_leaf_not_in_tree():
    r = random.Random(12)
    cs = build_membership_circuit(2)
    secret, uid, tree, idx, nu = honest_instance(2, r)
    outsider = keygen(r)
    for _ in range(1000):
        fake = MerklePath(tuple(r.randrange(R) for _ in range(2)), r.randrange(4))
        w, pub = assign_witness(cs, outsider, b"outsider", fake, nu)
        assert not check_satisfied(cs, w, PublicInputs(tree.root, nu, pub.nf))


def test_hash_gadget_matches_native():
    r = random.Random(13)
    cs2, cs1 = build_hash_circuit(2), build_hash_circuit(1)
    for _ in range(100):
        x, y = r.randrange(R), r.randrange(R)
        values = solve(cs2, {"x": x, "y": y})
        out = values[cs2.input_var("out")]
        assert out == hash2_int(x, y)
        assert check_satisfied(cs2, Witness(tuple(values)), [out])
        values = solve(cs1, {"x": x})
        assert values[cs1.input_var("out")] == hash1_int(x)
    with pytest.raises(ConfigError):
        build_hash_circuit(3)


def test_dump_format():
    cs = build_membership_circuit(2)
    lines = cs.dump().splitlines()
    assert len(lines) == cs.n_gates
    first = lines[0].split()
    assert len(first) == 9 and first[0] == "0"


def test_circuit_dump_cli():
    out = subprocess.run(
        [sys.executable, "-m", "zkpark.cli", "circuit-dump", "--depth", "2"],
        capture_output=True, text=True, check=True,
    ).stdout
    assert out == build_membership_circuit(2).dump()
