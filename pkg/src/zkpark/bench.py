"""Timing report: setup, preprocess, prove and verify at one tree depth.

Each phase runs ``iters + 1`` times; the first run warms caches and is
dropped, the rest are summarised by their median.
"""

from __future__ import annotations

import csv
import os
import random
import statistics
import time
from dataclasses import asdict, dataclass

from .circuit import assign_witness, build_membership_circuit
from .errors import ArgumentError
from .identity import commitment, keygen
from .merkle import IncrementalMerkleTree
from .prover.keys import BLINDING_MARGIN, preprocess
from .prover.plonk import prove, verify
from .prover.srs import trusted_setup

PHASES = ("setup", "preprocess", "prove", "verify")
BENCH_SEED = b"zkpark-bench-srs"


@dataclass(frozen=True)
class BenchRow:
    phase: str
    depth: int
    median_ms: float
    proof_bytes: int
    n_gates: int


def _timed(fn, runs: int) -> tuple[list[float], object]:
    out = None
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return times[1:], out


def run_bench(depth: int, iters: int = 3, out: str | os.PathLike | None = None, seed: int = 0) -> list[BenchRow]:
    if iters < 3:
        raise ArgumentError(f"iters must be >= 3, got {iters}")
    rng = random.Random(seed)
    runs = iters + 1
    cs = build_membership_circuit(depth)
    max_degree = cs.n_gates + BLINDING_MARGIN - 1

    setup_ms, srs = _timed(lambda: trusted_setup(max_degree, BENCH_SEED), runs)
    pre_ms, (pk, vk) = _timed(lambda: preprocess(cs, srs), runs)

    # a tree with a few neighbours so the path is not all zero hashes
    secret = keygen(rng)
    tree = IncrementalMerkleTree(depth)
    for _ in range(3):
        tree.insert(rng.randrange(1, 1 << 250))
    index = tree.insert(commitment(secret, b"bench-vehicle").value)
    witness, publics = assign_witness(cs, secret, b"bench-vehicle", tree.path(index), rng.randrange(1, 1 << 250))

    prove_ms, proof = _timed(lambda: prove(pk, publics, witness, rng), runs)
    blob = proof.to_bytes()
    verify_ms, ok = _timed(lambda: verify(vk, publics, blob), runs)
    if not ok:
        raise RuntimeError("benchmark proof failed to verify")

    rows = [
        BenchRow(phase, depth, round(statistics.median(ms), 3), len(blob), cs.n_gates)
        for phase, ms in zip(PHASES, (setup_ms, pre_ms, prove_ms, verify_ms))
    ]
    if out is not None:
        write_csv(rows, out)
    return rows


def write_csv(rows: list[BenchRow], out: str | os.PathLike) -> None:
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(BenchRow.__dataclass_fields__))
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))


def read_csv(path: str | os.PathLike) -> list[BenchRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            BenchRow(r["phase"], int(r["depth"]), float(r["median_ms"]), int(r["proof_bytes"]), int(r["n_gates"]))
            for r in csv.DictReader(fh)
        ]
