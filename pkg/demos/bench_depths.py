"""Prover and verifier cost as the tree grows.

Prints one line per depth with the padded gate count and median timings, and
writes the raw rows to bench_depths.csv next to this script.

    python3 demos/bench_depths.py [--depths 4 8 16 20] [--iters 3]
"""

import argparse
from pathlib import Path

from zkpark.bench import run_bench, write_csv


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--depths", type=int, nargs="+", default=[4, 8, 16, 20])
    ap.add_argument("--iters", type=int, default=3)
    args = ap.parse_args()

    rows = []
    for depth in args.depths:
        part = run_bench(depth, iters=args.iters)
        rows += part
        ms = {r.phase: r.median_ms for r in part}
        print(f"depth {depth:2d}  n_gates {part[0].n_gates:6d}  " + "  ".join(f"{k} {v:9.1f}ms" for k, v in ms.items()))
    out = Path(__file__).with_name("bench_depths.csv")
    write_csv(rows, out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
