"""Rewriting size growth on the path, clique and random-hypergraph families.

    python3 benchmarks/bench_growth.py [--max-path 64]
"""

import argparse

from obda_rewrite.cli import bench_growth, fit_exponent


def show(rows):
    for r in rows:
        print(f"  {r['family']:18} n={r['size']:3} atoms={r['atoms']:4} |tw|={r['tree_witnesses']!s:>5} "
              f"size={r['rewriting_size']!s:>8} {r['seconds']:8.3f}s {r['status']}")
    slope = fit_exponent(rows)
    print(f"  fitted exponent: {'n/a' if slope is None else round(slope, 3)}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-path", type=int, default=64)
    args = ap.parse_args()
    sizes = [n for n in (4, 8, 16, 32, 64, 128) if n <= args.max_path]
    # tw-pe is exponential and the ndl closure cubic in the implication graph
    caps = {"split-pe": args.max_path, "tw-pe": 16, "ndl": 16}
    for mode, cap in caps.items():
        print(f"tree-path, {mode}")
        show(bench_growth("tree-path", [n for n in sizes if n <= cap], mode))
    print("clique k=2, compact-pe")
    show(bench_growth("clique", [3, 4, 5], "compact-pe"))
    print("clique k=2, tw-pe")
    show(bench_growth("clique", [3, 4, 5], "tw-pe"))
    print("hypergraph-random, ndl")
    show(bench_growth("hypergraph-random", [4, 6, 8, 10], "ndl"))


if __name__ == "__main__":
    main()
