"""Truth-table kernels: numba versus the numpy fallback.

    python3 benchmarks/bench_kernels.py [--vars 12] [--repeat 3]

Runs the HGP cover search and the NBP reachability sweep over the full
input cube of random programs, checks both backends agree, and prints
one timing line per kernel.  OBDA_REWRITE_NUMBA=0 disables the numba
column.
"""

import argparse
import random
import time

import numpy as np

from obda_rewrite.boolmodels import _kernels as K
from obda_rewrite.randgen import random_degree2_hypergraph
from obda_rewrite.boolmodels.translations import hgp2_to_nbp, hgp_from_hypergraph, normalize_degree2


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def hgp_arrays(p, variables):
    idx = {v: i for i, v in enumerate(variables)}
    vpos = {v: i for i, v in enumerate(p.vertices)}
    inc = np.zeros((len(p.edges), len(p.vertices)), dtype=np.uint8)
    for j, (_, m) in enumerate(p.edges):
        for v in m:
            inc[j, vpos[v]] = 1
    kind, var = K.encode_labels([p.label(v) for v in p.vertices], idx)
    return inc, kind, var


def nbp_arrays(g, variables):
    idx = {v: i for i, v in enumerate(variables)}
    npos = {n: i for i, n in enumerate(g.nodes)}
    src = np.array([npos[u] for u, _, _ in g.arcs], dtype=np.int64)
    dst = np.array([npos[v] for _, v, _ in g.arcs], dtype=np.int64)
    kind, var = K.encode_labels([lab for _, _, lab in g.arcs], idx)
    return src, dst, kind, var, len(g.nodes), npos[g.s], npos[g.t]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--vars", type=int, default=12, help="input variables (cube has 2^vars rows)")
    ap.add_argument("--edges", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    # a degree-2 hypergraph whose vertex and edge variables fill the cube
    h = random_degree2_hypergraph(rng, args.edges, max(1, args.vars - args.edges))
    p = normalize_degree2(hgp_from_hypergraph(h))
    variables = p.variables()
    inputs = K.input_cube(len(variables))
    inc, kind, var = hgp_arrays(p, variables)
    g = hgp2_to_nbp(p)
    nbp = nbp_arrays(g, g.variables())
    nbp_inputs = K.input_cube(len(g.variables()))

    print(f"numba available: {K.HAVE_NUMBA}; rows: {inputs.shape[0]}; hgp vertices: {len(p.vertices)}; nbp arcs: {len(g.arcs)}")
    t_np, ref = best_of(lambda: K.hgp_table_numpy(inc, kind, var, inputs), args.repeat)
    line = f"hgp_table   numpy {t_np * 1e3:9.2f} ms"
    if K.HAVE_NUMBA:
        K.hgp_table(inc, kind, var, inputs[:2])  # compile
        t_nb, out = best_of(lambda: K.hgp_table(inc, kind, var, inputs), args.repeat)
        assert np.array_equal(out, ref), "backends disagree on hgp_table"
        line += f"   numba {t_nb * 1e3:9.2f} ms   speedup {t_np / t_nb:6.1f}x"
    print(line)

    t_np, ref = best_of(lambda: K.reach_table_numpy(*nbp, nbp_inputs), args.repeat)
    line = f"reach_table numpy {t_np * 1e3:9.2f} ms"
    if K.HAVE_NUMBA:
        K.reach_table(*nbp, nbp_inputs[:2])
        t_nb, out = best_of(lambda: K.reach_table(*nbp, nbp_inputs), args.repeat)
        assert np.array_equal(out, ref), "backends disagree on reach_table"
        line += f"   numba {t_nb * 1e3:9.2f} ms   speedup {t_np / t_nb:6.1f}x"
    print(line)


if __name__ == "__main__":
    main()
