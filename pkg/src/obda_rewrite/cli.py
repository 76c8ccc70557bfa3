"""Command-line front end, randomized differential verification and size-growth benchmarks."""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import textio
from .chase import ontology_depth, saturate
from .core import Or, disj
from .errors import (
    ObdaError,
    ParseError,
    RewritingTooLarge,
    TooManyTreeWitnesses,
    ValidationError,
)
from .evaluate import certain_answers, eval_fo, eval_ndl, is_tree_shaped, match_query
from .randgen import TrialConfig, random_degree2_hypergraph, random_instance
from .rewrite_ndl import depth1_ndl_pipeline, ndl_to_arbitrary_data
from .rewrite_pe import (
    DEFAULT_MAX_DISJUNCTS,
    compact_tw_rewrite,
    split_rewrite,
    to_arbitrary_data,
    tw_rewrite,
)
from .treewitness import DEFAULT_MAX_TREE_WITNESSES, enumerate_tree_witnesses, tw_degree, tw_hypergraph

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

PE_MODES = ("tw-pe", "tw-pe-arb", "compact-pe", "split-pe")
NDL_MODES = ("ndl", "ndl-arb")
ALL_MODES = PE_MODES + NDL_MODES
CAP_ERRORS = (RewritingTooLarge, TooManyTreeWitnesses)


# ------------------------------------------------------------ verification


def default_modes(depth) -> tuple:
    if depth == 1:
        return ("tw-pe", "tw-pe-arb", "split-pe", "ndl", "ndl-arb")
    return ("tw-pe", "tw-pe-arb", "split-pe")


def trial_rng(seed: int, index: int) -> random.Random:
    # string seeds hash deterministically, independent of PYTHONHASHSEED
    return random.Random(f"{seed}/{index}")


def _drop_last_disjunct(f):
    if isinstance(f, Or) and len(f.items) > 1:
        return disj(f.items[:-1])
    return f


def run_mode(mode: str, T, q, A, saturated=None, corrupt: bool = False, max_disjuncts=DEFAULT_MAX_DISJUNCTS):
    """Answers of one rewriting mode, or None when the mode does not apply."""
    saturated = saturate(T, A) if saturated is None else saturated
    if mode in ("tw-pe", "tw-pe-arb"):
        f = tw_rewrite(q, T, max_disjuncts=max_disjuncts).formula
        if corrupt:
            f = _drop_last_disjunct(f)
        if mode == "tw-pe":
            return eval_fo(f, saturated, q.answer_vars)
        return eval_fo(to_arbitrary_data(f, T), A, q.answer_vars)
    if mode == "compact-pe":
        return eval_fo(compact_tw_rewrite(q, T).formula, saturated, q.answer_vars)
    if mode == "split-pe":
        if not is_tree_shaped(q):
            return None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = split_rewrite(q, T).formula
        return eval_fo(f, saturated, q.answer_vars)
    if mode in NDL_MODES:
        d = ontology_depth(T, 8)
        if not isinstance(d, int) or d > 1:
            return None
        prog, _ = depth1_ndl_pipeline(q, T)
        if mode == "ndl":
            return eval_ndl(prog, saturated)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prog = ndl_to_arbitrary_data(prog, T)
        return eval_ndl(prog, A)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class VerifyReport:
    trials: int = 0
    checks: dict = field(default_factory=dict)  # mode -> number of comparisons
    skipped: dict = field(default_factory=dict)  # mode -> not applicable or capped
    nontrivial: int = 0  # trials where the data alone misses a certain answer
    mismatches: list = field(default_factory=list)  # reproduction bundles
    capped: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return asdict(self) | {"ok": self.ok}


def _bundle(cfg, index, mode, T, q, A, expected, got, corrupt):
    return {
        "seed": cfg.seed,
        "trial": index,
        "depth": cfg.depth,
        "mode": mode,
        "corrupt": corrupt,
        "ontology": textio.print_ontology(T),
        "query": textio.print_query(q),
        "data": textio.print_data(A),
        "expected": expected.names(),
        "got": got.names(),
    }


def _run_trial(args):
    cfg, index, modes, corrupt, max_disjuncts = args
    rng = trial_rng(cfg.seed, index)
    T, q, A = random_instance(rng, cfg)
    expected = certain_answers(T, A, q)
    S = saturate(T, A)
    out = {"index": index, "checks": [], "skipped": [], "mismatches": [], "capped": 0}
    out["nontrivial"] = expected != match_query(q, [(a.predicate, a.args) for a in A.atoms])
    for mode in modes:
        try:
            got = run_mode(mode, T, q, A, S, corrupt, max_disjuncts)
        except CAP_ERRORS:
            out["skipped"].append(mode)
            out["capped"] += 1
            continue
        if got is None:
            out["skipped"].append(mode)
            continue
        out["checks"].append(mode)
        if got != expected:
            out["mismatches"].append(_bundle(cfg, index, mode, T, q, A, expected, got, corrupt))
    return out


def verify_random(
    cfg: TrialConfig,
    modes=None,
    jobs: int = 1,
    corrupt: bool = False,
    max_disjuncts: int = DEFAULT_MAX_DISJUNCTS,
) -> VerifyReport:
    """Compare certain answers with every enabled rewriting mode on random trials.

    Trial ``i`` draws from its own generator seeded by ``(cfg.seed, i)``, so
    results do not depend on ``jobs`` and are reported in trial order.
    """
    modes = tuple(modes or default_modes(cfg.depth))
    for m in modes:
        if m not in ALL_MODES:
            raise ValueError(f"unknown mode {m!r}")
    t0 = time.perf_counter()
    work = [(cfg, i, modes, corrupt, max_disjuncts) for i in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_trial, work, chunksize=8))
    else:
        results = [_run_trial(w) for w in work]
    rep = VerifyReport(trials=cfg.trials)
    for r in results:
        for m in r["checks"]:
            rep.checks[m] = rep.checks.get(m, 0) + 1
        for m in r["skipped"]:
            rep.skipped[m] = rep.skipped.get(m, 0) + 1
        rep.nontrivial += bool(r["nontrivial"])
        rep.capped += r["capped"]
        rep.mismatches.extend(r["mismatches"])
    rep.seconds = time.perf_counter() - t0
    return rep


def replay(bundle: dict) -> bool:
    """Re-run a reproduction bundle; True when the mismatch reappears."""
    T = textio.parse_ontology(bundle["ontology"])
    q = textio.parse_query(bundle["query"])
    A = textio.parse_data(bundle["data"])
    expected = certain_answers(T, A, q)
    got = run_mode(bundle["mode"], T, q, A, corrupt=bundle.get("corrupt", False))
    return got is not None and got != expected


# ------------------------------------------------------------- benchmarks

FAMILIES = ("clique", "tree-path", "hypergraph-random")
BENCH_MODES = ("tw-pe", "compact-pe", "split-pe", "ndl")


def family_instance(family: str, size: int, k: int = 2, seed: int = 0):
    from . import gadgets

    if family == "clique":
        return gadgets.clique_obda(size, min(k, size))
    if family == "tree-path":
        return gadgets.tree_path_obda(size)
    if family == "hypergraph-random":
        h = random_degree2_hypergraph(trial_rng(seed, size), size)
        return gadgets.hypergraph_to_obda(h)
    raise ValueError(f"unknown family {family!r}")


def _rewrite_size(mode, q, T, max_disjuncts):
    if mode == "tw-pe":
        return tw_rewrite(q, T, max_disjuncts=max_disjuncts).size
    if mode == "compact-pe":
        return compact_tw_rewrite(q, T).size
    if mode == "split-pe":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return split_rewrite(q, T).size
    if mode == "ndl":
        return depth1_ndl_pipeline(q, T)[0].size
    raise ValueError(f"unknown mode {mode!r}")


def bench_growth(family: str, sizes, mode: str, k: int = 2, seed: int = 0, max_disjuncts: int = DEFAULT_MAX_DISJUNCTS) -> list:
    """One row per size: query atoms, witness count, rewriting size and time."""
    if mode not in BENCH_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    rows = []
    for n in sizes:
        q, T = family_instance(family, n, k, seed)
        row = {"family": family, "size": n, "mode": mode, "atoms": len(q.atoms), "ontology": T.size}
        t0 = time.perf_counter()
        try:
            row["tree_witnesses"] = len(enumerate_tree_witnesses(q, T))
            row["rewriting_size"] = _rewrite_size(mode, q, T, max_disjuncts)
            row["status"] = "ok"
        except CAP_ERRORS as e:
            row.setdefault("tree_witnesses", None)
            row["rewriting_size"] = None
            row["status"] = type(e).__name__
        except ObdaError as e:
            row.setdefault("tree_witnesses", None)
            row["rewriting_size"] = None
            row["status"] = type(e).__name__
        row["seconds"] = round(time.perf_counter() - t0, 6)
        rows.append(row)
    return rows


def fit_exponent(rows, x: str = "atoms", y: str = "rewriting_size"):
    """Least-squares slope of log y against log x over the completed rows."""
    pts = [(r[x], r[y]) for r in rows if r.get(y) and r.get(x)]
    if len(pts) < 2:
        return None
    xs, ys = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    if np.ptp(xs) == 0:
        return None
    return float(np.polyfit(xs, ys, 1)[0])


# -------------------------------------------------------------------- CLI


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _problem(args, with_data=False):
    data = _read(args.data) if with_data and getattr(args, "data", None) else ""
    return textio.load_problem(_read(args.ontology), _read(args.query), data)


def cmd_rewrite(args):
    T, q, _ = _problem(args)
    if args.mode == "ndl":
        prog, trace = depth1_ndl_pipeline(q, T)
        if args.arbitrary_data:
            prog = ndl_to_arbitrary_data(prog, T)
        _write(textio.print_ndl(prog), args.output)
        if args.trace:
            _write(json.dumps(trace, indent=2) + "\n", args.trace)
        return EXIT_OK
    if args.mode == "tw-pe":
        rep = tw_rewrite(q, T, max_disjuncts=args.max_disjuncts, max_tree_witnesses=args.max_tree_witnesses)
    elif args.mode == "compact-pe":
        rep = compact_tw_rewrite(q, T)
    else:
        strategy = args.strategy.replace("-", "_")
        rep = split_rewrite(q, T, strategy, max_tree_witnesses=args.max_tree_witnesses)
    f = to_arbitrary_data(rep.formula, T) if args.arbitrary_data else rep.formula
    _write(textio.print_formula(f) + "\n", args.output)
    return EXIT_OK


def cmd_answer(args):
    T, q, A = _problem(args, with_data=True)
    data = saturate(T, A) if args.saturate else A
    if args.via == "chase":
        ans = certain_answers(T, A, q)
    elif args.via.startswith("fo:"):
        ans = eval_fo(textio.load(args.via[3:]), data, q.answer_vars)
    elif args.via.startswith("ndl:"):
        ans = eval_ndl(textio.load(args.via[4:]), data)
    else:
        raise ValueError(f"--via must be chase, fo:FILE or ndl:FILE, not {args.via!r}")
    lines = [",".join(t) for t in ans.names()]
    if not q.answer_vars:
        lines = ["yes" if ans else "no"]
    _write("".join(line + "\n" for line in lines), args.output)
    return EXIT_OK


def cmd_stats(args):
    T, q, _ = _problem(args)
    thetas = enumerate_tree_witnesses(q, T, args.max_tree_witnesses)
    twh = tw_hypergraph(q, T, thetas)
    depth = ontology_depth(T)
    stats = {
        "tree_witnesses": len(thetas),
        "hypergraph_degree": twh.degree(),
        "tree_witness_degree": tw_degree(q, T, thetas),
        "conflicts": len(twh.conflicts),
        "ontology_depth": depth if isinstance(depth, int) else str(depth),
    }
    out = json.dumps(stats, indent=2) + "\n"
    out += "".join(f"# {i}: {t}\n" for i, t in enumerate(thetas))
    out += textio.print_hypergraph(twh.to_hypergraph())
    _write(out, args.output)
    return EXIT_OK


def _edge_bits(n, spec):
    from .gadgets import _pairs

    chosen = set()
    for tok in filter(None, (spec or "").split(",")):
        tok = tok.strip()
        parts = tok.split("-") if "-" in tok else list(tok)
        if len(parts) != 2:
            raise ValueError(f"bad edge {tok!r}; use 12 or 1-2")
        j, jp = sorted(map(int, parts))
        if not 1 <= j < jp <= n:
            raise ValueError(f"edge {tok!r} out of range for n={n}")
        chosen.add((j, jp))
    return tuple(int(p in chosen) for p in _pairs(n))


def cmd_gadget(args):
    from . import gadgets

    if args.kind == "clique":
        if args.emit == "hgp":
            _write(textio.print_hypergraph(gadgets.clique_hgp(args.n, args.k)), args.output)
            return EXIT_OK
        q, T = gadgets.clique_obda(args.n, args.k)
        if args.emit == "cq":
            text = textio.print_query(q)
        elif args.emit == "tgd":
            text = textio.print_ontology(T)
        else:
            inst = gadgets.CliqueInstance(args.n, args.k, _edge_bits(args.n, args.edges))
            text = textio.print_data(gadgets.clique_data(inst))
        _write(text, args.output)
        return EXIT_OK
    if args.kind == "tree-path":
        q, T = gadgets.tree_path_obda(args.n)
    else:
        if not args.file:
            raise ValueError("gadget hypergraph needs --file")
        q, T = gadgets.hypergraph_to_obda(textio.load(args.file))
    _write(textio.print_query(q) if args.emit == "cq" else textio.print_ontology(T), args.output)
    return EXIT_OK


def _translations():
    from .boolmodels import translations as tr
    from .boolmodels.models import NondetCircuit

    def to_hgp3(c):
        if not isinstance(c, NondetCircuit):
            c = NondetCircuit(c, tuple(c.inputs), ())
        c = NondetCircuit(tr.normalize_fanin2(c.circuit), c.x_inputs, c.advice)
        return tr.nbc_to_hgp3(c)

    return {
        ("hypergraph", "hgp"): tr.hgp_from_hypergraph,
        ("hgp", "hgp2"): tr.normalize_degree2,
        ("hgp2", "nbp"): tr.hgp2_to_nbp,
        ("hgp2", "nbp-dual"): lambda p: tr.hgp2_to_nbp(p, dual=True),
        ("nbp", "hgp2"): tr.nbp_to_hgp2,
        ("nbp", "circuit"): tr.nbp_to_monotone_circuit,
        ("hgp2", "circuit"): tr.implication_dual_circuit,
        ("circuit", "dual"): tr.circuit_dualize,
        ("circuit", "fanin2"): tr.normalize_fanin2,
        ("hgp", "nbc"): tr.hgp_to_nbc,
        ("nbc", "hgp3"): to_hgp3,
        ("circuit", "hgp3"): to_hgp3,
    }


def cmd_translate(args):
    table = _translations()
    key = (args.from_, args.to)
    if key not in table:
        pairs = ", ".join(f"{a}->{b}" for a, b in sorted(table))
        raise ValueError(f"no translation {args.from_}->{args.to}; available: {pairs}")
    out = table[key](textio.load(args.input))
    _write(textio.dumps(out), args.output)
    return EXIT_OK


def _depth_arg(text):
    return "unbounded" if text == "unbounded" else int(text)


def cmd_verify(args):
    cfg = TrialConfig(
        seed=args.seed,
        n_unary=args.unary,
        n_binary=args.binary,
        n_tgds=args.tgds,
        n_atoms=args.atoms,
        n_constants=args.constants,
        depth=args.depth,
        trials=args.trials,
    )
    modes = args.modes.split(",") if args.modes else None
    rep = verify_random(cfg, modes, args.jobs, max_disjuncts=args.max_disjuncts)
    summary = rep.to_json()
    if args.json:
        _write(json.dumps(summary, indent=2) + "\n", args.json)
    checks = ", ".join(f"{m}={n}" for m, n in sorted(rep.checks.items()))
    print(f"trials={rep.trials} nontrivial={rep.nontrivial} checks[{checks}] mismatches={len(rep.mismatches)} time={rep.seconds:.1f}s")
    if rep.mismatches:
        print(json.dumps(rep.mismatches[0], indent=2))
        return EXIT_MISMATCH
    return EXIT_CAP if rep.capped and args.strict_caps else EXIT_OK


def _sizes(text):
    if not text:
        return []
    if ":" in text:
        lo, hi, *step = (int(x) for x in text.split(":"))
        return list(range(lo, hi + 1, step[0] if step else 1))
    return [int(x) for x in text.split(",")]


def cmd_bench(args):
    rows = bench_growth(args.family, _sizes(args.sizes), args.mode, args.k, args.seed, args.max_disjuncts)
    cols = ["family", "size", "mode", "atoms", "ontology", "tree_witnesses", "rewriting_size", "seconds", "status"]
    out = sys.stdout if args.csv in (None, "-") else open(args.csv, "w", newline="", encoding="utf-8")
    try:
        w = csv.DictWriter(out, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    slope = fit_exponent(rows)
    print(f"# growth exponent: {'n/a' if slope is None else f'{slope:.3f}'}", file=sys.stderr)
    return EXIT_CAP if any(r["status"] != "ok" for r in rows) and args.strict_caps else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    def common(suppress):
        # accepted before or after the subcommand
        c = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        c.add_argument("--seed", type=int, default=d(0))
        c.add_argument("--jobs", type=int, default=d(1))
        c.add_argument("--max-disjuncts", type=int, default=d(DEFAULT_MAX_DISJUNCTS))
        c.add_argument("--max-tree-witnesses", type=int, default=d(DEFAULT_MAX_TREE_WITNESSES))
        c.add_argument("--strict-caps", action="store_true", default=d(False), help="exit 3 when a size cap was hit")
        return c

    p = argparse.ArgumentParser(
        prog="obda-rewrite",
        description="Query rewriting over ontologies with tree witnesses.",
        parents=[common(False)],
    )
    shared = common(True)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda name, **kw: _add(name, parents=[shared], **kw)

    def problem(sp):
        sp.add_argument("--ontology", required=True)
        sp.add_argument("--query", required=True)
        sp.add_argument("-o", "--output")

    r = sub.add_parser("rewrite")
    problem(r)
    r.add_argument("--mode", choices=("tw-pe", "compact-pe", "split-pe", "ndl"), default="tw-pe")
    r.add_argument("--strategy", choices=("balanced", "leaf-first"), default="balanced")
    r.add_argument("--arbitrary-data", action="store_true")
    r.add_argument("--trace", help="write the NDL stage-size trace as JSON here")
    r.set_defaults(func=cmd_rewrite)

    a = sub.add_parser("answer")
    problem(a)
    a.add_argument("--data", required=True)
    a.add_argument("--via", default="chase")
    a.add_argument("--saturate", action="store_true")
    a.set_defaults(func=cmd_answer)

    s = sub.add_parser("stats")
    problem(s)
    s.set_defaults(func=cmd_stats)

    g = sub.add_parser("gadget")
    g.add_argument("kind", choices=("clique", "hypergraph", "tree-path"))
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--emit", choices=("hgp", "cq", "tgd", "facts"), default="cq")
    g.add_argument("--edges", help="present edges, e.g. 12,34 or 1-2,3-4")
    g.add_argument("--file", help="degree-2 hypergraph in .hg format")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gadget)

    t = sub.add_parser("translate")
    t.add_argument("--from", dest="from_", required=True)
    t.add_argument("--to", required=True)
    t.add_argument("--input", required=True)
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_translate)

    v = sub.add_parser("verify")
    v.add_argument("--depth", type=_depth_arg, default=1)
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--unary", type=int, default=2)
    v.add_argument("--binary", type=int, default=2)
    v.add_argument("--tgds", type=int, default=3)
    v.add_argument("--atoms", type=int, default=6)
    v.add_argument("--constants", type=int, default=4)
    v.add_argument("--modes", help=f"comma-separated subset of {','.join(ALL_MODES)}")
    v.add_argument("--json", help="write the full report here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench")
    b.add_argument("--family", choices=FAMILIES, default="tree-path")
    b.add_argument("--sizes", default="4,8,16,32")
    b.add_argument("--mode", choices=BENCH_MODES, default="split-pe")
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--csv", help="output CSV path (default stdout)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except CAP_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ParseError, ValidationError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ObdaError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
