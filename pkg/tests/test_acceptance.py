"""One test per acceptance criterion; each records a PASS/FAIL line."""

import random
import time
from itertools import product

import pytest

from obda_rewrite.boolmodels.models import NBP, CircuitBuilder, Hypergraph, NondetCircuit, bool_eval, evaluate
from obda_rewrite.boolmodels.translations import (
    circuit_dualize,
    edge_var,
    hgp2_to_nbp,
    hgp_from_hypergraph,
    hgp_to_nbc,
    hypergraph_function,
    nbc_to_hgp3,
    nbp_to_hgp2,
    nbp_to_monotone_circuit,
    normalize_degree2,
    normalize_fanin2,
)
from obda_rewrite.chase import saturate
from obda_rewrite.cli import bench_growth, fit_exponent, trial_rng, verify_random
from obda_rewrite.core import Atom, DataInstance, Or, const
from obda_rewrite.evaluate import brute_clique, certain_answers, eval_fo, eval_ndl
from obda_rewrite.gadgets import (
    EXAMPLE2,
    CliqueInstance,
    assignment_data,
    clique_data,
    clique_hgp,
    clique_hyperedge_witnesses,
    clique_literal_map,
    clique_obda,
    hypergraph_to_obda,
    propositional_tw_value,
    propositionalize,
)
from obda_rewrite.randgen import TrialConfig, random_degree2_hypergraph, random_instance
from obda_rewrite.rewrite_ndl import depth1_ndl_pipeline
from obda_rewrite.rewrite_pe import split_rewrite, tw_rewrite
from obda_rewrite.textio import parse_formula, print_formula
from obda_rewrite.treewitness import enumerate_tree_witnesses, tw_hypergraph

SEED = 2024
CORPUS = {d: TrialConfig(seed=SEED, depth=d, trials=200, n_constants=4, n_atoms=6) for d in (1, 2)}

EX1_DISPLAYED = (
    "(or (exists (y1 y2) (and (atom R1 x1 y1) (atom Q y2 y1) (atom R2 x2 y2)))"
    " (exists (y2) (and (atom R2 x2 y2) (exists (z) (and (atom A1 z) (eq x1 z) (eq y2 z)))))"
    " (exists (y1) (and (atom R1 x1 y1) (exists (z) (and (atom A2 z) (eq x2 z) (eq y1 z))))))"
)


EX1_PREDS = [("A1", 1), ("A2", 1), ("R1", 2), ("R2", 2), ("Q", 2)]


def _envs(names):
    names = list(names)
    for r in range(1 << len(names)):
        yield {x: (r >> i) & 1 for i, x in enumerate(names)}


def _corpus(depth):
    cfg = CORPUS[depth]
    for i in range(cfg.trials):
        yield random_instance(trial_rng(cfg.seed, i), cfg)


# ------------------------------------------------------------------------ 1


def test_criterion_01_example1(ex1, criterion):
    T, q = ex1
    t0 = time.perf_counter()
    thetas = enumerate_tree_witnesses(q, T)
    rep = tw_rewrite(q, T, thetas)
    elapsed = time.perf_counter() - t0
    split = {
        frozenset(v.name for v in t.internals): (frozenset(v.name for v in t.roots), {str(a) for a in t.atoms})
        for t in thetas
    }
    want = {
        frozenset({"y1"}): (frozenset({"x1", "y2"}), {"R1(x1,y1)", "Q(y2,y1)"}),
        frozenset({"y2"}): (frozenset({"x2", "y1"}), {"Q(y2,y1)", "R2(x2,y2)"}),
    }
    shown = parse_formula(EX1_DISPLAYED)
    rng = random.Random(SEED)
    cs = [const(f"c{i}") for i in range(3)]
    same = True
    for _ in range(300):
        A = saturate(T, DataInstance(frozenset(
            Atom(p, tuple(rng.choice(cs) for _ in range(k))) for p, k in rng.choices(EX1_PREDS, k=rng.randint(1, 6))
        )))
        same &= eval_fo(rep.formula, A, q.answer_vars) == eval_fo(shown, A, q.answer_vars)
    ok = split == want and rep.disjunct_count == 3 and same and elapsed < 1.0
    criterion(1, ok, f"witnesses={len(thetas)} disjuncts={rep.disjunct_count} displayed-form={same} {elapsed:.3f}s")
    assert ok


# ------------------------------------------------------------------------ 2


def test_criterion_02_differential(criterion):
    t0 = time.perf_counter()
    reps = {d: verify_random(CORPUS[d], ["tw-pe", "tw-pe-arb"]) for d in (1, 2)}
    elapsed = time.perf_counter() - t0
    ok = elapsed < 120 and all(
        r.ok and r.checks.get("tw-pe") == 200 and r.checks.get("tw-pe-arb") == 200 for r in reps.values()
    )
    detail = " ".join(
        f"depth{d}: {r.checks} mismatches={len(r.mismatches)} nontrivial={r.nontrivial}" for d, r in reps.items()
    )
    criterion(2, ok, f"{detail} {elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------------------ 3


def test_criterion_03_depth1_degree(criterion):
    bad = 0
    for T, q, _ in _corpus(1):
        thetas = enumerate_tree_witnesses(q, T)
        if tw_hypergraph(q, T, thetas).degree() > 2 or len(thetas) > len(q.existential_vars()):
            bad += 1
    ok = bad == 0
    criterion(3, ok, f"200 depth-1 instances, violations={bad}")
    assert ok


# ------------------------------------------------------------------------ 4


def test_criterion_04_ndl_pipeline(criterion):
    wrong = trace_bad = 0
    for T, q, A in _corpus(1):
        prog, trace = depth1_ndl_pipeline(q, T)
        if eval_ndl(prog, saturate(T, A)) != certain_answers(T, A, q):
            wrong += 1
        if trace["hgp_edges"] != 2 * trace["hypergraph_edges"] or trace["degree2_edges"] != trace["hgp_edges"] + 3:
            trace_bad += 1
    ok = wrong == trace_bad == 0
    criterion(4, ok, f"200 depth-1 instances, answer mismatches={wrong}, trace violations={trace_bad}")
    assert ok


# ------------------------------------------------------------------------ 5


def _rand_hypergraph(rng):
    vs = [f"v{i}" for i in range(rng.randint(1, 6))]
    edges = tuple((f"e{j}", frozenset(rng.sample(vs, rng.randint(1, min(3, len(vs)))))) for j in range(rng.randint(0, 4)))
    return Hypergraph(tuple(vs), edges)


def _rand_degree2(rng, monotone, n_vars=5):
    n_e = rng.randint(1, 5)
    vs, labels, members = [], {}, {j: set() for j in range(n_e)}
    for i in range(rng.randint(1, 7)):
        v = f"v{i}"
        vs.append(v)
        if rng.random() < 0.15:
            labels[v] = rng.choice("01")
        else:
            x = f"x{rng.randrange(n_vars)}"
            labels[v] = x if monotone or rng.random() < 0.6 else "!" + x
        for j in rng.sample(range(n_e), rng.randint(0, min(2, n_e))):
            members[j].add(v)
    return Hypergraph(tuple(vs), tuple((f"e{j}", frozenset(members[j])) for j in range(n_e)), labels)


def _rand_nbp(rng):
    nodes = ["s", "t"] + [f"n{i}" for i in range(rng.randint(0, 6))]
    arcs = []
    for _ in range(rng.randint(1, 12)):
        u = rng.choice([n for n in nodes if n != "t"])
        v = rng.choice([n for n in nodes if n not in ("s", u)])
        arcs.append((u, v, rng.choice(["0", "1"] + [f"x{i}" for i in range(rng.randint(1, 6))] * 3)))
    return NBP(tuple(nodes), tuple(arcs), "s", "t")


def _rand_circuit(rng):
    b = CircuitBuilder()
    pool = [b.input(f"x{i}") for i in range(rng.randint(2, 8))]
    for _ in range(rng.randint(1, 20)):
        args = rng.sample(pool, min(len(pool), rng.randint(2, 3)))
        pool.append(b.and_(*args) if rng.random() < 0.5 else b.or_(*args))
    return b.build(pool[-1])


def _rand_nbc(rng):
    b = CircuitBuilder()
    xs = [b.input(f"x{i}") for i in range(rng.randint(1, 4))]
    ys = [b.input(f"y{i}") for i in range(rng.randint(0, 3))]
    pool = xs + ys + [b.not_(y) for y in ys]
    for _ in range(rng.randint(1, 8)):
        a, c = rng.sample(pool, 2) if len(pool) > 1 else (pool[0], pool[0])
        pool.append(b.and_(a, c) if rng.random() < 0.5 else b.or_(a, c))
    return NondetCircuit(normalize_fanin2(b.build(pool[-1])), tuple(xs), tuple(ys))


def _flip(env):
    return {k: 1 - v for k, v in env.items()}


def _check_hgp_from_hypergraph(rng):
    h = _rand_hypergraph(rng)
    p = hgp_from_hypergraph(h)
    names = [h.label(v) for v in h.vertices] + [edge_var(e) for e in h.edge_names()]
    for env in _envs(names):
        alpha = {v: env[h.label(v)] for v in h.vertices}
        beta = {e: env[edge_var(e)] for e in h.edge_names()}
        if evaluate(p, env) != hypergraph_function(h, alpha, beta):
            return False
    return p.size == 2 * h.size


def _check_normalize(rng):
    p = _rand_degree2(rng, rng.random() < 0.5)
    out = normalize_degree2(p)
    return out.size == p.size + 3 and all(evaluate(out, e) == evaluate(p, e) for e in _envs(p.variables()))


def _check_nbp_complement(rng):
    p = _rand_degree2(rng, False)
    g = hgp2_to_nbp(p)
    return all(evaluate(g, e) != evaluate(p, e) for e in _envs(p.variables()))


def _check_nbp_dual(rng):
    p = _rand_degree2(rng, True)
    g = hgp2_to_nbp(p, dual=True)
    return g.monotone and all(evaluate(g, e) != evaluate(p, _flip(e)) for e in _envs(p.variables()))


def _check_round_trip(rng):
    p = _rand_degree2(rng, False, n_vars=4)
    back = nbp_to_hgp2(hgp2_to_nbp(p))
    return back.degree() <= 2 and all(evaluate(back, e) == evaluate(p, e) for e in _envs(p.variables()))


def _check_reach_circuit(rng):
    g = _rand_nbp(rng)
    c = nbp_to_monotone_circuit(g)
    return c.monotone and all(evaluate(c, e) == evaluate(g, e) for e in _envs(g.variables()))


def _check_dualize(rng):
    c = _rand_circuit(rng)
    d = circuit_dualize(c)
    return circuit_dualize(d) == c and all(evaluate(d, e) != evaluate(c, _flip(e)) for e in _envs(c.inputs))


def _check_hgp_to_nbc(rng):
    p = _rand_degree2(rng, rng.random() < 0.5)
    n = hgp_to_nbc(p)
    return all(evaluate(n, e) == evaluate(p, e) for e in _envs(p.variables()))


def _check_nbc_to_hgp3(rng):
    n = _rand_nbc(rng)
    p = nbc_to_hgp3(n)
    if p.degree() > 3:
        return False
    for env in _envs(n.x_inputs):
        want = evaluate(n, env)
        if n.monotone:
            want = any(
                evaluate(n, dict(zip(n.x_inputs, sub)))
                for sub in product(*[(0, 1) if env[x] else (0,) for x in n.x_inputs])
            )
        if evaluate(p, env) != want:
            return False
    return True


TRANSLATIONS = {
    "hgp_from_hypergraph": _check_hgp_from_hypergraph,
    "normalize_degree2": _check_normalize,
    "hgp2_to_nbp": _check_nbp_complement,
    "hgp2_to_nbp(dual)": _check_nbp_dual,
    "nbp_to_hgp2 round trip": _check_round_trip,
    "nbp_to_monotone_circuit": _check_reach_circuit,
    "circuit_dualize": _check_dualize,
    "hgp_to_nbc": _check_hgp_to_nbc,
    "nbc_to_hgp3": _check_nbc_to_hgp3,
}


def test_criterion_05_translations(criterion):
    t0 = time.perf_counter()
    failures = {}
    for name, check in TRANSLATIONS.items():
        rng = random.Random(f"{SEED}/{name}")
        failures[name] = sum(not check(rng) for _ in range(50))
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values()) and elapsed < 300
    criterion(5, ok, f"{len(TRANSLATIONS)} translations x 50 instances, mismatches={sum(failures.values())} {elapsed:.1f}s")
    assert ok, failures


# ------------------------------------------------------------------------ 6


def _entailment_matches_function(h):
    q, T = hypergraph_to_obda(h)
    nv, ne = len(h.vertices), h.size
    for bits in product((0, 1), repeat=nv + ne):
        alpha, beta = bits[:nv], bits[nv:]
        got = bool(certain_answers(T, assignment_data(h, alpha, beta), q))
        want = hypergraph_function(h, dict(zip(h.vertices, alpha)), dict(zip(h.edge_names(), beta)))
        if got != want:
            return False
    return True


def test_criterion_06_hypergraph_encoding(criterion):
    rng = random.Random(SEED)
    graphs = [EXAMPLE2]
    for _ in range(20):
        n_e = rng.randint(2, 6)
        graphs.append(random_degree2_hypergraph(rng, n_e, rng.randint(1, min(6, 12 - n_e))))
    bad = sum(not _entailment_matches_function(h) for h in graphs)
    ok = bad == 0
    criterion(6, ok, f"Example 2 + 20 random degree-2 hypergraphs, exhaustive, mismatching graphs={bad}")
    assert ok


# ------------------------------------------------------------------------ 7


def test_criterion_07_clique(criterion):
    t0 = time.perf_counter()
    rng = random.Random(SEED)
    counts, bad = {}, 0
    for n, k in ((4, 2), (5, 2), (5, 3)):
        m = n * (n - 1) // 2
        vectors = list(product((0, 1), repeat=m)) if n == 4 else [tuple(rng.randint(0, 1) for _ in range(m)) for _ in range(500)]
        h = clique_hgp(n, k)
        q, T = clique_obda(n, k)
        for bits in vectors:
            inst = CliqueInstance(n, k, bits)
            want = bool(brute_clique(inst))
            if evaluate(h, inst.assignment()) != want or bool(certain_answers(T, clique_data(inst), q)) != want:
                bad += 1
        counts[(n, k)] = len(vectors)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 600
    criterion(7, ok, f"vectors={counts} mismatches={bad} {elapsed:.1f}s")
    assert ok


# ------------------------------------------------------------------------ 8


def test_criterion_08_propositionalized_rewriting(criterion):
    # materializing tw_rewrite over all 52 witnesses means 25,047,637 disjuncts, so the
    # full rewriting is evaluated disjunct-free; the 20 hyperedge witnesses are materialized
    q, T = clique_obda(4, 2)
    lits = clique_literal_map(4, 2)
    thetas = enumerate_tree_witnesses(q, T)
    hyper = clique_hyperedge_witnesses(4, 2, thetas)
    f = propositionalize(tw_rewrite(q, T, hyper).formula, lits)
    bad_full = bad_mat = 0
    for bits in product((0, 1), repeat=6):
        inst = CliqueInstance(4, 2, bits)
        want = bool(brute_clique(inst))
        env = inst.assignment()
        bad_full += propositional_tw_value(q, T, thetas, lits, env) != want
        bad_mat += bool_eval(f, env) != want
    # the disjunct-free evaluation agrees with a materialized rewriting where one fits
    q3, T3 = clique_obda(3, 2)
    lits3 = clique_literal_map(3, 2)
    th3 = enumerate_tree_witnesses(q3, T3)
    f3 = propositionalize(tw_rewrite(q3, T3, th3).formula, lits3)
    bad_cross = sum(
        bool_eval(f3, CliqueInstance(3, 2, b).assignment())
        != propositional_tw_value(q3, T3, th3, lits3, CliqueInstance(3, 2, b).assignment())
        for b in product((0, 1), repeat=3)
    )
    ok = bad_full == bad_mat == bad_cross == 0
    criterion(
        8,
        ok,
        f"64 inputs: all {len(thetas)} witnesses (evaluated per input) mismatches={bad_full}; "
        f"{len(hyper)} hyperedge witnesses materialized mismatches={bad_mat}; (3,2) cross-check mismatches={bad_cross}",
    )
    assert ok


# ------------------------------------------------------------------------ 9


@pytest.mark.slow
def test_criterion_09_divide_and_rewrite(path4, criterion):
    reps = {d: verify_random(CORPUS[d], ["tw-pe", "split-pe"]) for d in (1, 2)}
    trees = sum(r.checks.get("split-pe", 0) for r in reps.values())
    equal = all(r.ok for r in reps.values())
    rows = bench_growth("tree-path", [4, 8, 16, 32, 64], "split-pe")
    exponent = fit_exponent(rows)
    T, q = path4
    top = split_rewrite(q, T, "balanced").formula
    shape = (
        isinstance(top, Or)
        and len(top.items) == 2
        and [v.name for v in top.items[0].vars] == ["y3"]
        and sorted(v.name for v in top.items[1].vars) == ["y2", "y4"]
        and "(atom A2 z) (eq y2 z) (eq y4 z)" in print_formula(top.items[1])
    )
    ok = equal and exponent is not None and exponent <= 2.3 and shape
    criterion(9, ok, f"tree-shaped trials={trees} split=tw:{equal} path exponent={exponent:.3f} example-4 shape={shape}")
    assert ok


# ----------------------------------------------------------------------- 10


def test_criterion_10_lower_bounds_excluded(criterion):
    # superpolynomial lower bounds cannot be certified by running code; what can be
    # checked is that every construction they are built on exists and is exercised above
    constructions = [clique_hgp, clique_obda, clique_data, propositionalize, hypergraph_to_obda, nbc_to_hgp3, hgp2_to_nbp]
    ok = all(callable(c) for c in constructions)
    criterion(10, ok, "lower bounds EXCLUDED (proofs, not computable); constructions they rest on are exercised by criteria 5-8")
    assert ok
