import random
from itertools import combinations, product

import numpy as np
import pytest

from obda_rewrite.boolmodels.models import (
    NBP,
    BAnd,
    BConst,
    BNot,
    BOr,
    BVar,
    BooleanCircuit,
    CircuitBuilder,
    Hypergraph,
    NondetCircuit,
    bool_size,
    evaluate,
    from_lines,
    model_variables,
    parse_bool,
    print_bool,
    to_lines,
)
from obda_rewrite.boolmodels.tables import truth_table
from obda_rewrite.boolmodels.translations import (
    circuit_dualize,
    edge_var,
    hgp2_to_nbp,
    hgp_from_hypergraph,
    hgp_monotone_circuit,
    hgp_to_nbc,
    hypergraph_function,
    implication_dual_circuit,
    nbc_to_hgp3,
    nbp_to_hgp2,
    nbp_to_monotone_circuit,
    normalize_degree2,
    normalize_fanin2,
)
from obda_rewrite.errors import (
    AdviceTooLarge,
    DegreeTooHigh,
    NonMonotoneCircuit,
    NonMonotoneNBP,
    UnboundVariable,
    UnnormalizedCircuit,
)
from obda_rewrite.gadgets import CliqueInstance, clique_hgp
from obda_rewrite.evaluate import brute_clique
from obda_rewrite.textio import parse_ontology, parse_query
from obda_rewrite.treewitness import enumerate_tree_witnesses, tw_hypergraph


def assignments(names):
    names = list(names)
    for bits in product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


def brute_hgp(h, env):
    """Enumerate every independent edge subset."""
    from obda_rewrite.boolmodels.models import label_value

    edges = [m for _, m in h.edges]
    zeros = {v for v in h.vertices if not label_value(h.label(v), env)}
    for r in range(len(edges) + 1):
        for s in combinations(range(len(edges)), r):
            if any(edges[i] & edges[j] for i, j in combinations(s, 2)):
                continue
            if zeros <= set().union(*(edges[i] for i in s)):
                return True
    return False


def random_plain_hypergraph(rng, n_edges, n_vertices):
    vs = [f"v{i}" for i in range(n_vertices)]
    edges = tuple((f"e{j}", frozenset(rng.sample(vs, rng.randint(1, min(3, n_vertices))))) for j in range(n_edges))
    return Hypergraph(tuple(vs), edges)


def random_degree2_hgp(rng, n_edges, n_vars, monotone=True):
    vs, labels, members = [], {}, {j: set() for j in range(n_edges)}
    for i in range(rng.randint(1, n_edges + 2)):
        v = f"v{i}"
        vs.append(v)
        r = rng.random()
        if r < 0.15:
            labels[v] = rng.choice("01")
        else:
            x = f"x{rng.randrange(n_vars)}"
            labels[v] = x if monotone or rng.random() < 0.6 else "!" + x
        for j in rng.sample(range(n_edges), rng.randint(0, min(2, n_edges))):
            members[j].add(v)
    edges = tuple((f"e{j}", frozenset(members[j])) for j in range(n_edges))
    return Hypergraph(tuple(vs), edges, labels)


def random_monotone_nbp(rng, n_nodes, n_vars, n_arcs):
    nodes = ["s", "t"] + [f"n{i}" for i in range(n_nodes - 2)]
    arcs = []
    for _ in range(n_arcs):
        u = rng.choice([n for n in nodes if n != "t"])
        v = rng.choice([n for n in nodes if n not in ("s", u)])
        lab = rng.choice(["0", "1"] + [f"x{i}" for i in range(n_vars)] * 3)
        arcs.append((u, v, lab))
    return NBP(tuple(nodes), tuple(arcs), "s", "t")


def random_monotone_circuit(rng, n_inputs, n_gates):
    b = CircuitBuilder()
    pool = [b.input(f"x{i}") for i in range(n_inputs)]
    for _ in range(n_gates):
        args = rng.sample(pool, min(len(pool), rng.randint(2, 3)))
        pool.append(b.and_(*args) if rng.random() < 0.5 else b.or_(*args))
    return b.build(pool[-1])


def random_nbc(rng, n_x, n_adv, n_gates):
    b = CircuitBuilder()
    xs = [b.input(f"x{i}") for i in range(n_x)]
    ys = [b.input(f"y{i}") for i in range(n_adv)]
    pool = xs + ys + [b.not_(y) for y in ys]
    for _ in range(n_gates):
        a, c = rng.sample(pool, 2) if len(pool) > 1 else (pool[0], pool[0])
        pool.append(b.and_(a, c) if rng.random() < 0.5 else b.or_(a, c))
    c = normalize_fanin2(b.build(pool[-1]))
    return NondetCircuit(c, tuple(xs), tuple(ys))


# ------------------------------------------------------------- evaluation


def test_zero_vertex_in_two_edges():
    h = Hypergraph(("v",), (("e1", frozenset({"v"})), ("e2", frozenset({"v"}))), {"v": "0"})
    assert evaluate(h, {})


def test_uncoverable_zero():
    h = Hypergraph(("v",), (), {"v": "0"})
    assert not evaluate(h, {})


def test_single_arc_nbp():
    g = NBP(("s", "t"), (("s", "t", "p"),), "s", "t")
    assert [evaluate(g, {"p": a}) for a in (0, 1)] == [False, True]


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(NBP(("s", "t"), (("s", "t", "p"),), "s", "t"), {})


def test_clique_hgp_on_single_edge():
    h = clique_hgp(4, 2)
    env = {f"e_{j}_{jp}": 0 for j in range(1, 5) for jp in range(j + 1, 5)}
    assert not evaluate(h, env)
    env["e_1_2"] = 1
    assert evaluate(h, env)


def test_formula_evaluation_and_size():
    f = BOr((BAnd((BVar("p"), BNot(BVar("q")))), BConst(False)))
    assert bool_size(f) == 3
    assert evaluate(f, {"p": 1, "q": 0}) and not evaluate(f, {"p": 1, "q": 1})
    assert parse_bool(print_bool(f)) == f


def test_advice_cap():
    b = CircuitBuilder()
    ys = [b.input(f"y{i}") for i in range(25)]
    n = NondetCircuit(b.build(b.and_(*ys)), (), tuple(ys))
    with pytest.raises(AdviceTooLarge):
        evaluate(n, {})


def test_hgp_search_matches_enumeration():
    rng = random.Random(10)
    for _ in range(40):
        h = random_degree2_hgp(rng, rng.randint(1, 8), 4, monotone=False)
        for env in assignments(h.variables()):
            assert evaluate(h, env) == brute_hgp(h, env)


def test_truth_table_matches_evaluate():
    rng = random.Random(11)
    h = random_degree2_hgp(rng, 6, 5, monotone=False)
    names = h.variables()
    tab = truth_table(h, names)
    for r, env in enumerate(assignments(reversed(names))):
        # row r sets variable i to bit i of r
        env = {v: (r >> i) & 1 for i, v in enumerate(names)}
        assert tab[r] == evaluate(h, env)


def test_line_format_round_trip():
    rng = random.Random(12)
    g = random_monotone_nbp(rng, 5, 3, 8)
    assert from_lines(to_lines(g)) == g
    c = random_monotone_circuit(rng, 3, 4)
    assert from_lines(to_lines(c)) == c


# ------------------------------------------------------ hypergraph function


def test_example1_function():
    T = parse_ontology("A1(x) -> exists y. R1(x,y), Q(x,y)\nA2(x) -> exists y. R2(x,y), Q(y,x)")
    q = parse_query("q(x1,x2) <- R1(x1,y1), Q(y2,y1), R2(x2,y2)")
    thetas = enumerate_tree_witnesses(q, T)
    h = tw_hypergraph(q, T, thetas).to_hypergraph()
    idx = {a.predicate: f"v{i}" for i, a in enumerate(q.atoms)}
    t1 = next(f"t{j}" for j, t in enumerate(thetas) if t.generators[0].predicate == "A1")
    t2 = next(f"t{j}" for j, t in enumerate(thetas) if t.generators[0].predicate == "A2")
    for bits in product((0, 1), repeat=5):
        r1, qq, r2, b1, b2 = bits
        alpha = {idx["R1"]: r1, idx["Q"]: qq, idx["R2"]: r2}
        beta = {t1: b1, t2: b2}
        want = (r1 and qq and r2) or (r2 and b1) or (r1 and b2)
        assert hypergraph_function(h, alpha, beta) == bool(want)


def test_function_all_vertices_true():
    h = random_plain_hypergraph(random.Random(13), 4, 5)
    alpha = {v: 1 for v in h.vertices}
    for beta in assignments(h.edge_names()):
        assert hypergraph_function(h, alpha, beta)


def _brute_function(h, alpha, beta):
    edges = list(h.edges)
    for r in range(len(edges) + 1):
        for s in combinations(edges, r):
            if any(a[1] & b[1] for a, b in combinations(s, 2)):
                continue
            if not all(beta[n] for n, _ in s):
                continue
            covered = set().union(*(m for _, m in s))
            if all(alpha[v] for v in h.vertices if v not in covered):
                return True
    return False


def test_function_matches_enumeration():
    rng = random.Random(14)
    for _ in range(25):
        h = random_plain_hypergraph(rng, rng.randint(1, 5), rng.randint(1, 5))
        for env in assignments(list(h.vertices) + list(h.edge_names())):
            alpha = {v: env[v] for v in h.vertices}
            beta = {e: env[e] for e in h.edge_names()}
            assert hypergraph_function(h, alpha, beta) == _brute_function(h, alpha, beta)


# ------------------------------------------------------------ translations


def test_hgp_from_hypergraph_size():
    h = random_plain_hypergraph(random.Random(15), 3, 4)
    p = hgp_from_hypergraph(h)
    assert p.size == 6 and p.monotone


def test_hgp_from_edgeless_hypergraph():
    h = Hypergraph(("a", "b"), ())
    p = hgp_from_hypergraph(h)
    for env in assignments(["p_a", "p_b"]):
        assert evaluate(p, env) == bool(env["p_a"] and env["p_b"])


def test_hgp_from_hypergraph_function():
    rng = random.Random(16)
    for _ in range(20):
        h = random_plain_hypergraph(rng, rng.randint(1, 5), rng.randint(1, 8))
        p = hgp_from_hypergraph(h)
        names = [h.label(v) for v in h.vertices] + [edge_var(e) for e in h.edge_names()]
        for env in assignments(names):
            alpha = {v: env[h.label(v)] for v in h.vertices}
            beta = {e: env[edge_var(e)] for e in h.edge_names()}
            assert evaluate(p, env) == hypergraph_function(h, alpha, beta)


def test_normalize_degree2():
    rng = random.Random(17)
    for _ in range(30):
        p = random_degree2_hgp(rng, rng.randint(1, 6), 4, monotone=rng.random() < 0.5)
        out = normalize_degree2(p)
        assert out.size == p.size + 3
        assert all(out.vertex_degree(v) == 2 for v in out.vertices)
        assert out.monotone == p.monotone
        for env in assignments(p.variables()):
            assert evaluate(out, env) == evaluate(p, env)


def test_normalize_degree2_adds_three_fresh_edges():
    p = Hypergraph(("a",), (("e1", frozenset({"a"})), ("e2", frozenset({"a"}))), {"a": "x"})
    out = normalize_degree2(p)
    assert out.edges[:2] == p.edges
    assert all(not m & {"a"} for _, m in out.edges[2:])


def test_normalize_degree2_single_isolated_vertex():
    p = Hypergraph(("a",), (), {"a": "x"})
    out = normalize_degree2(p)
    assert out.degree() == 2
    assert [evaluate(out, {"x": b}) for b in (0, 1)] == [False, True]


def test_normalize_rejects_degree3():
    e = frozenset({"a"})
    with pytest.raises(DegreeTooHigh):
        normalize_degree2(Hypergraph(("a",), (("e1", e), ("e2", e), ("e3", e))))


def test_hgp2_to_nbp_negates():
    rng = random.Random(18)
    for _ in range(25):
        p = random_degree2_hgp(rng, rng.randint(1, 5), 4, monotone=False)
        g = hgp2_to_nbp(p)
        for env in assignments(p.variables()):
            assert evaluate(g, env) == (not evaluate(p, env))


def test_hgp2_to_nbp_dual():
    rng = random.Random(19)
    for _ in range(25):
        p = random_degree2_hgp(rng, rng.randint(1, 5), 4)
        g = hgp2_to_nbp(p, dual=True)
        assert g.monotone
        for env in assignments(p.variables()):
            flipped = {k: 1 - v for k, v in env.items()}
            assert evaluate(g, env) == (not evaluate(p, flipped))


def test_hgp2_to_nbp_constant_false():
    p = Hypergraph(("a",), (), {"a": "0"})
    g = hgp2_to_nbp(p)
    assert evaluate(g, {})


def test_dual_needs_monotone():
    p = Hypergraph(("a",), (("e", frozenset({"a"})),), {"a": "!x"})
    with pytest.raises(NonMonotoneNBP):
        hgp2_to_nbp(p, dual=True)


def test_nbp_to_hgp2_single_arc():
    g = NBP(("s", "t"), (("s", "t", "p"),), "s", "t")
    p = nbp_to_hgp2(g)
    assert p.degree() <= 2
    assert [evaluate(p, {"p": a}) for a in (0, 1)] == [True, False]


def test_nbp_to_hgp2_unreachable_sink():
    g = NBP(("s", "m", "t"), (("s", "m", "p"),), "s", "t")
    p = nbp_to_hgp2(g)
    assert all(evaluate(p, env) for env in assignments(["p"]))


def test_nbp_hgp_round_trip():
    rng = random.Random(20)
    for _ in range(15):
        p = random_degree2_hgp(rng, rng.randint(1, 4), 3, monotone=False)
        back = nbp_to_hgp2(hgp2_to_nbp(p))
        assert back.degree() <= 2
        for env in assignments(p.variables()):
            assert evaluate(back, env) == evaluate(p, env)


def test_reachability_circuit_single_arc_and_parallel():
    g = NBP(("s", "t"), (("s", "t", "p"),), "s", "t")
    c = nbp_to_monotone_circuit(g)
    assert [evaluate(c, {"p": a}) for a in (0, 1)] == [False, True]
    g = NBP(("s", "a", "b", "t"), (("s", "a", "p"), ("a", "t", "1"), ("s", "b", "q"), ("b", "t", "1")), "s", "t")
    c = nbp_to_monotone_circuit(g)
    for env in assignments(["p", "q"]):
        assert evaluate(c, env) == bool(env["p"] or env["q"])


def test_reachability_circuit_matches_nbp():
    rng = random.Random(21)
    for _ in range(25):
        g = random_monotone_nbp(rng, rng.randint(2, 8), rng.randint(1, 6), rng.randint(1, 12))
        c = nbp_to_monotone_circuit(g)
        assert c.monotone
        for env in assignments(g.variables()):
            assert evaluate(c, env) == evaluate(g, env)


def test_reachability_circuit_rejects_negation():
    with pytest.raises(NonMonotoneNBP):
        nbp_to_monotone_circuit(NBP(("s", "t"), (("s", "t", "!p"),), "s", "t"))


def test_dualize_and_gate():
    b = CircuitBuilder()
    c = b.build(b.and_(b.input("p"), b.input("q")))
    d = circuit_dualize(c)
    assert [op for _, op, _ in d.gates] == ["OR"]
    assert circuit_dualize(d) == c


def test_dualize_law():
    rng = random.Random(22)
    for _ in range(25):
        c = random_monotone_circuit(rng, rng.randint(2, 8), rng.randint(1, 20))
        d = circuit_dualize(c)
        for env in assignments(c.inputs):
            flipped = {k: 1 - v for k, v in env.items()}
            assert evaluate(d, env) == (not evaluate(c, flipped))


def test_dualize_rejects_not():
    b = CircuitBuilder()
    with pytest.raises(NonMonotoneCircuit):
        circuit_dualize(b.build(b.not_(b.input("p"))))


def test_implication_circuit_computes_program():
    rng = random.Random(23)
    for _ in range(25):
        p = random_degree2_hgp(rng, rng.randint(1, 5), 4)
        c = hgp_monotone_circuit(p)
        dual = implication_dual_circuit(p)
        for env in assignments(p.variables()):
            flipped = {k: 1 - v for k, v in env.items()}
            assert evaluate(c, env) == evaluate(p, env)
            assert evaluate(dual, env) == (not evaluate(p, flipped))


def test_hgp_to_nbc():
    rng = random.Random(24)
    for _ in range(20):
        p = random_degree2_hgp(rng, rng.randint(1, 10), 4, monotone=rng.random() < 0.5)
        n = hgp_to_nbc(p)
        assert n.monotone or not p.monotone
        for env in assignments(p.variables()):
            assert evaluate(n, env) == evaluate(p, env)


def test_hgp_to_nbc_all_ones():
    p = Hypergraph(("a", "b"), (("e", frozenset({"a", "b"})),), {"a": "1", "b": "1"})
    assert evaluate(hgp_to_nbc(p), {})


def test_clique_nbc():
    n = hgp_to_nbc(clique_hgp(4, 2))
    names = [f"e_{j}_{jp}" for j in range(1, 5) for jp in range(j + 1, 5)]
    tab = truth_table(n, names)
    for r in range(64):
        env = {x: (r >> i) & 1 for i, x in enumerate(names)}
        inst = CliqueInstance(4, 2, tuple(env[x] for x in names))
        assert tab[r] == bool(brute_clique(inst))


def test_nbc_table_both_layouts():
    rng = random.Random(26)
    for _ in range(10):
        n = random_nbc(rng, 3, rng.randint(2, 4), 6)
        tab = truth_table(n, list(n.x_inputs))
        for r in range(8):
            env = {x: (r >> i) & 1 for i, x in enumerate(n.x_inputs)}
            assert tab[r] == evaluate(n, env)


def test_nbc_single_input():
    b = CircuitBuilder()
    x = b.input("x")
    c = BooleanCircuit(("x",), (("g0", "OR", ("x", "x")),), "g0")
    p = nbc_to_hgp3(NondetCircuit(c, ("x",), ()))
    assert [evaluate(p, {"x": a}) for a in (0, 1)] == [False, True]


def test_nbc_to_hgp3_matches():
    rng = random.Random(25)
    for _ in range(30):
        n = random_nbc(rng, rng.randint(1, 4), rng.randint(0, 3), rng.randint(1, 8))
        p = nbc_to_hgp3(n)
        assert p.degree() <= 3
        for env in assignments(n.x_inputs):
            want = evaluate(n, env)
            if n.monotone:
                # monotone closure: some smaller input is accepted
                want = any(
                    evaluate(n, dict(zip(n.x_inputs, sub)))
                    for sub in product(*[(0, 1) if env[x] else (0,) for x in n.x_inputs])
                )
            assert evaluate(p, env) == want


def test_nbc_to_hgp3_needs_fanin2():
    c = BooleanCircuit(("x", "y", "z"), (("g", "AND", ("x", "y", "z")),), "g")
    with pytest.raises(UnnormalizedCircuit):
        nbc_to_hgp3(NondetCircuit(c, ("x", "y", "z"), ()))
