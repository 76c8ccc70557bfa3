"""Translations between hypergraph programs, branching programs and circuits."""

from __future__ import annotations

import math

from ..errors import (
    DegreeTooHigh,
    NonMonotoneCircuit,
    NonMonotoneNBP,
    UnnormalizedCircuit,
)
from .models import (
    NBP,
    BooleanCircuit,
    CircuitBuilder,
    Hypergraph,
    NondetCircuit,
    hgp_accepts,
    is_const,
    label_var,
    negate_label,
)


def _fresh(base: str, taken: set) -> str:
    name, i = base, 1
    while name in taken:
        name = f"{base}_{i}"
        i += 1
    taken.add(name)
    return name


def edge_var(name: str) -> str:
    return f"p_{name}"


# ------------------------------------------------------- hypergraph function


def hgp_from_hypergraph(h: Hypergraph) -> Hypergraph:
    """Monotone program of size 2|H| computing the hypergraph function of ``h``.

    Every edge ``e`` gets a vertex ``a_e`` (label 1) added to it and a new
    edge ``{a_e, b_e}`` where ``b_e`` is labelled ``p_e``.
    """
    taken = set(h.vertices) | set(h.edge_names())
    labels = {v: h.label(v) for v in h.vertices}
    vertices = list(h.vertices)
    edges, extra = [], []
    for name, members in h.edges:
        a = _fresh(f"a_{name}", taken)
        b = _fresh(f"b_{name}", taken)
        vertices += [a, b]
        labels[a] = "1"
        labels[b] = edge_var(name)
        edges.append((name, members | {a}))
        extra.append((_fresh(f"{name}'", taken), frozenset({a, b})))
    return Hypergraph(tuple(vertices), tuple(edges + extra), labels)


def hypergraph_function(h: Hypergraph, alpha: dict, beta: dict) -> bool:
    """Some independent edge set X has beta=1 on X and alpha=1 off the vertices of X."""
    env = {h.label(v): alpha[v] for v in h.vertices}
    env.update({edge_var(n): beta[n] for n in h.edge_names()})
    return hgp_accepts(hgp_from_hypergraph(h), env)


def normalize_degree2(p: Hypergraph) -> Hypergraph:
    """Degree exactly 2 and three more edges, same function."""
    deg = {v: 0 for v in p.vertices}
    for _, m in p.edges:
        for v in m:
            deg[v] += 1
    if any(d > 2 for d in deg.values()):
        raise DegreeTooHigh(f"degree {max(deg.values())} > 2")
    taken = set(p.vertices) | set(p.edge_names())
    x, y, z = (_fresh(n, taken) for n in ("x", "y", "z"))
    d0 = [v for v in p.vertices if deg[v] == 0]
    d1 = [v for v in p.vertices if deg[v] == 1]
    labels = {v: p.label(v) for v in p.vertices}
    labels.update({x: "1", y: "0", z: "0"})
    e1 = (_fresh("e1", taken), frozenset(d0 + d1 + [x, y]))
    e2 = (_fresh("e2", taken), frozenset(d0 + [x, z]))
    e3 = (_fresh("e3", taken), frozenset({y, z}))
    return Hypergraph(p.vertices + (x, y, z), p.edges + (e1, e2, e3), labels)


def _ensure_degree2(p: Hypergraph) -> Hypergraph:
    if p.degree() > 2:
        raise DegreeTooHigh(f"degree {p.degree()} > 2")
    if all(p.vertex_degree(v) == 2 for v in p.vertices) and p.edges:
        return p
    return normalize_degree2(p)


# ------------------------------------------------------ implication graphs


def implication_graph(p: Hypergraph) -> list:
    """Labelled arcs of the 2-SAT implication graph of a degree-2 program.

    Nodes are ``(i, '+')`` and ``(i, '-')``.  Intersecting edges give
    ``(i+, j-)`` arcs labelled 1; a vertex ``v`` shared by ``e_i`` and ``e_j``
    gives ``(i-, j+)`` arcs labelled with the negation of ``v``'s label.
    """
    edges = [m for _, m in p.edges]
    inc = p.incidence()
    arcs = []
    for i in range(len(edges)):
        for j in range(len(edges)):
            if i != j and edges[i] & edges[j]:
                arcs.append(((i, "+"), (j, "-"), "1"))
    for v in p.vertices:
        es = inc[v]
        if len(es) != 2:
            raise DegreeTooHigh(f"vertex {v} has degree {len(es)}, expected 2")
        i, j = es
        lab = negate_label(p.label(v))
        if lab == "0":
            continue
        arcs.append(((i, "-"), (j, "+"), lab))
        arcs.append(((j, "-"), (i, "+"), lab))
    return arcs


def _positive(label: str) -> str:
    return label[1:] if label.startswith("!") else label


def hgp2_to_nbp(p: Hypergraph, dual: bool = False) -> NBP:
    """NBP computing the negation of ``p``; with ``dual`` the monotone NBP for f*.

    Two copies of the implication graph per edge ``e_i`` are chained so that
    ``s`` reaches ``t`` iff some ``e_i+`` and ``e_i-`` lie on a common cycle.
    """
    if dual and not p.monotone:
        raise NonMonotoneNBP("dual form needs a monotone program")
    p2 = _ensure_degree2(p)
    arcs_b = implication_graph(p2)
    k = len(p2.edges)

    def node(i, sign, n):
        j, s = n
        return f"B{i}{sign}:e{j}{s}"

    nodes = ["s", "t"]
    arcs = []
    for i in range(k):
        for sign in "+-":
            nodes += [node(i, sign, (j, s)) for j in range(k) for s in "+-"]
            for u, v, lab in arcs_b:
                arcs.append((node(i, sign, u), node(i, sign, v), _positive(lab) if dual else lab))
        arcs.append(("s", node(i, "+", (i, "-")), "1"))
        arcs.append((node(i, "+", (i, "+")), node(i, "-", (i, "+")), "1"))
        arcs.append((node(i, "-", (i, "-")), "t", "1"))
    return NBP(tuple(nodes), tuple(arcs), "s", "t")


def nbp_to_hgp2(g: NBP) -> Hypergraph:
    """Degree-2 program computing the negation of the NBP's function."""
    taken = set()
    vertices, labels, edges = [], {}, []
    into, leaving = {n: [] for n in g.nodes}, {n: [] for n in g.nodes}
    for idx, (u, v, lab) in enumerate(g.arcs):
        e0, e1 = _fresh(f"a{idx}^0", taken), _fresh(f"a{idx}^1", taken)
        vertices += [e0, e1]
        labels[e0] = negate_label(lab)
        labels[e1] = "1"
        edges.append((f"arc{idx}", frozenset({e0, e1})))
        leaving[u].append(e0)
        into[v].append(e1)
    sink = _fresh("sink", taken)
    vertices.append(sink)
    labels[sink] = "0"
    for n in g.nodes:
        if n in (g.s, g.t):
            continue
        edges.append((f"node:{n}", frozenset(into[n] + leaving[n])))
    edges.append(("node:" + g.t, frozenset(into[g.t] + [sink])))
    return Hypergraph(tuple(vertices), tuple(edges), labels)


# ---------------------------------------------------------------- circuits


def _label_gate(b: CircuitBuilder, label: str):
    if is_const(label):
        return b.const(label == "1")
    if label.startswith("!"):
        return b.not_(b.input(label[1:]))
    return b.input(label)


def closure_matrix(b: CircuitBuilder, n: int, arcs) -> list:
    """Reflexive-transitive closure of a labelled adjacency matrix by repeated squaring."""
    r = [[b.TRUE if i == j else b.FALSE for j in range(n)] for i in range(n)]
    for u, v, lab in arcs:
        r[u][v] = b.or_(r[u][v], _label_gate(b, lab))
    for _ in range(max(1, math.ceil(math.log2(max(n, 2))))):
        nxt = [[None] * n for _ in range(n)]
        for i in range(n):
            row = r[i]
            for j in range(n):
                terms = []
                for w in range(n):
                    a, c = row[w], r[w][j]
                    if a == b.FALSE or c == b.FALSE:
                        continue
                    terms.append(b.and_(a, c))
                nxt[i][j] = b.or_(*terms)
        r = nxt
    return r


def nbp_to_monotone_circuit(g: NBP) -> BooleanCircuit:
    """Monotone circuit for s-t reachability under the arc labelling."""
    if not g.monotone:
        raise NonMonotoneNBP("NBP has negated labels")
    idx = {n: i for i, n in enumerate(g.nodes)}
    b = CircuitBuilder()
    for x in g.variables():
        b.input(x)
    r = closure_matrix(b, len(g.nodes), [(idx[u], idx[v], lab) for u, v, lab in g.arcs])
    return b.build(r[idx[g.s]][idx[g.t]])


def implication_dual_circuit(p: Hypergraph) -> BooleanCircuit:
    """Monotone circuit for f* of a monotone degree-2 program.

    Reachability on the implication graph with contact labels made
    positive: f*(a) = 1 iff some e_i+ and e_i- lie on a common cycle.
    """
    if not p.monotone:
        raise NonMonotoneCircuit("program has negated labels")
    p2 = _ensure_degree2(p)
    k = len(p2.edges)

    def pos(n):
        return 2 * n[0] + (0 if n[1] == "+" else 1)

    arcs = [(pos(u), pos(v), _positive(lab)) for u, v, lab in implication_graph(p2)]
    b = CircuitBuilder()
    for x in p2.variables():
        b.input(x)
    r = closure_matrix(b, 2 * k, arcs)
    out = b.or_(*(b.and_(r[2 * i + 1][2 * i], r[2 * i][2 * i + 1]) for i in range(k)))
    return b.build(out)


def circuit_dualize(c: BooleanCircuit) -> BooleanCircuit:
    """Swap AND and OR (and the two constants)."""
    if not c.monotone:
        raise NonMonotoneCircuit("circuit has NOT gates")
    swap = {"AND": "OR", "OR": "AND"}
    gates = []
    for name, op, args in c.gates:
        if op == "CONST":
            gates.append((name, op, ("0" if args[0] == "1" else "1",)))
        else:
            gates.append((name, swap[op], args))
    return BooleanCircuit(c.inputs, tuple(gates), c.output)


def hgp_monotone_circuit(p: Hypergraph) -> BooleanCircuit:
    """Monotone circuit computing a monotone degree-2 program (dual of the f* circuit)."""
    return circuit_dualize(implication_dual_circuit(p))


# ------------------------------------------------- nondeterministic circuits


def hgp_to_nbc(p: Hypergraph) -> NondetCircuit:
    """Advice bits pick edges; check independence and cover of zeros."""
    taken = set(p.variables())
    advice = [_fresh(f"y_{n}", taken) for n in p.edge_names()]
    edges = [m for _, m in p.edges]
    b = CircuitBuilder()
    xs = [b.input(x) for x in p.variables()]
    for y in advice:
        b.input(y)
    clauses = []
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            if edges[i] & edges[j]:
                clauses.append(b.or_(b.not_(advice[i]), b.not_(advice[j])))
    inc = p.incidence()
    for v in p.vertices:
        lit = _label_gate(b, p.label(v))
        clauses.append(b.or_(lit, *(advice[j] for j in inc[v])))
    c = b.build(b.and_(*clauses))
    return NondetCircuit(c, tuple(xs), tuple(advice))


def normalize_fanin2(c: BooleanCircuit) -> BooleanCircuit:
    """Split n-ary AND/OR into binary trees and constants into input-free gadgets."""
    gates, rename = [], {}
    taken = set(c.inputs) | {g[0] for g in c.gates}

    def ref(a):
        return rename.get(a, a)

    for name, op, args in c.gates:
        args = tuple(ref(a) for a in args)
        if op in ("AND", "OR") and len(args) > 2:
            acc = args[0]
            for a in args[1:-1]:
                mid = _fresh(f"{name}.", taken)
                gates.append((mid, op, (acc, a)))
                acc = mid
            gates.append((name, op, (acc, args[-1])))
        elif op in ("AND", "OR") and len(args) == 1:
            gates.append((name, op, (args[0], args[0])))
        else:
            gates.append((name, op, args))
    return BooleanCircuit(c.inputs, tuple(gates), c.output)


def nbc_to_hgp3(n: NondetCircuit) -> Hypergraph:
    """Degree-3 program accepting an input iff some advice makes the circuit true.

    For monotone circuits the ``!x`` vertices are dropped, which yields the
    monotone closure of the function.
    """
    c = n.circuit
    for name, op, args in c.gates:
        if op in ("AND", "OR") and len(args) != 2:
            raise UnnormalizedCircuit(f"gate {name} has fan-in {len(args)}; normalize first")
    monotone = n.monotone
    labels, vertices = {}, []
    pos, neg = {}, {}
    counter = [0]

    def vertex(label):
        v = f"w{counter[0]}"
        counter[0] += 1
        vertices.append(v)
        labels[v] = label
        return v

    nodes = list(c.inputs) + [g[0] for g in c.gates]
    for g in nodes:
        gv = vertex("0")
        pos[g] = {gv}
        neg[g] = {gv}
    for x in n.x_inputs:
        if not monotone:
            pos[x].add(vertex("!" + x))
        neg[x].add(vertex(x))
    extra_edges = []
    for name, op, args in c.gates:
        if op == "CONST":
            # a private 0-vertex forces e (constant 1) or ebar (constant 0)
            (pos if args[0] == "1" else neg)[name].add(vertex("0"))
            continue
        if op == "NOT":
            (j,) = args
            # e_i meets e_j and ebar_i meets ebar_j, so exactly one of e_i, e_j is chosen
            w1, w2 = vertex("1"), vertex("1")
            pos[name].add(w1)
            pos[j].add(w1)
            neg[name].add(w2)
            neg[j].add(w2)
            continue
        # OR as stated; AND is the same gadget with e and ebar swapped
        e_side, bar_side = (pos, neg) if op == "OR" else (neg, pos)
        u = vertex("0")
        bar_side[name].add(u)
        for j in args:
            w = vertex("1")
            e_side[j].add(w)
            bar_side[name].add(w)
            h = vertex("1")
            bar_side[j].add(h)
            extra_edges.append(frozenset({h, u}))
    pos[c.output].add(vertex("0"))
    edges = []
    for g in nodes:
        edges.append((f"e[{g}]", frozenset(pos[g])))
        edges.append((f"ebar[{g}]", frozenset(neg[g])))
    for i, m in enumerate(extra_edges):
        edges.append((f"h{i}", m))
    return Hypergraph(tuple(vertices), tuple(edges), labels)
