"""Hard instances: hypergraph encodings, clique programs and clique OBDA instances."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .boolmodels.models import BAnd, BConst, BNot, BOr, BVar, Hypergraph
from .boolmodels.translations import edge_var
from .core import (
    TGD,
    And,
    Atom,
    ConjunctiveQuery,
    DataInstance,
    Eq,
    Exists,
    Forall,
    Not,
    Ontology,
    Or,
    const,
    var,
)
from .errors import BadParameters, LengthMismatch, MissingIncidence, NotDegreeTwo, UnmappedAtom

MAX_HGP_N = 12
MAX_OBDA_N = 8

X, Y = var("x"), var("y")


# ------------------------------------------------------ hypergraph encodings


def incidence_maps(h: Hypergraph):
    """The two edges of every vertex, as (i1, i2); given maps are checked, missing ones derived."""
    inc = h.incidence()
    names = h.edge_names()
    for v in h.vertices:
        if len(inc[v]) != 2:
            raise NotDegreeTwo(f"vertex {v} lies in {len(inc[v])} edges")
    if h.i1 is None and h.i2 is None:
        return (
            {v: names[inc[v][0]] for v in h.vertices},
            {v: names[inc[v][1]] for v in h.vertices},
        )
    if h.i1 is None or h.i2 is None:
        raise MissingIncidence("only one of i1, i2 given")
    for v in h.vertices:
        if v not in h.i1 or v not in h.i2:
            raise MissingIncidence(f"no incidence for vertex {v}")
        e1, e2 = h.i1[v], h.i2[v]
        if e1 == e2 or {e1, e2} != {names[j] for j in inc[v]}:
            raise MissingIncidence(f"i1, i2 of {v} must be its two distinct edges")
    return dict(h.i1), dict(h.i2)


def edge_variable(e: str):
    return var(f"z_{e}")


def hypergraph_to_obda(h: Hypergraph, i1=None, i2=None):
    """q_H and T_H for a hypergraph of degree exactly 2.

    One atom R_v(z_{i1(v)}, z_{i2(v)}) per vertex; one tgd per edge e whose
    head points R_v into the new null when i1(v) = e and out of it when
    i2(v) = e.
    """
    if i1 is not None or i2 is not None:
        h = Hypergraph(h.vertices, h.edges, h.labels, i1, i2)
    i1, i2 = incidence_maps(h)
    atoms = tuple(Atom(f"R_{v}", (edge_variable(i1[v]), edge_variable(i2[v]))) for v in h.vertices)
    q = ConjunctiveQuery((), atoms)
    tgds = []
    for e in h.edge_names():
        head = [Atom(f"R_{v}", (Y, X)) for v in h.vertices if i1[v] == e]
        head += [Atom(f"R_{v}", (X, Y)) for v in h.vertices if i2[v] == e]
        if head:
            tgds.append(TGD(Atom(f"A_{e}", (X,)), Y, tuple(head)))
    return q, Ontology(tuple(tgds))


def _bits(values, n, what):
    values = list(values)
    if len(values) != n:
        raise LengthMismatch(f"{what}: expected {n} bits, got {len(values)}")
    return [bool(b) for b in values]


def assignment_data(h: Hypergraph, alpha, beta, individual: str = "a") -> DataInstance:
    """R_v(a,a) for alpha(v)=1 and A_e(a) for beta(e)=1."""
    a = const(individual)
    al = _bits(alpha, len(h.vertices), "alpha")
    be = _bits(beta, len(h.edges), "beta")
    atoms = [Atom(f"R_{v}", (a, a)) for v, b in zip(h.vertices, al) if b]
    atoms += [Atom(f"A_{e}", (a,)) for e, b in zip(h.edge_names(), be) if b]
    return DataInstance(frozenset(atoms))


def hypergraph_literal_map(h: Hypergraph) -> dict:
    """Predicate -> literal for propositionalizing rewritings of q_H and T_H."""
    m = {f"R_{v}": BVar(h.label(v)) for v in h.vertices}
    m.update({f"A_{e}": BVar(edge_var(e)) for e in h.edge_names()})
    return m


EXAMPLE2 = Hypergraph(
    ("v1", "v2", "v3", "v4"),
    (
        ("e1", frozenset({"v1", "v2", "v3"})),
        ("e2", frozenset({"v3", "v4"})),
        ("e3", frozenset({"v1", "v2", "v4"})),
    ),
    {},
    {"v1": "e1", "v2": "e3", "v3": "e1", "v4": "e2"},
    {"v1": "e3", "v2": "e1", "v3": "e2", "v4": "e3"},
)


# ------------------------------------------------------------------ cliques


def _pairs(n):
    return list(combinations(range(1, n + 1), 2))


def _ordered_pairs(n):
    return [(j, jp) for j in range(1, n + 1) for jp in range(1, n + 1) if j != jp]


def edge_names(n: int) -> list:
    return [f"e_{j}_{jp}" for j, jp in _pairs(n)]


@dataclass(frozen=True)
class CliqueInstance:
    n: int
    k: int
    edges: tuple  # bits, one per pair j < j' in lexicographic order

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise BadParameters(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        m = self.n * (self.n - 1) // 2
        if len(self.edges) != m:
            raise LengthMismatch(f"expected {m} edge bits, got {len(self.edges)}")

    def edge(self, j: int, jp: int) -> int:
        j, jp = min(j, jp), max(j, jp)
        return int(self.edges[_pair_index(self.n, j, jp)])

    def assignment(self) -> dict:
        return dict(zip(edge_names(self.n), map(int, self.edges)))


def _pair_index(n, j, jp):
    # position of (j, jp), j < jp, in lexicographic order
    return (j - 1) * n - (j - 1) * j // 2 + (jp - j - 1)


def _check(n, k, cap):
    if not (1 <= k <= n <= cap):
        raise BadParameters(f"need 1 <= k <= n <= {cap}, got n={n}, k={k}")


def clique_hgp(n: int, k: int) -> Hypergraph:
    """The monotone program H_{n,k}: w vertices carry the edge variables."""
    _check(n, k, MAX_HGP_N)
    labels = {}
    vertices = []
    for j, jp in _pairs(n):
        w = f"w_{j}_{jp}"
        vertices.append(w)
        labels[w] = f"e_{j}_{jp}"
    for j, jp in _ordered_pairs(n):
        u = f"u_{j}_{jp}"
        vertices.append(u)
        labels[u] = "1"
    for i in range(1, k + 1):
        vertices.append(f"v_{i}")
        labels[f"v_{i}"] = "0"
    edges = []
    for j, jp in _pairs(n):
        w = f"w_{j}_{jp}"
        edges.append((f"h_{j}_{jp}", frozenset({w, f"u_{j}_{jp}"})))
        edges.append((f"h_{jp}_{j}", frozenset({w, f"u_{jp}_{j}"})))
    for i in range(1, k + 1):
        for j in range(1, n + 1):
            members = {f"v_{i}"} | {f"u_{j}_{jp}" for jp in range(1, n + 1) if jp != j}
            edges.append((f"f_{i}_{j}", frozenset(members)))
    return Hypergraph(tuple(vertices), tuple(edges), labels)


def clique_obda(n: int, k: int):
    """The Boolean CQ q_{n,k} and the depth-2 ontology T_{n,k}."""
    _check(n, k, MAX_OBDA_N)
    v = lambda i: var(f"v_{i}")
    z = lambda i, j: var(f"z_{i}_{j}")
    w = lambda j, jp: var(f"w_{j}_{jp}")
    x = lambda j, jp: var(f"x_{j}_{jp}")
    u = lambda j, jp: var(f"u_{j}_{jp}")
    atoms = []
    for i in range(1, k + 1):
        for j in range(1, n + 1):
            atoms.append(Atom(f"T_{i}_{j}", (v(i), z(i, j))))
    for j, jp in _pairs(n):
        atoms.append(Atom(f"P_{j}_{jp}", (w(j, jp), x(j, jp))))
        atoms.append(Atom(f"P_{jp}_{j}", (w(j, jp), x(jp, j))))
    for j, jp in _ordered_pairs(n):
        atoms.append(Atom("Q", (u(j, jp), x(j, jp))))
        for i in range(1, k + 1):
            atoms.append(Atom("U", (u(j, jp), z(i, j))))
    q = ConjunctiveQuery((), tuple(atoms))

    tgds = []
    for i in range(1, k + 1):
        for j in range(1, n + 1):
            head = [Atom(f"T_{i}_{jj}", (Y, X)) for jj in range(1, n + 1) if jj != j]
            head += [Atom("U", (Y, X)), Atom("Q", (Y, X)), Atom(f"A'_{i}_{j}", (Y,))]
            tgds.append(TGD(Atom(f"A_{i}_{j}", (X,)), Y, tuple(head)))
            tgds.append(
                TGD(Atom(f"A'_{i}_{j}", (X,)), Y, (Atom(f"T_{i}_{j}", (X, Y)), Atom("U", (X, Y))))
            )
    for j, jp in _ordered_pairs(n):
        tgds.append(
            TGD(
                Atom(f"B_{j}_{jp}", (X,)),
                Y,
                (Atom(f"P_{jp}_{j}", (Y, X)), Atom("U", (Y, X)), Atom(f"B'_{j}_{jp}", (Y,))),
            )
        )
        tgds.append(
            TGD(Atom(f"B'_{j}_{jp}", (X,)), Y, (Atom(f"P_{j}_{jp}", (X, Y)), Atom("Q", (X, Y))))
        )
    return q, Ontology(tuple(tgds))


def clique_hyperedge_witnesses(n: int, k: int, thetas=None) -> list:
    """The tree witnesses of q_{n,k}, T_{n,k} that match hyperedges of H_{n,k}.

    These are the witnesses whose internal set contains some v_i (one per
    f^{ij}) or some w_jj' (one per h^{jj'}).  The full enumeration also
    returns witnesses generated by A'_ij, B'_jj' and u-only ones; they are
    sound but subsumed on clique data.
    """
    from .treewitness import enumerate_tree_witnesses

    if thetas is None:
        q, T = clique_obda(n, k)
        thetas = enumerate_tree_witnesses(q, T)
    marks = {f"v_{i}" for i in range(1, k + 1)} | {f"w_{j}_{jp}" for j, jp in _pairs(n)}
    return [t for t in thetas if any(v.name in marks for v in t.internals)]


def clique_data(inst: CliqueInstance, individual: str = "a", with_b: bool = True) -> DataInstance:
    """Single-individual data A_e.

    Besides Q, U, the A_ij and the P atoms of present edges, every B_jj'(a)
    is included unless ``with_b`` is off: the B-generated nulls are where
    the w variables of absent or unused edges go.
    """
    a = const(individual)
    atoms = [Atom("Q", (a, a)), Atom("U", (a, a))]
    atoms += [Atom(f"A_{i}_{j}", (a,)) for i in range(1, inst.k + 1) for j in range(1, inst.n + 1)]
    if with_b:
        atoms += [Atom(f"B_{j}_{jp}", (a,)) for j, jp in _ordered_pairs(inst.n)]
    for (j, jp), bit in zip(_pairs(inst.n), inst.edges):
        if bit:
            atoms += [Atom(f"P_{j}_{jp}", (a, a)), Atom(f"P_{jp}_{j}", (a, a))]
    return DataInstance(frozenset(atoms))


def clique_literal_map(n: int, k: int) -> dict:
    """P atoms to edge variables; T, A', B' to 0; U, Q, A, B to 1."""
    m = {"U": BConst(True), "Q": BConst(True)}
    for j, jp in _pairs(n):
        m[f"P_{j}_{jp}"] = m[f"P_{jp}_{j}"] = BVar(f"e_{j}_{jp}")
    for i in range(1, k + 1):
        for j in range(1, n + 1):
            m[f"T_{i}_{j}"] = BConst(False)
            m[f"A'_{i}_{j}"] = BConst(False)
            m[f"A_{i}_{j}"] = BConst(True)
    for j, jp in _ordered_pairs(n):
        m[f"B'_{j}_{jp}"] = BConst(False)
        m[f"B_{j}_{jp}"] = BConst(True)
    return m


# --------------------------------------------------------- propositionalize


def _literal(value):
    if isinstance(value, (BVar, BConst, BNot, BAnd, BOr)):
        return value
    if value in (0, 1, True, False):
        return BConst(bool(value))
    if isinstance(value, str):
        if value in ("0", "1"):
            return BConst(value == "1")
        if value.startswith("!"):
            return BNot(BVar(value[1:]))
        return BVar(value)
    raise TypeError(f"not a literal: {value!r}")


def _simplify(node, items):
    """Fold constants out of an and/or node."""
    absorbing = isinstance(node, BOr)
    kept = []
    for g in items:
        if isinstance(g, BConst):
            if g.value == absorbing:
                return BConst(absorbing)
            continue
        kept.append(g)
    if not kept:
        return BConst(not absorbing)
    if len(kept) == 1:
        return kept[0]
    return type(node)(tuple(kept))


def propositionalize(f, literal_map: dict, simplify: bool = True):
    """Send every variable to one individual and replace ground atoms by literals.

    ``literal_map`` is keyed by predicate name (with a single individual a
    predicate determines its ground atom); values are Boolean nodes, 0/1 or
    variable names (``!p`` for a negated literal).  Quantifiers of both
    kinds are dropped and equalities become true.
    """
    lits = {p: _literal(v) for p, v in literal_map.items()}
    memo = {}

    def walk(g):
        key = id(g)
        if key in memo:
            return memo[key][1]
        if isinstance(g, Atom):
            if g.predicate not in lits:
                raise UnmappedAtom(f"no literal for {g.predicate}")
            out = lits[g.predicate]
        elif isinstance(g, Eq):
            out = BConst(True)
        elif isinstance(g, (Exists, Forall)):
            out = walk(g.body)
        elif isinstance(g, Not):
            inner = walk(g.body)
            out = BConst(not inner.value) if simplify and isinstance(inner, BConst) else BNot(inner)
        elif isinstance(g, (And, Or)):
            items = [walk(h) for h in g.items]
            node = BAnd(()) if isinstance(g, And) else BOr(())
            out = _simplify(node, items) if simplify else type(node)(tuple(items))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[key] = (g, out)
        return out

    return walk(f)


def propositional_tw_value(q: ConjunctiveQuery, T: Ontology, thetas, literal_map: dict, assignment) -> bool:
    """Value of the propositionalized tree-witness rewriting without building it.

    The rewriting is a disjunction over independent witness sets, so after
    propositionalizing it is the hypergraph function of the witness
    hypergraph at alpha = the atom literals and beta = the tw literals.
    """
    from .boolmodels.models import bool_eval
    from .boolmodels.translations import hypergraph_function
    from .treewitness import tw_formula, tw_hypergraph

    h = tw_hypergraph(q, T, thetas).to_hypergraph()
    alpha = {
        f"v{i}": bool_eval(propositionalize(a, literal_map), assignment) for i, a in enumerate(q.atoms)
    }
    beta = {
        f"t{j}": bool_eval(propositionalize(tw_formula(t), literal_map), assignment)
        for j, t in enumerate(thetas)
    }
    return hypergraph_function(h, alpha, beta)


# --------------------------------------------------------------- tree paths


def tree_path_obda(n: int):
    """Path query R_1(y_1,y_2), ..., R_n(y_n,y_{n+1}) with A_i(x) -> exists y. R_i(x,y), R_{i+1}(y,x)."""
    if n < 1:
        raise BadParameters(f"need n >= 1, got {n}")
    ys = [var(f"y{i}") for i in range(1, n + 2)]
    q = ConjunctiveQuery((), tuple(Atom(f"R{i}", (ys[i - 1], ys[i])) for i in range(1, n + 1)))
    tgds = tuple(
        TGD(Atom(f"A{i}", (X,)), Y, (Atom(f"R{i}", (X, Y)), Atom(f"R{i + 1}", (Y, X))))
        for i in range(1, n)
    )
    return q, Ontology(tgds)
