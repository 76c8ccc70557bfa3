"""Positive-existential rewritings over complete data, and their closure to arbitrary data."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

from .chase import RoleForm, entailment_order
from .core import (
    Atom,
    ConjunctiveQuery,
    Eq,
    Exists,
    Forall,
    FreshNames,
    Generator,
    Not,
    And,
    Or,
    Ontology,
    REFLEXIVE,
    UNARY,
    all_vars,
    conj,
    disj,
    exists,
    formula_atoms,
    free_vars,
    pe_size,
)
from .errors import IncompatibleTreeWitnesses, NotTreeWarning, RewritingTooLarge
from .treewitness import (
    DEFAULT_MAX_TREE_WITNESSES,
    enumerate_tree_witnesses,
    tw_formula,
    tw_hypergraph,
)

DEFAULT_MAX_DISJUNCTS = 10**5


@dataclass(frozen=True)
class RewritingReport:
    formula: object
    disjunct_count: int
    size: int
    strategy: str
    tree_witnesses_used: int
    answer_vars: tuple = ()


def independent_subsets(hyper, limit: int | None = None):
    """Independent witness index sets by increasing size, then lexicographically."""
    n = len(hyper.edges)
    out = [()]
    layer = [()]
    while layer:
        nxt = []
        for s in layer:
            start = s[-1] + 1 if s else 0
            for j in range(start, n):
                if all(not hyper.conflicting(i, j) for i in s):
                    nxt.append(s + (j,))
                    if limit is not None and len(out) + len(nxt) > limit:
                        raise RewritingTooLarge(f"more than {limit} independent subsets")
        layer = nxt
        out.extend(layer)
    return out


def _quantify(body, answer_vars):
    return exists(sorted(free_vars(body) - set(answer_vars)), body)


def tw_rewrite(
    q: ConjunctiveQuery,
    T: Ontology,
    thetas=None,
    max_disjuncts: int = DEFAULT_MAX_DISJUNCTS,
    max_tree_witnesses: int = DEFAULT_MAX_TREE_WITNESSES,
) -> RewritingReport:
    """Disjunction over independent witness sets of the uncovered atoms and tw formulas."""
    if thetas is None:
        thetas = enumerate_tree_witnesses(q, T, max_tree_witnesses)
    hyper = tw_hypergraph(q, T, thetas)
    fresh = FreshNames(q.variables())
    tws = [tw_formula(t, FreshNames(fresh.used)) for t in thetas]
    disjuncts = []
    for subset in independent_subsets(hyper, max_disjuncts):
        covered = set()
        for j in subset:
            covered |= thetas[j].atoms
        body = conj([a for a in q.atoms if a not in covered] + [tws[j] for j in subset])
        disjuncts.append(_quantify(body, q.answer_vars))
    f = disj(disjuncts)
    return RewritingReport(f, len(disjuncts), pe_size(f), "tw", len(thetas), tuple(q.answer_vars))


def compact_tw_rewrite(q: ConjunctiveQuery, T: Ontology, thetas=None) -> RewritingReport:
    """Atom-wise disjunctions with the witnesses covering each atom."""
    if thetas is None:
        thetas = enumerate_tree_witnesses(q, T)
    hyper = tw_hypergraph(q, T, thetas)
    for i in range(len(thetas)):
        for j in range(i + 1, len(thetas)):
            if not hyper.compatible(i, j):
                raise IncompatibleTreeWitnesses(f"{thetas[i]} and {thetas[j]} are incompatible")
    fresh = FreshNames(q.variables())
    tws = [tw_formula(t, FreshNames(fresh.used)) for t in thetas]
    parts = [disj([a] + [tws[j] for j, t in enumerate(thetas) if a in t.atoms]) for a in q.atoms]
    f = _quantify(conj(parts), q.answer_vars)
    return RewritingReport(f, 1, pe_size(f), "compact", len(thetas), tuple(q.answer_vars))


# ------------------------------------------------------------ divide and rewrite


def _adjacency(atoms):
    adj = {}
    for a in atoms:
        vs = sorted(a.variables())
        for v in vs:
            adj.setdefault(v, set())
        if len(vs) == 2:
            adj[vs[0]].add(vs[1])
            adj[vs[1]].add(vs[0])
    return adj


def _pieces_without(adj, v):
    seen, sizes = {v}, []
    for s in adj:
        if s in seen:
            continue
        n, stack = 0, [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            n += 1
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        sizes.append(n)
    return sizes


def _is_tree(adj) -> bool:
    edges = sum(len(n) for n in adj.values()) // 2
    return edges == len(adj) - 1 and not _pieces_without_all(adj)


def _pieces_without_all(adj) -> bool:
    """True when the graph is disconnected."""
    if not adj:
        return False
    start = next(iter(adj))
    seen, stack = {start}, [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) != len(adj)


def _bfs_dist(adj, sources):
    dist = {s: 0 for s in sources}
    dq = deque(sources)
    while dq:
        u = dq.popleft()
        for w in sorted(adj[u]):
            if w not in dist:
                dist[w] = dist[u] + 1
                dq.append(w)
    return dist


def choose_balanced(atoms, existential) -> object:
    """A centroid of the component's Gaifman tree, moved to the nearest existential."""
    adj = _adjacency(atoms)
    cost = {v: max(_pieces_without(adj, v), default=0) for v in adj}
    if _is_tree(adj):
        best = min(cost.values())
        centroids = sorted(v for v in adj if cost[v] == best)
        ex_centroids = [v for v in centroids if v in existential]
        if ex_centroids:
            return ex_centroids[0]
        dist = _bfs_dist(adj, centroids)
        return min(existential, key=lambda v: (dist.get(v, len(adj)), cost[v], v))
    warnings.warn("Gaifman graph is not a tree; using an articulation-point heuristic", NotTreeWarning)
    n = len(adj)
    cuts = [v for v in existential if cost[v] < n - 1]
    if cuts:
        return min(cuts, key=lambda v: (cost[v], v))
    return min(existential, key=lambda v: (-len(adj[v]), v))


def _finest_partition(atoms, free):
    """Blocks of atoms connected through non-free variables."""
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in atoms:
        find(a)
        for v in a.variables():
            if v not in free:
                parent[find(a)] = find(("var", v))
    blocks = {}
    for a in sorted(atoms):
        blocks.setdefault(find(a), []).append(a)
    return sorted(blocks.values(), key=lambda b: b[0].sort_key())


class _Splitter:
    def __init__(self, q, T, strategy, max_tree_witnesses):
        self.q, self.T = q, T
        self.strategy = strategy
        self.max_tw = max_tree_witnesses
        self.memo = {}
        self.fresh = FreshNames(q.variables())
        self.tw_names = FreshNames(self.fresh.used)
        self.witness_count = 0
        adj = _adjacency(q.atoms)
        roots = sorted(q.answer_vars) or sorted(adj)[:1]
        self.depth = _bfs_dist(adj, roots)

    def choose(self, atoms, existential):
        if self.strategy == "balanced":
            return choose_balanced(atoms, existential)
        return min(existential, key=lambda v: (self.depth.get(v, 0), v))

    def rewrite(self, atoms: frozenset, free: frozenset):
        key = (atoms, free)
        if key in self.memo:
            return self.memo[key]
        parts = []
        for block in _finest_partition(atoms, free):
            ex = set()
            for a in block:
                ex |= a.variables()
            ex -= free
            if not ex:
                parts.extend(block)
                continue
            parts.append(self.component(frozenset(block), free, ex))
        out = conj(parts)
        self.memo[key] = out
        return out

    def component(self, block, free, ex):
        z = self.choose(block, ex)
        disjuncts = [exists((z,), self.rewrite(block, free | {z}))]
        local_free = set()
        for a in block:
            local_free |= a.variables()
        local_free &= free
        sub = ConjunctiveQuery(tuple(sorted(local_free)), tuple(block))
        for t in enumerate_tree_witnesses(sub, self.T, self.max_tw, must_contain=z):
            self.witness_count += 1
            y_jt = sorted(ex & t.roots)
            rest = self.rewrite(block - t.atoms, free | frozenset(y_jt))
            tw = tw_formula(t, FreshNames(self.tw_names.used))
            disjuncts.append(exists(y_jt, conj([rest, tw])))
        return disj(disjuncts)


def split_rewrite(
    q: ConjunctiveQuery,
    T: Ontology,
    strategy: str = "balanced",
    max_size: int | None = None,
    max_tree_witnesses: int = DEFAULT_MAX_TREE_WITNESSES,
) -> RewritingReport:
    """Divide-and-rewrite: split on one existential per component and recurse."""
    if strategy not in ("balanced", "leaf_first"):
        raise ValueError(f"unknown strategy {strategy!r}")
    sp = _Splitter(q, T, strategy, max_tree_witnesses)
    f = sp.rewrite(frozenset(q.atoms), frozenset(q.answer_vars))
    size = pe_size(f)
    if max_size is not None and size > max_size:
        raise RewritingTooLarge(f"rewriting size {size} exceeds {max_size}")
    count = len(f.items) if isinstance(f, Or) else 1
    return RewritingReport(f, count, size, f"split-{strategy}", sp.witness_count, tuple(q.answer_vars))


# ------------------------------------------------------------ arbitrary data


class _Closure:
    def __init__(self, T: Ontology, f):
        sig = dict(T.signature())
        for a in formula_atoms(f):
            sig.setdefault(a.predicate, a.arity)
        self.order = entailment_order(T, _SigOnly(sig))
        self.fresh = FreshNames(all_vars(f))
        self.y = self.fresh("y")
        self.memo = {}

    def replace(self, a: Atom):
        if a in self.memo:
            return self.memo[a]
        o = self.order
        if a.arity == 1:
            (u,) = a.args
            out = [g.formula(u, self.y) for g in o.downset(Generator(UNARY, a.predicate))]
        else:
            u, v = a.args
            roles = o.downset(RoleForm(a.predicate))
            out = []
            for r in roles:
                args = (v, u) if r.inverse else (u, v)
                atom = Atom(r.predicate, args)
                if atom not in out:
                    out.append(atom)
            covered = {Generator(REFLEXIVE, r.predicate) for r in roles}
            for g in o.downset(Generator(REFLEXIVE, a.predicate)):
                if g in covered:
                    continue
                if u == v:
                    out.append(g.formula(u, self.y))
                else:
                    out.append(conj([Eq(u, v), g.formula(u, self.y)]))
        res = disj(out)
        self.memo[a] = res
        return res

    def walk(self, f):
        if isinstance(f, Atom):
            return self.replace(f)
        if isinstance(f, Eq):
            return f
        if isinstance(f, And):
            return And(tuple(self.walk(g) for g in f.items))
        if isinstance(f, Or):
            return Or(tuple(self.walk(g) for g in f.items))
        if isinstance(f, Exists):
            return Exists(f.vars, self.walk(f.body))
        if isinstance(f, Forall):
            return Forall(f.vars, self.walk(f.body))
        if isinstance(f, Not):
            return Not(self.walk(f.body))
        raise TypeError(f"not a formula: {f!r}")


class _SigOnly:
    def __init__(self, sig):
        self._sig = sig

    def signature(self):
        return self._sig


def to_arbitrary_data(f, T: Ontology, q=None):
    """Replace each atom by the disjunction of the forms below it in the entailment order."""
    return _Closure(T, f).walk(f)
