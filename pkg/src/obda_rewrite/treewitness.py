"""Tree witnesses, their hypergraph, conflicts and degree."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .chase import NullId, generator_model
from .core import (
    Atom,
    ConjunctiveQuery,
    Eq,
    FreshNames,
    Ontology,
    Term,
    conj,
    disj,
    exists,
    generators_for,
)
from .errors import TooManyTreeWitnesses

DEFAULT_MAX_TREE_WITNESSES = 10**4


@dataclass(frozen=True)
class TreeWitness:
    roots: frozenset
    internals: frozenset
    atoms: frozenset
    generators: tuple

    def sort_key(self):
        return (
            tuple(sorted(v.name for v in self.internals)),
            tuple(sorted(v.name for v in self.roots)),
        )

    def __str__(self):
        r = ",".join(sorted(v.name for v in self.roots))
        i = ",".join(sorted(v.name for v in self.internals))
        return f"tw({{{r}}}, {{{i}}})"


class _IndexedModel:
    """Adjacency view of a generator model for homomorphism search."""

    def __init__(self, model):
        self.root = None
        self.nulls = frozenset(e for e in model.domain if isinstance(e, NullId))
        self.everything = frozenset(model.domain)
        self.unary = defaultdict(set)
        self.out = defaultdict(lambda: defaultdict(set))
        self.inn = defaultdict(lambda: defaultdict(set))
        self.loops = defaultdict(set)
        for p, args in model.atoms:
            if len(args) == 1:
                self.unary[p].add(args[0])
            else:
                a, b = args
                self.out[p][a].add(b)
                self.inn[p][b].add(a)
                if a == b:
                    self.loops[p].add(a)
        for e in model.domain:
            if not isinstance(e, NullId):
                self.root = e
        self.preds = set(self.unary) | set(self.out)


@lru_cache(maxsize=4096)
def _indexed_generator_model(T: Ontology, rho, depth: int) -> _IndexedModel:
    return _IndexedModel(generator_model(T, rho, depth))


def _homomorphism(atoms, m: _IndexedModel, internal, roots, relaxed=False) -> bool:
    """Is there a map of ``atoms`` into ``m`` sending internal vars to nulls
    and root vars to the root (anywhere when ``relaxed``)?"""
    variables = set()
    for a in atoms:
        if a.predicate not in m.preds:
            return False
        variables |= a.variables()
    doms = {}
    for v in variables:
        if v in internal:
            doms[v] = set(m.nulls)
        elif relaxed:
            doms[v] = set(m.everything)
        else:
            doms[v] = {m.root} if m.root is not None else set()
    binary = defaultdict(list)
    for a in atoms:
        if a.arity == 1:
            doms[a.args[0]] &= m.unary.get(a.predicate, set())
        elif a.args[0] == a.args[1]:
            doms[a.args[0]] &= m.loops.get(a.predicate, set())
        else:
            x, y = a.args
            binary[x].append((a.predicate, y, True))
            binary[y].append((a.predicate, x, False))
    if any(not d for d in doms.values()):
        return False
    order = sorted(variables, key=lambda v: (len(doms[v]), -len(binary[v]), v))

    def solve(doms):
        free = [v for v in order if len(doms[v]) > 1 or v not in assigned]
        if not free:
            return True
        v = min(free, key=lambda u: (len(doms[u]), -len(binary[u])))
        for val in sorted(doms[v], key=str):
            new = dict(doms)
            new[v] = {val}
            ok = True
            for p, w, forward in binary[v]:
                allowed = (m.out if forward else m.inn)[p].get(val, set())
                nd = new[w] & allowed
                if not nd:
                    ok = False
                    break
                new[w] = nd
            if ok:
                assigned.add(v)
                if solve(new):
                    return True
                assigned.discard(v)
        return False

    assigned = set()
    return solve(doms)


def _gaifman_existential(q: ConjunctiveQuery, ex: set) -> dict:
    adj = {v: set() for v in ex}
    for a in q.atoms:
        vs = [v for v in a.variables() if v in ex]
        for u, w in combinations(vs, 2):
            adj[u].add(w)
            adj[w].add(u)
    return adj


def enumerate_tree_witnesses(
    q: ConjunctiveQuery,
    T: Ontology,
    max_tree_witnesses: int = DEFAULT_MAX_TREE_WITNESSES,
    chase_depth: int | None = None,
    must_contain: Term | None = None,
) -> list:
    """All tree witnesses for ``q`` and ``T`` in canonical order.

    ``t_i`` ranges over sets of existential variables that are connected in
    the Gaifman graph; a set is extended only while the atoms touching it
    still map into some generator model with the set sent to nulls, which
    is necessary for every superset.  ``must_contain`` restricts the search
    to witnesses whose internal set contains that variable.
    """
    ex = set(q.existential_vars())
    if not ex:
        return []
    sig = dict(T.signature())
    for p, n in q.signature().items():
        sig.setdefault(p, n)
    # a connected internal set of k variables reaches null depth at most k
    depth = len(ex) if chase_depth is None else chase_depth
    gens = generators_for(sig)
    models = [(rho, _indexed_generator_model(T, rho, depth)) for rho in gens]
    touching = defaultdict(set)
    for a in q.atoms:
        for v in a.variables():
            touching[v].add(a)
    adj = _gaifman_existential(q, ex)
    order = sorted(ex)
    rank = {v: i for i, v in enumerate(order)}

    def atoms_of(S):
        out = set()
        for v in S:
            out |= touching[v]
        return out

    def feasible(S):
        atoms = atoms_of(S)
        return any(_homomorphism(atoms, m, S, (), relaxed=True) for _, m in models)

    found = []

    def consider(S):
        qt = frozenset(atoms_of(S))
        roots = set()
        for a in qt:
            roots |= a.variables()
        roots -= S
        gs = tuple(rho for rho, m in models if _homomorphism(qt, m, S, roots))
        if gs:
            found.append(TreeWitness(frozenset(roots), frozenset(S), qt, gs))
            if len(found) > max_tree_witnesses:
                raise TooManyTreeWitnesses(
                    f"more than {max_tree_witnesses} tree witnesses"
                )

    def extend(S, ext, nbhd, v):
        consider(S)
        ext = list(ext)
        while ext:
            w = ext.pop()
            S2 = S | {w}
            if not feasible(S2):
                continue
            excl = [u for u in adj[w] if rank[u] > rank[v] and u not in S and u not in nbhd]
            extend(S2, ext + excl, nbhd | adj[w], v)

    starts = order if must_contain is None else [must_contain]
    for v in starts:
        if not feasible({v}):
            continue
        if must_contain is None:
            ext = [u for u in adj[v] if rank[u] > rank[v]]
            extend(frozenset({v}), ext, adj[v] | {v}, v)
        else:
            _extend_all(frozenset({v}), adj, feasible, consider)
    found.sort(key=TreeWitness.sort_key)
    return found


def _extend_all(seed, adj, feasible, consider):
    """Enumerate every connected superset of ``seed`` once (ESU with a fixed seed)."""
    seen = set()

    def rec(S):
        if S in seen:
            return
        seen.add(S)
        consider(S)
        frontier = set()
        for u in S:
            frontier |= adj[u]
        for w in sorted(frontier - S):
            S2 = S | {w}
            if S2 not in seen and feasible(S2):
                rec(S2)
            else:
                seen.add(S2)

    rec(seed)


def tw_formula(t: TreeWitness, fresh: FreshNames | None = None):
    """Disjunction over generators of exists z (rho(z) and every root equal to z)."""
    if fresh is None:
        fresh = FreshNames(t.roots | t.internals)
    z = fresh("z")
    y = fresh("y")
    roots = sorted(t.roots, key=lambda v: v.name)
    parts = []
    for rho in t.generators:
        body = conj([rho.formula(z, y), *(Eq(x, z) for x in roots)])
        parts.append(exists((z,), body))
    return disj(parts)


@dataclass(frozen=True)
class TWHypergraph:
    vertices: tuple  # atoms of q
    edges: tuple  # q_t per witness, same order as the witness list
    conflicts: frozenset  # pairs (i, j), i < j

    def conflicting(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.conflicts

    def compatible(self, i: int, j: int) -> bool:
        a, b = self.edges[i], self.edges[j]
        return not self.conflicting(i, j) or a <= b or b <= a

    def degree(self) -> int:
        return max((sum(v in e for e in self.edges) for v in self.vertices), default=0)

    def to_hypergraph(self):
        """Plain labelled hypergraph: vertex ``v<i>`` per atom, edge ``t<j>`` per witness."""
        from .boolmodels.models import Hypergraph

        names = {a: f"v{i}" for i, a in enumerate(self.vertices)}
        edges = tuple((f"t{j}", frozenset(names[a] for a in e)) for j, e in enumerate(self.edges))
        verts = tuple(names[a] for a in self.vertices)
        return Hypergraph(verts, edges, {v: f"p_{v}" for v in verts})


def tw_hypergraph(q: ConjunctiveQuery, T: Ontology, thetas: list) -> TWHypergraph:
    edges = tuple(t.atoms for t in thetas)
    conflicts = frozenset(
        (i, j) for i, j in combinations(range(len(edges)), 2) if edges[i] & edges[j]
    )
    return TWHypergraph(tuple(q.atoms), edges, conflicts)


def tw_degree(q: ConjunctiveQuery, T: Ontology, thetas: list) -> int:
    count = defaultdict(int)
    for t in thetas:
        for z in t.internals:
            count[z] += 1
    return 1 + max(count.values(), default=0)
