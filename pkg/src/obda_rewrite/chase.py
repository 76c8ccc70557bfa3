"""Oblivious chase, generator models, ontology depth and the entailment order."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    Atom,
    DataInstance,
    Generator,
    IN,
    OUT,
    REFLEXIVE,
    TGD,
    UNARY,
    Ontology,
    Term,
    const,
    generators_for,
    var,
)


@dataclass(frozen=True, order=True)
class NullId:
    root: str
    path: tuple

    @property
    def depth(self) -> int:
        return len(self.path)

    def child(self, tgd_index: int) -> "NullId":
        return NullId(self.root, self.path + (tgd_index,))

    def __str__(self):
        return "_:" + ".".join([self.root, *map(str, self.path)])

    __repr__ = __str__


def element_depth(e) -> int:
    return e.depth if isinstance(e, NullId) else 0


@dataclass(frozen=True)
class CanonicalModel:
    domain: frozenset
    atoms: frozenset
    depth_bound: int
    truncated: bool = False

    def by_predicate(self) -> dict:
        idx = defaultdict(list)
        for p, args in self.atoms:
            idx[p].append(args)
        return idx

    def nulls(self) -> list:
        return sorted(e for e in self.domain if isinstance(e, NullId))

    def constants(self) -> list:
        return sorted(e for e in self.domain if isinstance(e, Term))

    def max_depth(self) -> int:
        return max((element_depth(e) for e in self.domain), default=0)

    def ground_part(self) -> DataInstance:
        return DataInstance(
            frozenset(
                Atom(p, args) for p, args in self.atoms if all(isinstance(t, Term) for t in args)
            )
        )

    def __contains__(self, fact):
        return fact in self.atoms


def _fact(a: Atom) -> tuple:
    return (a.predicate, a.args)


def _match_body(body: Atom, args: tuple) -> Optional[dict]:
    binding = {}
    for t, v in zip(body.args, args):
        if binding.setdefault(t, v) != v:
            return None
    return binding


def _chase(tgds, facts, depth_bound):
    by_pred = defaultdict(list)
    for i, t in enumerate(tgds):
        by_pred[t.body.predicate].append((i, t))
    seen = set(facts)
    queue = deque(seen)
    truncated = False
    while queue:
        pred, args = queue.popleft()
        for i, t in by_pred.get(pred, ()):
            binding = _match_body(t.body, args)
            if binding is None:
                continue
            if t.existential is not None:
                (d,) = set(binding.values())
                null = d.child(i) if isinstance(d, NullId) else NullId(d.name, (i,))
                if null.depth > depth_bound:
                    truncated = True
                    continue
                binding[t.existential] = null
            for h in t.head:
                f = (h.predicate, tuple(binding[x] for x in h.args))
                if f not in seen:
                    seen.add(f)
                    queue.append(f)
    return seen, truncated


def _model(facts, bound, truncated) -> CanonicalModel:
    dom = set()
    for _, args in facts:
        dom.update(args)
    return CanonicalModel(frozenset(dom), frozenset(facts), bound, truncated)


def build_chase(T: Ontology, A: DataInstance, depth_bound: int) -> CanonicalModel:
    """Oblivious chase of ``A`` under ``T`` keeping nulls of tree depth <= depth_bound.

    The null created by tgd ``i`` on element ``d`` is ``d.child(i)``, so
    re-firing the same trigger reuses it.
    """
    facts, truncated = _chase(T.tgds, {_fact(a) for a in A.atoms}, depth_bound)
    return _model(facts, depth_bound, truncated)


SEED_PREDICATE = "__seed__"


def seed_tgd(rho: Generator) -> TGD:
    x, y = var("x"), var("y")
    return TGD(Atom(SEED_PREDICATE, (x,)), y if rho.existential else None, (rho.head_atom(x, y),))


def generator_model(T: Ontology, rho: Generator, depth_bound: int, root: str = "a") -> CanonicalModel:
    """The chase of T plus ``seed(x) -> rho(x)`` from ``seed(root)``, seed atoms dropped."""
    tgds = (*T.tgds, seed_tgd(rho))
    facts, truncated = _chase(tgds, {(SEED_PREDICATE, (const(root),))}, depth_bound)
    facts = {f for f in facts if f[0] != SEED_PREDICATE}
    return _model(facts, depth_bound, truncated)


def saturate(T: Ontology, A: DataInstance) -> DataInstance:
    """All ground atoms over ind(A) entailed by T and A.

    With single-atom bodies and at most two variables per tgd, a fact
    about constants can only depend on nulls of depth 1 (a null's own
    children never produce atoms mentioning its parent), so bound 1 is
    exact.
    """
    facts, _ = _chase(T.tgds, {_fact(a) for a in A.atoms}, 1)
    return DataInstance(
        frozenset(Atom(p, args) for p, args in facts if not any(isinstance(t, NullId) for t in args))
    )


# ------------------------------------------------------------------ depth


class _Sentinel:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


Unbounded = _Sentinel("Unbounded")
ExceedsCap = _Sentinel("ExceedsCap")


class _DepthAnalysis:
    """Witness-configuration graph over existential tgds.

    The facts holding at a null created by tgd j depend on j alone, so
    configurations are indexed by tgd; edges record which existential
    tgds fire at that configuration.
    """

    P, C, E = const("P"), const("C"), const("E")

    def __init__(self, T: Ontology):
        self.T = T
        self.plain = tuple(t for t in T.tgds if t.existential is None)
        self.exist = [i for i, t in enumerate(T.tgds) if t.existential is not None]
        self._pair = {}

    def _close(self, facts):
        return _chase(self.plain, set(facts), 0)[0]

    def pair(self, key, head_tgd: TGD):
        """(facts fed back to the parent, initial facts of the child) for one firing."""
        if key not in self._pair:
            x = next(iter(head_tgd.body.variables()))
            sub = {x: self.P, head_tgd.existential: self.C}
            facts = self._close(
                {(h.predicate, tuple(sub[t] for t in h.args)) for h in head_tgd.head}
            )
            back = {f for f in facts if set(f[1]) == {self.P}}
            child = {f for f in facts if set(f[1]) == {self.C}}
            self._pair[key] = (back, child)
        return self._pair[key]

    def configure(self, init, forced=()):
        """Close facts at one element E, adding feedback from fired children."""
        rename = lambda fs, old: {(p, tuple(self.E for _ in args)) for p, args in fs}
        facts = set(rename(init, None))
        for key, tgd in forced:
            facts |= rename(self.pair(key, tgd)[0], None)
        fired = set()
        while True:
            facts = self._close(facts)
            new = set()
            for i in self.exist:
                t = self.T.tgds[i]
                if i in fired:
                    continue
                if any(_match_body(t.body, args) is not None for p, args in facts if p == t.body.predicate):
                    new.add(i)
            if not new:
                return facts, fired
            fired |= new
            for i in new:
                facts |= rename(self.pair(i, self.T.tgds[i])[0], None)

    def children(self, i):
        return self.configure(self.pair(i, self.T.tgds[i])[1])[1]


def ontology_depth(T: Ontology, cap: int = 64):
    """Longest chain of nulls over all generator models; Unbounded on cycles."""
    an = _DepthAnalysis(T)
    succ = {i: sorted(an.children(i)) for i in an.exist}
    longest = {}
    state = {}

    def visit(i):
        # longest null chain hanging from a null created by tgd i (counting it)
        if state.get(i) == 1:
            raise _Cycle
        if i in longest:
            return longest[i]
        state[i] = 1
        best = 1 + max((visit(j) for j in succ[i]), default=0)
        state[i] = 2
        longest[i] = best
        return best

    class _Cycle(Exception):
        pass

    depth = 0
    try:
        for rho in generators_for(T.signature()):
            if rho.existential:
                seed = seed_tgd(rho)
                key = ("seed", rho)
                _, child = an.pair(key, seed)
                below = 1 + max((visit(j) for j in an.configure(child)[1]), default=0)
                _, fired = an.configure(set(), forced=[(key, seed)])
            else:
                x = an.E
                init = {(rho.predicate, (x,) if rho.shape == UNARY else (x, x))}
                below = 0
                _, fired = an.configure(init)
            d = max([below] + [visit(j) for j in fired])
            depth = max(depth, d)
    except _Cycle:
        return Unbounded
    if depth > cap:
        return ExceedsCap
    return depth


# ------------------------------------------------------- entailment order


@dataclass(frozen=True, order=True)
class RoleForm:
    """Binary form S(x1,x2) (inverse=False) or S(x2,x1) (inverse=True)."""

    predicate: str
    inverse: bool = False

    def flip(self) -> "RoleForm":
        return RoleForm(self.predicate, not self.inverse)

    def __str__(self):
        return f"{self.predicate}(x2,x1)" if self.inverse else f"{self.predicate}(x1,x2)"


@dataclass
class EntailmentOrder:
    unary: dict = field(default_factory=dict)  # form -> set of forms it entails (reflexive-transitive)
    binary: dict = field(default_factory=dict)
    unary_edges: dict = field(default_factory=dict)
    binary_edges: dict = field(default_factory=dict)

    def leq(self, a, b) -> bool:
        rel = self.binary if isinstance(a, RoleForm) else self.unary
        return b in rel.get(a, {a})

    def downset(self, b) -> list:
        """All forms below ``b``, with ``b`` first and the rest sorted."""
        rel = self.binary if isinstance(b, RoleForm) else self.unary
        below = sorted(a for a, ups in rel.items() if b in ups and a != b)
        return [b] + below

    def classes(self, binary: bool = False) -> list:
        rel = self.binary if binary else self.unary
        seen, out = set(), []
        for a in sorted(rel):
            if a in seen:
                continue
            cls = sorted(b for b in rel[a] if a in rel.get(b, ()))
            seen.update(cls)
            out.append(tuple(cls))
        return out

    def representative(self, form):
        rel = self.binary if isinstance(form, RoleForm) else self.unary
        return min(b for b in rel.get(form, {form}) if form in rel.get(b, ()))


def _closure(nodes, edges):
    out = {}
    for n in nodes:
        seen, stack = {n}, [n]
        while stack:
            m = stack.pop()
            for k in edges.get(m, ()):
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        out[n] = seen
    return out


def _unary_consequences(head, x, y):
    """Generators at x implied by head atoms over focus x and other variable y."""
    out = []
    for h in head:
        a = h.args
        if h.arity == 1:
            if a[0] == x:
                out.append(Generator(UNARY, h.predicate))
        elif a == (x, x):
            out.append(Generator(REFLEXIVE, h.predicate))
        elif a == (x, y):
            out.append(Generator(OUT, h.predicate))
        elif a == (y, x):
            out.append(Generator(IN, h.predicate))
    return out


def entailment_order(T: Ontology, q=None) -> EntailmentOrder:
    """The reflexive-transitive order on generator forms and on directed role forms."""
    sig = dict(T.signature())
    if q is not None:
        for p, n in q.signature().items():
            sig.setdefault(p, n)
    unodes = generators_for(sig)
    bnodes = sorted(RoleForm(p, inv) for p, n in sig.items() if n == 2 for inv in (False, True))
    ue = defaultdict(set)
    be = defaultdict(set)
    for p, n in sig.items():
        if n == 2:
            ue[Generator(REFLEXIVE, p)] |= {Generator(OUT, p), Generator(IN, p)}
    for t in T.tgds:
        b = t.body
        if b.arity == 1 or b.args[0] == b.args[1]:
            x = b.args[0]
            src = Generator(UNARY if b.arity == 1 else REFLEXIVE, b.predicate)
            ue[src].update(_unary_consequences(t.head, x, t.existential))
            continue
        x, y = b.args
        ue[Generator(OUT, b.predicate)].update(_unary_consequences(t.head, x, y))
        ue[Generator(IN, b.predicate)].update(_unary_consequences(t.head, y, x))
        # x = y instance of the body
        refl = Generator(REFLEXIVE, b.predicate)
        for h in t.head:
            if h.arity == 1:
                ue[refl].add(Generator(UNARY, h.predicate))
            else:
                ue[refl].add(Generator(REFLEXIVE, h.predicate))
        src = RoleForm(b.predicate)
        for h in t.head:
            if h.arity == 2 and h.args == (x, y):
                be[src].add(RoleForm(h.predicate))
                be[src.flip()].add(RoleForm(h.predicate, True))
            elif h.arity == 2 and h.args == (y, x):
                be[src].add(RoleForm(h.predicate, True))
                be[src.flip()].add(RoleForm(h.predicate))
    for k in list(ue):
        ue[k].discard(k)
    for k in list(be):
        be[k].discard(k)
    return EntailmentOrder(
        unary=_closure(unodes, ue),
        binary=_closure(bnodes, be),
        unary_edges={k: set(v) for k, v in ue.items() if v},
        binary_edges={k: set(v) for k, v in be.items() if v},
    )
