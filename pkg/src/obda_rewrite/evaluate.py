"""Evaluation of formulas and programs, the certain-answer oracle and baselines."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations, product

from .chase import build_chase
from .core import (
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
    Term,
    free_vars,
)
from .errors import NotTree, RecursionDetected


@dataclass(frozen=True)
class AnswerSet:
    arity: int
    tuples: frozenset

    def __bool__(self):
        return bool(self.tuples)

    def __len__(self):
        return len(self.tuples)

    def __contains__(self, item):
        return tuple(item) in self.tuples

    def names(self) -> list:
        return sorted(tuple(str(c) for c in t) for t in self.tuples)


class Rel:
    """A relation over an ordered tuple of variables."""

    __slots__ = ("vars", "rows")

    def __init__(self, vars_, rows):
        self.vars = tuple(vars_)
        self.rows = rows if isinstance(rows, set) else set(rows)

    def join(self, other: "Rel") -> "Rel":
        if len(self.rows) > len(other.rows):
            return other.join(self)
        common = [v for v in self.vars if v in other.vars]
        extra = [v for v in other.vars if v not in self.vars]
        si = [self.vars.index(v) for v in common]
        oi = [other.vars.index(v) for v in common]
        ei = [other.vars.index(v) for v in extra]
        index = defaultdict(list)
        for r in self.rows:
            index[tuple(r[i] for i in si)].append(r)
        out = set()
        for r in other.rows:
            key = tuple(r[i] for i in oi)
            matches = index.get(key)
            if matches:
                tail = tuple(r[i] for i in ei)
                for m in matches:
                    out.add(m + tail)
        return Rel(self.vars + tuple(extra), out)

    def project(self, keep) -> "Rel":
        keep = [v for v in keep if v in self.vars]
        if tuple(keep) == self.vars:
            return self
        idx = [self.vars.index(v) for v in keep]
        return Rel(keep, {tuple(r[i] for i in idx) for r in self.rows})

    def extend(self, target, adom) -> "Rel":
        """Cylindrify to ``target`` variables (ordered) over the active domain."""
        missing = [v for v in target if v not in self.vars]
        rel = self
        if missing:
            rel = self.join(Rel(missing, set(product(adom, repeat=len(missing)))))
        return rel.reorder(target)

    def reorder(self, target) -> "Rel":
        if tuple(target) == self.vars:
            return self
        idx = [self.vars.index(v) for v in target]
        return Rel(target, {tuple(r[i] for i in idx) for r in self.rows})


def _atom_rel(a: Atom, facts_by_pred, cmap=None) -> Rel:
    vs, pos = [], {}
    for i, t in enumerate(a.args):
        if t.is_var and t not in pos:
            pos[t] = i
            vs.append(t)
    rows = set()
    for args in facts_by_pred.get(a.predicate, ()):
        if len(args) != len(a.args):
            continue
        ok = True
        for t, c in zip(a.args, args):
            if t.is_var:
                if args[pos[t]] != c:
                    ok = False
                    break
            elif (t if cmap is None else cmap.get(t, -1)) != c:
                ok = False
                break
        if ok:
            rows.add(tuple(args[pos[v]] for v in vs))
    return Rel(vs, rows)


def _index(A) -> dict:
    idx = defaultdict(list)
    for a in A.atoms:
        idx[a.predicate].append(a.args)
    return idx


def _join_all(rels) -> Rel:
    rels = sorted(rels, key=lambda r: len(r.rows))
    if not rels:
        return Rel((), {()})
    acc = rels.pop(0)
    while rels:
        if not acc.rows:
            return Rel(acc.vars + tuple(v for r in rels for v in r.vars if v not in acc.vars), set())
        # prefer a relation sharing variables with what we have
        best = min(
            range(len(rels)),
            key=lambda i: (not (set(rels[i].vars) & set(acc.vars)), len(rels[i].rows)),
        )
        acc = acc.join(rels.pop(best))
    return acc


class _FOEvaluator:
    def __init__(self, A: DataInstance):
        self.facts = _index(A)
        self.adom = tuple(A.constants())

    def eval(self, f) -> Rel:
        if isinstance(f, Atom):
            return _atom_rel(f, self.facts)
        if isinstance(f, Eq):
            l, r = f.left, f.right
            if l.is_var and r.is_var:
                if l == r:
                    return Rel((l,), {(c,) for c in self.adom})
                return Rel((l, r), {(c, c) for c in self.adom})
            if l.is_var or r.is_var:
                v, c = (l, r) if l.is_var else (r, l)
                return Rel((v,), {(c,)} if c in self.adom else set())
            return Rel((), {()} if l == r else set())
        if isinstance(f, And):
            return _join_all([self.eval(g) for g in f.items])
        if isinstance(f, Or):
            target = sorted(free_vars(f))
            rows = set()
            for g in f.items:
                rows |= self.eval(g).extend(target, self.adom).rows
            return Rel(target, rows)
        if isinstance(f, Exists):
            body = self.eval(f.body)
            if not self.adom and any(v not in body.vars for v in f.vars):
                return Rel([v for v in body.vars if v not in f.vars], set())
            return body.project([v for v in body.vars if v not in f.vars])
        if isinstance(f, Not):
            body = self.eval(f.body)
            target = sorted(free_vars(f.body))
            body = body.extend(target, self.adom)
            allrows = set(product(self.adom, repeat=len(target)))
            return Rel(target, allrows - body.rows)
        if isinstance(f, Forall):
            return self.eval(Not(Exists(f.vars, Not(f.body))))
        raise TypeError(f"not a formula: {f!r}")


def eval_fo(f, A: DataInstance, answer_vars=None) -> AnswerSet:
    """Active-domain evaluation; answer order defaults to sorted free variables."""
    if answer_vars is None:
        answer_vars = sorted(free_vars(f))
    ev = _FOEvaluator(A)
    rel = ev.eval(f).extend(tuple(answer_vars), ev.adom)
    return AnswerSet(len(answer_vars), frozenset(rel.rows))


# ------------------------------------------------------------------ datalog


def _dependency_order(prog):
    heads = defaultdict(list)
    for c in prog.clauses:
        heads[c.head.predicate].append(c)
    deps = {
        p: {b.predicate for c in cs for b in c.body if isinstance(b, Atom) and b.predicate in heads}
        for p, cs in heads.items()
    }
    order, state = [], {}
    for root in sorted(deps):
        if state.get(root) == 2:
            continue
        stack = [(root, iter(sorted(deps[root])))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                state[node] = 2
                order.append(node)
                continue
            st = state.get(nxt)
            if st == 1:
                raise RecursionDetected(f"predicate {nxt} depends on itself")
            if st is None:
                state[nxt] = 1
                stack.append((nxt, iter(sorted(deps[nxt]))))
    return order, heads


class _Bits:
    """A relation over adom^k as an int bitmask; bit index is the base-n tuple code."""

    __slots__ = ("n", "k", "bits")

    def __init__(self, n, k, bits):
        self.n, self.k, self.bits = n, k, bits

    @classmethod
    def from_rows(cls, rows, n, k):
        bits = 0
        for r in rows:
            code = 0
            for x in r:
                code = code * n + x
            bits |= 1 << code
        return cls(n, k, bits)

    def rows(self) -> set:
        out = set()
        s = bin(self.bits)[:1:-1]
        for code, ch in enumerate(s):
            if ch == "1":
                r = []
                for _ in range(self.k):
                    code, x = divmod(code, self.n)
                    r.append(x)
                out.add(tuple(reversed(r)))
        return out


def _uniform(c, rels) -> bool:
    """Every body atom is an already computed relation over exactly the head tuple."""
    args = c.head.args
    return (
        bool(c.body)
        and len(set(args)) == len(args)
        and all(isinstance(b, Atom) and b.args == args and b.predicate in rels for b in c.body)
    )


def _eval_clause(c, rels, facts, adom, cmap=None) -> set:
    parts = []
    eqs = []
    for b in c.body:
        if isinstance(b, Eq):
            eqs.append(b)
        elif b.predicate in rels:
            stored = rels[b.predicate]
            parts.append(_atom_rel(b, {b.predicate: stored}, cmap))
        else:
            parts.append(_atom_rel(b, facts, cmap))
    acc = _join_all(parts)
    for e in eqs:
        l, r = e.left, e.right
        if l in acc.vars and r in acc.vars:
            i, j = acc.vars.index(l), acc.vars.index(r)
            acc = Rel(acc.vars, {row for row in acc.rows if row[i] == row[j]})
        elif l in acc.vars or r in acc.vars:
            bound, new = (l, r) if l in acc.vars else (r, l)
            i = acc.vars.index(bound)
            acc = Rel(acc.vars + (new,), {row + (row[i],) for row in acc.rows})
        else:
            acc = acc.join(Rel((l, r), {(x, x) for x in adom}))
    head_vars = tuple(dict.fromkeys(c.head.args))
    return acc.project(head_vars).rows, head_vars


class _Store:
    """Computed relations, kept as row sets, bitmasks or both."""

    def __init__(self, n):
        self.n = n
        self.sets = {}
        self.masks = {}

    def __contains__(self, p):
        return p in self.sets or p in self.masks

    def rows(self, p) -> set:
        if p not in self.sets:
            self.sets[p] = self.masks[p].rows()
        return self.sets[p]

    def mask(self, p, k) -> int:
        if p not in self.masks:
            self.masks[p] = _Bits.from_rows(self.sets[p], self.n, k)
        return self.masks[p].bits

    def get(self, p, default=()):
        return self.rows(p) if p in self else default

    def __getitem__(self, p):
        return self.rows(p)


def eval_ndl(prog, A: DataInstance, goal: str | None = None) -> AnswerSet:
    """Bottom-up evaluation in topological order of the dependency graph.

    Constants are interned as ints while evaluating.  Clauses whose body
    atoms all range over the head's variable tuple are evaluated on
    bitmasks over adom^k.
    """
    goal = goal or prog.goal
    order, heads = _dependency_order(prog)
    consts = A.constants()
    cmap = {t: i for i, t in enumerate(consts)}
    facts = defaultdict(list)
    for a in A.atoms:
        facts[a.predicate].append(tuple(cmap[t] for t in a.args))
    adom = tuple(range(len(consts)))
    store = _Store(len(consts))
    for p in order:
        clauses = heads[p]
        if all(_uniform(c, store) for c in clauses):
            k = clauses[0].head.arity
            bits = 0
            for c in clauses:
                m = -1
                for b in c.body:
                    m &= store.mask(b.predicate, k)
                bits |= m
            store.masks[p] = _Bits(len(consts), k, bits)
            continue
        rows = set()
        for c in clauses:
            got, head_vars = _eval_clause(c, store, facts, adom, cmap)
            if head_vars == c.head.args:
                rows |= got
                continue
            pos = {v: i for i, v in enumerate(head_vars)}
            for r in got:
                rows.add(tuple(r[pos[t]] for t in c.head.args))
        store.sets[p] = rows
    if goal not in heads:
        return AnswerSet(0, frozenset())
    arity = heads[goal][0].head.arity
    return AnswerSet(arity, frozenset(tuple(consts[i] for i in r) for r in store.rows(goal)))


# ------------------------------------------------------------ certain answers


class _ModelIndex:
    def __init__(self, atoms):
        self.unary = defaultdict(set)
        self.out = defaultdict(lambda: defaultdict(set))
        self.inn = defaultdict(lambda: defaultdict(set))
        self.loops = defaultdict(set)
        self.domain = set()
        for p, args in atoms:
            self.domain.update(args)
            if len(args) == 1:
                self.unary[p].add(args[0])
            else:
                a, b = args
                self.out[p][a].add(b)
                self.inn[p][b].add(a)
                if a == b:
                    self.loops[p].add(a)
        self.constants = {e for e in self.domain if isinstance(e, Term)}


def _components(atoms):
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in atoms:
        vs = list(a.variables())
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
        find(vs[0])
    groups = defaultdict(list)
    for a in atoms:
        groups[find(next(iter(a.variables())))].append(a)
    return list(groups.values())


def _match_component(atoms, idx: _ModelIndex, answer):
    """Set of answer-variable tuples (in the order ``answer``) extendable to a match."""
    variables = set()
    for a in atoms:
        variables |= a.variables()
    doms = {v: set(idx.constants if v in answer else idx.domain) for v in variables}
    adj = defaultdict(list)
    for a in atoms:
        if a.arity == 1:
            doms[a.args[0]] &= idx.unary.get(a.predicate, set())
        elif a.args[0] == a.args[1]:
            doms[a.args[0]] &= idx.loops.get(a.predicate, set())
        else:
            x, y = a.args
            adj[x].append((a.predicate, y, True))
            adj[y].append((a.predicate, x, False))
    answer = [v for v in answer if v in variables]
    if any(not d for d in doms.values()):
        return set(), answer

    def assign(doms, v, val):
        new = dict(doms)
        new[v] = {val}
        for p, w, fwd in adj[v]:
            nd = new[w] & (idx.out if fwd else idx.inn)[p].get(val, set())
            if not nd:
                return None
            new[w] = nd
        return new

    def exists(doms, done):
        todo = [v for v in variables if v not in done]
        if not todo:
            return True
        v = min(todo, key=lambda u: (len(doms[u]), -len(adj[u]), u))
        for val in doms[v]:
            new = assign(doms, v, val)
            if new is not None and exists(new, done | {v}):
                return True
        return False

    results = set()

    def enum(doms, i, prefix, done):
        if i == len(answer):
            if exists(doms, done):
                results.add(prefix)
            return
        v = answer[i]
        for val in sorted(doms[v], key=str):
            new = assign(doms, v, val)
            if new is not None:
                enum(new, i + 1, prefix + (val,), done | {v})

    enum(doms, 0, (), frozenset())
    return results, answer


def match_query(q: ConjunctiveQuery, atoms) -> AnswerSet:
    """All answer tuples of ``q`` over a set of (predicate, args) facts."""
    idx = _ModelIndex(atoms)
    answer = list(q.answer_vars)
    acc_vars, acc_rows = [], {()}
    for comp in _components(q.atoms):
        rows, vs = _match_component(comp, idx, answer)
        if not rows:
            return AnswerSet(len(answer), frozenset())
        acc_rows = {a + b for a in acc_rows for b in rows}
        acc_vars += vs
    pos = [acc_vars.index(v) for v in answer]
    return AnswerSet(len(answer), frozenset(tuple(r[i] for i in pos) for r in acc_rows))


def certain_answers(T: Ontology, A: DataInstance, q: ConjunctiveQuery, depth_bound: int | None = None) -> AnswerSet:
    """Answers of ``q`` in the chase truncated at |vars(q)| null levels."""
    bound = len(q.variables()) if depth_bound is None else depth_bound
    model = build_chase(T, A, bound)
    return match_query(q, model.atoms)


# ---------------------------------------------------------------- tree CQs


def gaifman_edges(q: ConjunctiveQuery) -> dict:
    adj = {v: set() for v in q.variables()}
    for a in q.atoms:
        if a.arity == 2 and a.args[0] != a.args[1]:
            x, y = a.args
            adj[x].add(y)
            adj[y].add(x)
    return adj


def is_tree_shaped(q: ConjunctiveQuery) -> bool:
    adj = gaifman_edges(q)
    edges = sum(len(n) for n in adj.values()) // 2
    comps = _count_components(adj)
    return edges == len(adj) - comps and comps == 1


def _count_components(adj) -> int:
    seen, n = set(), 0
    for v in adj:
        if v in seen:
            continue
        n += 1
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return n


def eval_tree_cq(q: ConjunctiveQuery, A: DataInstance) -> AnswerSet:
    """Semi-join reduction over the Gaifman tree, then bottom-up answer assembly."""
    adj = gaifman_edges(q)
    edges = sum(len(n) for n in adj.values()) // 2
    if edges != len(adj) - _count_components(adj):
        raise NotTree("the Gaifman graph of the query has a cycle")
    facts = _index(A)
    adom = set(A.constants())
    dom = {v: set(adom) for v in adj}
    pair = {}
    for a in q.atoms:
        if a.arity == 1:
            dom[a.args[0]] &= {t[0] for t in facts.get(a.predicate, ())}
        elif a.args[0] == a.args[1]:
            dom[a.args[0]] &= {t[0] for t in facts.get(a.predicate, ()) if t[0] == t[1]}
        else:
            x, y = a.args
            rows = set(facts.get(a.predicate, ()))
            if (y, x) in pair:
                pair[(y, x)] &= {(b, c) for c, b in rows}
            else:
                pair[(x, y)] = pair.get((x, y), rows) & rows

    def allowed(u, w):
        if (u, w) in pair:
            return pair[(u, w)]
        return {(b, c) for c, b in pair[(w, u)]}

    answer = list(q.answer_vars)
    ans_set = set(answer)
    comps_rows, comps_vars = [], []
    seen = set()
    for root in sorted(adj, key=lambda v: (v not in ans_set, v)):
        if root in seen:
            continue
        order, parent = [], {root: None}
        stack = [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            order.append(u)
            for w in sorted(adj[u]):
                if w not in parent:
                    parent[w] = u
                    seen.add(w)
                    stack.append(w)
        # bottom-up semi-joins
        for u in reversed(order):
            p = parent[u]
            if p is not None:
                ok = allowed(p, u)
                dom[p] = {b for b in dom[p] if any((b, c) in ok for c in dom[u])}
        # top-down semi-joins
        for u in order:
            p = parent[u]
            if p is not None:
                ok = allowed(p, u)
                dom[u] = {c for c in dom[u] if any((b, c) in ok for b in dom[p])}
        # assemble answers bottom-up: value -> set of partial tuples over subtree answer vars
        sub_vars, table = {}, {}
        for u in reversed(order):
            kids = [w for w in adj[u] if parent.get(w) == u]
            vs = [u] if u in ans_set else []
            for w in kids:
                vs += sub_vars[w]
            sub_vars[u] = vs
            tab = {}
            for b in dom[u]:
                rows = {(b,)} if u in ans_set else {()}
                for w in kids:
                    ok = allowed(u, w)
                    opts = set()
                    for c in dom[w]:
                        if (b, c) in ok:
                            opts |= table[w][c]
                    rows = {r + s for r in rows for s in opts}
                    if not rows:
                        break
                if rows:
                    tab[b] = rows
            table[u] = tab
        rows = set()
        for r in table[root].values():
            rows |= r
        comps_rows.append(rows)
        comps_vars.append(sub_vars[root])
    acc_rows, acc_vars = {()}, []
    for rows, vs in zip(comps_rows, comps_vars):
        acc_rows = {a + b for a in acc_rows for b in rows}
        acc_vars += vs
    pos = [acc_vars.index(v) for v in answer]
    return AnswerSet(len(answer), frozenset(tuple(r[i] for i in pos) for r in acc_rows))


def brute_clique(inst) -> int:
    """1 iff the graph on n vertices with edge bits ``inst.edges`` has a k-clique."""
    for S in combinations(range(1, inst.n + 1), inst.k):
        if all(inst.edge(j, jp) for j, jp in combinations(S, 2)):
            return 1
    return 0
