"""Nonrecursive datalog rewritings: circuits to programs and the depth-1 pipeline."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .boolmodels.translations import (
    circuit_dualize,
    hgp_from_hypergraph,
    implication_dual_circuit,
    normalize_degree2,
)
from .chase import RoleForm, Unbounded, ExceedsCap, entailment_order, ontology_depth
from .core import (
    IN,
    OUT,
    REFLEXIVE,
    UNARY,
    Atom,
    ConjunctiveQuery,
    Eq,
    Exists,
    FreshNames,
    Generator,
    Ontology,
    generators_for,
    var,
)
from .errors import NameClash, NonMonotoneCircuit, NotDepthOne, ValidationError
from .treewitness import enumerate_tree_witnesses, tw_hypergraph


@dataclass(frozen=True)
class NDLClause:
    head: Atom
    body: tuple  # Atoms and Eqs

    def variables(self) -> set:
        out = set(self.head.args)
        for b in self.body:
            out |= {b.left, b.right} if isinstance(b, Eq) else set(b.args)
        return out


@dataclass(frozen=True)
class NDLProgram:
    clauses: tuple
    goal: str

    @property
    def size(self) -> int:
        return sum(1 + len(c.body) for c in self.clauses)

    def intensional(self) -> set:
        return {c.head.predicate for c in self.clauses}

    def validate(self) -> "NDLProgram":
        """Check safety and that the dependency relation is acyclic."""
        for c in self.clauses:
            bound = set()
            for b in c.body:
                if isinstance(b, Atom):
                    bound |= set(b.args)
            missing = set(c.head.args) - bound
            if missing:
                names = ", ".join(sorted(v.name for v in missing))
                raise ValidationError(f"unsafe clause for {c.head.predicate}: {names}")
        from .evaluate import _dependency_order

        _dependency_order(self)
        return self

    def __str__(self):
        from .textio import print_ndl

        return print_ndl(self)


def _fresh_pred(base: str, taken: set) -> str:
    name, i = base, 1
    while name in taken:
        name = f"{base}_{i}"
        i += 1
    taken.add(name)
    return name


def _generator_body(rho: Generator, z, w) -> list:
    """Body atoms for a generator at ``z``; ``w`` stands for its existential."""
    f = rho.formula(z, w)
    return [f.body if isinstance(f, Exists) else f]


def default_input_map(q: ConjunctiveQuery, thetas) -> dict:
    """Circuit input names used by ``TWHypergraph.to_hypergraph``."""
    m = {f"p_v{i}": a for i, a in enumerate(q.atoms)}
    m.update({f"p_t{j}": t for j, t in enumerate(thetas)})
    return m


def circuit_to_ndl(q: ConjunctiveQuery, T: Ontology, thetas, circuit, inputs=None) -> NDLProgram:
    """Compile a monotone circuit over atom and tree-witness inputs into a program.

    One G-predicate per atom, per tree witness and per gate, all over the
    full variable tuple and guarded by D; the goal projects the output onto
    the answer variables.
    """
    if not circuit.monotone:
        raise NonMonotoneCircuit("circuit has NOT gates")
    inputs = default_input_map(q, thetas) if inputs is None else inputs
    unknown = [x for x in circuit.inputs if x not in inputs]
    if unknown:
        raise ValueError(f"circuit inputs without an atom or tree witness: {unknown}")
    sig = dict(T.signature())
    for p, n in q.signature().items():
        sig.setdefault(p, n)
    taken = set(sig)
    d0 = _fresh_pred("D0", taken)
    d = _fresh_pred("D", taken)
    ex = sorted(set(q.existential_vars()))
    zs = tuple(q.answer_vars) + tuple(v for v in ex if v not in q.answer_vars)
    fresh = FreshNames(set(zs))
    z = fresh("z")
    w = fresh("w")
    z0 = fresh("z0")
    clauses = []
    for rho in generators_for(sig):
        clauses.append(NDLClause(Atom(d0, (z,)), tuple(_generator_body(rho, z, w))))
    guard = Atom(d, zs)
    clauses.append(NDLClause(guard, tuple(Atom(d0, (v,)) for v in zs)))

    gname = {}
    order = [a for a in q.atoms] + list(thetas)
    by_obj = {}
    for name, obj in inputs.items():
        by_obj.setdefault(id(obj), []).append(name)
    for i, obj in enumerate(order, 1):
        pred = _fresh_pred(f"G{i}", taken)
        for name in by_obj.get(id(obj), ()):
            gname[name] = pred
        head = Atom(pred, zs)
        if isinstance(obj, Atom):
            clauses.append(NDLClause(head, (obj, guard)))
            continue
        seen = set()
        for rho in obj.generators:
            body = tuple(
                _generator_body(rho, z0, w)
                + [Eq(z0, y) for y in sorted(obj.roots, key=lambda v: v.name)]
                + [guard]
            )
            c = NDLClause(head, body)
            if c not in seen:
                seen.add(c)
                clauses.append(c)
    for name in inputs:
        if name not in gname:
            raise ValueError(f"input {name} does not name an atom of q or a tree witness")
    n = len(order)
    for name, op, args in circuit.gates:
        n += 1
        pred = _fresh_pred(f"G{n}", taken)
        gname[name] = pred
        head = Atom(pred, zs)
        if op == "AND":
            clauses.append(NDLClause(head, tuple(Atom(gname[a], zs) for a in args) + (guard,)))
        elif op == "OR":
            for a in args:
                clauses.append(NDLClause(head, (Atom(gname[a], zs), guard)))
        elif op == "CONST":
            if args[0] == "1":
                clauses.append(NDLClause(head, (guard,)))
        else:
            raise NonMonotoneCircuit(f"gate {name} is {op}")
    goal = _fresh_pred("ans", taken)
    clauses.append(NDLClause(Atom(goal, tuple(q.answer_vars)), (Atom(gname[circuit.output], zs),)))
    return NDLProgram(tuple(clauses), goal)


def depth1_ndl_pipeline(q: ConjunctiveQuery, T: Ontology, depth_cap: int = 64):
    """Program for a depth-1 ontology through the hypergraph-program route.

    Returns ``(program, trace)`` where ``trace`` records stage sizes.
    """
    depth = ontology_depth(T, depth_cap)
    if depth is Unbounded or depth is ExceedsCap or depth > 1:
        raise NotDepthOne(f"ontology depth is {depth}")
    thetas = enumerate_tree_witnesses(q, T)
    twh = tw_hypergraph(q, T, thetas)
    h = twh.to_hypergraph()
    p = hgp_from_hypergraph(h)
    p2 = normalize_degree2(p)
    dual = implication_dual_circuit(p2)
    c = circuit_dualize(dual)
    prog = circuit_to_ndl(q, T, thetas, c)
    trace = {
        "tree_witnesses": len(thetas),
        "hypergraph_vertices": len(h.vertices),
        "hypergraph_edges": h.size,
        "hgp_edges": p.size,
        "hgp_degree": p.degree(),
        "degree2_edges": p2.size,
        "implication_nodes": 2 * p2.size,
        "circuit_gates": c.size,
        "ndl_clauses": len(prog.clauses),
        "ndl_size": prog.size,
    }
    return prog, trace


# --------------------------------------------------------- arbitrary data


def _unary_base(form: Generator, x, w) -> Atom:
    p = form.predicate
    if form.shape == UNARY:
        return Atom(p, (x,))
    if form.shape == REFLEXIVE:
        return Atom(p, (x, x))
    if form.shape == OUT:
        return Atom(p, (x, w))
    return Atom(p, (w, x))


def _binary_base(form: RoleForm, x1, x2) -> Atom:
    return Atom(form.predicate, (x2, x1) if form.inverse else (x1, x2))


_SUFFIX = {UNARY: "", REFLEXIVE: "refl", OUT: "out", IN: "in"}


def ndl_to_arbitrary_data(prog: NDLProgram, T: Ontology, goal: str | None = None) -> NDLProgram:
    """Make a program over complete data work over arbitrary data.

    Predicates of ``T`` are replaced by starred copies, one per equivalence
    class of the entailment order, each defined from the data atoms of its
    class and from the starred copies of the classes directly below it.
    A binary starred predicate holds at (a, b) when its class's
    representative form does.
    """
    goal = goal or prog.goal
    if not T.tgds:
        return prog
    sig = dict(T.signature())
    order = entailment_order(T)
    taken = set(sig) | prog.intensional() | {
        b.predicate for c in prog.clauses for b in c.body if isinstance(b, Atom)
    }
    x1, x2, w = var("x1"), var("x2"), var("w")
    rep_of = order.representative
    names = {}

    def star(rep):
        if rep not in names:
            if isinstance(rep, RoleForm):
                base = f"{rep.predicate}*" + ("inv" if rep.inverse else "")
            else:
                base = f"{rep.predicate}*{_SUFFIX[rep.shape]}"
            name = base
            if name in taken:
                name = _fresh_pred(base, taken)
                warnings.warn(f"{base} already used; renamed to {name}", NameClash)
            taken.add(name)
            names[rep] = name
        return names[rep]

    def members(rep):
        rel = order.binary if isinstance(rep, RoleForm) else order.unary
        return sorted(f for f in rel.get(rep, {rep}) if rep in rel.get(f, ()))

    def below(rep):
        edges = order.binary_edges if isinstance(rep, RoleForm) else order.unary_edges
        mem = set(members(rep))
        return sorted({rep_of(src) for src, dsts in edges.items() if src not in mem and dsts & mem})

    needed = []

    def star_atom(a: Atom, lonely) -> Atom:
        if a.predicate not in sig:
            return a
        if a.arity == 1:
            form, args = Generator(UNARY, a.predicate), a.args
        elif a.args[0] != a.args[1] and a.args[1] in lonely:
            # a projected-away successor: the existential unary form
            form, args = Generator(OUT, a.predicate), a.args[:1]
        elif a.args[0] != a.args[1] and a.args[0] in lonely:
            form, args = Generator(IN, a.predicate), a.args[1:]
        else:
            form, args = RoleForm(a.predicate), a.args
        rep = rep_of(form)
        needed.append(rep)
        return Atom(star(rep), args if isinstance(rep, RoleForm) or len(args) == 1 else args[:1])

    out = []
    for c in prog.clauses:
        counts = {}
        for b in c.body:
            for t in (b.left, b.right) if isinstance(b, Eq) else b.args:
                counts[t] = counts.get(t, 0) + 1
        lonely = {t for t, n in counts.items() if n == 1 and t.is_var and t not in c.head.args}
        out.append(NDLClause(c.head, tuple(b if isinstance(b, Eq) else star_atom(b, lonely) for b in c.body)))

    done = set()
    while needed:
        rep = needed.pop()
        if rep in done:
            continue
        done.add(rep)
        if isinstance(rep, RoleForm):
            head = Atom(star(rep), (x1, x2))
            for f in members(rep):
                out.append(NDLClause(head, (_binary_base(f, x1, x2),)))
            for d in below(rep):
                needed.append(d)
                out.append(NDLClause(head, (Atom(star(d), (x1, x2)),)))
            # loops entailed by unary forms
            loop = Atom(star(rep), (x1, x1))
            for p in sorted({f.predicate for f in members(rep)}):
                refl = rep_of(Generator(REFLEXIVE, p))
                needed.append(refl)
                out.append(NDLClause(loop, (Atom(star(refl), (x1,)),)))
        else:
            head = Atom(star(rep), (x1,))
            for f in members(rep):
                out.append(NDLClause(head, (_unary_base(f, x1, w),)))
            for d in below(rep):
                needed.append(d)
                out.append(NDLClause(head, (Atom(star(d), (x1,)),)))
    result = NDLProgram(tuple(dict.fromkeys(out)), goal)
    result.validate()
    return result
