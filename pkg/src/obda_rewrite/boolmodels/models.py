"""Hypergraph programs, branching programs, circuits and Boolean formulas."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product

from ..errors import AdviceTooLarge, ParseError, UnboundVariable, ValidationError

MAX_ADVICE = 24

# ----------------------------------------------------------------- labels


def is_const(label: str) -> bool:
    return label in ("0", "1")


def label_var(label: str) -> str | None:
    """The variable a label mentions, or None for a constant."""
    if is_const(label):
        return None
    return label[1:] if label.startswith("!") else label


def negate_label(label: str) -> str:
    if label == "0":
        return "1"
    if label == "1":
        return "0"
    return label[1:] if label.startswith("!") else "!" + label


def label_value(label: str, assignment) -> bool:
    if label == "0":
        return False
    if label == "1":
        return True
    var = label_var(label)
    if var not in assignment:
        raise UnboundVariable(f"no value for {var}")
    val = bool(assignment[var])
    return not val if label.startswith("!") else val


def _vars_of_labels(labels) -> list:
    out = []
    for lab in labels:
        v = label_var(lab)
        if v is not None and v not in out:
            out.append(v)
    return sorted(out)


# ------------------------------------------------------------- hypergraphs


@dataclass(frozen=True)
class Hypergraph:
    """A vertex-labelled hypergraph; with labels it is a hypergraph program."""

    vertices: tuple
    edges: tuple  # (name, frozenset of vertices)
    labels: dict = field(default_factory=dict, compare=False)
    i1: dict | None = field(default=None, compare=False)
    i2: dict | None = field(default=None, compare=False)

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def label(self, v) -> str:
        return self.labels.get(v, f"p_{v}")

    @property
    def size(self) -> int:
        return len(self.edges)

    def edge_names(self) -> tuple:
        return tuple(n for n, _ in self.edges)

    def members(self, name) -> frozenset:
        for n, m in self.edges:
            if n == name:
                return m
        raise KeyError(name)

    def incidence(self) -> dict:
        inc = {v: [] for v in self.vertices}
        for j, (_, m) in enumerate(self.edges):
            for v in m:
                inc[v].append(j)
        return inc

    def vertex_degree(self, v) -> int:
        return sum(v in m for _, m in self.edges)

    def degree(self) -> int:
        return max((len(js) for js in self.incidence().values()), default=0)

    @property
    def monotone(self) -> bool:
        return not any(self.label(v).startswith("!") for v in self.vertices)

    def variables(self) -> list:
        return _vars_of_labels(self.label(v) for v in self.vertices)

    def validate(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValidationError("duplicate vertex")
        for name, m in self.edges:
            if not m <= vs:
                raise ValidationError(f"edge {name} mentions unknown vertices")
        return self


HypergraphProgram = Hypergraph


def hgp_accepts(h: Hypergraph, assignment) -> bool:
    """Is there an independent edge set covering every vertex labelled 0?"""
    vpos = {v: i for i, v in enumerate(h.vertices)}
    masks = []
    for _, m in h.edges:
        bits = 0
        for v in m:
            bits |= 1 << vpos[v]
        masks.append(bits)
    inc = h.incidence()
    zeros = [
        (1 << vpos[v], [masks[j] for j in inc[v]])
        for v in h.vertices
        if not label_value(h.label(v), assignment)
    ]
    return cover_search(zeros)


def cover_search(zeros) -> bool:
    """Backtracking cover search over vertex bitmasks.

    ``zeros`` lists (vertex bit, incident edge masks).  Forced choices are
    propagated before branching on the vertex with the fewest options;
    failed covered-sets are memoized.
    """
    failed = set()

    def search(used: int) -> bool:
        if used in failed:
            return False
        start = used
        while True:
            best = None
            forced = False
            for bit, opts in zeros:
                if used & bit:
                    continue
                live = [m for m in opts if not m & used]
                if not live:
                    failed.add(start)
                    return False
                if len(live) == 1:
                    used |= live[0]
                    forced = True
                    continue
                if best is None or len(live) < len(best):
                    best = live
            if forced:
                continue
            if best is None:
                return True
            for m in best:
                if search(used | m):
                    return True
            failed.add(start)
            return False

    return search(0)


# --------------------------------------------------------- branching programs


@dataclass(frozen=True)
class NBP:
    nodes: tuple
    arcs: tuple  # (u, v, label)
    s: str
    t: str

    @property
    def size(self) -> int:
        return len(self.arcs)

    @property
    def monotone(self) -> bool:
        return not any(lab.startswith("!") for _, _, lab in self.arcs)

    def variables(self) -> list:
        return _vars_of_labels(lab for _, _, lab in self.arcs)

    def validate(self):
        ns = set(self.nodes)
        if self.s not in ns or self.t not in ns:
            raise ValidationError("s and t must be nodes")
        for u, v, _ in self.arcs:
            if u not in ns or v not in ns:
                raise ValidationError(f"arc {u}->{v} mentions an unknown node")
            if v == self.s:
                raise ValidationError("s has an incoming arc")
            if u == self.t:
                raise ValidationError("t has an outgoing arc")
        return self


def nbp_accepts(g: NBP, assignment) -> bool:
    out = {}
    for u, v, lab in g.arcs:
        if label_value(lab, assignment):
            out.setdefault(u, []).append(v)
    seen, stack = {g.s}, [g.s]
    while stack:
        u = stack.pop()
        if u == g.t:
            return True
        for w in out.get(u, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return g.t in seen


# ------------------------------------------------------------------ circuits

GATE_OPS = ("AND", "OR", "NOT", "CONST")


@dataclass(frozen=True)
class BooleanCircuit:
    """Gates in topological order; gate arguments name inputs or earlier gates."""

    inputs: tuple
    gates: tuple  # (name, op, args)
    output: str

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def monotone(self) -> bool:
        return not any(op == "NOT" for _, op, _ in self.gates)

    def variables(self) -> list:
        return list(self.inputs)

    def validate(self):
        known = set(self.inputs)
        for name, op, args in self.gates:
            if op not in GATE_OPS:
                raise ValidationError(f"unknown gate type {op}")
            if op == "NOT" and len(args) != 1:
                raise ValidationError("NOT takes one argument")
            if op != "CONST":
                for a in args:
                    if a not in known:
                        raise ValidationError(f"gate {name} uses {a} before definition")
            if name in known:
                raise ValidationError(f"duplicate node {name}")
            known.add(name)
        if self.output not in known:
            raise ValidationError(f"unknown output {self.output}")
        return self


def circuit_values(c: BooleanCircuit, assignment) -> dict:
    val = {}
    for x in c.inputs:
        if x not in assignment:
            raise UnboundVariable(f"no value for {x}")
        val[x] = bool(assignment[x])
    for name, op, args in c.gates:
        if op == "AND":
            val[name] = all(val[a] for a in args)
        elif op == "OR":
            val[name] = any(val[a] for a in args)
        elif op == "NOT":
            val[name] = not val[args[0]]
        else:
            val[name] = args[0] == "1"
    return val


@dataclass(frozen=True)
class NondetCircuit:
    circuit: BooleanCircuit
    x_inputs: tuple
    advice: tuple

    @property
    def size(self) -> int:
        return self.circuit.size

    @property
    def monotone(self) -> bool:
        """Negation is applied to advice inputs only."""
        adv = set(self.advice)
        return all(op != "NOT" or args[0] in adv for _, op, args in self.circuit.gates)

    def variables(self) -> list:
        return list(self.x_inputs)


def nondet_accepts(n: NondetCircuit, assignment) -> bool:
    if len(n.advice) > MAX_ADVICE:
        raise AdviceTooLarge(f"{len(n.advice)} advice inputs exceed {MAX_ADVICE}")
    env = {}
    for x in n.x_inputs:
        if x not in assignment:
            raise UnboundVariable(f"no value for {x}")
        env[x] = assignment[x]
    for bits in product((False, True), repeat=len(n.advice)):
        env.update(zip(n.advice, bits))
        if circuit_values(n.circuit, env)[n.circuit.output]:
            return True
    return False


class CircuitBuilder:
    """Hash-consing circuit builder with constant folding."""

    def __init__(self, prefix: str = "g"):
        self.prefix = prefix
        self.inputs = []
        self._input_set = set()
        self.gates = []
        self._memo = {}
        self.TRUE = ("const", True)
        self.FALSE = ("const", False)

    def input(self, name: str):
        if name not in self._input_set:
            self._input_set.add(name)
            self.inputs.append(name)
        return name

    def const(self, value: bool):
        return self.TRUE if value else self.FALSE

    def _gate(self, op, args):
        key = (op, args)
        if key in self._memo:
            return self._memo[key]
        name = f"{self.prefix}{len(self.gates)}"
        self.gates.append((name, op, args))
        self._memo[key] = name
        return name

    def and_(self, *xs):
        items = []
        for x in xs:
            if x == self.FALSE:
                return self.FALSE
            if x != self.TRUE and x not in items:
                items.append(x)
        if not items:
            return self.TRUE
        if len(items) == 1:
            return items[0]
        return self._gate("AND", tuple(sorted(items)))

    def or_(self, *xs):
        items = []
        for x in xs:
            if x == self.TRUE:
                return self.TRUE
            if x != self.FALSE and x not in items:
                items.append(x)
        if not items:
            return self.FALSE
        if len(items) == 1:
            return items[0]
        return self._gate("OR", tuple(sorted(items)))

    def not_(self, x):
        if x == self.TRUE:
            return self.FALSE
        if x == self.FALSE:
            return self.TRUE
        return self._gate("NOT", (x,))

    def build(self, output) -> BooleanCircuit:
        """Circuit for ``output`` keeping only the gates it depends on."""
        gates = list(self.gates)
        if isinstance(output, tuple):
            name = f"{self.prefix}{len(gates)}"
            gates.append((name, "CONST", ("1" if output[1] else "0",)))
            output = name
        by_name = {g[0]: g for g in gates}
        need, stack = set(), [output]
        while stack:
            n = stack.pop()
            if n in need or n not in by_name:
                continue
            need.add(n)
            if by_name[n][1] != "CONST":
                stack.extend(by_name[n][2])
        kept = tuple(g for g in gates if g[0] in need)
        return BooleanCircuit(tuple(self.inputs), kept, output)


# -------------------------------------------------------- Boolean formulas


class BoolNode:
    """Base class of Boolean formula nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class BVar(BoolNode):
    name: str


@dataclass(frozen=True)
class BConst(BoolNode):
    value: bool


@dataclass(frozen=True)
class BNot(BoolNode):
    arg: BoolNode


@dataclass(frozen=True)
class BAnd(BoolNode):
    items: tuple


@dataclass(frozen=True)
class BOr(BoolNode):
    items: tuple


def bool_size(f: BoolNode) -> int:
    """Leaf count."""
    if isinstance(f, (BVar, BConst)):
        return 1
    if isinstance(f, BNot):
        return bool_size(f.arg)
    return sum(bool_size(g) for g in f.items)


def bool_vars(f: BoolNode) -> list:
    out, stack = set(), [f]
    while stack:
        g = stack.pop()
        if isinstance(g, BVar):
            out.add(g.name)
        elif isinstance(g, BNot):
            stack.append(g.arg)
        elif isinstance(g, (BAnd, BOr)):
            stack.extend(g.items)
    return sorted(out)


def bool_eval(f: BoolNode, assignment) -> bool:
    if isinstance(f, BVar):
        if f.name not in assignment:
            raise UnboundVariable(f"no value for {f.name}")
        return bool(assignment[f.name])
    if isinstance(f, BConst):
        return f.value
    if isinstance(f, BNot):
        return not bool_eval(f.arg, assignment)
    if isinstance(f, BAnd):
        return all(bool_eval(g, assignment) for g in f.items)
    if isinstance(f, BOr):
        return any(bool_eval(g, assignment) for g in f.items)
    raise TypeError(f"not a Boolean formula: {f!r}")


def print_bool(f: BoolNode) -> str:
    if isinstance(f, BVar):
        return f.name
    if isinstance(f, BConst):
        return "1" if f.value else "0"
    if isinstance(f, BNot):
        return f"(not {print_bool(f.arg)})"
    op = "and" if isinstance(f, BAnd) else "or"
    return "(" + " ".join([op] + [print_bool(g) for g in f.items]) + ")"


_BTOK = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse_bool(text: str) -> BoolNode:
    toks = _BTOK.findall(text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of formula")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            if pos >= len(toks):
                raise ParseError("unexpected end of formula")
            op = toks[pos]
            pos += 1
            args = []
            while pos < len(toks) and toks[pos] != ")":
                args.append(parse())
            if pos >= len(toks):
                raise ParseError("missing )")
            pos += 1
            if op == "not":
                if len(args) != 1:
                    raise ParseError("not takes one argument")
                return BNot(args[0])
            if op == "and":
                return BAnd(tuple(args))
            if op == "or":
                return BOr(tuple(args))
            raise ParseError(f"unknown connective {op!r}")
        if tok == ")":
            raise ParseError("unexpected )")
        if tok in ("0", "1"):
            return BConst(tok == "1")
        return BVar(tok)

    out = parse()
    if pos != len(toks):
        raise ParseError("trailing tokens after formula")
    return out


# ------------------------------------------------------------ dispatch


def evaluate(model, assignment) -> bool:
    """Output bit of any supported model on a variable assignment."""
    if isinstance(model, Hypergraph):
        return hgp_accepts(model, assignment)
    if isinstance(model, NBP):
        return nbp_accepts(model, assignment)
    if isinstance(model, NondetCircuit):
        return nondet_accepts(model, assignment)
    if isinstance(model, BooleanCircuit):
        return circuit_values(model, assignment)[model.output]
    if isinstance(model, BoolNode):
        return bool_eval(model, assignment)
    raise TypeError(f"cannot evaluate {type(model).__name__}")


def model_variables(model) -> list:
    if isinstance(model, BoolNode):
        return bool_vars(model)
    return model.variables()


# -------------------------------------------------------------- text form


def to_lines(model) -> str:
    """Line format: ``node``/``arc`` for NBPs; ``input``/``advice``/``gate``/``output`` for circuits."""
    lines = []
    if isinstance(model, NBP):
        lines.append(f"source {model.s}")
        lines.append(f"sink {model.t}")
        lines += [f"node {n}" for n in model.nodes]
        lines += [f"arc {u} {v} {lab}" for u, v, lab in model.arcs]
        return "\n".join(lines) + "\n"
    if isinstance(model, NondetCircuit):
        c = model.circuit
        lines += [f"input {x}" for x in model.x_inputs]
        lines += [f"advice {y}" for y in model.advice]
    elif isinstance(model, BooleanCircuit):
        c = model
        lines += [f"input {x}" for x in c.inputs]
    else:
        raise TypeError(f"no line format for {type(model).__name__}")
    lines += [f"gate {n} {op} {' '.join(args)}" for n, op, args in c.gates]
    lines.append(f"output {c.output}")
    return "\n".join(lines) + "\n"


def from_lines(text: str):
    nodes, arcs, s, t = [], [], None, None
    inputs, advice, gates, output = [], [], [], None
    for i, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        kind = words[0]
        try:
            if kind == "node":
                (n,) = words[1:]
                nodes.append(n)
            elif kind == "arc":
                u, v, lab = words[1:]
                arcs.append((u, v, lab))
            elif kind == "source":
                (s,) = words[1:]
            elif kind == "sink":
                (t,) = words[1:]
            elif kind == "input":
                (x,) = words[1:]
                inputs.append(x)
            elif kind == "advice":
                (y,) = words[1:]
                advice.append(y)
            elif kind == "gate":
                name, op, *args = words[1:]
                gates.append((name, op.upper(), tuple(args)))
            elif kind == "output":
                (output,) = words[1:]
            else:
                raise ParseError(f"line {i}: unknown directive {kind!r}")
        except ValueError:
            raise ParseError(f"line {i}: wrong number of fields") from None
    if arcs or nodes:
        for u, v, _ in arcs:
            for n in (u, v):
                if n not in nodes:
                    nodes.append(n)
        return NBP(tuple(nodes), tuple(arcs), s or "s", t or "t").validate()
    if output is None:
        raise ParseError("circuit needs an `output` line")
    c = BooleanCircuit(tuple(inputs) + tuple(advice), tuple(gates), output).validate()
    if advice:
        return NondetCircuit(c, tuple(inputs), tuple(advice))
    return c
