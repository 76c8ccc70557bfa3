"""Line-oriented text formats with deterministic printers.

Term convention inside rules, queries, formulas and programs: a name
starting with one of ``u v w x y z`` (or prefixed with ``?``) is a
variable, anything else (or a double-quoted name) is a constant.  Inside
``.facts`` files every term is a constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
    TGD,
    Term,
    VAR,
    CONST,
    check_signatures,
    validate,
)
from .errors import (
    AnswerVarNotInBody,
    DegreeMapInconsistent,
    ParseError,
    UnknownVertex,
)


@dataclass(frozen=True)
class SourceLocation:
    line: int
    column: int


_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\#[^\n]*)
      | (?P<arrow>->|<-|:-|\?-)
      | (?P<str>"[^"\n]*")
      | (?P<name>\??[A-Za-z0-9_][A-Za-z0-9_'*]*)
      | (?P<punct>[(),.=!])
      | (?P<bad>.)""",
    re.VERBOSE,
)

_VAR_START = set("uvwxyz")


def _is_var_name(name: str) -> bool:
    return name[0] in _VAR_START


def _rule_term(tok: str) -> Term:
    if tok.startswith('"'):
        return Term(CONST, tok[1:-1])
    if tok.startswith("?"):
        return Term(VAR, tok[1:])
    return Term(VAR, tok) if _is_var_name(tok) else Term(CONST, tok)


def _show_term(t: Term) -> str:
    if t.kind == VAR:
        return t.name if _is_var_name(t.name) else "?" + t.name
    if _is_var_name(t.name) or not re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_'*]*", t.name):
        return f'"{t.name}"'
    return t.name


def _show_data_term(t: Term) -> str:
    if re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_'*]*", t.name):
        return t.name
    return f'"{t.name}"'


class _Tokens:
    def __init__(self, text: str, line_no: int = 1):
        self.toks = []
        for i, line in enumerate(text.split("\n")):
            for m in _TOKEN.finditer(line):
                kind = m.lastgroup
                if kind in ("ws", "comment"):
                    continue
                loc = SourceLocation(line_no + i, m.start() + 1)
                if kind == "bad":
                    raise ParseError(f"unexpected character {m.group()!r}", loc)
                self.toks.append((kind, m.group(), loc))
        self.pos = 0
        self.end_loc = SourceLocation(line_no + text.count("\n"), len(text.split("\n")[-1]) + 1)

    def peek(self):
        return self.toks[self.pos][1] if self.pos < len(self.toks) else None

    def loc(self):
        return self.toks[self.pos][2] if self.pos < len(self.toks) else self.end_loc

    def next(self, expect=None):
        if self.pos >= len(self.toks):
            raise ParseError(f"unexpected end of input, expected {expect or 'more'}", self.loc())
        kind, text, loc = self.toks[self.pos]
        if expect is not None and text != expect:
            raise ParseError(f"expected {expect!r}, found {text!r}", loc)
        self.pos += 1
        return text

    def name(self, what="name"):
        if self.pos >= len(self.toks):
            raise ParseError(f"unexpected end of input, expected {what}", self.loc())
        kind, text, loc = self.toks[self.pos]
        if kind not in ("name", "str"):
            raise ParseError(f"expected {what}, found {text!r}", loc)
        self.pos += 1
        return text

    def at_end(self):
        return self.pos >= len(self.toks)


def _parse_atom(tk: _Tokens, term=_rule_term, allow_any_arity=False) -> Atom:
    loc = tk.loc()
    pred = tk.name("predicate")
    if pred.startswith('"') or pred.startswith("?"):
        raise ParseError(f"bad predicate name {pred!r}", loc)
    tk.next("(")
    args = []
    if tk.peek() != ")":
        args.append(term(tk.name("term")))
        while tk.peek() == ",":
            tk.next(",")
            args.append(term(tk.name("term")))
    tk.next(")")
    if not allow_any_arity and len(args) not in (1, 2):
        raise ParseError(f"atom {pred} must have 1 or 2 arguments", loc)
    return Atom(pred, tuple(args))


def _content_lines(text: str):
    for i, line in enumerate(text.split("\n"), start=1):
        body = line.split("#", 1)[0]
        if body.strip():
            yield i, line


# ----------------------------------------------------------------- parsers


def parse_tgd(line: str, line_no: int = 1) -> TGD:
    tk = _Tokens(line, line_no)
    body = _parse_atom(tk)
    tk.next("->")
    ex = None
    if tk.peek() == "exists":
        tk.next()
        ex = _rule_term(tk.name("variable"))
        tk.next(".")
    head = [_parse_atom(tk)]
    while tk.peek() == ",":
        tk.next(",")
        head.append(_parse_atom(tk))
    if not tk.at_end():
        raise ParseError(f"trailing input {tk.peek()!r}", tk.loc())
    t = TGD(body, ex, tuple(head))
    validate(t)
    return t


def parse_ontology(text: str) -> Ontology:
    tgds = [parse_tgd(line, i) for i, line in _content_lines(text)]
    onto = Ontology(tuple(tgds))
    validate(onto)
    return onto


def parse_query(text: str) -> ConjunctiveQuery:
    tk = _Tokens(text)
    tk.name("query name")
    tk.next("(")
    answer = []
    if tk.peek() != ")":
        answer.append(_rule_term(tk.name("variable")))
        while tk.peek() == ",":
            tk.next(",")
            answer.append(_rule_term(tk.name("variable")))
    tk.next(")")
    tk.next("<-")
    atoms = [_parse_atom(tk)]
    while tk.peek() == ",":
        tk.next(",")
        atoms.append(_parse_atom(tk))
    if tk.peek() == ".":
        tk.next(".")
    if not tk.at_end():
        raise ParseError(f"trailing input {tk.peek()!r}", tk.loc())
    q = ConjunctiveQuery(tuple(answer), tuple(atoms))
    body = set(q.variables())
    for v in answer:
        if v.is_var and v not in body:
            raise AnswerVarNotInBody(f"answer variable {v.name} does not occur in the body")
    validate(q)
    return q


def _data_term(tok: str) -> Term:
    if tok.startswith("?"):
        raise ParseError(f"variable {tok} in data")
    return Term(CONST, tok[1:-1] if tok.startswith('"') else tok)


def parse_data(text: str) -> DataInstance:
    atoms = []
    for i, line in _content_lines(text):
        tk = _Tokens(line, i)
        while not tk.at_end():
            atoms.append(_parse_atom(tk, term=_data_term))
            if tk.peek() in (",", "."):
                tk.next()
    d = DataInstance(frozenset(atoms))
    validate(d)
    return d


def parse_hypergraph(text: str):
    """Parse ``vertex``/``edge`` lines into a Hypergraph."""
    from .boolmodels.models import Hypergraph

    vertices, labels, i1, i2, edges = [], {}, {}, {}, []
    vlocs = {}
    for i, line in _content_lines(text):
        words = line.split("#", 1)[0].split()
        loc = SourceLocation(i, 1)
        if words[0] == "vertex":
            if len(words) < 2:
                raise ParseError("vertex needs a name", loc)
            v = words[1]
            if v in labels or v in vlocs:
                raise ParseError(f"duplicate vertex {v}", loc)
            vertices.append(v)
            vlocs[v] = loc
            labels[v] = None
            for w in words[2:]:
                key, sep, val = w.partition("=")
                if not sep or not val:
                    raise ParseError(f"bad attribute {w!r}", loc)
                if key == "label":
                    if not re.fullmatch(r"0|1|!?[A-Za-z_][A-Za-z0-9_'*]*", val):
                        raise ParseError(f"bad label {val!r}", loc)
                    labels[v] = val
                elif key == "i1":
                    i1[v] = val
                elif key == "i2":
                    i2[v] = val
                else:
                    raise ParseError(f"unknown attribute {key!r}", loc)
        elif words[0] == "edge":
            if len(words) < 3 or words[2] != "=":
                raise ParseError("expected `edge NAME = VERTEX+`", loc)
            edges.append((words[1], tuple(words[3:]), loc))
        else:
            raise ParseError(f"unknown directive {words[0]!r}", loc)
    names = set()
    edge_list = []
    for name, members, loc in edges:
        if name in names:
            raise ParseError(f"duplicate edge {name}", loc)
        names.add(name)
        for v in members:
            if v not in labels:
                raise UnknownVertex(f"{loc.line}:{loc.column}: edge {name} mentions unknown vertex {v}")
        edge_list.append((name, frozenset(members)))
    members_of = dict(edge_list)
    for v in set(i1) | set(i2):
        a, b = i1.get(v), i2.get(v)
        for e in (a, b):
            if e is not None and e not in members_of:
                raise DegreeMapInconsistent(f"vertex {v} maps to unknown edge {e}")
        if a is not None and a == b:
            raise DegreeMapInconsistent(f"i1({v}) = i2({v}) = {a}")
        for e in (a, b):
            if e is not None and v not in members_of[e]:
                raise DegreeMapInconsistent(f"vertex {v} is not in {e}")
    return Hypergraph(
        tuple(vertices),
        tuple(edge_list),
        {v: (l if l is not None else f"p_{v}") for v, l in labels.items()},
        dict(i1) if i1 else None,
        dict(i2) if i2 else None,
    )


# --------------------------------------------------------- s-expressions


def _sexp_tokens(text: str):
    out = []
    for i, line in enumerate(text.split("\n"), start=1):
        for m in re.finditer(r"\(|\)|[^\s()]+", line.split(";", 1)[0]):
            out.append((m.group(), SourceLocation(i, m.start() + 1)))
    return out


def _read_sexp(text: str):
    toks = _sexp_tokens(text)
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of s-expression", SourceLocation(1, 1))
        tok, loc = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(toks):
                    raise ParseError("unbalanced parenthesis", loc)
                if toks[pos][0] == ")":
                    pos += 1
                    return (items, loc)
                items.append(read())
        if tok == ")":
            raise ParseError("unexpected ')'", loc)
        return (tok, loc)

    node = read()
    if pos != len(toks):
        raise ParseError("trailing input after s-expression", toks[pos][1])
    return node


def _to_formula(node):
    items, loc = node
    if not isinstance(items, list) or not items or isinstance(items[0][0], list):
        raise ParseError("expected (operator ...)", loc)
    op = items[0][0]
    args = items[1:]

    def term(n):
        if isinstance(n[0], list):
            raise ParseError("expected a term", n[1])
        return _rule_term(n[0])

    def varlist(n):
        if not isinstance(n[0], list):
            raise ParseError("expected a variable list", n[1])
        return tuple(term(x) for x in n[0])

    if op == "atom":
        if len(args) < 1 or isinstance(args[0][0], list):
            raise ParseError("atom needs a predicate", loc)
        return Atom(args[0][0], tuple(term(a) for a in args[1:]))
    if op == "eq":
        if len(args) != 2:
            raise ParseError("eq takes two terms", loc)
        return Eq(term(args[0]), term(args[1]))
    if op in ("and", "or"):
        cls = And if op == "and" else Or
        return cls(tuple(_to_formula(a) for a in args))
    if op == "true" and not args:
        return And(())
    if op == "false" and not args:
        return Or(())
    if op in ("exists", "forall"):
        if len(args) != 2:
            raise ParseError(f"{op} takes a variable list and a body", loc)
        cls = Exists if op == "exists" else Forall
        return cls(varlist(args[0]), _to_formula(args[1]))
    if op == "not":
        if len(args) != 1:
            raise ParseError("not takes one argument", loc)
        return Not(_to_formula(args[0]))
    raise ParseError(f"unknown operator {op!r}", loc)


def parse_formula(text: str):
    return _to_formula(_read_sexp(text))


def _formula_sexp(f, out):
    if isinstance(f, Atom):
        out.append("(atom " + " ".join([f.predicate, *(_show_term(t) for t in f.args)]) + ")")
    elif isinstance(f, Eq):
        out.append(f"(eq {_show_term(f.left)} {_show_term(f.right)})")
    elif isinstance(f, (And, Or)):
        if not f.items:
            out.append("(true)" if isinstance(f, And) else "(false)")
            return
        out.append("(and" if isinstance(f, And) else "(or")
        for g in f.items:
            out.append(" ")
            _formula_sexp(g, out)
        out.append(")")
    elif isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        out.append(f"({kw} (" + " ".join(_show_term(v) for v in f.vars) + ") ")
        _formula_sexp(f.body, out)
        out.append(")")
    elif isinstance(f, Not):
        out.append("(not ")
        _formula_sexp(f.body, out)
        out.append(")")
    else:
        raise TypeError(f"not a formula: {f!r}")


def print_formula(f) -> str:
    out = []
    _formula_sexp(f, out)
    return "".join(out)


# ------------------------------------------------------------ datalog


def parse_ndl(text: str):
    """Parse clauses ``H(x) :- B(x), z = x.`` and a ``?- goal.`` line."""
    from .rewrite_ndl import NDLClause, NDLProgram

    clauses, goal = [], None
    tk = _Tokens(text)
    while not tk.at_end():
        if tk.peek() == "?-":
            tk.next()
            goal = tk.name("goal predicate")
            tk.next(".")
            continue
        head = _parse_atom(tk, allow_any_arity=True)
        body = []
        if tk.peek() == ":-":
            tk.next()
            while True:
                loc = tk.loc()
                first = tk.name("body literal")
                if tk.peek() == "=":
                    tk.next("=")
                    body.append(Eq(_rule_term(first), _rule_term(tk.name("term"))))
                else:
                    tk.pos -= 1
                    body.append(_parse_atom(tk, allow_any_arity=True))
                if tk.peek() == ",":
                    tk.next(",")
                    continue
                break
        tk.next(".")
        clauses.append(NDLClause(head, tuple(body)))
    if goal is None:
        raise ParseError("missing `?- goal.` line", tk.loc())
    return NDLProgram(tuple(clauses), goal)


def _show_ndl_atom(a: Atom) -> str:
    return f"{a.predicate}({','.join(_show_term(t) for t in a.args)})"


def print_ndl(prog) -> str:
    lines = [f"?- {prog.goal}."]
    for c in prog.clauses:
        body = []
        for b in c.body:
            if isinstance(b, Eq):
                body.append(f"{_show_term(b.left)} = {_show_term(b.right)}")
            else:
                body.append(_show_ndl_atom(b))
        head = _show_ndl_atom(c.head)
        lines.append(f"{head} :- {', '.join(body)}." if body else f"{head}.")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- printers


def _show_atom(a: Atom) -> str:
    return f"{a.predicate}({','.join(_show_term(t) for t in a.args)})"


def print_tgd(t: TGD) -> str:
    ex = f"exists {_show_term(t.existential)}. " if t.existential is not None else ""
    return f"{_show_atom(t.body)} -> {ex}{', '.join(_show_atom(a) for a in t.head)}"


def print_ontology(o: Ontology) -> str:
    return "".join(print_tgd(t) + "\n" for t in o.tgds)


def print_query(q: ConjunctiveQuery, name: str = "q") -> str:
    head = ",".join(_show_term(v) for v in q.answer_vars)
    return f"{name}({head}) <- " + ", ".join(_show_atom(a) for a in q.atoms) + "\n"


def print_data(d: DataInstance) -> str:
    return "".join(
        f"{a.predicate}({','.join(_show_data_term(t) for t in a.args)})\n" for a in d.sorted_atoms()
    )


def print_hypergraph(h) -> str:
    lines = []
    for v in h.vertices:
        parts = [f"vertex {v}", f"label={h.labels[v]}"]
        if h.i1 and v in h.i1:
            parts.append(f"i1={h.i1[v]}")
        if h.i2 and v in h.i2:
            parts.append(f"i2={h.i2[v]}")
        lines.append(" ".join(parts))
    order = {v: i for i, v in enumerate(h.vertices)}
    for name, members in h.edges:
        lines.append(f"edge {name} = " + " ".join(sorted(members, key=order.__getitem__)))
    return "\n".join(lines) + "\n"


def print_model(m) -> str:
    """Render a canonical model in ``.facts`` style with null ids."""
    rows = sorted(f"{p}({','.join(map(str, args))})" for p, args in m.atoms)
    return "".join(r + "\n" for r in rows)


def dumps(obj) -> str:
    """Print any supported object in its canonical text form."""
    from .boolmodels import models as bm
    from .rewrite_ndl import NDLProgram

    if isinstance(obj, Ontology):
        return print_ontology(obj)
    if isinstance(obj, ConjunctiveQuery):
        return print_query(obj)
    if isinstance(obj, DataInstance):
        return print_data(obj)
    if isinstance(obj, bm.Hypergraph):
        return print_hypergraph(obj)
    if isinstance(obj, NDLProgram):
        return print_ndl(obj)
    if isinstance(obj, (bm.NBP, bm.BooleanCircuit, bm.NondetCircuit)):
        return bm.to_lines(obj)
    if isinstance(obj, bm.BoolNode):
        return bm.print_bool(obj) + "\n"
    return print_formula(obj) + "\n"


EXTENSIONS = {
    ".tgd": parse_ontology,
    ".cq": parse_query,
    ".facts": parse_data,
    ".hg": parse_hypergraph,
    ".fo": parse_formula,
    ".ndl": parse_ndl,
}


def load(path: str):
    """Parse a file according to its extension."""
    import os

    ext = os.path.splitext(path)[1]
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if ext in EXTENSIONS:
        return EXTENSIONS[ext](text)
    if ext in (".nbp", ".circ", ".bf"):
        from .boolmodels import models as bm

        return bm.from_lines(text) if ext != ".bf" else bm.parse_bool(text)
    raise ValueError(f"unknown file extension {ext!r}")


def load_problem(onto_text: str, query_text: str, data_text: str = ""):
    """Parse and cross-check an ontology, query and optional data."""
    T, q = parse_ontology(onto_text), parse_query(query_text)
    A = parse_data(data_text) if data_text else DataInstance()
    check_signatures(T, q, A)
    return T, q, A
