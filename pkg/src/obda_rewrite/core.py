"""Abstract syntax for ontologies, queries, data and rewriting formulas."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import (
    ArityMismatch,
    ConstantInRule,
    EmptyQuery,
    AnswerVarNotInBody,
    TooManyTgdVariables,
    ValidationError,
)

VAR = "variable"
CONST = "constant"


@dataclass(frozen=True, order=True)
class Term:
    kind: str
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValidationError("empty term name")
        if self.kind not in (VAR, CONST):
            raise ValidationError(f"bad term kind {self.kind!r}")

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    def __str__(self):
        return self.name

    def __repr__(self):
        return ("?" if self.kind == VAR else "") + self.name


def var(name: str) -> Term:
    return Term(VAR, name)


def const(name: str) -> Term:
    return Term(CONST, name)


@dataclass(frozen=True)
class Atom:
    """A predicate applied to terms.

    Problem atoms have arity 1 or 2; datalog atoms over intensional
    predicates may have any arity.
    """

    predicate: str
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set:
        return {t for t in self.args if t.is_var}

    def sort_key(self):
        return (self.predicate, tuple(t.name for t in self.args))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return f"{self.predicate}({','.join(t.name for t in self.args)})"

    __repr__ = __str__


def atom(predicate: str, *names: str, constants: bool = False) -> Atom:
    make = const if constants else var
    return Atom(predicate, tuple(make(n) for n in names))


@dataclass(frozen=True)
class TGD:
    body: Atom
    existential: Optional[Term]
    head: tuple

    def variables(self) -> set:
        vs = set(self.body.variables())
        if self.existential is not None:
            vs.add(self.existential)
        return vs

    def predicates(self):
        yield self.body.predicate
        for a in self.head:
            yield a.predicate

    def __str__(self):
        ex = f"exists {self.existential.name}. " if self.existential else ""
        return f"{self.body} -> {ex}{', '.join(map(str, self.head))}"


@dataclass(frozen=True)
class Ontology:
    tgds: tuple = ()

    @property
    def size(self) -> int:
        return sum(1 + len(t.head) for t in self.tgds)

    def signature(self) -> dict:
        sig = {}
        for t in self.tgds:
            for a in (t.body, *t.head):
                sig.setdefault(a.predicate, a.arity)
        return sig

    def __len__(self):
        return len(self.tgds)


@dataclass(frozen=True)
class ConjunctiveQuery:
    answer_vars: tuple
    atoms: tuple

    def __post_init__(self):
        # set semantics with a canonical order
        object.__setattr__(self, "atoms", tuple(sorted(set(self.atoms))))

    @property
    def size(self) -> int:
        return len(self.atoms)

    def variables(self) -> list:
        vs = set()
        for a in self.atoms:
            vs |= a.variables()
        return sorted(vs)

    def existential_vars(self) -> list:
        ans = set(self.answer_vars)
        return [v for v in self.variables() if v not in ans]

    def signature(self) -> dict:
        sig = {}
        for a in self.atoms:
            sig.setdefault(a.predicate, a.arity)
        return sig

    @property
    def is_boolean(self) -> bool:
        return not self.answer_vars


@dataclass(frozen=True)
class DataInstance:
    atoms: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "atoms", frozenset(self.atoms))

    def constants(self) -> list:
        cs = set()
        for a in self.atoms:
            cs.update(a.args)
        return sorted(cs)

    def sorted_atoms(self) -> list:
        return sorted(self.atoms)

    def signature(self) -> dict:
        sig = {}
        for a in self.atoms:
            sig.setdefault(a.predicate, a.arity)
        return sig

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.sorted_atoms())


UNARY = "unary"
REFLEXIVE = "reflexive"
OUT = "out"
IN = "in"
SHAPES = (UNARY, REFLEXIVE, OUT, IN)


@dataclass(frozen=True, order=True)
class Generator:
    """One of S(x), S(x,x), exists y S(x,y), exists y S(y,x)."""

    shape: str
    predicate: str

    def formula(self, x: Term, fresh: Term) -> "Formula":
        """Instantiate the generator at variable ``x``; ``fresh`` names the bound variable."""
        p = self.predicate
        if self.shape == UNARY:
            return Atom(p, (x,))
        if self.shape == REFLEXIVE:
            return Atom(p, (x, x))
        if self.shape == OUT:
            return Exists((fresh,), Atom(p, (x, fresh)))
        return Exists((fresh,), Atom(p, (fresh, x)))

    def head_atom(self, x: Term, y: Term) -> Atom:
        p = self.predicate
        return {
            UNARY: Atom(p, (x,)),
            REFLEXIVE: Atom(p, (x, x)),
            OUT: Atom(p, (x, y)),
            IN: Atom(p, (y, x)),
        }[self.shape]

    @property
    def existential(self) -> bool:
        return self.shape in (OUT, IN)

    def __str__(self):
        p = self.predicate
        return {
            UNARY: f"{p}(x)",
            REFLEXIVE: f"{p}(x,x)",
            OUT: f"exists y. {p}(x,y)",
            IN: f"exists y. {p}(y,x)",
        }[self.shape]


def generators_for(signature: dict) -> list:
    """All generators over a predicate -> arity signature, in canonical order."""
    out = []
    for p in sorted(signature):
        if signature[p] == 1:
            out.append(Generator(UNARY, p))
        else:
            out += [Generator(REFLEXIVE, p), Generator(OUT, p), Generator(IN, p)]
    return out


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left}={self.right}"


@dataclass(frozen=True)
class And:
    items: tuple = ()


@dataclass(frozen=True)
class Or:
    items: tuple = ()


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


Formula = Union[Atom, Eq, And, Or, Exists, Forall, Not]
TRUE = And(())
FALSE = Or(())


def conj(items: Iterable) -> Formula:
    """Conjunction with flattening and truth-constant removal."""
    out = []
    for f in items:
        if isinstance(f, And):
            out.extend(f.items)
        elif f == FALSE:
            return FALSE
        else:
            out.append(f)
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(items: Iterable) -> Formula:
    """Disjunction with flattening and truth-constant removal."""
    out = []
    for f in items:
        if isinstance(f, Or):
            out.extend(f.items)
        elif f == TRUE:
            return TRUE
        else:
            out.append(f)
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def exists(vs: Iterable, body: Formula) -> Formula:
    vs = tuple(vs)
    if not vs:
        return body
    return Exists(vs, body)


def pe_size(f: Formula) -> int:
    """Number of atom and equality leaves."""
    stack, n = [f], 0
    while stack:
        g = stack.pop()
        if isinstance(g, (Atom, Eq)):
            n += 1
        elif isinstance(g, (And, Or)):
            stack.extend(g.items)
        else:
            stack.append(g.body)
    return n


def is_positive_existential(f: Formula) -> bool:
    if isinstance(f, (Atom, Eq)):
        return True
    if isinstance(f, (And, Or)):
        return all(is_positive_existential(g) for g in f.items)
    if isinstance(f, Exists):
        return is_positive_existential(f.body)
    return False


def free_vars(f: Formula) -> set:
    if isinstance(f, Atom):
        return f.variables()
    if isinstance(f, Eq):
        return {t for t in (f.left, f.right) if t.is_var}
    if isinstance(f, (And, Or)):
        out = set()
        for g in f.items:
            out |= free_vars(g)
        return out
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - set(f.vars)
    return free_vars(f.body)


def all_vars(f: Formula) -> set:
    """Every variable name occurring in ``f``, bound or free."""
    if isinstance(f, Atom):
        return f.variables()
    if isinstance(f, Eq):
        return {t for t in (f.left, f.right) if t.is_var}
    if isinstance(f, (And, Or)):
        out = set()
        for g in f.items:
            out |= all_vars(g)
        return out
    if isinstance(f, (Exists, Forall)):
        return all_vars(f.body) | set(f.vars)
    return all_vars(f.body)


def formula_atoms(f: Formula):
    """Yield every atom leaf of ``f``."""
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            yield g
        elif isinstance(g, (And, Or)):
            stack.extend(g.items)
        elif not isinstance(g, Eq):
            stack.append(g.body)


class FreshNames:
    """Produces variable names avoiding a reserved set."""

    def __init__(self, reserved: Iterable = ()):
        self.used = {t.name if isinstance(t, Term) else t for t in reserved}

    def __call__(self, base: str = "z") -> Term:
        name, i = base, 0
        while name in self.used:
            name = f"{base}{i}"
            i += 1
        self.used.add(name)
        return var(name)


# -------------------------------------------------------------- validation


def _check_arities(atoms: Iterable, sig: Optional[dict] = None) -> dict:
    sig = {} if sig is None else sig
    for a in atoms:
        if a.arity not in (1, 2):
            raise ArityMismatch(f"{a}: arity must be 1 or 2")
        known = sig.setdefault(a.predicate, a.arity)
        if known != a.arity:
            raise ArityMismatch(
                f"predicate {a.predicate} used with arities {known} and {a.arity}"
            )
    return sig


def _validate_tgd(t: TGD) -> None:
    for a in (t.body, *t.head):
        for term in a.args:
            if not term.is_var:
                raise ConstantInRule(f"constant {term.name} in tgd {t}")
    if not t.head:
        raise ValidationError(f"tgd {t} has an empty head")
    ex = t.existential
    body_vars = t.body.variables()
    if ex is not None and ex in body_vars:
        raise ValidationError(f"existential {ex.name} occurs in the body of {t}")
    allowed = t.variables()
    if len(allowed) > 2:
        raise TooManyTgdVariables(f"{t} uses {len(allowed)} variables")
    for a in t.head:
        extra = a.variables() - allowed
        if extra:
            if len(allowed | extra) > 2:
                raise TooManyTgdVariables(f"{t} uses more than 2 variables")
            raise ValidationError(f"head variable not bound in {t}")


def validate(obj) -> None:
    """Raise a ValidationError subclass unless ``obj`` is well formed."""
    if isinstance(obj, TGD):
        _validate_tgd(obj)
        _check_arities([obj.body, *obj.head])
    elif isinstance(obj, Ontology):
        sig = {}
        for t in obj.tgds:
            _validate_tgd(t)
            _check_arities([t.body, *t.head], sig)
    elif isinstance(obj, ConjunctiveQuery):
        if not obj.atoms:
            raise EmptyQuery("query has no atoms")
        _check_arities(obj.atoms)
        for a in obj.atoms:
            for term in a.args:
                if not term.is_var:
                    raise ConstantInRule(f"constant {term.name} in query atom {a}")
        body = set(obj.variables())
        for v in obj.answer_vars:
            if not v.is_var:
                raise ConstantInRule(f"constant {v.name} among answer variables")
            if v not in body:
                raise AnswerVarNotInBody(f"answer variable {v.name} not in body")
        if len(set(obj.answer_vars)) != len(obj.answer_vars):
            raise ValidationError("repeated answer variable")
    elif isinstance(obj, DataInstance):
        _check_arities(obj.atoms)
        for a in obj.atoms:
            if any(t.is_var for t in a.args):
                raise ValidationError(f"data atom {a} is not ground")
    else:
        raise TypeError(f"cannot validate {type(obj).__name__}")


def check_signatures(*objs) -> dict:
    """Check that predicates keep one arity across several objects."""
    sig = {}
    for o in objs:
        for p, n in o.signature().items():
            if sig.setdefault(p, n) != n:
                raise ArityMismatch(f"predicate {p} used with arities {sig[p]} and {n}")
    return sig
