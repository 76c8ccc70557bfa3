"""Random ontologies, queries and data for differential testing."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .chase import ExceedsCap, Unbounded, ontology_depth
from .core import TGD, Atom, ConjunctiveQuery, DataInstance, Ontology, const, var


@dataclass(frozen=True)
class TrialConfig:
    seed: int = 0
    n_unary: int = 2
    n_binary: int = 2
    n_tgds: int = 3
    n_atoms: int = 4
    n_constants: int = 3
    depth: object = 1  # 1, 2 or "unbounded"
    trials: int = 200

    def __post_init__(self):
        for name in ("n_unary", "n_binary", "n_atoms", "n_constants", "trials"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.n_tgds < 0:
            raise ValueError("n_tgds must be non-negative")
        if self.depth not in (1, 2, "unbounded"):
            raise ValueError(f"unknown depth class {self.depth!r}")


X, Y = var("x"), var("y")


def _names(cfg):
    return [f"A{i}" for i in range(cfg.n_unary)], [f"R{i}" for i in range(cfg.n_binary)]


def _existential_tgd(rng, unary, binary):
    """A(x) or R(x,x) -> exists y. one to three atoms over (x, y)."""
    head = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.2:
            head.append(Atom(rng.choice(unary), (Y,)))
        else:
            head.append(Atom(rng.choice(binary), (X, Y) if rng.random() < 0.5 else (Y, X)))
    if not any(a.arity == 2 for a in head):
        head.append(Atom(rng.choice(binary), (X, Y)))
    body = Atom(rng.choice(unary), (X,)) if rng.random() < 0.85 else Atom(rng.choice(binary), (X, X))
    return TGD(body, Y, tuple(dict.fromkeys(head)))


def _plain_tgd(rng, unary, binary):
    kind = rng.randrange(4)
    if kind == 0:
        return TGD(Atom(rng.choice(unary), (X,)), None, (Atom(rng.choice(unary), (X,)),))
    if kind == 1:
        b = Atom(rng.choice(binary), (X, Y))
        return TGD(b, None, (Atom(rng.choice(unary), (rng.choice((X, Y)),)),))
    if kind == 2:
        h = Atom(rng.choice(binary), (X, Y) if rng.random() < 0.5 else (Y, X))
        return TGD(Atom(rng.choice(binary), (X, Y)), None, (h,))
    return TGD(Atom(rng.choice(binary), (X, Y)), None, (Atom(rng.choice(binary), (X, X)),))


def _candidate(rng, cfg):
    unary, binary = _names(cfg)
    tgds = []
    if cfg.depth == 1:
        # existential tgds only, and no head predicate feeds another body;
        # plain tgds could put loops on nulls and break the one-internal-variable shape
        for _ in range(cfg.n_tgds):
            tgds.append(_existential_tgd(rng, unary, binary))
        heads = {a.predicate for t in tgds for a in t.head}
        tgds = [t for t in tgds if t.body.predicate not in heads] or tgds[:1]
        return Ontology(tuple(dict.fromkeys(tgds)))
    for _ in range(cfg.n_tgds):
        if rng.random() < 0.6:
            tgds.append(_existential_tgd(rng, unary, binary))
        else:
            tgds.append(_plain_tgd(rng, unary, binary))
    return Ontology(tuple(dict.fromkeys(tgds)))


def random_ontology(rng: random.Random, cfg: TrialConfig, max_tries: int = 500) -> Ontology:
    """Rejection-sample an ontology whose depth matches the configured class."""
    if cfg.n_tgds == 0:
        return Ontology()
    for _ in range(max_tries):
        T = _candidate(rng, cfg)
        d = ontology_depth(T, 8)
        if cfg.depth == "unbounded":
            if d is Unbounded:
                return T
        elif d is not Unbounded and d is not ExceedsCap and d == cfg.depth:
            return T
    raise RuntimeError(f"no ontology of depth {cfg.depth} after {max_tries} tries")


def random_query(rng: random.Random, cfg: TrialConfig, tree: bool = False) -> ConjunctiveQuery:
    """A connected query with up to ``n_atoms`` atoms and up to two answer variables."""
    unary, binary = _names(cfg)
    n = rng.randint(1, cfg.n_atoms)
    vs = [var("v0")]
    atoms = []
    for i in range(n):
        if rng.random() < 0.25:
            atoms.append(Atom(rng.choice(unary), (rng.choice(vs),)))
            continue
        if tree or rng.random() < 0.7 or len(vs) < 2:
            old, new = rng.choice(vs), var(f"v{len(vs)}")
            vs.append(new)
            pair = (old, new) if rng.random() < 0.5 else (new, old)
        else:
            pair = tuple(rng.sample(vs, 2))
        atoms.append(Atom(rng.choice(binary), pair))
    used = sorted({v for a in atoms for v in a.args})
    k = rng.randint(0, min(2, len(used)))
    answer = tuple(rng.sample(used, k))
    return ConjunctiveQuery(answer, tuple(atoms))


def random_data(rng: random.Random, cfg: TrialConfig, max_atoms: int = 8, q: ConjunctiveQuery | None = None, T: Ontology | None = None) -> DataInstance:
    """Random facts; with ``q`` given, usually a partial image of ``q`` plus noise.

    With ``T`` as well, the image sometimes leaves out the atoms of one
    tree witness and adds one of its generators at the image of its roots.
    """
    unary, binary = _names(cfg)
    cs = [const(f"c{i}") for i in range(cfg.n_constants)]
    atoms = set()
    if q is not None and rng.random() < 0.9:
        image = {v: rng.choice(cs) for v in q.variables()}
        skip = set()
        if T is not None and rng.random() < 0.8:
            from .treewitness import enumerate_tree_witnesses

            thetas = enumerate_tree_witnesses(q, T)
            if thetas:
                t = rng.choice(thetas)
                c = rng.choice(cs)
                for v in t.roots:
                    image[v] = c
                skip = set(t.atoms)
                # a generator without an existential keeps the witnessed part out of the data
                gens = [g for g in t.generators if not g.existential] or list(t.generators)
                atoms.add(rng.choice(gens).head_atom(c, rng.choice(cs)))
        for a in q.atoms:
            if a not in skip and rng.random() < 0.9:
                atoms.add(Atom(a.predicate, tuple(image[t] for t in a.args)))
        max_atoms = max(1, max_atoms // 2)
    for _ in range(rng.randint(1, max_atoms)):
        if rng.random() < 0.5:
            atoms.add(Atom(rng.choice(unary), (rng.choice(cs),)))
        else:
            atoms.add(Atom(rng.choice(binary), (rng.choice(cs), rng.choice(cs))))
    return DataInstance(frozenset(atoms))


def random_instance(rng: random.Random, cfg: TrialConfig, tree: bool = False):
    T = random_ontology(rng, cfg)
    q = random_query(rng, cfg, tree)
    return T, q, random_data(rng, cfg, q=q, T=T)


def random_degree2_hypergraph(rng: random.Random, n_edges: int, n_vertices: int | None = None):
    """Every vertex lies in exactly two distinct edges, with random incidence maps."""
    from .boolmodels.models import Hypergraph

    if n_edges < 2:
        raise ValueError("need at least two edges")
    n_vertices = n_vertices or rng.randint(1, n_edges + 2)
    names = [f"e{j}" for j in range(1, n_edges + 1)]
    members = {e: set() for e in names}
    i1, i2 = {}, {}
    vertices = tuple(f"v{i}" for i in range(1, n_vertices + 1))
    for v in vertices:
        a, b = rng.sample(names, 2)
        i1[v], i2[v] = a, b
        members[a].add(v)
        members[b].add(v)
    edges = tuple((e, frozenset(members[e])) for e in names)
    return Hypergraph(vertices, edges, {}, i1, i2)
