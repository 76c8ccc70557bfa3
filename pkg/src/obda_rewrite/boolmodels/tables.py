"""Exhaustive truth tables over the input hypercube."""

from __future__ import annotations

import numpy as np

from ..errors import AdviceTooLarge, UnboundVariable
from . import _kernels as K
from .models import (
    MAX_ADVICE,
    NBP,
    BAnd,
    BConst,
    BNot,
    BOr,
    BoolNode,
    BooleanCircuit,
    BVar,
    Hypergraph,
    NondetCircuit,
    model_variables,
)


def _index(variables):
    return {v: i for i, v in enumerate(variables)}


def _check(names, variables):
    missing = set(names) - set(variables)
    if missing:
        raise UnboundVariable(f"no value for {sorted(missing)[0]}")


def _circuit_table(c: BooleanCircuit, cols: dict, n_rows: int) -> np.ndarray:
    val = dict(cols)
    for name, op, args in c.gates:
        if op == "AND":
            acc = np.ones(n_rows, dtype=bool)
            for a in args:
                acc &= val[a]
            val[name] = acc
        elif op == "OR":
            acc = np.zeros(n_rows, dtype=bool)
            for a in args:
                acc |= val[a]
            val[name] = acc
        elif op == "NOT":
            val[name] = ~val[args[0]]
        else:
            val[name] = np.full(n_rows, args[0] == "1")
    return val[c.output]


ADVICE_BLOCK = 1 << 16


def _advice_major(model: NondetCircuit, cols: dict, n_rows: int, m: int) -> np.ndarray:
    """One input row at a time, advice cube vectorized in blocks."""
    out = np.zeros(n_rows, dtype=bool)
    for start in range(0, 1 << m, ADVICE_BLOCK):
        idx = np.arange(start, min(start + ADVICE_BLOCK, 1 << m), dtype=np.int64)
        adv = {y: ((idx >> i) & 1).astype(bool) for i, y in enumerate(model.advice)}
        for r in np.flatnonzero(~out):
            env = dict(adv)
            env.update({x: np.full(len(idx), bool(c[r])) for x, c in cols.items()})
            out[r] = _circuit_table(model.circuit, env, len(idx)).any()
    return out


def _formula_table(f: BoolNode, cols: dict, n_rows: int) -> np.ndarray:
    if isinstance(f, BVar):
        return cols[f.name]
    if isinstance(f, BConst):
        return np.full(n_rows, f.value)
    if isinstance(f, BNot):
        return ~_formula_table(f.arg, cols, n_rows)
    if isinstance(f, BAnd):
        acc = np.ones(n_rows, dtype=bool)
        for g in f.items:
            acc &= _formula_table(g, cols, n_rows)
        return acc
    acc = np.zeros(n_rows, dtype=bool)
    for g in f.items:
        acc |= _formula_table(g, cols, n_rows)
    return acc


def truth_table(model, variables=None, inputs=None) -> np.ndarray:
    """Output of ``model`` on every row of ``inputs`` (default: the whole cube).

    Row ``r`` of the default cube sets variable ``i`` to bit ``i`` of ``r``.
    """
    variables = list(model_variables(model) if variables is None else variables)
    _check(model_variables(model), variables)
    if inputs is None:
        inputs = K.input_cube(len(variables))
    inputs = np.ascontiguousarray(inputs, dtype=np.uint8)
    idx = _index(variables)
    n_rows = inputs.shape[0]
    if isinstance(model, Hypergraph):
        vpos = {v: i for i, v in enumerate(model.vertices)}
        inc = np.zeros((len(model.edges), len(model.vertices)), dtype=np.uint8)
        for j, (_, m) in enumerate(model.edges):
            for v in m:
                inc[j, vpos[v]] = 1
        kind, var = K.encode_labels([model.label(v) for v in model.vertices], idx)
        return np.asarray(K.hgp_table(inc, kind, var, inputs), dtype=bool)
    if isinstance(model, NBP):
        npos = {n: i for i, n in enumerate(model.nodes)}
        src = np.array([npos[u] for u, _, _ in model.arcs], dtype=np.int64)
        dst = np.array([npos[v] for _, v, _ in model.arcs], dtype=np.int64)
        kind, var = K.encode_labels([lab for _, _, lab in model.arcs], idx)
        return np.asarray(
            K.reach_table(src, dst, kind, var, len(model.nodes), npos[model.s], npos[model.t], inputs),
            dtype=bool,
        )
    cols = {v: inputs[:, i] == 1 for v, i in idx.items()}
    if isinstance(model, NondetCircuit):
        m = len(model.advice)
        if m > MAX_ADVICE:
            raise AdviceTooLarge(f"{m} advice inputs exceed {MAX_ADVICE}")
        out = np.zeros(n_rows, dtype=bool)
        if (1 << m) > n_rows:
            return _advice_major(model, cols, n_rows, m)
        adv = K.input_cube(m)
        for row in adv:
            env = dict(cols)
            env.update({y: np.full(n_rows, bool(b)) for y, b in zip(model.advice, row)})
            out |= _circuit_table(model.circuit, env, n_rows)
        return out
    if isinstance(model, BooleanCircuit):
        return _circuit_table(model, cols, n_rows)
    if isinstance(model, BoolNode):
        return _formula_table(model, cols, n_rows)
    raise TypeError(f"cannot tabulate {type(model).__name__}")
