"""Batched truth-table kernels.

Set ``OBDA_REWRITE_NUMBA=0`` to force the pure-numpy versions; numba is
used when importable otherwise.
"""

from __future__ import annotations

import os

import numpy as np

KIND_ZERO, KIND_ONE, KIND_POS, KIND_NEG = 0, 1, 2, 3


def _want_numba() -> bool:
    return os.environ.get("OBDA_REWRITE_NUMBA", "1").lower() not in ("0", "false", "no", "off")


try:
    if not _want_numba():
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def encode_labels(labels, var_index):
    """Label strings to (kind, variable index) arrays."""
    kind = np.empty(len(labels), dtype=np.int8)
    var = np.zeros(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        if lab == "0":
            kind[i] = KIND_ZERO
        elif lab == "1":
            kind[i] = KIND_ONE
        elif lab.startswith("!"):
            kind[i], var[i] = KIND_NEG, var_index[lab[1:]]
        else:
            kind[i], var[i] = KIND_POS, var_index[lab]
    return kind, var


def input_cube(n: int) -> np.ndarray:
    """All 2^n inputs; bit i of row r is variable i."""
    rows = np.arange(1 << n, dtype=np.int64)
    return ((rows[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(np.uint8)


def label_values(kind, var, inputs):
    """Truth value of every label on every input row, shape (rows, labels)."""
    n_rows = inputs.shape[0]
    out = np.empty((n_rows, len(kind)), dtype=np.bool_)
    for i in range(len(kind)):
        k = kind[i]
        if k == KIND_ZERO:
            out[:, i] = False
        elif k == KIND_ONE:
            out[:, i] = True
        elif k == KIND_POS:
            out[:, i] = inputs[:, var[i]] == 1
        else:
            out[:, i] = inputs[:, var[i]] == 0
    return out


# ------------------------------------------------------------ numpy versions


def _independent_covers(inc: np.ndarray, limit: int = 1 << 12):
    """Vertex sets of all independent edge subsets, or None past ``limit``."""
    m, nv = inc.shape
    edges = [inc[j].astype(bool) for j in range(m)]
    covers = [np.zeros(nv, dtype=bool)]
    layer = [((), np.zeros(nv, dtype=bool))]
    while layer:
        nxt = []
        for chosen, cov in layer:
            start = chosen[-1] + 1 if chosen else 0
            for j in range(start, m):
                if not (edges[j] & cov).any():
                    c2 = cov | edges[j]
                    nxt.append((chosen + (j,), c2))
                    covers.append(c2)
        if len(covers) > limit:
            return None
        layer = nxt
    return np.array(covers, dtype=bool)


def hgp_table_numpy(inc, kind, var, inputs):
    zeros = ~label_values(kind, var, inputs)
    covers = _independent_covers(inc)
    if covers is None:
        return np.array([_hgp_row_python(inc, z) for z in zeros], dtype=bool)
    miss = zeros.astype(np.int32) @ (~covers).T.astype(np.int32)
    return (miss == 0).any(axis=1)


def _hgp_row_python(inc, zero_row):
    from .models import cover_search

    masks = [int("".join("1" if x else "0" for x in inc[j][::-1]) or "0", 2) for j in range(inc.shape[0])]
    zeros = [(1 << int(v), [masks[j] for j in np.flatnonzero(inc[:, v])]) for v in np.flatnonzero(zero_row)]
    return cover_search(zeros)


def reach_table_numpy(src, dst, kind, var, n_nodes, s, t, inputs):
    active = label_values(kind, var, inputs)
    reach = np.zeros((inputs.shape[0], n_nodes), dtype=bool)
    reach[:, s] = True
    while True:
        before = reach.sum()
        for a in range(len(src)):
            reach[:, dst[a]] |= reach[:, src[a]] & active[:, a]
        if reach.sum() == before:
            return reach[:, t]


# ------------------------------------------------------------ numba versions

if HAVE_NUMBA:

    @njit(cache=True)
    def _propagate(zero, covered, vstart, vedges, estart, everts, trail, top, live):
        """Add forced edges; return (new trail top, branch vertex or -1, conflict)."""
        nv = zero.shape[0]
        while True:
            changed = False
            best, best_n = -1, 1 << 30
            for v in range(nv):
                if not zero[v] or covered[v]:
                    continue
                n = 0
                for p in range(vstart[v], vstart[v + 1]):
                    j = vedges[p]
                    ok = True
                    for q in range(estart[j], estart[j + 1]):
                        if covered[everts[q]]:
                            ok = False
                            break
                    if ok:
                        live[n] = j
                        n += 1
                if n == 0:
                    return top, -1, True
                if n == 1:
                    j = live[0]
                    for q in range(estart[j], estart[j + 1]):
                        covered[everts[q]] = True
                    trail[top] = j
                    top += 1
                    changed = True
                elif n < best_n:
                    best, best_n = v, n
            if not changed:
                return top, best, False

    @njit(cache=True)
    def _undo(covered, estart, everts, trail, top, mark):
        while top > mark:
            top -= 1
            j = trail[top]
            for q in range(estart[j], estart[j + 1]):
                covered[everts[q]] = False
        return top

    @njit(cache=True)
    def _hgp_table_jit(vstart, vedges, estart, everts, kind, var, inputs):
        nv = kind.shape[0]
        m = estart.shape[0] - 1
        n_rows = inputs.shape[0]
        out = np.zeros(n_rows, dtype=np.bool_)
        zero = np.zeros(nv, dtype=np.bool_)
        covered = np.zeros(nv, dtype=np.bool_)
        trail = np.zeros(m + 1, dtype=np.int64)
        live = np.zeros(m + 1, dtype=np.int64)
        maxdeg = 1
        for v in range(nv):
            maxdeg = max(maxdeg, vstart[v + 1] - vstart[v])
        opts = np.zeros((nv + 1, maxdeg), dtype=np.int64)
        nopts = np.zeros(nv + 1, dtype=np.int64)
        nxt = np.zeros(nv + 1, dtype=np.int64)
        mark = np.zeros(nv + 1, dtype=np.int64)
        for r in range(n_rows):
            for v in range(nv):
                k = kind[v]
                if k == 0:
                    zero[v] = True
                elif k == 1:
                    zero[v] = False
                elif k == 2:
                    zero[v] = inputs[r, var[v]] == 0
                else:
                    zero[v] = inputs[r, var[v]] == 1
                covered[v] = False
            top, best, conflict = _propagate(zero, covered, vstart, vedges, estart, everts, trail, 0, live)
            if conflict:
                continue
            if best == -1:
                out[r] = True
                continue
            level = 0
            mark[0] = top
            nopts[0] = 0
            for p in range(vstart[best], vstart[best + 1]):
                j = vedges[p]
                ok = True
                for q in range(estart[j], estart[j + 1]):
                    if covered[everts[q]]:
                        ok = False
                        break
                if ok:
                    opts[0, nopts[0]] = j
                    nopts[0] += 1
            nxt[0] = 0
            found = False
            while level >= 0:
                if nxt[level] >= nopts[level]:
                    top = _undo(covered, estart, everts, trail, top, mark[level])
                    level -= 1
                    continue
                top = _undo(covered, estart, everts, trail, top, mark[level])
                j = opts[level, nxt[level]]
                nxt[level] += 1
                for q in range(estart[j], estart[j + 1]):
                    covered[everts[q]] = True
                trail[top] = j
                top += 1
                top, best, conflict = _propagate(zero, covered, vstart, vedges, estart, everts, trail, top, live)
                if conflict:
                    continue
                if best == -1:
                    found = True
                    break
                level += 1
                mark[level] = top
                nopts[level] = 0
                nxt[level] = 0
                for p in range(vstart[best], vstart[best + 1]):
                    j = vedges[p]
                    ok = True
                    for q in range(estart[j], estart[j + 1]):
                        if covered[everts[q]]:
                            ok = False
                            break
                    if ok:
                        opts[level, nopts[level]] = j
                        nopts[level] += 1
            out[r] = found
        return out

    @njit(cache=True)
    def _reach_table_jit(src, dst, kind, var, n_nodes, s, t, inputs):
        n_rows = inputs.shape[0]
        n_arcs = src.shape[0]
        out = np.zeros(n_rows, dtype=np.bool_)
        seen = np.zeros(n_nodes, dtype=np.bool_)
        stack = np.zeros(n_nodes, dtype=np.int64)
        # arcs grouped by source node
        order = np.argsort(src)
        start = np.zeros(n_nodes + 1, dtype=np.int64)
        for a in range(n_arcs):
            start[src[a] + 1] += 1
        for i in range(n_nodes):
            start[i + 1] += start[i]
        for r in range(n_rows):
            seen[:] = False
            seen[s] = True
            stack[0] = s
            top = 1
            while top > 0:
                top -= 1
                u = stack[top]
                for p in range(start[u], start[u + 1]):
                    a = order[p]
                    k = kind[a]
                    if k == 0:
                        continue
                    if k == 2 and inputs[r, var[a]] == 0:
                        continue
                    if k == 3 and inputs[r, var[a]] == 1:
                        continue
                    w = dst[a]
                    if not seen[w]:
                        seen[w] = True
                        stack[top] = w
                        top += 1
            out[r] = seen[t]
        return out


def _csr(inc):
    """Vertex-to-edge and edge-to-vertex adjacency in CSR form."""
    inc = inc.astype(bool)
    m, nv = inc.shape
    vstart = np.zeros(nv + 1, dtype=np.int64)
    vstart[1:] = np.cumsum(inc.sum(axis=0))
    vedges = np.nonzero(inc.T)[1].astype(np.int64)
    estart = np.zeros(m + 1, dtype=np.int64)
    estart[1:] = np.cumsum(inc.sum(axis=1))
    everts = np.nonzero(inc)[1].astype(np.int64)
    return vstart, vedges, estart, everts


def hgp_table(inc, kind, var, inputs):
    if HAVE_NUMBA:
        return _hgp_table_jit(*_csr(inc), kind, var, inputs)
    return hgp_table_numpy(inc, kind, var, inputs)


def reach_table(src, dst, kind, var, n_nodes, s, t, inputs):
    if HAVE_NUMBA:
        return _reach_table_jit(src, dst, kind, var, n_nodes, s, t, inputs)
    return reach_table_numpy(src, dst, kind, var, n_nodes, s, t, inputs)
