"""Cluster-labelling kernels.

The hot path is a union-find (union by size, path compression) over the
precomputed edge list of a box, restricted to occupied vertices.  Roots are
canonicalised to the smallest vertex index of each cluster so that the output
is independent of union order and of which backend produced it.

numba compiles the kernel when available; a scipy connected-components
fallback keeps the package functional without it.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap


@njit(cache=True, nogil=True)
def _cluster_roots_uf(n, edge_u, edge_w, occ):  # pragma: no cover - jitted
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    for e in range(edge_u.size):
        a = edge_u[e]
        b = edge_w[e]
        if occ[a] == 0 or occ[b] == 0:
            continue
        # find with path compression
        ra = a
        while parent[ra] != ra:
            ra = parent[ra]
        while parent[a] != ra:
            nxt = parent[a]
            parent[a] = ra
            a = nxt
        rb = b
        while parent[rb] != rb:
            rb = parent[rb]
        while parent[b] != rb:
            nxt = parent[b]
            parent[b] = rb
            b = nxt
        if ra == rb:
            continue
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
    # flatten and canonicalise roots to the minimum member index
    canon = np.full(n, n, dtype=np.int64)
    for v in range(n):
        if occ[v]:
            r = v
            while parent[r] != r:
                r = parent[r]
            parent[v] = r
            if canon[r] > v:
                canon[r] = v
    out = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        if occ[v]:
            out[v] = canon[parent[v]]
    return out


def _cluster_roots_scipy(n, edge_u, edge_w, occ):
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    keep = (occ[edge_u] != 0) & (occ[edge_w] != 0)
    u, w = edge_u[keep], edge_w[keep]
    mat = coo_matrix((np.ones(u.size, dtype=np.uint8), (u, w)), shape=(n, n))
    _, comp = connected_components(mat, directed=False)
    occ_idx = np.flatnonzero(occ)
    canon = np.full(n, n, dtype=np.int64)
    np.minimum.at(canon, comp[occ_idx], occ_idx)
    out = np.full(n, -1, dtype=np.int64)
    out[occ_idx] = canon[comp[occ_idx]]
    return out


def cluster_roots(n: int, edge_u: np.ndarray, edge_w: np.ndarray,
                  occ: np.ndarray) -> np.ndarray:
    """Per-vertex cluster root (minimum member index); -1 for vacant."""
    if HAVE_NUMBA:
        return _cluster_roots_uf(n, edge_u, edge_w, occ)
    return _cluster_roots_scipy(n, edge_u, edge_w, occ)


@njit(cache=True, nogil=True)
def _root_side_flags(roots, ids, out):  # pragma: no cover - jitted
    for k in range(ids.size):
        r = roots[ids[k]]
        if r >= 0:
            out[r] = True


@njit(cache=True, nogil=True)
def sdp_trial_events(n, edge_u, edge_w, left, right, bottom, top, origin,
                     x, y, touches_policy):  # pragma: no cover - jitted
    """Full per-trial pipeline: destroy the initial field's proxy-infinite
    clusters, overlay the enhancement, and report the (origin-to-boundary,
    left-right spanning) event indicators of the final field."""
    rx = _cluster_roots_uf(n, edge_u, edge_w, x)
    tl = np.zeros(n, np.bool_)
    tr = np.zeros(n, np.bool_)
    tb = np.zeros(n, np.bool_)
    tt = np.zeros(n, np.bool_)
    _root_side_flags(rx, left, tl)
    _root_side_flags(rx, right, tr)
    _root_side_flags(rx, bottom, tb)
    _root_side_flags(rx, top, tt)

    z = np.zeros(n, np.uint8)
    for v in range(n):
        keep = False
        if x[v]:
            r = rx[v]
            if touches_policy:
                doomed = tl[r] or tr[r] or tb[r] or tt[r]
            else:
                doomed = (tl[r] and tr[r]) or (tb[r] and tt[r])
            keep = not doomed
        if keep or y[v]:
            z[v] = 1

    rz = _cluster_roots_uf(n, edge_u, edge_w, z)
    zl = np.zeros(n, np.bool_)
    zr = np.zeros(n, np.bool_)
    _root_side_flags(rz, left, zl)
    _root_side_flags(rz, right, zr)
    span = 0
    for v in range(n):
        if zl[v] and zr[v]:
            span = 1
            break
    theta = 0
    if z[origin]:
        ro = rz[origin]
        for k in range(left.size):
            if rz[left[k]] == ro:
                theta = 1
                break
        if theta == 0:
            for k in range(right.size):
                if rz[right[k]] == ro:
                    theta = 1
                    break
        if theta == 0:
            for k in range(bottom.size):
                if rz[bottom[k]] == ro:
                    theta = 1
                    break
        if theta == 0:
            for k in range(top.size):
                if rz[top[k]] == ro:
                    theta = 1
                    break
    return theta, span


@njit(cache=True, nogil=True)
def spanning_trial(n, edge_u, edge_w, left, right, occ):  # pragma: no cover
    """Left-right spanning indicator of a plain configuration."""
    roots = _cluster_roots_uf(n, edge_u, edge_w, occ)
    zl = np.zeros(n, np.bool_)
    zr = np.zeros(n, np.bool_)
    _root_side_flags(roots, left, zl)
    _root_side_flags(roots, right, zr)
    for v in range(n):
        if zl[v] and zr[v]:
            return 1
    return 0
