"""Shared fixtures and independent reference implementations.

The reference cluster finder here is intentionally naive breadth-first
search, kept free of the package's union-find so the two can disagree when
one of them is wrong.
"""

import collections

import numpy as np
import pytest

from sdperc import LatticeKind, estimate_pc

#: one seed to rule the acceptance runs; unit tests pick their own
ACCEPT_SEED = 20260808

ALL_KINDS = list(LatticeKind)


def bfs_clusters(graph, bits):
    """Reference labelling: canonical min-index root per occupied vertex."""
    roots = np.full(graph.n, -1, dtype=np.int64)
    seen = np.zeros(graph.n, dtype=bool)
    for s in range(graph.n):
        if not bits[s] or seen[s]:
            continue
        comp = []
        queue = collections.deque([s])
        seen[s] = True
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in graph.neighbors(v):
                w = int(w)
                if bits[w] and not seen[w]:
                    seen[w] = True
                    queue.append(w)
        root = min(comp)
        for v in comp:
            roots[v] = root
    return roots


def bfs_reachable(graph, bits, sources):
    """Set of vertices reachable from occupied sources along occupied paths."""
    seen = set()
    queue = collections.deque()
    for s in sources:
        s = int(s)
        if bits[s] and s not in seen:
            seen.add(s)
            queue.append(s)
    while queue:
        v = queue.popleft()
        for w in graph.neighbors(v):
            w = int(w)
            if bits[w] and w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


class PcTable:
    """Lazily computed per-kind critical estimates at fixed box size."""

    def __init__(self):
        self._store = {}

    def get(self, kind, L=64, trials=10_000, tol=0.004):
        kind = LatticeKind(kind)
        key = (kind, L)
        if key not in self._store:
            self._store[key] = estimate_pc(
                kind, L, trials=trials, tol=tol,
                seed=ACCEPT_SEED + 131 * ALL_KINDS.index(kind) + L)
        return self._store[key]


@pytest.fixture(scope="session")
def pc_table():
    return PcTable()
