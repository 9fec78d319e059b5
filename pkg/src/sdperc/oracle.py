"""Exact enumeration of the model on tiny boxes.

Ground truth for the stochastic modules comes from summing the probability
mass p^a (1-p)^b delta^c (1-delta)^e over all (X, Y) configuration pairs.
Two independently coded routes are provided:

* `enumerate_event` groups X-configurations by their survivor field
  and sums over the enhanced completions; it reuses the production
  destruction and connectivity code so those paths get validated.
* `enumerate_event_recursive` codes everything again from scratch: clusters
  by plain depth-first search, destruction re-derived from boundary contact,
  a recursive branch over enhancement outcomes, and Kahan-compensated
  accumulation.  Shared-bug blindness between the two routes is limited to
  the box construction itself.

Both accumulate carefully enough that test instances agree to 1e-12.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .clusters import (InfinityProxy, _destroy_bits, _origin_reaches_boundary,
                       _roots_of_bits, _spans_left_right)
from .lattice import FiniteGraph

MAX_EVENT_VERTICES = 12
MAX_RECURSIVE_VERTICES = 10


class OracleError(ValueError):
    pass


class ZeroProbabilityPattern(OracleError):
    """The conditioning pattern has probability zero."""


@dataclass(frozen=True)
class ExactResult:
    """An exactly enumerated event probability."""

    event: str
    probability: float
    config_count: int
    method: str


def _bits_from_mask(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=np.uint8)


def _mask_from_bits(bits: np.ndarray) -> int:
    m = 0
    for i, b in enumerate(bits):
        if b:
            m |= 1 << i
    return m


def _pow_tables(q: float, n: int):
    fwd = [1.0] * (n + 1)
    rev = [1.0] * (n + 1)
    for k in range(1, n + 1):
        fwd[k] = fwd[k - 1] * q
        rev[k] = rev[k - 1] * (1.0 - q)
    return fwd, rev


def _event_fn(graph: FiniteGraph, event):
    """Production-path evaluation of a named (or callable) event on the
    final field."""
    if callable(event):
        return event
    if event == "theta":
        return lambda bits: _origin_reaches_boundary(
            graph, _roots_of_bits(graph, bits))
    if event == "spanning":
        return lambda bits: _spans_left_right(
            graph, _roots_of_bits(graph, bits))
    raise OracleError(f"unknown event {event!r} (use 'theta', 'spanning', "
                      "or a callable on the final field)")


def enumerate_event(graph: FiniteGraph, p: float, delta: float,
                    proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
                    event="theta") -> ExactResult:
    """Exact probability of an event of the final field Z.

    X-configurations are grouped by their survivor field; for each survivor
    mask the sum over enhancements runs over supersets only.  All terms are
    collected and added with exact (Shewchuk) summation.
    """
    n = graph.n
    if n > MAX_EVENT_VERTICES:
        raise OracleError(
            f"graph has {n} vertices; exact enumeration is capped at "
            f"{MAX_EVENT_VERTICES} (2^(2n) terms)")
    full = (1 << n) - 1
    p_pow, p_rev = _pow_tables(p, n)
    d_pow, d_rev = _pow_tables(delta, n)

    # group X-masks by survivor mask
    survivor_mass: dict[int, list] = {}
    for xmask in range(1 << n):
        k = bin(xmask).count("1")
        mass = p_pow[k] * p_rev[n - k]
        s = _mask_from_bits(_destroy_bits(graph, _bits_from_mask(xmask, n), proxy))
        survivor_mass.setdefault(s, []).append(mass)
    grouped = {s: math.fsum(terms) for s, terms in survivor_mass.items()}

    # event table over final-field masks
    fn = _event_fn(graph, event)
    etab = [bool(fn(_bits_from_mask(z, n))) for z in range(1 << n)]

    terms = []
    for s, gmass in grouped.items():
        free = full ^ s
        nfree = bin(free).count("1")
        t = free
        while True:
            z = s | t
            if etab[z]:
                kt = bin(t).count("1")
                terms.append(gmass * d_pow[kt] * d_rev[nfree - kt])
            if t == 0:
                break
            t = (t - 1) & free
    name = event if isinstance(event, str) else getattr(event, "__name__", "custom")
    return ExactResult(event=name, probability=math.fsum(terms),
                       config_count=1 << (2 * n), method="grouped")


# -- independent second route ------------------------------------------------

class _KahanSum:
    """Compensated accumulator."""

    __slots__ = ("total", "_c")

    def __init__(self):
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


def _dfs_components(adj: list, members: list) -> list:
    """Connected components of the induced subgraph on `members`."""
    member_set = set(members)
    seen = set()
    comps = []
    for s in members:
        if s in seen:
            continue
        stack = [s]
        seen.add(s)
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w in member_set and w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def enumerate_event_recursive(graph: FiniteGraph, p: float, delta: float,
                              proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
                              event="theta") -> ExactResult:
    """Second, independent enumeration: DFS clustering, recursive branching
    over enhancement outcomes, Kahan summation."""
    n = graph.n
    if n > MAX_RECURSIVE_VERTICES:
        raise OracleError(
            f"graph has {n} vertices; the recursive route is capped at "
            f"{MAX_RECURSIVE_VERTICES}")
    proxy = InfinityProxy(proxy)
    adj = [[int(w) for w in graph.neighbors(v)] for v in range(n)]
    sides = {s: set(map(int, ids)) for s, ids in graph.boundary.items()}
    boundary_all = set().union(*sides.values())
    origin = graph.origin

    def destroy_mask(xmask: int) -> int:
        members = [v for v in range(n) if (xmask >> v) & 1]
        keep = 0
        for comp in _dfs_components(adj, members):
            cs = set(comp)
            if proxy is InfinityProxy.SPANS_OPPOSITE:
                doomed = ((cs & sides["left"] and cs & sides["right"])
                          or (cs & sides["top"] and cs & sides["bottom"]))
            else:
                doomed = bool(cs & boundary_all)
            if not doomed:
                for v in comp:
                    keep |= 1 << v
        return keep

    if callable(event):
        def ev(zmask: int) -> bool:
            return bool(event(_bits_from_mask(zmask, n)))
        name = getattr(event, "__name__", "custom")
    elif event in ("theta", "spanning"):
        def ev(zmask: int) -> bool:
            occ = [v for v in range(n) if (zmask >> v) & 1]
            if event == "theta":
                starts, targets = {origin}, boundary_all
            else:
                starts, targets = sides["left"], sides["right"]
            starts = starts & set(occ)
            if not starts:
                return False
            for comp in _dfs_components(adj, occ):
                cs = set(comp)
                if cs & starts and cs & targets:
                    return True
            return False
        name = event
    else:
        raise OracleError(f"unknown event {event!r}")

    ev_memo: dict[int, bool] = {}

    def ev_cached(zmask: int) -> bool:
        if zmask not in ev_memo:
            ev_memo[zmask] = ev(zmask)
        return ev_memo[zmask]

    p_pow, p_rev = _pow_tables(p, n)
    acc = _KahanSum()
    for xmask in range(1 << n):
        k = bin(xmask).count("1")
        xmass = p_pow[k] * p_rev[n - k]
        smask = destroy_mask(xmask)
        free = [v for v in range(n) if not (smask >> v) & 1]

        def branch(i: int, zmask: int, ymass: float) -> None:
            if i == len(free):
                if ev_cached(zmask):
                    acc.add(xmass * ymass)
                return
            v = free[i]
            branch(i + 1, zmask | (1 << v), ymass * delta)
            branch(i + 1, zmask, ymass * (1.0 - delta))

        branch(0, smask, 1.0)
    return ExactResult(event=name, probability=acc.total,
                       config_count=1 << (2 * n), method="recursive")


# -- exact conditionals of the red coloring ----------------------------------

_table_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _popcounts(count: int) -> np.ndarray:
    v = np.arange(count, dtype=np.uint32)
    v = v - ((v >> 1) & 0x55555555)
    v = (v & 0x33333333) + ((v >> 2) & 0x33333333)
    return ((((v + (v >> 4)) & 0x0F0F0F0F) * 0x01010101) >> 24).astype(np.int64)


def _patch_tables(graph: FiniteGraph, v: int, p: float, delta: float) -> np.ndarray:
    """Joint mass over (red pattern of all vertices, Y value at v).

    Entry [(r_mask << 1) | y_v] is the exact probability that the
    neighbourhood red coloring equals r_mask and Y_v = y_v.  Capped at
    2^(2n) enumerable patches.
    """
    n = graph.n
    if n > MAX_EVENT_VERTICES:
        raise OracleError(
            f"patch has {n} vertices; conditional enumeration is capped at "
            f"{MAX_EVENT_VERTICES}")
    per_graph = _table_cache.setdefault(graph, {})
    key = (v, p, delta)
    if key in per_graph:
        return per_graph[key]

    nb_mask = []
    for u in range(n):
        m = 0
        for w in graph.neighbors(u):
            m |= 1 << int(w)
        nb_mask.append(m)

    count = 1 << n
    ymasks = np.arange(count, dtype=np.int64)
    pop = _popcounts(count)
    d_pow, d_rev = _pow_tables(delta, n)
    ymass = np.array(d_pow, dtype=np.float64)[pop] * \
        np.array(d_rev, dtype=np.float64)[n - pop]
    yv = (ymasks >> v) & 1

    p_pow, p_rev = _pow_tables(p, n)
    table = np.zeros(2 << n, dtype=np.float64)
    for xmask in range(count):
        k = bin(xmask).count("1")
        xmass = p_pow[k] * p_rev[n - k]
        r = np.zeros(count, dtype=np.int64)
        for u in range(n):
            if (xmask >> u) & 1:
                r |= ((ymasks & nb_mask[u]) == 0).astype(np.int64) << u
        np.add.at(table, (r << 1) | yv, xmass * ymass)
    per_graph[key] = table
    return table


def _pattern_select(table: np.ndarray, n: int, F, pattern) -> np.ndarray:
    """Mass table restricted to red patterns matching (F, pattern),
    reshaped to [r_mask, y_v]."""
    F = [int(u) for u in F]
    if len(F) != len(pattern):
        raise OracleError("pattern length does not match F")
    fmask = 0
    want = 0
    for u, r in zip(F, pattern):
        fmask |= 1 << u
        if r:
            want |= 1 << u
    r_masks = np.arange(1 << n, dtype=np.int64)
    match = (r_masks & fmask) == want
    t = table.reshape(-1, 2)
    return t[match]


def enumerate_conditional(graph: FiniteGraph, v: int, F, pattern,
                          p: float, delta: float) -> float:
    """Exact P(Y_v = 1 | red pattern on F) under the neighbourhood coloring.

    Raises ZeroProbabilityPattern when the conditioning event has zero
    probability (reported distinctly from a zero conditional).
    """
    v = int(v)
    if v in set(int(u) for u in F):
        raise OracleError("v must not belong to the conditioning set F")
    table = _patch_tables(graph, v, p, delta)
    sel = _pattern_select(table, graph.n, F, pattern)
    numerator = math.fsum(sel[:, 1].tolist())
    denominator = numerator + math.fsum(sel[:, 0].tolist())
    if denominator == 0.0:
        raise ZeroProbabilityPattern(
            f"pattern {tuple(pattern)} on F={list(F)} has probability zero")
    return numerator / denominator


def conditional_red_probability(graph: FiniteGraph, v: int, F, pattern,
                                p: float, delta: float) -> float:
    """Exact P(R_v = 1 | red pattern on F) under the neighbourhood
    coloring."""
    v = int(v)
    if v in set(int(u) for u in F):
        raise OracleError("v must not belong to the conditioning set F")
    table = _patch_tables(graph, v, p, delta)
    sel = _pattern_select(table, graph.n, F, pattern)
    r_masks = np.arange(1 << graph.n, dtype=np.int64)
    fmask = 0
    want = 0
    for u, r in zip([int(u) for u in F], pattern):
        fmask |= 1 << u
        if r:
            want |= 1 << u
    match = (r_masks & fmask) == want
    red_v = ((r_masks & (1 << v)) != 0)[match]
    total = math.fsum(sel.sum(axis=1).tolist())
    if total == 0.0:
        raise ZeroProbabilityPattern(
            f"pattern {tuple(pattern)} on F={list(F)} has probability zero")
    red_mass = math.fsum(sel[red_v].sum(axis=1).tolist())
    return red_mass / total
