"""Occupancy configurations, cluster labelling, and the destruction step.

The model's destruction step deletes every vertex in an "infinite"
cluster.  On a finite box that notion needs a stand-in; two policies are
provided:

* ``spans`` (default): a cluster is treated as infinite when it joins the
  left and right box sides, or the top and bottom sides.
* ``touches``: a cluster is treated as infinite when it reaches any boundary
  vertex.

Every spans-infinite cluster is also touches-infinite, so ``touches``
destroys at least as much as ``spans``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._kernels import cluster_roots
from .lattice import FiniteGraph


class InfinityProxy(str, Enum):
    """Finite-volume stand-in for 'belongs to an infinite cluster'."""

    SPANS_OPPOSITE = "spans"
    TOUCHES_BOUNDARY = "touches"

    def __str__(self) -> str:
        return self.value


@dataclass(eq=False)
class Config:
    """A 0/1 field over the vertices of one specific box.

    Configs are only composable with configs living on the same graph
    object; the bitwise operators enforce that.
    """

    graph: FiniteGraph
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.shape != (self.graph.n,):
            raise ValueError(
                f"config length {self.bits.shape} does not match "
                f"graph with {self.graph.n} vertices")

    def _same_graph(self, other: "Config") -> None:
        if other.graph is not self.graph:
            raise ValueError("configs live on different graphs")

    def __or__(self, other: "Config") -> "Config":
        self._same_graph(other)
        return Config(self.graph, self.bits | other.bits)

    def __and__(self, other: "Config") -> "Config":
        self._same_graph(other)
        return Config(self.graph, self.bits & other.bits)

    def __invert__(self) -> "Config":
        return Config(self.graph, np.uint8(1) - self.bits)

    def occupied_count(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def filled(cls, graph: FiniteGraph, value: int) -> "Config":
        return cls(graph, np.full(graph.n, 1 if value else 0, dtype=np.uint8))


def _check_config(graph: FiniteGraph, config: Config) -> None:
    if config.graph is not graph:
        raise ValueError("config does not belong to this graph")


@dataclass(eq=False)
class ClusterLabels:
    """Union-find output: per-vertex cluster root plus per-cluster stats.

    ``roots[v]`` is the smallest vertex index of v's cluster for occupied v
    and -1 for vacant v.  Per-cluster arrays are aligned with the sorted
    ``cluster_roots``.
    """

    graph: FiniteGraph
    roots: np.ndarray
    cluster_roots: np.ndarray = field(init=False)
    sizes: np.ndarray = field(init=False)
    touches: dict = field(init=False)

    def __post_init__(self):
        occupied = self.roots >= 0
        uniq, inv = np.unique(self.roots[occupied], return_inverse=True)
        self.cluster_roots = uniq
        self.sizes = np.bincount(inv, minlength=len(uniq)).astype(np.int64)
        self.touches = {}
        for side, ids in self.graph.boundary.items():
            side_roots = self.roots[ids]
            side_roots = side_roots[side_roots >= 0]
            self.touches[side] = np.isin(uniq, side_roots)

    @property
    def num_clusters(self) -> int:
        return len(self.cluster_roots)

    def size_of(self, root: int) -> int:
        k = np.searchsorted(self.cluster_roots, root)
        if k >= len(self.cluster_roots) or self.cluster_roots[k] != root:
            raise KeyError(f"no cluster with root {root}")
        return int(self.sizes[k])

    def infinite_roots(self, proxy: InfinityProxy) -> np.ndarray:
        """Roots of the clusters the proxy declares infinite."""
        t = self.touches
        if InfinityProxy(proxy) is InfinityProxy.SPANS_OPPOSITE:
            mask = (t["left"] & t["right"]) | (t["top"] & t["bottom"])
        else:
            mask = t["left"] | t["right"] | t["top"] | t["bottom"]
        return self.cluster_roots[mask]

    def spans_left_right(self) -> bool:
        return bool(np.any(self.touches["left"] & self.touches["right"]))


# -- hot-path helpers on raw bit arrays -------------------------------------

def _roots_of_bits(graph: FiniteGraph, bits: np.ndarray) -> np.ndarray:
    return cluster_roots(graph.n, graph.edge_u, graph.edge_w, bits)


def _side_roots(roots: np.ndarray, ids: np.ndarray) -> np.ndarray:
    r = roots[ids]
    return np.unique(r[r >= 0])


def _infinite_roots_of(graph: FiniteGraph, roots: np.ndarray,
                       proxy: InfinityProxy) -> np.ndarray:
    b = graph.boundary
    if InfinityProxy(proxy) is InfinityProxy.SPANS_OPPOSITE:
        lr = np.intersect1d(_side_roots(roots, b["left"]),
                            _side_roots(roots, b["right"]))
        tb = np.intersect1d(_side_roots(roots, b["top"]),
                            _side_roots(roots, b["bottom"]))
        return np.union1d(lr, tb)
    return np.unique(np.concatenate(
        [_side_roots(roots, b[s]) for s in ("left", "right", "top", "bottom")]))


def _destroy_bits(graph: FiniteGraph, bits: np.ndarray,
                  proxy: InfinityProxy) -> np.ndarray:
    roots = _roots_of_bits(graph, bits)
    doomed = _infinite_roots_of(graph, roots, proxy)
    if doomed.size == 0:
        return bits
    out = bits.copy()
    for r in doomed:
        out[roots == r] = 0
    return out


def _spans_left_right(graph: FiniteGraph, roots: np.ndarray) -> bool:
    lr = np.intersect1d(_side_roots(roots, graph.boundary["left"]),
                        _side_roots(roots, graph.boundary["right"]))
    return lr.size > 0


def _origin_reaches_boundary(graph: FiniteGraph, roots: np.ndarray) -> bool:
    r = roots[graph.origin]
    if r < 0:
        return False
    return bool(np.isin(r, _side_roots(roots, graph.boundary_all)).item())


# -- public operations -------------------------------------------------------

def label_clusters(graph: FiniteGraph, config: Config) -> ClusterLabels:
    """Label the occupied clusters of a configuration.

    Union by size with path compression; per-cluster sizes and
    boundary-contact flags are exact.
    """
    _check_config(graph, config)
    return ClusterLabels(graph, _roots_of_bits(graph, config.bits))


def destroy(graph: FiniteGraph, X: Config,
            proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE) -> Config:
    """Remove every cluster the proxy declares infinite.

    Returns the survivor field: occupied exactly where X is occupied
    and X's cluster is not proxy-infinite.  All proxy-infinite clusters are
    removed, not just one.
    """
    _check_config(graph, X)
    return Config(graph, _destroy_bits(graph, X.bits, proxy))


def connects(graph: FiniteGraph, config: Config, from_ids, to_ids) -> bool:
    """True when an occupied path joins the two vertex sets.

    A single occupied vertex lying in both sets counts as a (zero-length)
    connecting path.
    """
    _check_config(graph, config)
    from_ids = np.asarray(list(from_ids), dtype=np.int64)
    to_ids = np.asarray(list(to_ids), dtype=np.int64)
    if from_ids.size == 0 or to_ids.size == 0:
        return False
    roots = _roots_of_bits(graph, config.bits)
    shared = np.intersect1d(_side_roots(roots, from_ids),
                            _side_roots(roots, to_ids))
    return shared.size > 0
