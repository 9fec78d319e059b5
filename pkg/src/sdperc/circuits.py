"""Detection of circuits (cycles enclosing a centre point) in lattice
configurations.

A circuit here is a graph cycle, in either the primal or the matching
adjacency of a box, whose polygon has nonzero winding number around the box
origin.  Existence is decided exactly: within each connected component of the
searched vertex set, a spanning forest is labelled with integer "ray-crossing
levels" (signed crossings of the rightward ray from the centre), and a cycle
enclosing the centre exists if and only if some non-tree edge closes a level
defect.  The fundamental cycle of such an edge is itself a vertex-disjoint
cycle with that winding, so one is returned as a certificate.

All geometry is integer arithmetic on lattice coordinates; there is no
floating-point tolerance anywhere.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .clusters import Config, _check_config
from .lattice import Coord, FiniteGraph


class CircuitError(ValueError):
    """Malformed circuit or path handed to a circuits operation."""


def _is_left(ax, ay, bx, by, qx, qy) -> int:
    """Twice the signed area of (a, b, q): >0 when q is left of a->b."""
    return (bx - ax) * (qy - ay) - (qx - ax) * (by - ay)


def _cross_delta(ax, ay, bx, by, ox, oy) -> int:
    """Signed crossing of directed segment a->b over the rightward
    horizontal ray from (ox, oy).  Half-open rule at the endpoints, so a
    closed polygon's deltas sum to its winding number."""
    if ay <= oy:
        if by > oy and _is_left(ax, ay, bx, by, ox, oy) > 0:
            return 1
    else:
        if by <= oy and _is_left(ax, ay, bx, by, ox, oy) < 0:
            return -1
    return 0


def _on_segment(ax, ay, bx, by, qx, qy) -> bool:
    """q lies on the closed segment a-b (integer-exact)."""
    if _is_left(ax, ay, bx, by, qx, qy) != 0:
        return False
    return (min(ax, bx) <= qx <= max(ax, bx)
            and min(ay, by) <= qy <= max(ay, by))


def winding_number(polygon, point: Coord) -> int:
    """Winding number of a closed polygon (list of integer coords) around a
    point not on its boundary."""
    ox, oy = point
    w = 0
    for k in range(len(polygon)):
        ax, ay = polygon[k]
        bx, by = polygon[(k + 1) % len(polygon)]
        w += _cross_delta(ax, ay, bx, by, ox, oy)
    return w


@dataclass(eq=False)
class Circuit:
    """A cycle of distinct vertices winding around a centre point.

    ``vertex_ids`` are dense indices into the graph the circuit was found
    on; consecutive entries (cyclically) are adjacent in the declared
    adjacency ('primal' or 'matching').
    """

    vertex_ids: list
    coords: list
    adjacency: str
    winding: int
    center: Coord

    def __len__(self) -> int:
        return len(self.vertex_ids)

    def coord_rows(self):
        """Serializable ordered coordinate list."""
        return [(int(x), int(y)) for x, y in self.coords]

    def contains_point(self, q: Coord) -> str:
        """Classify a point as 'inside', 'outside', or 'boundary'."""
        qx, qy = int(q[0]), int(q[1])
        m = len(self.coords)
        for k in range(m):
            ax, ay = self.coords[k]
            bx, by = self.coords[(k + 1) % m]
            if _on_segment(ax, ay, bx, by, qx, qy):
                return "boundary"
        return "inside" if winding_number(self.coords, (qx, qy)) != 0 else "outside"


def _adjacency_of(graph: FiniteGraph, use_matching: bool):
    if use_matching:
        if graph.m_indptr is None:
            raise ValueError(f"{graph.kind.value} carries no matching adjacency")
        return graph.m_indptr, graph.m_indices
    return graph.indptr, graph.indices


def validate_circuit(graph: FiniteGraph, circuit: Circuit,
                     center: Coord | None = None) -> None:
    """Re-check the circuit type invariants; raise CircuitError on failure."""
    ids = circuit.vertex_ids
    if len(ids) < 3:
        raise CircuitError("a circuit needs at least 3 vertices")
    if len(set(ids)) != len(ids):
        raise CircuitError("circuit vertices are not distinct")
    indptr, indices = _adjacency_of(graph, circuit.adjacency == "matching")
    for k in range(len(ids)):
        a, b = ids[k], ids[(k + 1) % len(ids)]
        if b not in indices[indptr[a]:indptr[a + 1]]:
            raise CircuitError(
                f"consecutive circuit vertices {graph.coord_of(a)} and "
                f"{graph.coord_of(b)} are not adjacent in the "
                f"{circuit.adjacency} adjacency")
    c = center if center is not None else circuit.center
    coords = circuit.coords
    for k in range(len(coords)):
        ax, ay = coords[k]
        bx, by = coords[(k + 1) % len(coords)]
        if _on_segment(ax, ay, bx, by, c[0], c[1]):
            raise CircuitError("centre lies on the circuit boundary")
    if winding_number(coords, c) == 0:
        raise CircuitError("centre is not strictly inside the circuit")


def find_circuit(graph: FiniteGraph, config: Config, use_matching: bool = False,
                 state: str = "occupied", center: Coord | None = None,
                 mask: np.ndarray | None = None):
    """Find some circuit of `state` vertices around the centre, or None.

    The decision is exact: None means no such circuit exists among the
    vertices in the requested state (the centre vertex itself is excluded
    from circuit membership).  `mask`, when given, restricts the search to a
    vertex subset (uint8/bool array); state is still applied on top of it.
    """
    _check_config(graph, config)
    indptr, indices = _adjacency_of(graph, use_matching)
    if state == "occupied":
        sel = config.bits != 0
    elif state == "vacant":
        sel = config.bits == 0
    else:
        raise ValueError(f"state must be 'occupied' or 'vacant', got {state!r}")
    if mask is not None:
        sel = sel & (np.asarray(mask) != 0)
    if center is None:
        center = graph.origin_xy
    ox, oy = int(center[0]), int(center[1])
    if graph.has_vertex((ox, oy)):
        sel = sel.copy()
        sel[graph.index_of((ox, oy))] = False

    n = graph.n
    xs = graph.coords[:, 0]
    ys = graph.coords[:, 1]
    level = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)

    def delta(a: int, b: int) -> int:
        return _cross_delta(int(xs[a]), int(ys[a]), int(xs[b]), int(ys[b]), ox, oy)

    def through_center(a: int, b: int) -> bool:
        return _on_segment(int(xs[a]), int(ys[a]), int(xs[b]), int(ys[b]), ox, oy)

    # spanning forest with ray-crossing levels
    order = []
    for s in range(n):
        if not sel[s] or seen[s]:
            continue
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in indices[indptr[u]:indptr[u + 1]]:
                w = int(w)
                if not sel[w] or seen[w] or through_center(u, w):
                    continue
                seen[w] = True
                parent[w] = u
                level[w] = level[u] + delta(u, w)
                queue.append(w)

    # scan for a level defect; its fundamental cycle winds around the centre
    for u in order:
        for w in indices[indptr[u]:indptr[u + 1]]:
            w = int(w)
            if w <= u or not sel[w] or through_center(u, w):
                continue
            wind = level[u] + delta(u, w) - level[w]
            if wind != 0:
                ids = _fundamental_cycle(parent, u, w)
                circuit = Circuit(
                    vertex_ids=ids,
                    coords=[graph.coord_of(i) for i in ids],
                    adjacency="matching" if use_matching else "primal",
                    winding=winding_number([graph.coord_of(i) for i in ids],
                                           (ox, oy)),
                    center=(ox, oy))
                validate_circuit(graph, circuit)
                return circuit
    return None


def _fundamental_cycle(parent: np.ndarray, u: int, w: int) -> list:
    """Cycle formed by the tree paths u->lca, lca->w plus the edge w-u."""
    anc = {}
    a = u
    d = 0
    while a != -1:
        anc[a] = d
        a = int(parent[a])
        d += 1
    b = w
    w_path = []
    while b not in anc:
        w_path.append(b)
        b = int(parent[b])
    lca = b
    u_path = []
    a = u
    while a != lca:
        u_path.append(a)
        a = int(parent[a])
    # u -> ... -> lca -> ... -> w, closed by the defect edge w-u
    return u_path + [lca] + w_path[::-1]


def check_separation(graph: FiniteGraph, circuit: Circuit, path) -> bool:
    """True when a path crossing the circuit has a vertex adjacent to it.

    Preconditions (violations raise CircuitError, they do not return False):
    the path must be a sequence of graph-adjacent vertices starting strictly
    inside the circuit and ending strictly outside it.
    """
    path = [int(v) for v in path]
    if len(path) < 2:
        raise CircuitError("path needs at least a start and an end vertex")
    for a, b in zip(path, path[1:]):
        if b not in graph.neighbors(a):
            raise CircuitError(
                f"path vertices {graph.coord_of(a)} and {graph.coord_of(b)} "
                "are not adjacent")
    if circuit.contains_point(graph.coord_of(path[0])) != "inside":
        raise CircuitError("path must start strictly inside the circuit")
    if circuit.contains_point(graph.coord_of(path[-1])) != "outside":
        raise CircuitError("path must end strictly outside the circuit")

    on_circuit = set(circuit.vertex_ids)
    for v in path:
        if any(int(w) in on_circuit for w in graph.neighbors(v)):
            return True
    return False
