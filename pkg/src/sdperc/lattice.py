"""Finite boxes of the 2D lattices used by the self-destructive percolation tools.

Seven lattice kinds are supported, all living on integer coordinates:

==================== =========================================================
CLI name             construction
==================== =========================================================
square-site          Z^2 with nearest-neighbour edges
square-bond          chess-board lattice: the covering graph of square bond
                     percolation (nearest-neighbour edges plus one diagonal
                     per vertex, direction chosen by the parity of x+y)
triangular-site      triangular lattice in axial coordinates
                     (neighbours (+-1,0), (0,+-1), (1,-1), (-1,1))
triangular-bond      covering graph of triangular bond percolation: one site
                     per triangular edge, sites adjacent when the edges share
                     an endpoint
star-square-site     square lattice plus both diagonals of every unit face
                     (the matching lattice of square-site)
honeycomb-site       hexagonal lattice in a brick-wall embedding: horizontal
                     edges everywhere, vertical edge (x,y)-(x,y+1) when x+y
                     is even
star-honeycomb-site  matching lattice of honeycomb-site: every hexagonal
                     face completed to a clique
==================== =========================================================

Boxes are open (no wraparound): coordinates range over [0, L) x [0, L) for the
site lattices, and edges are clipped to the box.  The covering lattice of the
triangular bond model stores its sites at doubled edge-midpoint coordinates,
so its box is sparse in [0, 2L-1) x [0, 2L-1).

A `FiniteGraph` is immutable after construction and safe to share between
worker threads.
"""

from __future__ import annotations

import functools
from enum import Enum

import numpy as np

Coord = tuple[int, int]

#: translation that carries the chess-board lattice onto its matching lattice
MATCHING_SHIFT = (1, 0)


class LatticeKind(str, Enum):
    SQUARE_SITE = "square-site"
    CHESSBOARD = "square-bond"
    TRIANGULAR_SITE = "triangular-site"
    TRIANGULAR_BOND_COVERING = "triangular-bond"
    STAR_SQUARE_SITE = "star-square-site"
    HONEYCOMB_SITE = "honeycomb-site"
    STAR_HONEYCOMB_SITE = "star-honeycomb-site"

    def __str__(self) -> str:  # CSV-friendly
        return self.value


#: matching-lattice partners; kinds missing here have no partner in the menu
_MATCHING_PARTNER = {
    LatticeKind.SQUARE_SITE: LatticeKind.STAR_SQUARE_SITE,
    LatticeKind.STAR_SQUARE_SITE: LatticeKind.SQUARE_SITE,
    LatticeKind.TRIANGULAR_SITE: LatticeKind.TRIANGULAR_SITE,
    LatticeKind.HONEYCOMB_SITE: LatticeKind.STAR_HONEYCOMB_SITE,
    LatticeKind.STAR_HONEYCOMB_SITE: LatticeKind.HONEYCOMB_SITE,
}


def matching_of(kind: LatticeKind) -> LatticeKind:
    """Return the matching lattice of `kind`.

    The triangular lattice is self-matching; the square and honeycomb
    lattices pair with their star lattices (and vice versa, matching being an
    involution).  The two covering lattices have no matching partner in the
    implemented menu and raise instead of silently substituting one.
    """
    kind = LatticeKind(kind)
    try:
        return _MATCHING_PARTNER[kind]
    except KeyError:
        raise ValueError(
            f"{kind.value} has no matching lattice in the implemented menu"
        ) from None


def matching_shift(v: Coord) -> Coord:
    """Translate a vertex by (1, 0).

    This is the shift that maps the chess-board lattice onto its matching
    lattice; applied to every vertex of a circuit it yields the translated
    circuit.  Callers are responsible for clipping when the image leaves the
    box.
    """
    return (v[0] + MATCHING_SHIFT[0], v[1] + MATCHING_SHIFT[1])


class FiniteGraph:
    """An explicit finite box of a 2D lattice.

    Attributes
    ----------
    kind : LatticeKind
    L : int
        Side length of the box.
    n : int
        Number of vertices.
    coords : (n, 2) int64 array
        Integer coordinates per dense vertex index.
    indptr, indices : CSR adjacency (sorted neighbour lists).
    m_indptr, m_indices : CSR matching adjacency, or None when the kind has
        no matching adjacency overlay.
    edge_u, edge_w : int64 arrays
        Each undirected edge once, with edge_u < edge_w.
    boundary : dict with keys 'left', 'right', 'bottom', 'top'
        Sorted vertex-index arrays of the four directional boundaries.
    origin : int
        Dense index of the vertex at (or nearest) the box centre.
    degree : int
        Bulk vertex degree (maximum of |neighbourhood| over the box).
    """

    def __init__(self, kind, L, coords, indptr, indices, m_indptr, m_indices,
                 edge_u, edge_w, boundary, origin):
        self.kind = kind
        self.L = L
        self.coords = coords
        self.n = len(coords)
        self._index = {(int(x), int(y)): i for i, (x, y) in enumerate(coords)}
        self.indptr = indptr
        self.indices = indices
        self.m_indptr = m_indptr
        self.m_indices = m_indices
        self.edge_u = edge_u
        self.edge_w = edge_w
        self.boundary = boundary
        self.origin = origin
        self.degree = int(np.max(np.diff(indptr))) if self.n else 0
        self._boundary_all = np.unique(np.concatenate(
            [boundary[s] for s in ("left", "right", "bottom", "top")]))
        self._shift_map = None
        self._sparse = None
        self._m_edges = None

    # -- vertex id <-> coordinate -----------------------------------------

    def index_of(self, xy: Coord) -> int:
        return self._index[(int(xy[0]), int(xy[1]))]

    def has_vertex(self, xy: Coord) -> bool:
        return (int(xy[0]), int(xy[1])) in self._index

    def coord_of(self, i: int) -> Coord:
        x, y = self.coords[i]
        return (int(x), int(y))

    @property
    def origin_xy(self) -> Coord:
        return self.coord_of(self.origin)

    # -- adjacency ---------------------------------------------------------

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def has_matching(self) -> bool:
        return self.m_indptr is not None

    def matching_neighbors(self, i: int) -> np.ndarray:
        if self.m_indptr is None:
            raise ValueError(f"{self.kind.value} carries no matching adjacency")
        return self.m_indices[self.m_indptr[i]:self.m_indptr[i + 1]]

    def matching_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Undirected matching-adjacency edge list (u < w), derived lazily."""
        if self.m_indptr is None:
            raise ValueError(f"{self.kind.value} carries no matching adjacency")
        if self._m_edges is None:
            u = np.repeat(np.arange(self.n), np.diff(self.m_indptr))
            w = self.m_indices
            keep = u < w
            self._m_edges = (np.ascontiguousarray(u[keep]),
                             np.ascontiguousarray(w[keep]))
        return self._m_edges

    @property
    def boundary_all(self) -> np.ndarray:
        return self._boundary_all

    def shift_map(self) -> np.ndarray:
        """Index of vertex at coord+(1,0) per vertex, -1 where the image
        leaves the box."""
        if self._shift_map is None:
            out = np.full(self.n, -1, dtype=np.int64)
            for i in range(self.n):
                x, y = self.coords[i]
                j = self._index.get((int(x) + 1, int(y)))
                if j is not None:
                    out[i] = j
            self._shift_map = out
        return self._shift_map

    def sparse_adjacency(self):
        """scipy CSR adjacency with unit weights (cached)."""
        if self._sparse is None:
            from scipy.sparse import csr_matrix
            data = np.ones(len(self.indices), dtype=np.uint8)
            self._sparse = csr_matrix(
                (data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._sparse

    def __repr__(self) -> str:
        return (f"FiniteGraph({self.kind.value}, L={self.L}, n={self.n}, "
                f"degree={self.degree})")


def neighborhood_union(graph: FiniteGraph, vertices) -> np.ndarray:
    """Union of the neighbourhoods of `vertices` (sorted index array).

    Members of the input set appear in the result only when they neighbour
    another member.
    """
    vertices = np.asarray(list(vertices), dtype=np.int64)
    if vertices.size == 0:
        return np.empty(0, dtype=np.int64)
    parts = [graph.neighbors(int(v)) for v in vertices]
    return np.unique(np.concatenate(parts))


# -- edge generation -------------------------------------------------------

def _site_edges(kind: LatticeKind, L: int):
    """Coordinate-pair edge set of a site lattice clipped to [0,L)^2."""
    edges = set()

    def add(a, b):
        if 0 <= b[0] < L and 0 <= b[1] < L:
            edges.add((a, b) if a < b else (b, a))

    for x in range(L):
        for y in range(L):
            v = (x, y)
            if kind is LatticeKind.SQUARE_SITE:
                offs = ((1, 0), (0, 1))
            elif kind is LatticeKind.STAR_SQUARE_SITE:
                offs = ((1, 0), (0, 1), (1, 1), (1, -1))
            elif kind is LatticeKind.TRIANGULAR_SITE:
                offs = ((1, 0), (0, 1), (1, -1))
            elif kind is LatticeKind.CHESSBOARD:
                offs = ((1, 0), (0, 1), (1, 1) if (x + y) % 2 == 0 else (1, -1))
            elif kind is LatticeKind.HONEYCOMB_SITE:
                offs = ((1, 0), (0, 1)) if (x + y) % 2 == 0 else ((1, 0),)
            else:
                raise ValueError(f"not a plain site lattice: {kind}")
            for dx, dy in offs:
                add(v, (x + dx, y + dy))
    return edges


def _star_honeycomb_edges(L: int):
    """Honeycomb edges plus the clique completion of every hexagonal face.

    In the brick-wall embedding a face is anchored at (ax, ay) with ax+ay
    even and covers columns ax..ax+2 of rows ay and ay+1.  Anchors outside
    the box are included so that every edge of the infinite lattice with
    both endpoints inside the box survives the clipping.
    """
    edges = _site_edges(LatticeKind.HONEYCOMB_SITE, L)
    for ax in range(-2, L):
        for ay in range(-1, L):
            if (ax + ay) % 2 != 0:
                continue
            face = [(ax + dx, ay + dy) for dy in (0, 1) for dx in (0, 1, 2)]
            face = [v for v in face if 0 <= v[0] < L and 0 <= v[1] < L]
            for i in range(len(face)):
                for j in range(i + 1, len(face)):
                    a, b = face[i], face[j]
                    edges.add((a, b) if a < b else (b, a))
    return edges


#: the three forward edge directions of the triangular lattice
_TRI_DIRS = ((1, 0), (0, 1), (1, -1))


def _tri_covering(L: int):
    """Vertices and edges of the covering graph of triangular bond
    percolation on an L x L primal box.

    Each covering site is a primal edge, stored at its doubled midpoint
    (2x+dx, 2y+dy); two sites are adjacent when the edges share a primal
    endpoint.  Returns (site coords, edge set, per-side boundary coord sets).
    """
    def in_box(v):
        return 0 <= v[0] < L and 0 <= v[1] < L

    site_of = {}   # (primal v, dir k) -> doubled coord
    sites = []
    for x in range(L):
        for y in range(L):
            for k, (dx, dy) in enumerate(_TRI_DIRS):
                if in_box((x + dx, y + dy)):
                    c = (2 * x + dx, 2 * y + dy)
                    site_of[(x, y, k)] = c
                    sites.append(c)

    def incident(x, y):
        """Covering sites of the edges meeting primal vertex (x, y)."""
        out = []
        for k, (dx, dy) in enumerate(_TRI_DIRS):
            c = site_of.get((x, y, k))
            if c is not None:
                out.append(c)
            c = site_of.get((x - dx, y - dy, k))
            if c is not None:
                out.append(c)
        return out

    edges = set()
    sides = {"left": set(), "right": set(), "bottom": set(), "top": set()}
    for x in range(L):
        for y in range(L):
            inc = incident(x, y)
            for i in range(len(inc)):
                for j in range(i + 1, len(inc)):
                    a, b = inc[i], inc[j]
                    edges.add((a, b) if a < b else (b, a))
            # an edge belongs to a side when one endpoint lies on it
            if x == 0:
                sides["left"].update(inc)
            if x == L - 1:
                sides["right"].update(inc)
            if y == 0:
                sides["bottom"].update(inc)
            if y == L - 1:
                sides["top"].update(inc)
    return sites, edges, sides


def _edges_to_csr(n, index, edges):
    """Sorted CSR plus a u<w edge list from a set of coordinate pairs."""
    nbrs = [[] for _ in range(n)]
    eu, ew = [], []
    for a, b in sorted(edges):
        i, j = index[a], index[b]
        nbrs[i].append(j)
        nbrs[j].append(i)
        eu.append(min(i, j))
        ew.append(max(i, j))
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, lst in enumerate(nbrs):
        indptr[i + 1] = indptr[i] + len(lst)
    indices = np.empty(indptr[-1], dtype=np.int64)
    for i, lst in enumerate(nbrs):
        indices[indptr[i]:indptr[i + 1]] = sorted(lst)
    return indptr, indices, np.asarray(eu, dtype=np.int64), np.asarray(ew, dtype=np.int64)


def _matching_overlay_edges(kind: LatticeKind, L: int, edges):
    """Matching-adjacency edge set on the same vertex box, or None."""
    if kind is LatticeKind.SQUARE_SITE:
        return _site_edges(LatticeKind.STAR_SQUARE_SITE, L)
    if kind is LatticeKind.STAR_SQUARE_SITE:
        return _site_edges(LatticeKind.SQUARE_SITE, L)
    if kind is LatticeKind.TRIANGULAR_SITE:
        return set(edges)
    if kind is LatticeKind.HONEYCOMB_SITE:
        return _star_honeycomb_edges(L)
    if kind is LatticeKind.STAR_HONEYCOMB_SITE:
        return _site_edges(LatticeKind.HONEYCOMB_SITE, L)
    if kind is LatticeKind.CHESSBOARD:
        # the chess-board lattice translated by (1,0) IS its matching lattice
        out = set()
        for a, b in edges:
            a2 = (a[0] + 1, a[1])
            b2 = (b[0] + 1, b[1])
            if a2[0] < L and b2[0] < L:
                out.add((a2, b2) if a2 < b2 else (b2, a2))
        return out
    return None


@functools.lru_cache(maxsize=64)
def build_box(kind: LatticeKind, L: int) -> FiniteGraph:
    """Construct the L x L box of a lattice kind.

    Deterministic: identical arguments yield an identical (cached) graph.
    Rejects L < 1, unknown kinds, and L < 2 for the triangular-bond covering
    lattice (a single primal vertex carries no edges, hence no sites).
    """
    kind = LatticeKind(kind)
    if L < 1:
        raise ValueError(f"box side must be >= 1, got {L}")

    if kind is LatticeKind.TRIANGULAR_BOND_COVERING:
        if L < 2:
            raise ValueError(
                "triangular-bond covering boxes need L >= 2 (an L=1 primal "
                "box has no edges, so the covering graph is empty)")
        coords_list, edges, sides = _tri_covering(L)
        coords_list.sort()
        coords = np.asarray(coords_list, dtype=np.int64)
        index = {tuple(map(int, c)): i for i, c in enumerate(coords_list)}
        indptr, indices, eu, ew = _edges_to_csr(len(coords_list), index, edges)
        boundary = {
            s: np.asarray(sorted(index[c] for c in cs), dtype=np.int64)
            for s, cs in sides.items()
        }
        # site nearest the doubled-box centre
        centre = np.array([L - 1, L - 1])
        d2 = ((coords - centre) ** 2).sum(axis=1)
        origin = int(np.argmin(d2))
        return FiniteGraph(kind, L, coords, indptr, indices, None, None,
                           eu, ew, boundary, origin)

    if kind is LatticeKind.STAR_HONEYCOMB_SITE:
        edges = _star_honeycomb_edges(L)
    else:
        edges = _site_edges(kind, L)

    coords_list = [(x, y) for x in range(L) for y in range(L)]
    coords = np.asarray(coords_list, dtype=np.int64)
    index = {c: i for i, c in enumerate(coords_list)}
    indptr, indices, eu, ew = _edges_to_csr(L * L, index, edges)

    m_edges = _matching_overlay_edges(kind, L, edges)
    if m_edges is None:
        m_indptr = m_indices = None
    else:
        m_indptr, m_indices, _, _ = _edges_to_csr(L * L, index, m_edges)

    boundary = {
        "left": np.asarray(sorted(index[(0, y)] for y in range(L)), dtype=np.int64),
        "right": np.asarray(sorted(index[(L - 1, y)] for y in range(L)), dtype=np.int64),
        "bottom": np.asarray(sorted(index[(x, 0)] for x in range(L)), dtype=np.int64),
        "top": np.asarray(sorted(index[(x, L - 1)] for x in range(L)), dtype=np.int64),
    }
    origin = index[(L // 2, L // 2)]
    return FiniteGraph(kind, L, coords, indptr, indices, m_indptr, m_indices,
                       eu, ew, boundary, origin)
