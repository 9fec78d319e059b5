import numpy as np
import pytest

from conftest import ALL_KINDS
from sdperc import (LatticeKind, build_box, matching_of, matching_shift,
                    neighborhood_union)

BULK_DEGREE = {
    LatticeKind.SQUARE_SITE: 4,
    LatticeKind.CHESSBOARD: 6,
    LatticeKind.TRIANGULAR_SITE: 6,
    LatticeKind.TRIANGULAR_BOND_COVERING: 10,
    LatticeKind.STAR_SQUARE_SITE: 8,
    LatticeKind.HONEYCOMB_SITE: 3,
    LatticeKind.STAR_HONEYCOMB_SITE: 12,
}


def edge_set(graph, matching=False):
    out = set()
    for i in range(graph.n):
        nbrs = graph.matching_neighbors(i) if matching else graph.neighbors(i)
        for j in nbrs:
            out.add((min(i, int(j)), max(i, int(j))))
    return out


def test_single_vertex_box():
    g = build_box(LatticeKind.SQUARE_SITE, 1)
    assert g.n == 1
    assert len(g.edge_u) == 0
    assert g.origin == 0


def test_chessboard_2x2_edges():
    g = build_box(LatticeKind.CHESSBOARD, 2)
    assert g.n == 4
    named = {tuple(sorted((g.coord_of(int(u)), g.coord_of(int(w)))))
             for u, w in zip(g.edge_u, g.edge_w)}
    assert named == {
        ((0, 0), (0, 1)), ((0, 0), (1, 0)), ((0, 1), (1, 1)),
        ((1, 0), (1, 1)),
        ((0, 0), (1, 1)),   # x+y even: +(1,1) diagonal
        ((0, 1), (1, 0)),   # x+y odd: +(1,-1) diagonal
    }


def test_star_square_interior_degree_is_8():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 3)
    assert len(g.neighbors(g.index_of((1, 1)))) == 8


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_bulk_degree(kind):
    g = build_box(kind, 8)
    assert g.degree == BULK_DEGREE[kind]
    # the bulk value is attained away from the boundary, not only once
    counts = np.diff(g.indptr)
    assert np.count_nonzero(counts == g.degree) > g.n // 4


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("L", [2, 3, 4, 7, 16])
def test_adjacency_symmetric_no_loops_no_dups(kind, L):
    if kind is LatticeKind.TRIANGULAR_BOND_COVERING and L < 2:
        return
    g = build_box(kind, L)
    for i in range(g.n):
        nbrs = [int(j) for j in g.neighbors(i)]
        assert i not in nbrs
        assert len(nbrs) == len(set(nbrs))
        for j in nbrs:
            assert i in g.neighbors(j)


def test_chessboard_diagonal_rule_by_parity():
    g = build_box(LatticeKind.CHESSBOARD, 8)
    for i in range(g.n):
        x, y = g.coord_of(i)
        diag = [(int(g.coords[j, 0]) - x, int(g.coords[j, 1]) - y)
                for j in g.neighbors(i)
                if abs(int(g.coords[j, 0]) - x) + abs(int(g.coords[j, 1]) - y) == 2]
        assert len(g.neighbors(i)) <= 6
        want = {(1, 1), (-1, -1)} if (x + y) % 2 == 0 else {(1, -1), (-1, 1)}
        assert set(diag) <= want


@pytest.mark.parametrize("L", [2, 3, 5, 16])
def test_star_contains_square_as_subgraph(L):
    sq = build_box(LatticeKind.SQUARE_SITE, L)
    star = build_box(LatticeKind.STAR_SQUARE_SITE, L)
    assert edge_set(sq) <= edge_set(star)


def test_honeycomb_contained_in_its_star():
    h = build_box(LatticeKind.HONEYCOMB_SITE, 6)
    s = build_box(LatticeKind.STAR_HONEYCOMB_SITE, 6)
    assert edge_set(h) <= edge_set(s)


def test_chessboard_not_subgraph_of_matching():
    g = build_box(LatticeKind.CHESSBOARD, 6)
    assert not edge_set(g) <= edge_set(g, matching=True)


def test_chessboard_matching_is_translated_adjacency():
    g = build_box(LatticeKind.CHESSBOARD, 6)
    translated = set()
    for u, w in zip(g.edge_u, g.edge_w):
        a = matching_shift(g.coord_of(int(u)))
        b = matching_shift(g.coord_of(int(w)))
        if g.has_vertex(a) and g.has_vertex(b):
            i, j = g.index_of(a), g.index_of(b)
            translated.add((min(i, j), max(i, j)))
    assert translated == edge_set(g, matching=True)


def test_matching_of_menu():
    assert matching_of(LatticeKind.TRIANGULAR_SITE) is LatticeKind.TRIANGULAR_SITE
    assert matching_of(LatticeKind.SQUARE_SITE) is LatticeKind.STAR_SQUARE_SITE
    assert matching_of(LatticeKind.STAR_HONEYCOMB_SITE) is LatticeKind.HONEYCOMB_SITE
    for kind in (LatticeKind.SQUARE_SITE, LatticeKind.STAR_SQUARE_SITE,
                 LatticeKind.TRIANGULAR_SITE, LatticeKind.HONEYCOMB_SITE,
                 LatticeKind.STAR_HONEYCOMB_SITE):
        assert matching_of(matching_of(kind)) is kind
    for kind in (LatticeKind.CHESSBOARD, LatticeKind.TRIANGULAR_BOND_COVERING):
        with pytest.raises(ValueError):
            matching_of(kind)


def test_matching_shift_examples():
    assert matching_shift((0, 0)) == (1, 0)
    assert matching_shift((-1, 5)) == (0, 5)


def test_neighborhood_union():
    g = build_box(LatticeKind.SQUARE_SITE, 5)
    assert neighborhood_union(g, []).size == 0

    star = build_box(LatticeKind.STAR_SQUARE_SITE, 5)
    v = star.index_of((2, 2))
    assert len(neighborhood_union(star, [v])) == 8

    # two adjacent square vertices: 8 distinct neighbours including the pair
    # itself (each member neighbours the other), 6 outside the pair
    a, b = g.index_of((2, 2)), g.index_of((3, 2))
    union = neighborhood_union(g, [a, b])
    assert len(union) == 8
    assert a in union and b in union
    assert len(set(union) - {a, b}) == 6


def test_covering_lattice_shape():
    for L in (2, 4, 8):
        g = build_box(LatticeKind.TRIANGULAR_BOND_COVERING, L)
        assert g.n == (L - 1) * (3 * L - 1)


def test_covering_boundary_sites_touch_their_side():
    g = build_box(LatticeKind.TRIANGULAR_BOND_COVERING, 5)
    L = 5
    # decode a doubled midpoint back to its primal endpoints
    def endpoints(c):
        x, y = int(c[0]), int(c[1])
        if x % 2 == 1 and y % 2 == 0:
            return ((x - 1) // 2, y // 2), ((x + 1) // 2, y // 2)
        if x % 2 == 0 and y % 2 == 1:
            return (x // 2, (y - 1) // 2), (x // 2, (y + 1) // 2)
        return ((x - 1) // 2, (y + 1) // 2), ((x + 1) // 2, (y - 1) // 2)

    for side, coord, val in (("left", 0, 0), ("right", 0, L - 1),
                             ("bottom", 1, 0), ("top", 1, L - 1)):
        ids = set(map(int, g.boundary[side]))
        for i in range(g.n):
            a, b = endpoints(g.coords[i])
            touches = a[coord] == val or b[coord] == val
            assert (i in ids) == touches


def test_build_box_rejections():
    with pytest.raises(ValueError):
        build_box(LatticeKind.SQUARE_SITE, 0)
    with pytest.raises(ValueError):
        build_box(LatticeKind.TRIANGULAR_BOND_COVERING, 1)
    with pytest.raises(ValueError):
        build_box("no-such-lattice", 4)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_coordinate_index_roundtrip(kind):
    g = build_box(kind, 5)
    for i in range(g.n):
        assert g.index_of(g.coord_of(i)) == i


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_origin_is_centred(kind):
    g = build_box(kind, 9)
    if kind is LatticeKind.TRIANGULAR_BOND_COVERING:
        x, y = g.origin_xy
        assert abs(x - 8) + abs(y - 8) <= 2   # nearest site to doubled centre
    else:
        assert g.origin_xy == (4, 4)


def test_build_is_deterministic():
    a = build_box.__wrapped__(LatticeKind.STAR_HONEYCOMB_SITE, 6)
    b = build_box.__wrapped__(LatticeKind.STAR_HONEYCOMB_SITE, 6)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.indptr, b.indptr)
    assert np.array_equal(a.coords, b.coords)
