import math

import numpy as np
import pytest
from scipy import stats

from sdperc import (Config, LatticeKind, Params, build_box, lemma_constant,
                    red_neighborhood, red_shifted, sdp_sample,
                    verify_domination, verify_lemma_bound)
from sdperc.coloring import (neighborhood_circuit_blocking,
                             shifted_circuit_blocking)
from sdperc.oracle import OracleError


def test_red_shifted_trivial_fields():
    g = build_box(LatticeKind.CHESSBOARD, 4)
    ones, zeros = Config.filled(g, 1), Config.filled(g, 0)
    red = red_shifted(g, ones, zeros)
    # every vertex whose translate stays in the box is red, last column not
    for i in range(g.n):
        x, _ = g.coord_of(i)
        assert red.bits[i] == (1 if x < g.L - 1 else 0)
    assert red_shifted(g, ones, ones).bits.sum() == 0


def test_red_shifted_requires_chessboard():
    g = build_box(LatticeKind.SQUARE_SITE, 4)
    with pytest.raises(ValueError):
        red_shifted(g, Config.filled(g, 1), Config.filled(g, 0))


def test_red_shifted_exact_product_law():
    """Exact check on a 2x2 box: the joint law of the two reds with disjoint
    (vertex, translate) pairs factorises into p(1-delta) marginals."""
    g = build_box(LatticeKind.CHESSBOARD, 2)
    p, delta = 0.6, 0.25
    v1, v2 = g.index_of((0, 0)), g.index_of((0, 1))
    joint = {(a, b): 0.0 for a in (0, 1) for b in (0, 1)}
    for xm in range(1 << g.n):
        xbits = np.array([(xm >> i) & 1 for i in range(g.n)], np.uint8)
        px = p ** xbits.sum() * (1 - p) ** (g.n - xbits.sum())
        for ym in range(1 << g.n):
            ybits = np.array([(ym >> i) & 1 for i in range(g.n)], np.uint8)
            py = delta ** ybits.sum() * (1 - delta) ** (g.n - ybits.sum())
            red = red_shifted(g, Config(g, xbits), Config(g, ybits))
            joint[(int(red.bits[v1]), int(red.bits[v2]))] += px * py
    m = p * (1 - delta)
    for a in (0, 1):
        for b in (0, 1):
            want = (m if a else 1 - m) * (m if b else 1 - m)
            assert joint[(a, b)] == pytest.approx(want, abs=1e-12)


def test_red_shifted_three_way_factorisation():
    """Definition-level enumeration on a 3x3 box: the reds of the three
    disjoint (vertex, translate) pairs in the first column are exactly
    independent p(1-delta) bits."""
    g = build_box(LatticeKind.CHESSBOARD, 3)
    p, delta = 0.55, 0.3
    vs = [g.index_of((0, y)) for y in range(3)]
    shifts = [g.index_of((1, y)) for y in range(3)]
    joint = np.zeros((2, 2, 2))
    pops = np.array([bin(m).count("1") for m in range(1 << g.n)])
    xmass = p ** pops * (1 - p) ** (g.n - pops)
    ymass = delta ** pops * (1 - delta) ** (g.n - pops)
    # marginalise the enhancement over everything except the translates
    ybit_mass = np.zeros((2, 2, 2))
    for ym in range(1 << g.n):
        b = tuple((ym >> s) & 1 for s in shifts)
        ybit_mass[b] += ymass[ym]
    for xm in range(1 << g.n):
        xbit = [(xm >> v) & 1 for v in vs]
        for b0 in (0, 1):
            for b1 in (0, 1):
                for b2 in (0, 1):
                    r = (xbit[0] & (1 - b0), xbit[1] & (1 - b1),
                         xbit[2] & (1 - b2))
                    joint[r] += xmass[xm] * ybit_mass[b0, b1, b2]
    m = p * (1 - delta)
    for r0 in (0, 1):
        for r1 in (0, 1):
            for r2 in (0, 1):
                want = ((m if r0 else 1 - m) * (m if r1 else 1 - m)
                        * (m if r2 else 1 - m))
                assert joint[r0, r1, r2] == pytest.approx(want, abs=1e-12)


def test_red_shifted_sampled_marginal_and_independence():
    g = build_box(LatticeKind.CHESSBOARD, 8)
    p, delta = 0.6, 0.2
    trials = 100_000
    rng = np.random.default_rng(123)
    v1, v2 = g.index_of((2, 2)), g.index_of((4, 5))
    counts = np.zeros((2, 2))
    hits = 0
    xs = rng.random((trials, g.n)) < p
    ys = rng.random((trials, g.n)) < delta
    shift = g.shift_map()
    for t in range(trials):
        red1 = xs[t, v1] and not ys[t, shift[v1]]
        red2 = xs[t, v2] and not ys[t, shift[v2]]
        hits += red1
        counts[int(red1), int(red2)] += 1
    m = p * (1 - delta)
    sigma = math.sqrt(m * (1 - m) / trials)
    assert abs(hits / trials - m) < 4 * sigma
    expected = np.array([[(1 - m) * (1 - m), (1 - m) * m],
                         [m * (1 - m), m * m]]) * trials
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < stats.chi2.ppf(1 - 1e-6, df=3)


def test_red_neighborhood_trivial_fields():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 5)
    ones, zeros = Config.filled(g, 1), Config.filled(g, 0)
    assert np.array_equal(red_neighborhood(g, ones, zeros).bits, ones.bits)
    assert red_neighborhood(g, zeros, ones).bits.sum() == 0
    assert red_neighborhood(g, zeros, zeros).bits.sum() == 0


def test_red_neighborhood_pointwise_definition():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 6)
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = (rng.random(g.n) < 0.6).astype(np.uint8)
        y = (rng.random(g.n) < 0.2).astype(np.uint8)
        red = red_neighborhood(g, Config(g, x), Config(g, y)).bits
        for v in range(g.n):
            want = x[v] and not any(y[int(u)] for u in g.neighbors(v))
            assert red[v] == want
        assert np.all(red <= x)


def test_red_neighborhood_interior_marginal():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 8)
    p, delta = 0.6, 0.1
    trials = 100_000
    rng = np.random.default_rng(77)
    v = g.origin
    nbrs = [int(u) for u in g.neighbors(v)]
    assert len(nbrs) == 8
    xs = rng.random(trials) < p
    ys = rng.random((trials, len(nbrs))) < delta
    hits = np.sum(xs & ~ys.any(axis=1))
    m = p * (1 - delta) ** 8
    sigma = math.sqrt(m * (1 - m) / trials)
    assert abs(hits / trials - m) < 4 * sigma


def test_red_clusters_live_inside_destroyed_x_clusters():
    """Every red vertex of a proxy-infinite red cluster belongs to a
    proxy-infinite cluster of X."""
    from sdperc.clusters import _infinite_roots_of, _roots_of_bits

    g = build_box(LatticeKind.STAR_SQUARE_SITE, 24)
    found = 0
    for t in range(40):
        s = sdp_sample(g, Params(0.62, 0.03, 55, 1), trial_index=t)
        red = red_neighborhood(g, s.X, s.Y)
        red_roots = _roots_of_bits(g, red.bits)
        inf_red = _infinite_roots_of(g, red_roots, "spans")
        if inf_red.size == 0:
            continue
        found += 1
        x_roots = _roots_of_bits(g, s.X.bits)
        inf_x = set(_infinite_roots_of(g, x_roots, "spans").tolist())
        members = np.isin(red_roots, inf_red)
        assert all(int(x_roots[v]) in inf_x for v in np.flatnonzero(members))
    assert found > 5


def test_lemma_constant_values():
    assert lemma_constant(1.0, 0.3, 8).c_epsilon == pytest.approx(1 / 0.7)
    assert lemma_constant(0.5, 0.5, 8).c_epsilon == pytest.approx(512.0)
    assert lemma_constant(0.5, 0.4073, 8).c_epsilon == pytest.approx(
        1.0 / ((1 - 0.4073) * 0.5 ** 8))
    with pytest.raises(ValueError):
        lemma_constant(0.0, 0.5, 8)
    with pytest.raises(ValueError):
        lemma_constant(0.5, 1.0, 8)


def test_verify_lemma_bound_small_patch():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 3)
    rep = verify_lemma_bound(g, g.origin, p=0.55, delta=0.05, epsilon=0.2,
                             p_c_value=0.41, max_f_size=2)
    assert rep.all_ok
    assert 0 < rep.max_ratio < 1
    red_rows = [r for r in rep.rows if any(r.pattern)]
    assert red_rows and all(r.value == 0.0 for r in red_rows)


def test_verify_lemma_bound_rejects_out_of_hypothesis():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 3)
    with pytest.raises(ValueError):
        verify_lemma_bound(g, g.origin, p=0.9, delta=0.05, epsilon=0.2,
                           p_c_value=0.41)
    with pytest.raises(ValueError):
        verify_lemma_bound(g, g.origin, p=0.55, delta=0.5, epsilon=0.2,
                           p_c_value=0.41)


def test_verify_lemma_bound_rejects_oversized_patch():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 4)
    with pytest.raises(OracleError):
        verify_lemma_bound(g, g.origin, p=0.55, delta=0.05, epsilon=0.2,
                           p_c_value=0.41, max_f_size=1)


def test_verify_domination_zero_delta_degenerates_to_p():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 3)
    rep = verify_domination(g, g.origin, p=0.55, delta=0.0, epsilon=0.2,
                            p_c_value=0.41, max_f_size=1)
    for row in rep.patch.rows:
        assert row.value == pytest.approx(0.55, abs=1e-12)
        assert row.bound == pytest.approx(0.55, abs=1e-15)


def test_verify_domination_requires_supercritical_target():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 3)
    with pytest.raises(ValueError):
        verify_domination(g, g.origin, p=0.55, delta=0.01, epsilon=0.2,
                          p_c_value=0.41)
    rep = verify_domination(g, g.origin, p=0.55, delta=0.01, epsilon=0.2,
                            p_c_value=0.41, allow_subcritical=True,
                            max_f_size=1)
    assert rep.patch.rows


def test_shifted_blocking_chain_small():
    g = build_box(LatticeKind.CHESSBOARD, 24)
    found = 0
    for t in range(60):
        s = sdp_sample(g, Params(0.62, 0.05, 99, 1), trial_index=t)
        chk = shifted_circuit_blocking(g, s.X, s.Y, s.Z)
        if chk.found and not chk.clipped:
            found += 1
            assert chk.violations == 0
    assert found > 10


def test_neighborhood_blocking_chain_small():
    g = build_box(LatticeKind.STAR_SQUARE_SITE, 20)
    found = 0
    for t in range(120):
        s = sdp_sample(g, Params(0.62, 0.04, 101, 1), trial_index=t)
        chk = neighborhood_circuit_blocking(g, s.X, s.Y, s.Z)
        if chk.found:
            found += 1
            assert chk.violations == 0
    assert found > 5
