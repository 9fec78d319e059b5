"""Red colorings and the exact conditional bounds behind the delta_c lower
bounds.

Two colorings of a sampled pair (X, Y) are used to exhibit blocking circuits
in the final field:

* shifted variant (chess-board lattice): v is red when X_v = 1 and the
  enhancement is absent at v + (1, 0).  Reds are i.i.d. with probability
  p(1 - delta) because each vertex consults a distinct enhancement site.
* neighbourhood variant: v is red when X_v = 1 and the enhancement is absent
  on v's whole neighbourhood.  Reds are dependent, but the conditional law
  of any enhancement site given any red pattern is bounded by a constant
  times delta, and the red field dominates an i.i.d. field of density
  p(1 - d * c * delta).

`verify_lemma_bound` and `verify_domination` check those two statements by
exact enumeration on small patches (sampling conditionals of rare patterns
would be statistically fragile, enumeration is cheap); `verify_domination`
additionally compares red-field spanning frequencies against the dominated
i.i.d. reference at scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .circuits import find_circuit, validate_circuit, Circuit
from .clusters import (Config, InfinityProxy, _check_config,
                       _infinite_roots_of, _roots_of_bits, _spans_left_right)
from .lattice import FiniteGraph, LatticeKind, neighborhood_union
from .pipeline import (FIELD_X, FIELD_Y, Estimate, bernoulli_estimate,
                       percolation_spanning_hat, _sample_bits, trial_stream)


@dataclass(eq=False)
class RedConfig:
    """A red coloring; variant is 'shifted' or 'neighborhood'."""

    graph: FiniteGraph
    bits: np.ndarray
    variant: str

    def as_config(self) -> Config:
        return Config(self.graph, self.bits)


def red_shifted(graph: FiniteGraph, X: Config, Y: Config) -> RedConfig:
    """Shifted-variant coloring: red iff occupied and Y vanishes at the
    (1,0)-translate.  Vertices whose translate leaves the box are never red
    (conservative boundary rule: it can only suppress blocking circuits).

    Only the chess-board lattice declares the shift map; other kinds are
    rejected.
    """
    if graph.kind is not LatticeKind.CHESSBOARD:
        raise ValueError(
            f"{graph.kind.value} has no declared matching shift; the shifted "
            "coloring is specific to the chess-board lattice")
    _check_config(graph, X)
    _check_config(graph, Y)
    shift = graph.shift_map()
    ok = shift >= 0
    bits = np.zeros(graph.n, dtype=np.uint8)
    bits[ok] = X.bits[ok] & (1 - Y.bits[shift[ok]])
    return RedConfig(graph, bits, "shifted")


def red_neighborhood(graph: FiniteGraph, X: Config, Y: Config) -> RedConfig:
    """Neighbourhood-variant coloring: red iff occupied and Y vanishes on
    the whole (box-clipped) neighbourhood."""
    _check_config(graph, X)
    _check_config(graph, Y)
    blocked = (graph.sparse_adjacency() @ Y.bits.astype(np.int64)) > 0
    bits = (X.bits & (~blocked)).astype(np.uint8)
    return RedConfig(graph, bits, "neighborhood")


@dataclass(frozen=True)
class LemmaConstant:
    """Constant bounding enhancement conditionals given any red pattern."""

    epsilon: float
    p_c_value: float
    d: int
    c_epsilon: float


def lemma_constant(epsilon: float, p_c_value: float, d: int) -> LemmaConstant:
    """c = 1 / ((1 - p_c) * epsilon^d)."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if not 0.0 < p_c_value < 1.0:
        raise ValueError(f"p_c must be in (0, 1), got {p_c_value}")
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    return LemmaConstant(epsilon, p_c_value, d,
                         1.0 / ((1.0 - p_c_value) * epsilon ** d))


@dataclass
class PatternRow:
    """One conditioning pattern of a patch check."""

    F: tuple
    pattern: tuple
    value: float
    bound: float
    ok: bool


@dataclass
class PatchReport:
    check: str
    rows: list = field(default_factory=list)
    max_ratio: float = 0.0
    constant: LemmaConstant | None = None

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)


def _default_f_sets(graph: FiniteGraph, v: int, max_size: int):
    nbrs = sorted(int(u) for u in graph.neighbors(v))
    for size in range(1, max_size + 1):
        yield from itertools.combinations(nbrs, size)


def verify_lemma_bound(graph: FiniteGraph, v: int, p: float, delta: float,
                       epsilon: float, p_c_value: float,
                       f_sets=None, max_f_size: int = 3,
                       d: int | None = None) -> PatchReport:
    """Exact check of the conditional-enhancement bound on a patch.

    For every coloring pattern on every conditioning set, the exact
    conditional P(Y_v = 1 | pattern) is enumerated and compared against
    c * delta with c = 1/((1 - p_c) * epsilon^d).  Patterns that color a
    neighbour of v red force the conditional to exactly zero.

    Out-of-hypothesis parameters are rejected, not clamped: requires
    0 < delta <= p_c and p_c < p < 1 - epsilon.
    """
    from .oracle import enumerate_conditional, ZeroProbabilityPattern

    if not 0.0 < delta <= p_c_value:
        raise ValueError(
            f"hypotheses need 0 < delta <= p_c, got delta={delta}, "
            f"p_c={p_c_value}")
    if not p_c_value < p < 1.0 - epsilon:
        raise ValueError(
            f"hypotheses need p_c < p < 1 - epsilon, got p={p}, "
            f"p_c={p_c_value}, epsilon={epsilon}")
    if d is None:
        d = graph.degree
    const = lemma_constant(epsilon, p_c_value, d)
    bound = const.c_epsilon * delta
    nbrs = set(int(u) for u in graph.neighbors(v))

    report = PatchReport(check="lemma-conditional", constant=const)
    if f_sets is None:
        f_sets = list(_default_f_sets(graph, v, max_f_size))
    for F in f_sets:
        for pattern in itertools.product((0, 1), repeat=len(F)):
            try:
                value = enumerate_conditional(graph, v, F, pattern, p, delta)
            except ZeroProbabilityPattern:
                continue
            ok = value <= bound
            if any(r == 1 and u in nbrs for u, r in zip(F, pattern)):
                # a red neighbour of v certifies Y_v = 0
                ok = ok and value == 0.0
            report.rows.append(PatternRow(tuple(F), pattern, value, bound, ok))
            if bound > 0:
                report.max_ratio = max(report.max_ratio, value / bound)
    return report


@dataclass
class DominationReport:
    patch: PatchReport | None
    red_spanning: Estimate | None = None
    reference_spanning: Estimate | None = None
    reference_density: float = 0.0

    @property
    def spanning_ok(self) -> bool:
        """Red spanning frequency at least the i.i.d. reference minus three
        combined standard errors."""
        if self.red_spanning is None:
            return True
        se = (self.red_spanning.stderr ** 2
              + self.reference_spanning.stderr ** 2) ** 0.5
        return (self.red_spanning.value
                >= self.reference_spanning.value - 3.0 * se)

    @property
    def all_ok(self) -> bool:
        return (self.patch is None or self.patch.all_ok) and self.spanning_ok


def red_field_spanning(graph: FiniteGraph, p: float, delta: float,
                       trials: int, seed: int) -> Estimate:
    """Left-right spanning frequency of the neighbourhood red field."""
    A = graph.sparse_adjacency()
    hits = 0
    for t in range(trials):
        x = _sample_bits(graph.n, p, trial_stream(seed, FIELD_X, t))
        y = _sample_bits(graph.n, delta, trial_stream(seed, FIELD_Y, t))
        red = (x & (~((A @ y.astype(np.int64)) > 0))).astype(np.uint8)
        roots = _roots_of_bits(graph, red)
        if _spans_left_right(graph, roots):
            hits += 1
    return bernoulli_estimate(hits, trials, seed)


def verify_domination(patch: FiniteGraph | None, v: int | None,
                      p: float, delta: float, epsilon: float,
                      p_c_value: float, d: int | None = None,
                      f_sets=None, max_f_size: int = 3,
                      spanning_graph: FiniteGraph | None = None,
                      trials: int = 400, seed: int = 0,
                      allow_subcritical: bool = False) -> DominationReport:
    """Check that the red field dominates an i.i.d. field of density
    p(1 - d * c * delta).

    (a) Patch-exact: every positive-probability red pattern on every
        conditioning set satisfies P(R_v = 1 | pattern) >= p(1 - d c delta),
        by enumeration.
    (b) At scale (when `spanning_graph` is given): the red field's spanning
        frequency is at least the spanning frequency of the dominated
        i.i.d. reference, within three combined standard errors.

    Requires the dominated density to exceed p_c (the regime in which the
    red field percolates) unless `allow_subcritical` is set for exploratory
    runs.
    """
    from .oracle import conditional_red_probability, ZeroProbabilityPattern

    if d is None:
        d = (patch or spanning_graph).degree
    const = lemma_constant(epsilon, p_c_value, d)
    target = p * (1.0 - d * const.c_epsilon * delta)
    if target <= p_c_value and not allow_subcritical:
        raise ValueError(
            f"dominated density p(1 - d c delta) = {target:.6g} does not "
            f"exceed p_c = {p_c_value}; pass allow_subcritical=True for "
            "exploratory runs")

    patch_report = None
    if patch is not None:
        patch_report = PatchReport(check="domination-conditional", constant=const)
        if f_sets is None:
            f_sets = list(_default_f_sets(patch, v, max_f_size))
        for F in f_sets:
            for pattern in itertools.product((0, 1), repeat=len(F)):
                try:
                    value = conditional_red_probability(
                        patch, v, F, pattern, p, delta)
                except ZeroProbabilityPattern:
                    continue
                patch_report.rows.append(
                    PatternRow(tuple(F), pattern, value, target,
                               value >= target))

    report = DominationReport(patch=patch_report, reference_density=target)
    if spanning_graph is not None:
        report.red_spanning = red_field_spanning(
            spanning_graph, p, delta, trials, seed)
        report.reference_spanning = percolation_spanning_hat(
            spanning_graph, target, trials, seed)
    return report


# -- blocking-circuit mechanism checks ---------------------------------------

@dataclass
class BlockingCheck:
    """Outcome of one blocking-circuit trial."""

    found: bool
    clipped: bool = False
    violations: int = 0
    circuit: Circuit | None = None


def _infinite_red_mask(graph: FiniteGraph, red_bits: np.ndarray,
                       proxy: InfinityProxy) -> np.ndarray | None:
    """Mask of red vertices lying in proxy-infinite red clusters."""
    roots = _roots_of_bits(graph, red_bits)
    inf_roots = _infinite_roots_of(graph, roots, proxy)
    if inf_roots.size == 0:
        return None
    mask = np.zeros(graph.n, dtype=np.uint8)
    for r in inf_roots:
        mask[roots == r] = 1
    return mask


def shifted_circuit_blocking(graph: FiniteGraph, X: Config, Y: Config,
                             Z: Config,
                             proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE
                             ) -> BlockingCheck:
    """Blocking mechanism of the shifted coloring, finite form.

    A red circuit around the origin is searched inside the proxy-infinite
    red clusters (the finite stand-in for a circuit of the infinite red
    cluster).  When found and when its (1,0)-translate stays in the box, the
    final field must vanish on the whole translate; the translate must also
    be a circuit of the matching adjacency.  Clipped translates are reported
    and skipped.
    """
    red = red_shifted(graph, X, Y)
    mask = _infinite_red_mask(graph, red.bits, proxy)
    if mask is None:
        return BlockingCheck(found=False)
    circuit = find_circuit(graph, red.as_config(), use_matching=False,
                           state="occupied", mask=mask)
    if circuit is None:
        return BlockingCheck(found=False)

    shift = graph.shift_map()
    shifted_ids = shift[np.asarray(circuit.vertex_ids, dtype=np.int64)]
    if np.any(shifted_ids < 0):
        return BlockingCheck(found=True, clipped=True, circuit=circuit)
    violations = int(np.count_nonzero(Z.bits[shifted_ids]))
    ox, oy = circuit.center
    translated = Circuit(
        vertex_ids=[int(i) for i in shifted_ids],
        coords=[graph.coord_of(int(i)) for i in shifted_ids],
        adjacency="matching", winding=circuit.winding,
        center=(ox + 1, oy))
    validate_circuit(graph, translated)
    return BlockingCheck(found=True, violations=violations, circuit=circuit)


def neighborhood_circuit_blocking(graph: FiniteGraph, X: Config, Y: Config,
                                  Z: Config,
                                  proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE
                                  ) -> BlockingCheck:
    """Blocking mechanism of the neighbourhood coloring, finite form.

    For a red circuit found inside the proxy-infinite red clusters, the
    final field must vanish on the union of the circuit's neighbourhoods.
    """
    red = red_neighborhood(graph, X, Y)
    mask = _infinite_red_mask(graph, red.bits, proxy)
    if mask is None:
        return BlockingCheck(found=False)
    circuit = find_circuit(graph, red.as_config(), use_matching=False,
                           state="occupied", mask=mask)
    if circuit is None:
        return BlockingCheck(found=False)
    blocked = neighborhood_union(graph, circuit.vertex_ids)
    violations = int(np.count_nonzero(Z.bits[blocked]))
    return BlockingCheck(found=True, violations=violations, circuit=circuit)
