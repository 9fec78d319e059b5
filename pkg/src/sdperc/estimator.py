"""Critical-point estimation and bound-verification reports.

Thresholds are located as the 1/2-crossing of a spanning probability under
bisection.  Bisection is sound here because both target curves are exactly
monotone trial-by-trial under the package's common-random-number coupling:
the plain field is pointwise nondecreasing in p, and the final
self-destructive field is pointwise nondecreasing in delta at fixed p (it is
NOT monotone in p, which is the whole point of the model, and nothing here
relies on that).

Uncertainties are the bisection bracket half-width plus a binomial-error
term propagated through the locally estimated slope of the crossing curve;
nothing sharper is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import __version__
from .clusters import InfinityProxy
from .lattice import LatticeKind, build_box, matching_of
from .pipeline import Params, percolation_spanning_hat, spanning_hat, theta_hat


class ConvergenceError(RuntimeError):
    """Bisection could not bracket or locate the crossing."""


@dataclass(frozen=True)
class CriticalEstimate:
    kind: LatticeKind
    L: int
    value: float
    uncertainty: float
    trials: int
    seed: int
    method: str = "spanning-half-crossing"


@dataclass(frozen=True)
class DeltaEstimate:
    kind: LatticeKind
    L: int
    p: float
    value: float
    uncertainty: float
    trials: int
    seed: int


@dataclass
class DeltaCurve:
    kind: LatticeKind
    L: int
    trials: int
    p_values: list = field(default_factory=list)
    estimates: list = field(default_factory=list)


@dataclass
class SweepResult:
    """A rectangular result grid with metadata, ready for CSV emission."""

    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def write_csv(self, fh) -> None:
        fh.write(f"# sdperc {__version__}\n")
        if self.meta:
            pairs = " ".join(f"{k}={v}" for k, v in sorted(self.meta.items()))
            fh.write(f"# config: {pairs}\n")
        fh.write(",".join(self.columns) + "\n")
        for row in self.rows:
            fh.write(",".join(_cell(row.get(c)) for c in self.columns) + "\n")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _bisect_half_crossing(eval_fn, lo, hi, tol, f_lo=None, f_hi=None,
                          max_iter=60):
    """Locate the 1/2-crossing of a nondecreasing probability curve.

    eval_fn(x) returns an Estimate.  Endpoint values may be supplied when
    they are known exactly.  Returns (value, uncertainty).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    est_lo = eval_fn(lo) if f_lo is None else None
    est_hi = eval_fn(hi) if f_hi is None else None
    v_lo = f_lo if f_lo is not None else est_lo.value
    v_hi = f_hi if f_hi is not None else est_hi.value
    if not (v_lo < 0.5 <= v_hi):
        raise ConvergenceError(
            f"crossing not bracketed: f({lo})={v_lo:.4f}, f({hi})={v_hi:.4f}")
    se = 0.0
    it = 0
    while hi - lo > tol:
        it += 1
        if it > max_iter:
            raise ConvergenceError(
                f"no convergence after {max_iter} bisection steps")
        mid = 0.5 * (lo + hi)
        est = eval_fn(mid)
        se = max(se, est.stderr)
        if est.value >= 0.5:
            hi, v_hi = mid, est.value
        else:
            lo, v_lo = mid, est.value
    # statistical term: binomial error mapped through the observed slope,
    # conservatively clamped for near-flat observations
    slope = (v_hi - v_lo) / (hi - lo) if hi > lo else 1.0
    slope = max(slope, 0.5)
    uncertainty = 0.5 * (hi - lo) + se / slope
    return 0.5 * (lo + hi), uncertainty


def estimate_pc(kind: LatticeKind, L: int, trials: int = 10_000,
                tol: float = 0.005, seed: int = 0, threads: int = 1,
                bracket: tuple = (0.02, 0.98)) -> CriticalEstimate:
    """Estimate the site-percolation threshold of a lattice kind at box size
    L as the 1/2-crossing of the plain (no destruction, no enhancement)
    left-right spanning probability."""
    kind = LatticeKind(kind)
    graph = build_box(kind, L)

    def ev(p: float):
        return percolation_spanning_hat(graph, p, trials, seed, threads)

    value, unc = _bisect_half_crossing(ev, bracket[0], bracket[1], tol)
    return CriticalEstimate(kind, L, value, unc, trials, seed)


def estimate_delta_c(kind: LatticeKind, p: float, L: int,
                     trials: int = 4000, tol: float = 0.005,
                     proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
                     seed: int = 0, threads: int = 1,
                     crossing: str = "spanning") -> DeltaEstimate:
    """Estimate the critical enhancement at fixed p as the 1/2-crossing in
    delta of the final field's spanning probability.

    The endpoints are exact by construction: at delta = 0 the survivor
    field contains no spanning cluster (spanning clusters are precisely what
    the destruction step removes), and at delta = 1 the final field is fully
    occupied.  `crossing="theta"` switches the bisection target to the
    origin-to-boundary probability for sensitivity analysis; its delta = 0
    endpoint is not exactly zero (small surviving clusters can reach the
    boundary from the origin), so it is evaluated rather than assumed.
    """
    kind = LatticeKind(kind)
    graph = build_box(kind, L)
    if crossing not in ("spanning", "theta"):
        raise ValueError(f"crossing must be 'spanning' or 'theta', "
                         f"got {crossing!r}")
    target = spanning_hat if crossing == "spanning" else theta_hat

    def ev(delta: float):
        return target(graph, Params(p, delta, seed, trials), proxy, threads)

    f_lo = 0.0 if crossing == "spanning" else None
    value, unc = _bisect_half_crossing(ev, 0.0, 1.0, tol, f_lo=f_lo, f_hi=1.0)
    return DeltaEstimate(kind, L, p, value, unc, trials, seed)


def matching_pair_sum(kind: LatticeKind, L: int, trials: int = 10_000,
                      tol: float = 0.005, seed: int = 0,
                      threads: int = 1) -> dict:
    """Estimate p_c for a kind and its matching lattice and report the sum
    (1 for an exact matching pair, up to finite-size and statistical
    error)."""
    kind = LatticeKind(kind)
    partner = matching_of(kind)
    a = estimate_pc(kind, L, trials, tol, seed, threads)
    b = estimate_pc(partner, L, trials, tol, seed + 1, threads)
    return {
        "kind": kind, "partner": partner, "pc": a, "partner_pc": b,
        "total": a.value + b.value,
        "uncertainty": a.uncertainty + b.uncertainty,
    }


def epsilon_for(p: float) -> float:
    """Per-p epsilon policy: half the gap to full occupation, keeping the
    constant finite while staying inside the p < 1 - epsilon hypothesis."""
    return 0.5 * (1.0 - p)


def bound_report(kind: LatticeKind, p_values, L_values, trials: int = 4000,
                 seed: int = 0,
                 proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
                 margin: float = 0.03, tol: float = 0.005,
                 pc: CriticalEstimate | None = None,
                 threads: int = 1) -> SweepResult:
    """Verify the delta_c bounds on a p-grid.

    Per p (at the largest box in L_values, with p_c estimated at that same
    box so finite-size biases partially cancel):

    * upper bound: delta_c_hat <= pc_hat (+ combined error),
    * simple lower bound (p - pc)/p, flagged inapplicable (expected to fail)
      when it exceeds pc_hat, which happens for every lattice with
      pc < 1/2 at p close to 1,
    * general lower bound (p - pc)/(p d c_eps) with eps = (1 - p)/2,
    * the supercritical-destruction check: at the largest delta with
      p(1 - delta) >= pc_hat + margin, the final field's spanning frequency
      is decreasing across L_values.
    """
    from .coloring import lemma_constant

    kind = LatticeKind(kind)
    L_values = sorted(L_values)
    L_star = L_values[-1]
    graph = build_box(kind, L_star)
    if pc is None:
        pc = estimate_pc(kind, L_star, trials, tol, seed, threads)

    columns = ["lattice", "L", "p", "pc_hat", "pc_unc", "delta_c_hat",
               "delta_c_unc", "lower_simple", "lower_general", "upper_pc",
               "eq_upper_ok", "simple_applicable", "lower_simple_ok",
               "lower_general_ok", "destruct_delta"]
    columns += [f"span_L{L}" for L in L_values]
    columns += ["destruct_decreasing"]

    curve = DeltaCurve(kind, L_star, trials)
    rows = []
    for p in p_values:
        dc = estimate_delta_c(kind, p, L_star, trials, tol, proxy, seed,
                              threads)
        curve.p_values.append(p)
        curve.estimates.append(dc)
        lower_simple = max(0.0, (p - pc.value) / p)
        eps = epsilon_for(p)
        const = lemma_constant(eps, pc.value, graph.degree)
        lower_general = max(0.0, (p - pc.value)
                            / (p * graph.degree * const.c_epsilon))
        comb = dc.uncertainty + pc.uncertainty
        row = {
            "lattice": kind.value, "L": L_star, "p": p,
            "pc_hat": pc.value, "pc_unc": pc.uncertainty,
            "delta_c_hat": dc.value, "delta_c_unc": dc.uncertainty,
            "lower_simple": lower_simple, "lower_general": lower_general,
            "upper_pc": pc.value,
            "eq_upper_ok": dc.value <= pc.value + comb,
            "simple_applicable": lower_simple <= pc.value,
            "lower_simple_ok": dc.value >= lower_simple - 2.0 * comb,
            "lower_general_ok": dc.value >= lower_general - 2.0 * comb,
        }

        # destruction regime: freeze delta with p(1 - delta) supercritical
        d3 = 1.0 - (pc.value + margin) / p if p > pc.value + margin else None
        row["destruct_delta"] = d3
        freqs = []
        if d3 is not None and d3 > 0:
            for L in L_values:
                g = build_box(kind, L)
                est = spanning_hat(g, Params(p, d3, seed, trials), proxy,
                                   threads)
                freqs.append(est.value)
                row[f"span_L{L}"] = est.value
            row["destruct_decreasing"] = all(
                a > b for a, b in zip(freqs, freqs[1:]))
        else:
            row["destruct_decreasing"] = None
        rows.append(row)

    meta = {"lattice": kind.value, "L_values": ",".join(map(str, L_values)),
            "trials": trials, "seed": seed, "proxy": str(proxy),
            "margin": margin, "tol": tol}
    result = SweepResult(columns, rows, meta)
    result.curve = curve
    return result
