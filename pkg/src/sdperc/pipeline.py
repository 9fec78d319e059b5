"""Sampling of the full self-destructive percolation field and Monte Carlo
estimates of its connection probabilities.

A sample is built in three steps: an i.i.d. Bernoulli(p) field X, the
destruction step X -> X* (every proxy-infinite cluster removed), and an
independent Bernoulli(delta) enhancement Y.  The final field is Z = X* | Y.

Randomness is counter-based: the Philox stream of a field is keyed by
(seed, field tag) with the trial index selecting a disjoint counter window.
Consequences used throughout the package and its tests:

* results are bit-identical for a given seed regardless of how trials are
  scheduled over worker threads, and
* runs at different delta but equal seed are coupled through common random
  numbers, so Z is pointwise nondecreasing in delta trial by trial.

No such monotonicity holds in p: raising p can destroy more, and estimates
are allowed to decrease.
"""

from __future__ import annotations

import math
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import _kernels
from .clusters import (Config, InfinityProxy, _destroy_bits,
                       _origin_reaches_boundary, _roots_of_bits,
                       _spans_left_right)
from .lattice import FiniteGraph

# field tags for stream derivation
FIELD_X = 0x58
FIELD_Y = 0x59
FIELD_PLAIN = 0x50

_MASK64 = (1 << 64) - 1


def trial_stream(seed: int, field_tag: int, trial_index: int) -> Generator:
    """Philox stream for one (seed, field, trial) triple.

    The trial index is placed in a high counter word, giving every trial a
    disjoint 2^128-draw window of the keyed stream: reproducible under any
    parallel schedule.
    """
    key = [seed & _MASK64, field_tag & _MASK64]
    return Generator(Philox(key=key, counter=[0, 0, trial_index & _MASK64, 0]))


@dataclass(frozen=True)
class Params:
    """Occupation probability, enhancement probability, seed, trial count."""

    p: float
    delta: float
    seed: int
    trials: int

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0,1], got {self.p}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0,1], got {self.delta}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class Estimate:
    """Bernoulli Monte Carlo estimate with binomial standard error."""

    value: float
    stderr: float
    trials: int
    seed: int


def bernoulli_estimate(successes: int, trials: int, seed: int) -> Estimate:
    value = successes / trials
    return Estimate(value, math.sqrt(value * (1.0 - value) / trials),
                    trials, seed)


@dataclass(eq=False)
class SdpSample:
    """One full draw of the model: X, the survivor field X*, Y, and Z."""

    X: Config
    Xstar: Config
    Y: Config
    Z: Config


def sample_field(graph: FiniteGraph, q: float, stream: Generator) -> Config:
    """i.i.d. Bernoulli(q) field drawn from an explicit stream."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"occupation probability must be in [0,1], got {q}")
    return Config(graph, _sample_bits(graph.n, q, stream))


def _sample_bits(n: int, q: float, stream: Generator) -> np.ndarray:
    return (stream.random(n) < q).astype(np.uint8)


def sdp_sample(graph: FiniteGraph, params: Params,
               proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
               trial_index: int = 0) -> SdpSample:
    """Draw the trial with the given index, fully reproducibly."""
    x = _sample_bits(graph.n, params.p,
                     trial_stream(params.seed, FIELD_X, trial_index))
    y = _sample_bits(graph.n, params.delta,
                     trial_stream(params.seed, FIELD_Y, trial_index))
    xstar = _destroy_bits(graph, x, proxy)
    return SdpSample(X=Config(graph, x), Xstar=Config(graph, xstar),
                     Y=Config(graph, y), Z=Config(graph, xstar | y))


def _final_field_events(graph: FiniteGraph, x: np.ndarray, y: np.ndarray,
                        proxy: InfinityProxy) -> tuple[int, int]:
    """(origin-to-boundary, left-right spanning) indicators of the final
    field built from the given initial and enhancement bits."""
    proxy = InfinityProxy(proxy)
    if _kernels.HAVE_NUMBA:
        b = graph.boundary
        theta, span = _kernels.sdp_trial_events(
            graph.n, graph.edge_u, graph.edge_w,
            b["left"], b["right"], b["bottom"], b["top"], graph.origin,
            x, y, proxy is InfinityProxy.TOUCHES_BOUNDARY)
        return int(theta), int(span)
    z = _destroy_bits(graph, x, proxy) | y
    roots = _roots_of_bits(graph, z)
    theta = 1 if _origin_reaches_boundary(graph, roots) else 0
    span = 1 if _spans_left_right(graph, roots) else 0
    return theta, span


def _trial_events(graph: FiniteGraph, p: float, delta: float, seed: int,
                  proxy: InfinityProxy, t: int) -> tuple[int, int]:
    """Event indicators of trial t, reproducible from (seed, t) alone."""
    x = _sample_bits(graph.n, p, trial_stream(seed, FIELD_X, t))
    y = _sample_bits(graph.n, delta, trial_stream(seed, FIELD_Y, t))
    return _final_field_events(graph, x, y, proxy)


def _count_chunked(worker, trials: int, threads: int) -> tuple[int, int]:
    """Sum worker(trial) pairs over all trials, split across threads.

    Integer sums make the result independent of scheduling.
    """
    if threads <= 1:
        theta = span = 0
        for t in range(trials):
            a, b = worker(t)
            theta += a
            span += b
        return theta, span

    def run_chunk(lo_hi):
        lo, hi = lo_hi
        a = b = 0
        for t in range(lo, hi):
            da, db = worker(t)
            a += da
            b += db
        return a, b

    step = max(1, -(-trials // (threads * 4)))
    chunks = [(lo, min(lo + step, trials)) for lo in range(0, trials, step)]
    theta = span = 0
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for a, b in pool.map(run_chunk, chunks):
            theta += a
            span += b
    return theta, span


# cache of (params, proxy) -> (theta count, span count), keyed weakly by graph
_counts_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _mc_counts(graph: FiniteGraph, params: Params, proxy: InfinityProxy,
               threads: int) -> tuple[int, int]:
    proxy = InfinityProxy(proxy)
    per_graph = _counts_cache.setdefault(graph, {})
    key = (params, proxy)
    if key not in per_graph:
        per_graph[key] = _count_chunked(
            lambda t: _trial_events(graph, params.p, params.delta,
                                    params.seed, proxy, t),
            params.trials, threads)
    return per_graph[key]


def theta_hat(graph: FiniteGraph, params: Params,
              proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
              threads: int = 1) -> Estimate:
    """Monte Carlo probability that the origin connects to the box boundary
    in the final field Z (the finite-volume stand-in for reaching infinity).
    """
    theta, _ = _mc_counts(graph, params, proxy, threads)
    return bernoulli_estimate(theta, params.trials, params.seed)


def spanning_hat(graph: FiniteGraph, params: Params,
                 proxy: InfinityProxy = InfinityProxy.SPANS_OPPOSITE,
                 threads: int = 1) -> Estimate:
    """Monte Carlo probability that Z contains a left-right spanning
    cluster."""
    _, span = _mc_counts(graph, params, proxy, threads)
    return bernoulli_estimate(span, params.trials, params.seed)


def _plain_spanning_event(graph: FiniteGraph, bits: np.ndarray) -> int:
    if _kernels.HAVE_NUMBA:
        b = graph.boundary
        return int(_kernels.spanning_trial(
            graph.n, graph.edge_u, graph.edge_w, b["left"], b["right"], bits))
    return 1 if _spans_left_right(graph, _roots_of_bits(graph, bits)) else 0


def percolation_spanning_hat(graph: FiniteGraph, p: float, trials: int,
                             seed: int, threads: int = 1) -> Estimate:
    """Left-right spanning probability of a plain Bernoulli(p) field
    (no destruction, no enhancement)."""

    def worker(t: int) -> tuple[int, int]:
        bits = _sample_bits(graph.n, p, trial_stream(seed, FIELD_PLAIN, t))
        return 0, _plain_spanning_event(graph, bits)

    _, span = _count_chunked(worker, trials, threads)
    return bernoulli_estimate(span, trials, seed)
