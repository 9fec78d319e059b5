"""Self-destructive percolation on 2D lattices.

Occupy sites at density p, remove every cluster that counts as infinite
(finite boxes use a spanning or boundary-contact stand-in), then give every
site an independent second chance delta.  The package samples the resulting
field, estimates where it starts to percolate, and verifies the inequalities
that bound the critical enhancement, both by Monte Carlo at desk scale and
by exact enumeration on tiny boxes.
"""

__version__ = "0.1.0"

from .lattice import (FiniteGraph, LatticeKind, build_box, matching_of,
                      matching_shift, neighborhood_union)
from .clusters import (ClusterLabels, Config, InfinityProxy, connects,
                       destroy, label_clusters)
from .pipeline import (Estimate, Params, SdpSample, percolation_spanning_hat,
                       sample_field, sdp_sample, spanning_hat, theta_hat,
                       trial_stream)
from .coloring import (LemmaConstant, RedConfig, lemma_constant,
                       red_neighborhood, red_shifted, verify_domination,
                       verify_lemma_bound)
from .circuits import Circuit, CircuitError, check_separation, find_circuit
from .oracle import (ExactResult, OracleError, ZeroProbabilityPattern,
                     enumerate_conditional, enumerate_event,
                     enumerate_event_recursive)
from .estimator import (ConvergenceError, CriticalEstimate, DeltaCurve,
                        DeltaEstimate, SweepResult, bound_report,
                        estimate_delta_c, estimate_pc, matching_pair_sum)

__all__ = [
    "__version__",
    "FiniteGraph", "LatticeKind", "build_box", "matching_of",
    "matching_shift", "neighborhood_union",
    "ClusterLabels", "Config", "InfinityProxy", "connects", "destroy",
    "label_clusters",
    "Estimate", "Params", "SdpSample", "percolation_spanning_hat",
    "sample_field", "sdp_sample", "spanning_hat", "theta_hat", "trial_stream",
    "LemmaConstant", "RedConfig", "lemma_constant", "red_neighborhood",
    "red_shifted", "verify_domination", "verify_lemma_bound",
    "Circuit", "CircuitError", "check_separation", "find_circuit",
    "ExactResult", "OracleError", "ZeroProbabilityPattern",
    "enumerate_conditional", "enumerate_event", "enumerate_event_recursive",
    "ConvergenceError", "CriticalEstimate", "DeltaCurve", "DeltaEstimate",
    "SweepResult", "bound_report", "estimate_delta_c", "estimate_pc",
    "matching_pair_sum",
]
