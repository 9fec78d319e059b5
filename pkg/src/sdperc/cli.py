"""Command-line interface.

One executable, eight subcommands, CSV on stdout (or --out FILE) with a
comment header carrying the tool version and the full resolved run
configuration: re-running the header's configuration reproduces the rows
byte-exactly.  Worker-thread count affects scheduling only, never output,
and is therefore not part of the header.  Progress and errors go to stderr
so stdout stays machine-parseable.

Exit codes: 0 success, 2 usage error, 3 numerical/convergence failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .clusters import InfinityProxy
from .estimator import (ConvergenceError, SweepResult, bound_report,
                        estimate_delta_c, estimate_pc, matching_pair_sum)
from .lattice import LatticeKind, build_box
from .oracle import OracleError, enumerate_event
from .pipeline import Params, spanning_hat, theta_hat

USAGE_ERROR = 2
NUMERICAL_ERROR = 3

LATTICE_NAMES = [k.value for k in LatticeKind]


def _parse_floats(text: str):
    return [float(x) for x in text.split(",") if x != ""]


def _parse_ints(text: str):
    return [int(x) for x in text.split(",") if x != ""]


def _default_seed() -> int:
    return int(os.environ.get("SDPERC_SEED", "0"))


def _add_common(sub, trials_default=10_000):
    sub.add_argument("--lattice", required=True, choices=LATTICE_NAMES)
    sub.add_argument("--trials", type=int, default=trials_default)
    sub.add_argument("--seed", type=int, default=_default_seed(),
                     help="base seed (default: SDPERC_SEED env var or 0)")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads; output is independent of this")
    sub.add_argument("--out", default=None, metavar="FILE",
                     help="write CSV here instead of stdout")
    sub.add_argument("--config", default=None, metavar="FILE",
                     help="key=value file supplying flag defaults")


def _add_proxy(sub):
    sub.add_argument("--infinity-proxy", choices=["spans", "touches"],
                     default="spans", dest="infinity_proxy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdperc",
        description="self-destructive percolation simulator and verifier")
    parser.add_argument("--version", action="version",
                        version=f"sdperc {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("simulate", help="one Monte Carlo cell")
    _add_common(s)
    _add_proxy(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)

    s = subs.add_parser("sweep", help="Monte Carlo grid over (p, delta, L)")
    _add_common(s)
    _add_proxy(s)
    s.add_argument("--L-list", type=_parse_ints, required=True, dest="L_list")
    s.add_argument("--p-grid", type=_parse_floats, required=True, dest="p_grid")
    s.add_argument("--delta-grid", type=_parse_floats, required=True,
                   dest="delta_grid")

    s = subs.add_parser("estimate-pc", help="percolation threshold")
    _add_common(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--tol", type=float, default=0.005)
    s.add_argument("--check-matching", action="store_true",
                   help="also estimate the matching lattice and report the sum")

    s = subs.add_parser("estimate-deltac", help="critical enhancement at fixed p")
    _add_common(s, trials_default=4000)
    _add_proxy(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--tol", type=float, default=0.005)
    s.add_argument("--crossing", choices=["spanning", "theta"],
                   default="spanning",
                   help="bisection target (theta: sensitivity analysis)")

    s = subs.add_parser("bound-report", help="delta_c bound verification grid")
    _add_common(s, trials_default=4000)
    _add_proxy(s)
    s.add_argument("--L-list", type=_parse_ints, required=True, dest="L_list")
    s.add_argument("--p-grid", type=_parse_floats, required=True, dest="p_grid")
    s.add_argument("--tol", type=float, default=0.005)
    s.add_argument("--margin", type=float, default=0.03)

    s = subs.add_parser("verify-lemma",
                        help="exact conditional-enhancement bound on a patch")
    _add_common(s)
    s.add_argument("--patch-L", type=int, default=3, dest="patch_L")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--epsilon", type=float, default=None,
                   help="default: (1-p)/2")
    s.add_argument("--pc", type=float, required=True,
                   help="p_c estimate feeding the constant (see estimate-pc)")
    s.add_argument("--max-f", type=int, default=3, dest="max_f",
                   help="largest conditioning-set size")

    s = subs.add_parser("verify-domination",
                        help="red-field domination: patch-exact and at scale")
    _add_common(s, trials_default=400)
    s.add_argument("--patch-L", type=int, default=3, dest="patch_L")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--pc", type=float, required=True)
    s.add_argument("--max-f", type=int, default=3, dest="max_f")
    s.add_argument("--L", type=int, default=0,
                   help="box for the spanning comparison; 0 skips it")
    s.add_argument("--allow-subcritical", action="store_true")

    s = subs.add_parser("oracle", help="exact event probability on a tiny box")
    _add_common(s)
    _add_proxy(s)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--event", choices=["theta", "spanning"], default="theta")
    return parser


def _load_config_args(path: str):
    """Turn a key=value config file into a flag list (flags given on the
    command line are parsed later and therefore win)."""
    args = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, value = line.split("=", 1)
            args.append(f"--{key.strip().replace('_', '-')}")
            args.append(value.strip())
    return args


def _inject_config(argv):
    """Splice config-file pairs right after the subcommand name."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    injected = _load_config_args(argv[i + 1])
    return argv[:1] + injected + argv[1:]


def _meta(ns, *names) -> dict:
    out = {"command": ns.command}
    for name in names:
        v = getattr(ns, name)
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        out[name] = v
    return out


def _simulate_row(kind, L, p, delta, trials, seed, proxy, threads) -> dict:
    graph = build_box(kind, L)
    params = Params(p, delta, seed, trials)
    th = theta_hat(graph, params, proxy, threads)
    sp = spanning_hat(graph, params, proxy, threads)
    return {"lattice": kind.value, "L": L, "p": p, "delta": delta,
            "trials": trials, "seed": seed,
            "theta": th.value, "theta_stderr": th.stderr,
            "spanning": sp.value, "spanning_stderr": sp.stderr}


SIM_COLUMNS = ["lattice", "L", "p", "delta", "trials", "seed",
               "theta", "theta_stderr", "spanning", "spanning_stderr"]


def _run_simulate(ns) -> SweepResult:
    kind = LatticeKind(ns.lattice)
    proxy = InfinityProxy(ns.infinity_proxy)
    row = _simulate_row(kind, ns.L, ns.p, ns.delta, ns.trials, ns.seed,
                        proxy, ns.threads)
    return SweepResult(SIM_COLUMNS, [row],
                       _meta(ns, "lattice", "L", "p", "delta", "trials",
                             "seed", "infinity_proxy"))


def _run_sweep(ns) -> SweepResult:
    kind = LatticeKind(ns.lattice)
    proxy = InfinityProxy(ns.infinity_proxy)
    rows = []
    total = len(ns.L_list) * len(ns.p_grid) * len(ns.delta_grid)
    done = 0
    for L in ns.L_list:
        for p in ns.p_grid:
            for delta in ns.delta_grid:
                rows.append(_simulate_row(kind, L, p, delta, ns.trials,
                                          ns.seed, proxy, ns.threads))
                done += 1
                print(f"sweep {done}/{total}", file=sys.stderr)
    return SweepResult(SIM_COLUMNS, rows,
                       _meta(ns, "lattice", "L_list", "p_grid", "delta_grid",
                             "trials", "seed", "infinity_proxy"))


def _run_estimate_pc(ns) -> SweepResult:
    kind = LatticeKind(ns.lattice)
    columns = ["lattice", "L", "trials", "seed", "pc_hat", "uncertainty",
               "method"]
    rows = []
    if ns.check_matching:
        res = matching_pair_sum(kind, ns.L, ns.trials, ns.tol, ns.seed,
                                ns.threads)
        for est in (res["pc"], res["partner_pc"]):
            rows.append({"lattice": est.kind.value, "L": est.L,
                         "trials": est.trials, "seed": est.seed,
                         "pc_hat": est.value, "uncertainty": est.uncertainty,
                         "method": est.method})
        rows.append({"lattice": "matching-pair-total", "L": ns.L,
                     "trials": ns.trials, "seed": ns.seed,
                     "pc_hat": res["total"],
                     "uncertainty": res["uncertainty"], "method": "sum"})
    else:
        est = estimate_pc(kind, ns.L, ns.trials, ns.tol, ns.seed, ns.threads)
        rows.append({"lattice": est.kind.value, "L": est.L,
                     "trials": est.trials, "seed": est.seed,
                     "pc_hat": est.value, "uncertainty": est.uncertainty,
                     "method": est.method})
    return SweepResult(columns, rows,
                       _meta(ns, "lattice", "L", "trials", "seed", "tol",
                             "check_matching"))


def _run_estimate_deltac(ns) -> SweepResult:
    kind = LatticeKind(ns.lattice)
    proxy = InfinityProxy(ns.infinity_proxy)
    est = estimate_delta_c(kind, ns.p, ns.L, ns.trials, ns.tol, proxy,
                           ns.seed, ns.threads, crossing=ns.crossing)
    columns = ["lattice", "L", "p", "trials", "seed", "proxy", "crossing",
               "delta_c_hat", "uncertainty"]
    row = {"lattice": kind.value, "L": ns.L, "p": ns.p, "trials": ns.trials,
           "seed": ns.seed, "proxy": str(proxy), "crossing": ns.crossing,
           "delta_c_hat": est.value, "uncertainty": est.uncertainty}
    return SweepResult(columns, [row],
                       _meta(ns, "lattice", "L", "p", "trials", "seed",
                             "tol", "infinity_proxy", "crossing"))


def _run_bound_report(ns) -> SweepResult:
    kind = LatticeKind(ns.lattice)
    proxy = InfinityProxy(ns.infinity_proxy)
    return bound_report(kind, ns.p_grid, ns.L_list, ns.trials, ns.seed,
                        proxy, ns.margin, ns.tol, threads=ns.threads)


PATTERN_COLUMNS = ["check", "F", "pattern", "value", "bound", "ratio", "ok"]


def _pattern_rows(graph, report) -> list:
    rows = []
    for r in report.rows:
        coords = "|".join("(%d %d)" % graph.coord_of(u) for u in r.F)
        rows.append({"check": report.check, "F": coords,
                     "pattern": "".join(str(b) for b in r.pattern),
                     "value": r.value, "bound": r.bound,
                     "ratio": (r.value / r.bound) if r.bound else None,
                     "ok": r.ok})
    return rows


def _run_verify_lemma(ns) -> SweepResult:
    from .coloring import verify_lemma_bound

    kind = LatticeKind(ns.lattice)
    graph = build_box(kind, ns.patch_L)
    ns.epsilon = ns.epsilon if ns.epsilon is not None else 0.5 * (1.0 - ns.p)
    report = verify_lemma_bound(graph, graph.origin, ns.p, ns.delta,
                                ns.epsilon, ns.pc, max_f_size=ns.max_f)
    return SweepResult(PATTERN_COLUMNS, _pattern_rows(graph, report),
                       _meta(ns, "lattice", "patch_L", "p", "delta",
                             "epsilon", "pc", "max_f"))


def _run_verify_domination(ns) -> SweepResult:
    from .coloring import verify_domination

    kind = LatticeKind(ns.lattice)
    patch = build_box(kind, ns.patch_L)
    ns.epsilon = ns.epsilon if ns.epsilon is not None else 0.5 * (1.0 - ns.p)
    spanning_graph = build_box(kind, ns.L) if ns.L else None
    report = verify_domination(
        patch, patch.origin, ns.p, ns.delta, ns.epsilon, ns.pc,
        max_f_size=ns.max_f, spanning_graph=spanning_graph,
        trials=ns.trials, seed=ns.seed,
        allow_subcritical=ns.allow_subcritical)
    rows = _pattern_rows(patch, report.patch)
    if report.red_spanning is not None:
        ref = report.reference_spanning
        se = (report.red_spanning.stderr ** 2 + ref.stderr ** 2) ** 0.5
        rows.append({"check": "spanning-red", "F": "", "pattern": "",
                     "value": report.red_spanning.value,
                     "bound": ref.value - 3.0 * se,
                     "ratio": None, "ok": report.spanning_ok})
        rows.append({"check": "spanning-reference", "F": "", "pattern": "",
                     "value": ref.value, "bound": report.reference_density,
                     "ratio": None, "ok": True})
    return SweepResult(PATTERN_COLUMNS, rows,
                       _meta(ns, "lattice", "patch_L", "p", "delta",
                             "epsilon", "pc", "max_f", "L", "trials", "seed"))


def _run_oracle(ns) -> SweepResult:
    kind = LatticeKind(ns.lattice)
    proxy = InfinityProxy(ns.infinity_proxy)
    graph = build_box(kind, ns.L)
    res = enumerate_event(graph, ns.p, ns.delta, proxy, ns.event)
    columns = ["lattice", "L", "p", "delta", "proxy", "event", "method",
               "probability", "config_count"]
    row = {"lattice": kind.value, "L": ns.L, "p": ns.p, "delta": ns.delta,
           "proxy": str(proxy), "event": res.event, "method": res.method,
           "probability": res.probability, "config_count": res.config_count}
    return SweepResult(columns, [row],
                       _meta(ns, "lattice", "L", "p", "delta", "event",
                             "infinity_proxy"))


_RUNNERS = {
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "estimate-pc": _run_estimate_pc,
    "estimate-deltac": _run_estimate_deltac,
    "bound-report": _run_bound_report,
    "verify-lemma": _run_verify_lemma,
    "verify-domination": _run_verify_domination,
    "oracle": _run_oracle,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _inject_config(argv)
    except (OSError, ValueError) as exc:
        print(f"error kind=usage message={exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        result = _RUNNERS[ns.command](ns)
    except ConvergenceError as exc:
        print(f"error kind=convergence message={exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except OracleError as exc:
        print(f"error kind=numerical message={exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except ValueError as exc:
        print(f"error kind=usage message={exc}", file=sys.stderr)
        return USAGE_ERROR

    if ns.out:
        with open(ns.out, "w") as fh:
            result.write_csv(fh)
    else:
        result.write_csv(sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
