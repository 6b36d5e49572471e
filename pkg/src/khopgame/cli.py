"""Command line front end.

Subcommands: ``stats`` (graph summary), ``solve`` (one policy run, prints
the invitation trace as JSON), ``experiment`` (seeded sweep writing
results.csv and results.svg), ``curvature`` (bound report), ``delta``
(marginal-benefit probe for one node under a saved partial realization).

Every subcommand accepts ``--config FILE`` holding flat ``key=value``
lines that mirror the long flags; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import seeding
from .curvature import curvature_report, potential_vector
from .errors import KhopGameError, ParseError, ValidationError
from .estimator import estimator_from_spec
from .game import PartialRealization
from .harness import (
    POLICY_IDS,
    ExperimentConfig,
    allocate_budgets,
    emit_csv,
    emit_plot,
    run_experiment,
)
from .network import GameParams, graph_stats, load_communities, load_graph
from .policies import PartitionMatroid, SizeBudget, baseline_solve, rmcb_solve, rmsb_solve

_BASELINE_KIND = {"maxdegree": "max_degree", "random": "random", "maxprob": "max_prob"}


def _ints_csv(text):
    return tuple(int(part) for part in str(text).split(","))


def _names_csv(text):
    names = tuple(part.strip() for part in str(text).split(",") if part.strip())
    if not names:
        raise ValueError("empty list")
    return names


def _bool_text(text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_CONFIG_PARSERS = {
    "graph": str,
    "communities": str,
    "k": int,
    "revenue": _ints_csv,
    "p": float,
    "theta": str,
    "budget": _ints_csv,
    "community_total": _ints_csv,
    "policy": str,
    "policies": _names_csv,
    "trials": int,
    "estimator": str,
    "seed": int,
    "out": str,
    "resample_theta": _bool_text,
    "psi": str,
    "node": str,
    "potentials_csv": str,
}


def read_config(path):
    """Parse a flat key=value config file into typed values."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(path, line_no, f"expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _CONFIG_PARSERS:
            raise ParseError(path, line_no, f"unknown key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value)
        except ValueError as exc:
            raise ParseError(path, line_no, f"bad value for {key}: {exc}") from exc
    return values


def _merge(args, defaults):
    """Resolve each option: explicit flag, then config file, then default."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = cfg.get(key, default)
        merged[key] = value
    return merged


_COMMON_DEFAULTS = {
    "graph": None,
    "k": 2,
    "revenue": (8, 6, 4),
    "p": 0.5,
    "theta": "uniform",
    "seed": 0,
}


def _require_graph(opts):
    if opts["graph"] is None:
        raise ValidationError("--graph is required (flag or config file)")


def _load_instance(opts, root):
    """Graph + params for a merged option set; theta drawn from stream (0,)."""
    _require_graph(opts)
    params = GameParams(int(opts["k"]), tuple(opts["revenue"]))
    graph = load_graph(
        opts["graph"],
        default_p=float(opts["p"]),
        theta_mode=opts["theta"],
        seed=seeding.substream(root, 0),
    )
    return graph, params


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("--graph", help="edge-list file: 'u v [p]' per line")
    parser.add_argument("--k", type=int, help="cascade depth (default 2)")
    parser.add_argument("--revenue", type=_ints_csv, metavar="R0,R1,...", help="per-hop revenue, k+1 values (default 8,6,4)")
    parser.add_argument("--p", type=float, help="default edge success probability (default 0.5)")
    parser.add_argument("--theta", help="acceptance mode: uniform | const:<v> | file:<path>")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")


def cmd_stats(args):
    opts = _merge(args, dict(_COMMON_DEFAULTS, communities=None))
    root = seeding.as_seedseq(int(opts["seed"]))
    graph, _ = _load_instance(dict(opts, k=0, revenue=(1,)), root)
    stats = graph_stats(graph)
    print(f"nodes           {stats.n}")
    print(f"edges           {stats.m}")
    print(f"average_degree  {stats.average_degree:.4f}")
    if opts["communities"]:
        structure = load_communities(opts["communities"], graph)
        print(f"communities     {structure.r}")
    return 0


def _solve_constraint(opts, graph, communities):
    budget = opts["budget"]
    total = opts["community_total"]
    if (budget is None) == (total is None):
        raise ValidationError("solve needs exactly one of --budget or --community-total")
    if total is not None:
        if communities is None:
            raise ValidationError("--community-total requires --communities")
        if len(total) != 1:
            raise ValidationError("solve takes a single --community-total value")
        return None, int(total[0])
    if communities is not None:
        raise ValidationError("with --communities, use --community-total instead of --budget")
    if len(budget) != 1:
        raise ValidationError("solve takes a single --budget value")
    return int(budget[0]), None


def cmd_solve(args):
    opts = _merge(
        args,
        dict(
            _COMMON_DEFAULTS,
            communities=None,
            policy="greedy",
            budget=None,
            community_total=None,
            estimator="mc:10000",
        ),
    )
    policy = opts["policy"]
    if policy not in POLICY_IDS:
        raise ValidationError(f"unknown policy {policy!r}; choose from {sorted(POLICY_IDS)}")
    root = seeding.as_seedseq(int(opts["seed"]))
    graph, params = _load_instance(opts, root)
    communities = load_communities(opts["communities"], graph) if opts["communities"] else None
    size_b, total = _solve_constraint(opts, graph, communities)

    estimator = estimator_from_spec(opts["estimator"])
    budget_key = size_b if total is None else total
    run_ss = seeding.substream(root, 1, POLICY_IDS[policy], int(budget_key), 0)
    if total is not None:
        parts = allocate_budgets(communities, total)
        if policy == "greedy":
            result = rmcb_solve(graph, communities, params, parts, estimator, run_ss)
        else:
            result = baseline_solve(
                _BASELINE_KIND[policy], graph, params, PartitionMatroid(communities, parts), run_ss
            )
    else:
        if policy == "greedy":
            result = rmsb_solve(graph, params, size_b, estimator, run_ss)
        else:
            result = baseline_solve(
                _BASELINE_KIND[policy], graph, params, SizeBudget(size_b), run_ss
            )
    record = result.to_record(policy=policy, seed=int(opts["seed"]), budget=int(budget_key))
    print(json.dumps(record, indent=2))
    return 0


def cmd_experiment(args):
    opts = _merge(
        args,
        dict(
            _COMMON_DEFAULTS,
            communities=None,
            budget=None,
            community_total=None,
            policies=("greedy", "maxdegree", "random", "maxprob"),
            trials=50,
            estimator="mc:10000",
            out=".",
            resample_theta=False,
        ),
    )
    _require_graph(opts)
    if opts["budget"] is not None and opts["community_total"] is not None:
        raise ValidationError("use either --budget or --community-total, not both")
    budgets = opts["budget"]
    if opts["community_total"] is not None:
        if opts["communities"] is None:
            raise ValidationError("--community-total requires --communities")
        budgets = opts["community_total"]
    elif opts["communities"] is not None and budgets is not None:
        raise ValidationError("with --communities, use --community-total instead of --budget")

    config = ExperimentConfig(
        graph=opts["graph"],
        communities=opts["communities"],
        k=int(opts["k"]),
        revenue=tuple(opts["revenue"]),
        p=float(opts["p"]),
        theta=opts["theta"],
        budgets=None if budgets is None else tuple(budgets),
        policies=tuple(opts["policies"]),
        trials=int(opts["trials"]),
        estimator=opts["estimator"],
        seed=int(opts["seed"]),
        out=opts["out"],
        resample_theta=bool(opts["resample_theta"]),
    )
    result = run_experiment(config)
    os.makedirs(config.out, exist_ok=True)
    csv_path = emit_csv(result, os.path.join(config.out, "results.csv"))
    svg_path = emit_plot(result, os.path.join(config.out, "results.svg"))
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")
    print(f"runtime_seconds {result.runtime_seconds:.3f}")
    return 0


def cmd_curvature(args):
    opts = _merge(args, dict(_COMMON_DEFAULTS, potentials_csv=None))
    root = seeding.as_seedseq(int(opts["seed"]))
    graph, params = _load_instance(opts, root)
    report = curvature_report(graph, params)
    print(f"nodes         {report.n}")
    print(f"k             {report.k}")
    print(f"revenue       {','.join(str(r) for r in report.revenue)}")
    print(f"delta_global  {report.delta_global:.6f}")
    print(f"delta_data    {report.delta_data:.6f}")
    print(f"ratio_global  {report.ratio_global:.6f}")
    print(f"ratio_data    {report.ratio_data:.6f}")
    if opts["potentials_csv"]:
        potentials = potential_vector(graph, params)
        with open(opts["potentials_csv"], "w", newline="") as fh:
            fh.write("node,potential\n")
            for node in graph.node_ids:
                fh.write(f"{node},{potentials[node]}\n")
        print(f"wrote {opts['potentials_csv']}")
    return 0


def cmd_delta(args):
    opts = _merge(
        args,
        dict(_COMMON_DEFAULTS, node=None, psi=None, estimator="exact"),
    )
    if opts["node"] is None:
        raise ValidationError("--node is required")
    root = seeding.as_seedseq(int(opts["seed"]))
    graph, params = _load_instance(opts, root)
    if opts["psi"]:
        try:
            with open(opts["psi"]) as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read {opts['psi']}: {exc}") from exc
        psi = PartialRealization.from_dump(graph, text, path=opts["psi"])
    else:
        psi = PartialRealization.empty(graph)
    estimator = estimator_from_spec(opts["estimator"])
    rng = seeding.generator(seeding.substream(root, 1)) if estimator.needs_rng else None
    est = estimator.estimate(graph, psi, str(opts["node"]), params, rng=rng)
    print(f"node    {opts['node']}")
    print(f"method  {est.method}")
    print(f"value   {est.value:.6f}")
    print(f"stderr  {est.stderr:.6f}")
    if est.samples is not None:
        print(f"samples {est.samples}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="khopgame",
        description="Adaptive invitation policies for k-hop collaboration cascades.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_stats = sub.add_parser("stats", help="print graph statistics")
    _add_common(p_stats)
    p_stats.add_argument("--communities", help="community file: 'node label' per line")
    p_stats.set_defaults(func=cmd_stats)

    p_solve = sub.add_parser("solve", help="run one policy once and print the trace")
    _add_common(p_solve)
    p_solve.add_argument("--communities", help="community file enabling per-community budgets")
    p_solve.add_argument("--policy", help="greedy | maxdegree | random | maxprob (default greedy)")
    p_solve.add_argument("--budget", type=_ints_csv, metavar="B", help="size budget")
    p_solve.add_argument("--community-total", dest="community_total", type=_ints_csv, metavar="T", help="total budget split across communities")
    p_solve.add_argument("--estimator", help="exact | mc:<n> | heuristic (default mc:10000)")
    p_solve.set_defaults(func=cmd_solve)

    p_exp = sub.add_parser("experiment", help="run a policy/budget sweep, write CSV + SVG")
    _add_common(p_exp)
    p_exp.add_argument("--communities", help="community file enabling per-community budgets")
    p_exp.add_argument("--budget", type=_ints_csv, metavar="B1,B2,...", help="size budget sweep (default 5,10,15,20 clipped to n)")
    p_exp.add_argument("--community-total", dest="community_total", type=_ints_csv, metavar="T1,T2,...", help="community total sweep")
    p_exp.add_argument("--policies", type=_names_csv, help="comma list (default greedy,maxdegree,random,maxprob)")
    p_exp.add_argument("--trials", type=int, help="trials per cell (default 50)")
    p_exp.add_argument("--estimator", help="exact | mc:<n> | heuristic (default mc:10000)")
    p_exp.add_argument("--out", help="output directory (default .)")
    p_exp.add_argument("--resample-theta", dest="resample_theta", action="store_const", const=True, help="draw a fresh uniform theta vector per trial")
    p_exp.set_defaults(func=cmd_experiment)

    p_curv = sub.add_parser("curvature", help="print delta bounds and greedy ratios")
    _add_common(p_curv)
    p_curv.add_argument("--potentials-csv", dest="potentials_csv", metavar="PATH", help="also write per-node potentials as CSV")
    p_curv.set_defaults(func=cmd_curvature)

    p_delta = sub.add_parser("delta", help="estimate one node's marginal benefit")
    _add_common(p_delta)
    p_delta.add_argument("--node", help="node identifier to evaluate")
    p_delta.add_argument("--psi", metavar="PATH", help="partial-realization dump (U/E lines); empty if omitted")
    p_delta.add_argument("--estimator", help="exact | mc:<n> | heuristic (default exact)")
    p_delta.set_defaults(func=cmd_delta)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KhopGameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
