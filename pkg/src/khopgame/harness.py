"""Experiment harness: seeded trial sweeps, aggregation, CSV and plot output.

A sweep runs each requested policy at each budget point for a fixed number
of trials. Trial (policy, budget, t) draws from the substream keyed by
(1, policy id, budget, t) under the master seed, so adding policies,
budget points, or trials never perturbs the streams of existing cells.
Acceptance probabilities under the ``uniform`` mode are sampled once per
experiment (all policies compete on the same instance); pass
``resample_theta`` to draw a fresh vector per trial instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import seeding
from .errors import KhopGameError, ValidationError
from .estimator import estimator_from_spec
from .network import CommunityStructure, GameParams, load_communities, load_graph
from .policies import PartitionMatroid, SizeBudget, baseline_solve, rmcb_solve, rmsb_solve

POLICY_IDS = {"greedy": 0, "maxdegree": 1, "random": 2, "maxprob": 3}
_BASELINE_KIND = {"maxdegree": "max_degree", "random": "random", "maxprob": "max_prob"}
DEFAULT_SWEEP = (5, 10, 15, 20)


@dataclass(frozen=True)
class ExperimentConfig:
    graph: str
    communities: str | None = None
    k: int = 2
    revenue: tuple = (8, 6, 4)
    p: float = 0.5
    theta: str = "uniform"
    budgets: tuple | None = None
    policies: tuple = ("greedy", "maxdegree", "random", "maxprob")
    trials: int = 50
    estimator: str = "mc:10000"
    seed: int = 0
    out: str = "."
    resample_theta: bool = False

    def __post_init__(self):
        object.__setattr__(self, "revenue", tuple(int(x) for x in self.revenue))
        object.__setattr__(self, "policies", tuple(self.policies))
        if self.budgets is not None:
            object.__setattr__(self, "budgets", tuple(int(x) for x in self.budgets))
        GameParams(self.k, self.revenue)
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not self.policies:
            raise ValidationError("no policies requested")
        for name in self.policies:
            if name not in POLICY_IDS:
                raise ValidationError(
                    f"unknown policy {name!r}; choose from {sorted(POLICY_IDS)}"
                )


@dataclass(frozen=True)
class CellResult:
    policy: str
    budget: int
    mean_revenue: float
    stddev: float
    trials: int


@dataclass(frozen=True)
class ExperimentResult:
    cells: tuple
    runtime_seconds: float

    def cell(self, policy: str, budget: int) -> CellResult:
        for c in self.cells:
            if c.policy == policy and c.budget == budget:
                return c
        raise KeyError((policy, budget))


def allocate_budgets(communities: CommunityStructure, total: int):
    """Split a total budget across communities proportionally to size.

    Each community gets floor(size * total / n); any shortfall is topped up
    one unit at a time over communities in size-descending order (label
    ties broken lexicographically), skipping communities already at their
    size, cycling until the parts sum to the total.
    """
    total = int(total)
    n = communities.n
    if not 0 <= total <= n:
        raise ValidationError(f"community total {total} infeasible for {n} nodes")
    sizes = communities.sizes
    parts = [size * total // n for size in sizes]
    order = sorted(range(communities.r), key=lambda i: (-sizes[i], communities.labels[i]))
    short = total - sum(parts)
    while short > 0:
        for i in order:
            if short == 0:
                break
            if parts[i] < sizes[i]:
                parts[i] += 1
                short -= 1
    return tuple(parts)


def _budget_points(config, graph, communities):
    if config.budgets is not None:
        points = config.budgets
    else:
        points = tuple(b for b in DEFAULT_SWEEP if b <= graph.n) or (graph.n,)
    if communities is None:
        for b in points:
            if not 1 <= b <= graph.n:
                raise ValidationError(f"size budget {b} out of range 1..{graph.n}")
    return points


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured sweep and aggregate realized revenue per cell."""
    t0 = time.perf_counter()
    root = seeding.as_seedseq(config.seed)
    params = GameParams(config.k, config.revenue)
    estimator = estimator_from_spec(config.estimator)
    if config.resample_theta and config.theta != "uniform":
        raise ValidationError("resample_theta requires the uniform theta mode")

    base = load_graph(
        config.graph,
        default_p=config.p,
        theta_mode=config.theta,
        seed=seeding.substream(root, 0),
    )
    communities = load_communities(config.communities, base) if config.communities else None
    points = _budget_points(config, base, communities)
    allocation = (
        {b: allocate_budgets(communities, b) for b in points} if communities is not None else None
    )

    trial_graphs = {}

    def graph_for(t):
        if not config.resample_theta:
            return base
        if t not in trial_graphs:
            theta = seeding.generator(seeding.substream(root, 0, t)).random(base.n)
            trial_graphs[t] = base.with_theta(theta)
        return trial_graphs[t]

    cells = []
    for policy in config.policies:
        pid = POLICY_IDS[policy]
        for b in points:
            values = np.empty(config.trials, dtype=np.float64)
            for t in range(config.trials):
                run_ss = seeding.substream(root, 1, pid, int(b), t)
                g = graph_for(t)
                try:
                    if communities is None:
                        if policy == "greedy":
                            res = rmsb_solve(g, params, int(b), estimator, run_ss)
                        else:
                            res = baseline_solve(
                                _BASELINE_KIND[policy], g, params, SizeBudget(int(b)), run_ss
                            )
                    else:
                        if policy == "greedy":
                            res = rmcb_solve(g, communities, params, allocation[b], estimator, run_ss)
                        else:
                            res = baseline_solve(
                                _BASELINE_KIND[policy],
                                g,
                                params,
                                PartitionMatroid(communities, allocation[b]),
                                run_ss,
                            )
                except KhopGameError as exc:
                    raise KhopGameError(
                        f"policy={policy} budget={b} trial={t}: {exc}"
                    ) from exc
                values[t] = res.realized_revenue
            cells.append(
                CellResult(policy, int(b), float(values.mean()), float(values.std()), config.trials)
            )

    cells.sort(key=lambda c: (c.policy, c.budget))
    return ExperimentResult(tuple(cells), time.perf_counter() - t0)


def emit_csv(result: ExperimentResult, path) -> str:
    """Write one row per (policy, budget) cell, sorted, 4 fractional digits."""
    rows = sorted(result.cells, key=lambda c: (c.policy, c.budget))
    with open(path, "w", newline="") as fh:
        fh.write("policy,budget,mean_revenue,stddev,trials\n")
        for c in rows:
            fh.write(f"{c.policy},{c.budget},{c.mean_revenue:.4f},{c.stddev:.4f},{c.trials}\n")
    return str(path)


def emit_plot(result: ExperimentResult, path) -> str:
    """Render budget-vs-mean-revenue curves, one per policy, as static SVG.

    Output is byte-deterministic for equal results: fixed hash salt, no
    embedded creation date.
    """
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "khopgame"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        policies = sorted({c.policy for c in result.cells})
        for policy in policies:
            cells = sorted((c for c in result.cells if c.policy == policy), key=lambda c: c.budget)
            ax.plot(
                [c.budget for c in cells],
                [c.mean_revenue for c in cells],
                marker="o",
                label=policy,
            )
        ax.set_xlabel("budget")
        ax.set_ylabel("expected total revenue")
        if policies:
            ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return str(path)
