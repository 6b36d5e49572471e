"""Adaptive invitation policies under size and community budgets.

The greedy solvers invite, one step at a time, the feasible candidate with
the highest estimated marginal benefit, observe the outcome, and continue;
rejected invitations still consume budget because the budget bounds the
invited set. A per-node estimate cache is kept and, after an acceptance,
only nodes within 2k hops of the invitee are re-evaluated; each evaluation
draws from a substream keyed by (node, invalidation epoch), so runs with
and without the cache are identical trace for trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, seeding
from .errors import ValidationError
from .estimator import Estimator, MarginalEstimate
from .game import PartialRealization, TriState, current_revenue, simulate_invitation
from .network import CommunityStructure, GameParams, Graph

BASELINE_KINDS = ("max_degree", "random", "max_prob")


# --- constraints -------------------------------------------------------------


@dataclass(frozen=True)
class SizeBudget:
    """Invite at most (and, under the greedy loop, exactly) b users."""

    b: int

    def __post_init__(self):
        if not isinstance(self.b, (int, np.integer)) or self.b < 1:
            raise ValidationError(f"size budget must be a positive integer, got {self.b!r}")


@dataclass(frozen=True)
class PartitionMatroid:
    """Independence system: at most budgets[i] invitees inside community i."""

    structure: CommunityStructure
    budgets: tuple

    def __post_init__(self):
        budgets = tuple(int(x) for x in self.budgets)
        object.__setattr__(self, "budgets", budgets)
        if len(budgets) != self.structure.r:
            raise ValidationError(
                f"{len(budgets)} budgets for {self.structure.r} communities"
            )
        for c, (b, size) in enumerate(zip(budgets, self.structure.sizes)):
            if not 0 <= b <= size:
                raise ValidationError(
                    f"budget {b} for community {self.structure.labels[c]!r} of size {size}"
                )


def is_independent(matroid: PartitionMatroid, s) -> bool:
    """True iff s puts at most budgets[i] nodes in each community i.

    Items may be node identifiers or internal indices.
    """
    counts = [0] * matroid.structure.r
    for item in s:
        if isinstance(item, (int, np.integer)):
            c = int(matroid.structure.node_community[int(item)])
        else:
            c = matroid.structure.community_of(item)
        counts[c] += 1
    return all(c <= b for c, b in zip(counts, matroid.budgets))


# --- run records ---------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    invitee: str
    estimate: MarginalEstimate | None
    accepted: bool
    revenue_after: int


@dataclass(frozen=True)
class PolicyTrace:
    """Ordered invitation log: (node id, accepted) pairs."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(u), bool(a)) for u, a in self.entries))
        nodes = [u for u, _ in self.entries]
        if len(set(nodes)) != len(nodes):
            raise ValidationError("a node appears twice in the trace")

    @property
    def nodes(self):
        return tuple(u for u, _ in self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class RunResult:
    trace: PolicyTrace
    final_psi: PartialRealization
    realized_revenue: int
    per_step: tuple

    def to_record(self, policy=None, seed=None, budget=None):
        """JSON-able summary of the run."""
        return {
            "policy": policy,
            "seed": seed,
            "budget": budget,
            "invitations": [
                {
                    "node": step.invitee,
                    "accepted": step.accepted,
                    "estimate": None
                    if step.estimate is None
                    else {
                        "value": step.estimate.value,
                        "stderr": step.estimate.stderr,
                        "method": step.estimate.method,
                        "samples": step.estimate.samples,
                    },
                    "revenue_after": step.revenue_after,
                }
                for step in self.per_step
            ],
            "final_revenue": self.realized_revenue,
        }


# --- pickers --------------------------------------------------------------------


class _GreedyPicker:
    """Argmax-by-estimate selection with epoch-keyed evaluation streams."""

    def __init__(self, estimator: Estimator):
        self.estimator = estimator

    def bind(self, graph, params, eval_root, choice_ss, use_invalidation):
        self._graph = graph
        self._params = params
        self._eval_root = eval_root
        self._use_invalidation = use_invalidation
        self._cache = {}
        self._epoch = np.zeros(graph.n, dtype=np.int64)

    def pick(self, candidates, psi):
        best_v = -1
        best = None
        for v in candidates:
            est = self._cache.get(v) if self._use_invalidation else None
            if est is None:
                rng = None
                if self.estimator.needs_rng:
                    rng = seeding.generator(
                        seeding.substream(self._eval_root, v, int(self._epoch[v]))
                    )
                est = self.estimator.estimate(
                    self._graph, psi, self._graph.node_ids[v], self._params, rng=rng
                )
                self._cache[v] = est
            if best is None or est.value > best.value:
                best_v, best = v, est
        return best_v, best

    def observe(self, v, accepted):
        self._cache.pop(v, None)
        if not accepted:
            return
        g = self._graph
        dist = _backend.kernels.bfs_ball(
            g.indptr, g.indices, np.asarray([v], dtype=np.int32), 2 * self._params.k
        )
        for w in np.nonzero(dist >= 0)[0]:
            w = int(w)
            self._epoch[w] += 1
            self._cache.pop(w, None)


class _ScorePicker:
    """Argmax over a fixed per-node score (degree or acceptance probability)."""

    def __init__(self, score_of):
        self._score_of = score_of

    def bind(self, graph, params, eval_root, choice_ss, use_invalidation):
        self._scores = self._score_of(graph)

    def pick(self, candidates, psi):
        best_v = candidates[0]
        for v in candidates[1:]:
            if self._scores[v] > self._scores[best_v]:
                best_v = v
        return best_v, None

    def observe(self, v, accepted):
        pass


class _RandomPicker:
    def bind(self, graph, params, eval_root, choice_ss, use_invalidation):
        self._rng = seeding.generator(choice_ss)

    def pick(self, candidates, psi):
        return candidates[int(self._rng.integers(len(candidates)))], None

    def observe(self, v, accepted):
        pass


# --- shared invitation loop -------------------------------------------------------


def _solve(graph, params, constraint, picker, rng, use_invalidation=True):
    ss = seeding.as_seedseq(rng)
    if isinstance(constraint, SizeBudget):
        if constraint.b > graph.n:
            raise ValidationError(f"size budget {constraint.b} exceeds n={graph.n}")
        comm = budgets = counts = None
        limit = constraint.b
    elif isinstance(constraint, PartitionMatroid):
        if not constraint.structure.matches(graph):
            raise ValidationError("community structure was built for a different graph")
        comm = constraint.structure.node_community
        budgets = constraint.budgets
        counts = [0] * constraint.structure.r
        limit = None
    else:
        raise ValidationError(f"unsupported constraint {constraint!r}")

    obs_rng = seeding.generator(seeding.substream(ss, 0))
    picker.bind(graph, params, seeding.substream(ss, 1), seeding.substream(ss, 2), use_invalidation)

    psi = PartialRealization.empty(graph)
    entries = []
    per_step = []
    while True:
        if limit is not None and len(entries) >= limit:
            break
        if counts is None:
            candidates = [v for v in range(graph.n) if psi.user_state[v] == TriState.UNKNOWN]
        else:
            candidates = [
                v
                for v in range(graph.n)
                if psi.user_state[v] == TriState.UNKNOWN and counts[comm[v]] < budgets[comm[v]]
            ]
        if not candidates:
            break
        pick, est = picker.pick(candidates, psi)
        node_id = graph.node_ids[pick]
        psi, accepted = simulate_invitation(graph, psi, node_id, params, obs_rng)
        if counts is not None:
            counts[comm[pick]] += 1
        revenue_after = current_revenue(graph, psi, params)
        entries.append((node_id, accepted))
        per_step.append(StepRecord(node_id, est, accepted, revenue_after))
        picker.observe(pick, accepted)

    realized = per_step[-1].revenue_after if per_step else 0
    return RunResult(PolicyTrace(tuple(entries)), psi, realized, tuple(per_step))


# --- public solvers -----------------------------------------------------------------


def rmsb_solve(graph: Graph, params: GameParams, b: int, estimator: Estimator, rng, *, use_invalidation: bool = True) -> RunResult:
    """Adaptive greedy under a size budget: exactly b invitations.

    At every step the estimated-benefit argmax over all uninvited nodes is
    invited (ties to the smallest internal index) and the outcome observed.
    """
    return _solve(graph, params, SizeBudget(int(b)), _GreedyPicker(estimator), rng, use_invalidation)


def rmcb_solve(graph: Graph, communities: CommunityStructure, params: GameParams, budgets, estimator: Estimator, rng, *, use_invalidation: bool = True) -> RunResult:
    """Adaptive greedy under per-community budgets.

    Invites the estimated-benefit argmax among nodes whose addition keeps
    the invited set independent; stops when no candidate remains.
    """
    matroid = PartitionMatroid(communities, tuple(budgets))
    return _solve(graph, params, matroid, _GreedyPicker(estimator), rng, use_invalidation)


def baseline_solve(kind: str, graph: Graph, params: GameParams, constraint, rng) -> RunResult:
    """Non-adaptive-scoring baselines sharing the invitation loop.

    kind: ``max_degree`` (highest degree), ``random`` (uniform over feasible
    candidates), or ``max_prob`` (highest acceptance probability); ties go
    to the smallest internal index.
    """
    if kind == "max_degree":
        picker = _ScorePicker(lambda g: np.diff(g.indptr))
    elif kind == "max_prob":
        picker = _ScorePicker(lambda g: g.theta)
    elif kind == "random":
        picker = _RandomPicker()
    else:
        raise ValidationError(f"baseline kind must be one of {BASELINE_KINDS}, got {kind!r}")
    return _solve(graph, params, constraint, picker, rng)
