"""Expected marginal benefit of an invitation, three ways.

``exact_marginal`` enumerates the cascade round by round and is the oracle;
``mc_marginal`` is the unbiased Monte Carlo estimate; ``heuristic_marginal``
is the layered-BFS approximation used at scale. All three accept any
consistent partial realization: the expected-revenue enumeration completes
still-open rounds, which is a no-op on realizations actually produced by
the invitation process.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend, seeding
from .errors import ContractViolation, EnumerationCapExceeded, ValidationError
from .game import PartialRealization, TriState
from .network import GameParams, Graph

ENUMERATION_CAP = 22
DEFAULT_MC_SAMPLES = 10000

METHOD_EXACT = "exact"
METHOD_MC = "monte_carlo"
METHOD_HEURISTIC = "heuristic"


@dataclass(frozen=True)
class MarginalEstimate:
    """An estimate of the conditional expected marginal benefit.

    `value` is non-negative on every realization the invitation process can
    produce (adaptive monotonicity); that property is verified by tests
    rather than asserted here, since Monte Carlo noise on hand-built
    realizations may dip below zero.
    """

    value: float
    stderr: float
    method: str
    samples: int | None = None

    def __post_init__(self):
        if self.stderr < 0.0:
            raise ValidationError("stderr must be non-negative")
        if self.method not in (METHOD_EXACT, METHOD_MC, METHOD_HEURISTIC):
            raise ValidationError(f"unknown estimate method {self.method!r}")


def _require_uninvited(graph, psi, u):
    i = graph.index_of(u)
    if i in psi.dx:
        raise ContractViolation(f"node {u!r} was already invited")
    return i


# --- exact enumeration ------------------------------------------------------


def _round_edges(kern, graph, user_state, edge_state, k, r):
    """Unknown edges round r would sample, in the process's draw order."""
    hops = kern.assign_hops(graph.indptr, graph.indices, graph.adj_eid, edge_state, user_state, k)
    out = []
    seen = set()
    target = r - 1
    level = False
    for v in range(graph.n):
        if hops[v] != target:
            continue
        level = True
        for s in range(graph.indptr[v], graph.indptr[v + 1]):
            e = int(graph.adj_eid[s])
            if edge_state[e] == TriState.UNKNOWN and e not in seen:
                seen.add(e)
                out.append(e)
    return out, level


def _expected_revenue(graph, user_state, edge_state, params):
    """E[f] when all still-open rounds are completed, by exhaustive branching.

    Branches follow the cascade's round structure, so only edges the process
    would actually sample contribute probability factors; everything else is
    marginalized out implicitly.
    """
    kern = _backend.kernels
    k = params.k
    rev = params.revenue_array()
    edge_p = graph.edge_p
    acc = 0.0

    def leaf(es, prob):
        nonlocal acc
        hops = kern.assign_hops(graph.indptr, graph.indices, graph.adj_eid, es, user_state, k)
        acc += prob * kern.total_revenue(hops, rev)

    def rounds(es, r, prob):
        while True:
            if r > k:
                leaf(es, prob)
                return
            eids, level = _round_edges(kern, graph, user_state, es, k, r)
            if eids:
                break
            if not level:
                # No node at hop r-1: later rounds are empty too.
                leaf(es, prob)
                return
            r += 1

        def branch(j, es2, pr):
            if j == len(eids):
                rounds(es2, r + 1, pr)
                return
            e = eids[j]
            p = float(edge_p[e])
            if p > 0.0:
                live = es2.copy()
                live[e] = TriState.ONE
                branch(j + 1, live, pr * p)
            if p < 1.0:
                dead = es2.copy()
                dead[e] = TriState.ZERO
                branch(j + 1, dead, pr * (1.0 - p))

        branch(0, es, prob)

    rounds(edge_state.copy(), 1, 1.0)
    return acc


def _enumeration_scope(graph, psi, i, k):
    """Unknown edges the exact enumeration may branch on.

    Every sampled edge touches a node within k-1 structural hops of the
    candidate or of an existing initiator, so counting the unknown edges in
    that ball bounds the branching factor.
    """
    sources = [i] + [int(v) for v in np.nonzero(psi.user_state == TriState.ONE)[0]]
    dist = _backend.kernels.bfs_ball(
        graph.indptr, graph.indices, np.asarray(sources, dtype=np.int32), k - 1
    )
    count = 0
    for e in range(graph.m):
        a, b = graph.edges[e]
        if psi.edge_state[e] == TriState.UNKNOWN and (dist[a] >= 0 or dist[b] >= 0):
            count += 1
    return count


def exact_marginal(graph: Graph, psi: PartialRealization, u, params: GameParams, cap: int = ENUMERATION_CAP) -> MarginalEstimate:
    """Exact conditional expected marginal benefit of inviting u.

    Computed as theta_u * (E[f | u accepts] - E[f]), both sides enumerated
    round by round. Refuses when more than `cap` unknown edges are in scope.
    """
    i = _require_uninvited(graph, psi, u)
    scope = _enumeration_scope(graph, psi, i, params.k)
    if scope > cap:
        raise EnumerationCapExceeded(
            f"{scope} unknown edges within reach of {u!r}: too large for exact enumeration (cap {cap})"
        )
    theta = float(graph.theta[i])
    if theta == 0.0:
        return MarginalEstimate(0.0, 0.0, METHOD_EXACT)
    e0 = _expected_revenue(graph, psi.user_state, psi.edge_state, params)
    us1 = psi.user_state.copy()
    us1[i] = TriState.ONE
    e1 = _expected_revenue(graph, us1, psi.edge_state, params)
    value = theta * (e1 - e0)
    if value < 0.0:
        # The true difference is provably non-negative; enumeration rounding
        # can land a hair below zero.
        value = 0.0
    return MarginalEstimate(value, 0.0, METHOD_EXACT)


# --- Monte Carlo ------------------------------------------------------------


def mc_marginal(graph: Graph, psi: PartialRealization, u, params: GameParams, n_samples: int = DEFAULT_MC_SAMPLES, rng=0) -> MarginalEstimate:
    """Unbiased Monte Carlo estimate of the marginal benefit of inviting u."""
    if n_samples < 1:
        raise ValidationError(f"n_samples must be at least 1, got {n_samples}")
    i = _require_uninvited(graph, psi, u)
    gen = rng if isinstance(rng, np.random.Generator) else seeding.generator(rng)
    mean, stderr = _backend.kernels.mc_gain(
        graph.indptr, graph.indices, graph.adj_eid, graph.edge_p, graph.theta,
        psi.user_state, psi.edge_state, i, params.k, params.revenue_array(),
        int(n_samples), gen,
    )
    return MarginalEstimate(float(mean), float(stderr), METHOD_MC, int(n_samples))


# --- layered-BFS heuristic ---------------------------------------------------


def heuristic_marginal(graph: Graph, psi: PartialRealization, u, params: GameParams) -> MarginalEstimate:
    """Layered-BFS approximation of the marginal benefit of inviting u.

    Exact whenever k <= 1 or every relevant unknown edge has p = 1; treats
    cross-predecessor recruitment events as independent otherwise. Runs in
    O(m) per call.
    """
    i = _require_uninvited(graph, psi, u)
    hops = _backend.kernels.assign_hops(
        graph.indptr, graph.indices, graph.adj_eid, psi.edge_state, psi.user_state, params.k
    )
    value = _backend.kernels.heuristic_gain(
        graph.indptr, graph.indices, graph.adj_eid, graph.edge_p, psi.edge_state,
        graph.theta, hops, i, params.k, params.revenue_array(),
    )
    return MarginalEstimate(float(value), 0.0, METHOD_HEURISTIC)


# --- incremental invalidation -------------------------------------------------


def invalidation_set(graph: Graph, u_last, k: int):
    """Nodes whose cached marginal benefit may change after u_last accepts.

    Everything an accepted invitation can touch lies within 2k structural
    hops of the invitee (k for the new cascade, k more for whose estimate
    sees it). After a rejection nothing changes, so use the empty set.
    """
    i = graph.index_of(u_last)
    dist = _backend.kernels.bfs_ball(
        graph.indptr, graph.indices, np.asarray([i], dtype=np.int32), 2 * int(k)
    )
    return {graph.node_ids[v] for v in np.nonzero(dist >= 0)[0]}


# --- injectable strategies -----------------------------------------------------


class Estimator:
    """Strategy interface for the solvers: stateless, rng passed per call."""

    method: str = ""
    needs_rng: bool = False

    def estimate(self, graph, psi, u, params, rng=None) -> MarginalEstimate:
        raise NotImplementedError


@dataclass(frozen=True)
class ExactEstimator(Estimator):
    cap: int = ENUMERATION_CAP
    method = METHOD_EXACT
    needs_rng = False

    def estimate(self, graph, psi, u, params, rng=None):
        return exact_marginal(graph, psi, u, params, cap=self.cap)


@dataclass(frozen=True)
class MonteCarloEstimator(Estimator):
    n_samples: int = DEFAULT_MC_SAMPLES
    method = METHOD_MC
    needs_rng = True

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValidationError(f"n_samples must be at least 1, got {self.n_samples}")

    def estimate(self, graph, psi, u, params, rng=None):
        if rng is None:
            raise ValidationError("Monte Carlo estimation needs a random stream")
        return mc_marginal(graph, psi, u, params, n_samples=self.n_samples, rng=rng)


@dataclass(frozen=True)
class HeuristicEstimator(Estimator):
    method = METHOD_HEURISTIC
    needs_rng = False

    def estimate(self, graph, psi, u, params, rng=None):
        return heuristic_marginal(graph, psi, u, params)


def estimator_from_spec(spec: str) -> Estimator:
    """Parse ``exact``, ``mc``, ``mc:<n>``, or ``heuristic``."""
    spec = str(spec).strip()
    if spec == "exact":
        return ExactEstimator()
    if spec == "heuristic":
        return HeuristicEstimator()
    if spec == "mc":
        return MonteCarloEstimator()
    if spec.startswith("mc:"):
        try:
            n = int(spec[len("mc:"):])
        except ValueError:
            raise ValidationError(f"bad sample count in estimator spec {spec!r}") from None
        return MonteCarloEstimator(n_samples=n)
    raise ValidationError(f"estimator must be exact, mc[:<n>], or heuristic, got {spec!r}")
