"""Cascade state machine, partial realizations, hop assignment, and revenue.

A user state records the outcome of a direct invitation (accepted users are
0-hop initiators); an edge state records whether a collaboration along that
edge succeeded. Both start Unknown and are sampled lazily on first
observation; once determined they never change. Participants are the nodes
reachable from an initiator within k live-edge hops, each at its minimum
such distance, and a node that declined its own invitation can still be
recruited through an edge.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from . import _backend, seeding
from .errors import ContractViolation, ParseError, ValidationError
from .network import GameParams, Graph


class TriState(IntEnum):
    UNKNOWN = -1
    ZERO = 0
    ONE = 1


def _as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return seeding.generator(rng)


class PartialRealization:
    """Observed user and edge states plus the invitation log.

    A value object: every update returns a new instance, so concurrent
    readers can share one safely. The set of determined users always equals
    the set of invited users.
    """

    __slots__ = ("user_state", "edge_state", "invited")

    def __init__(self, user_state, edge_state, invited=()):
        self.user_state = np.ascontiguousarray(user_state, dtype=np.int8)
        self.edge_state = np.ascontiguousarray(edge_state, dtype=np.int8)
        self.invited = tuple(int(i) for i in invited)
        determined = {int(i) for i in np.nonzero(self.user_state != TriState.UNKNOWN)[0]}
        if determined != set(self.invited):
            raise ValidationError("determined users must be exactly the invited users")

    @classmethod
    def empty(cls, graph: Graph):
        return cls(
            np.full(graph.n, TriState.UNKNOWN, dtype=np.int8),
            np.full(graph.m, TriState.UNKNOWN, dtype=np.int8),
        )

    # --- domains ---------------------------------------------------------

    @property
    def dx(self):
        """Indices of users with a determined state (the invited set)."""
        return frozenset(self.invited)

    @property
    def dy(self):
        """Indices of edges with a determined state."""
        return frozenset(int(e) for e in np.nonzero(self.edge_state != TriState.UNKNOWN)[0])

    def user(self, i):
        return TriState(int(self.user_state[i]))

    def edge(self, e):
        return TriState(int(self.edge_state[e]))

    # --- growth ----------------------------------------------------------

    def with_user_state(self, i, state):
        """Determine user i's state. Unknown -> Zero/One only."""
        state = TriState(state)
        if state == TriState.UNKNOWN:
            raise ContractViolation("cannot set a user state back to Unknown")
        if self.user_state[i] != TriState.UNKNOWN:
            raise ContractViolation(f"user state {i} is already determined")
        us = self.user_state.copy()
        us[i] = state
        return PartialRealization(us, self.edge_state, self.invited + (int(i),))

    def with_edge_state(self, e, state):
        """Determine edge e's state. Unknown -> Zero/One only."""
        state = TriState(state)
        if state == TriState.UNKNOWN:
            raise ContractViolation("cannot set an edge state back to Unknown")
        if self.edge_state[e] != TriState.UNKNOWN:
            raise ContractViolation(f"edge state {e} is already determined")
        es = self.edge_state.copy()
        es[e] = state
        return PartialRealization(self.user_state, es, self.invited)

    def is_subrealization_of(self, other):
        """True if `other` extends this realization without contradicting it."""
        if self.user_state.shape != other.user_state.shape or self.edge_state.shape != other.edge_state.shape:
            return False
        for mine, theirs in ((self.user_state, other.user_state), (self.edge_state, other.edge_state)):
            det = mine != TriState.UNKNOWN
            if not np.array_equal(mine[det], theirs[det]):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, PartialRealization):
            return NotImplemented
        return (
            self.invited == other.invited
            and np.array_equal(self.user_state, other.user_state)
            and np.array_equal(self.edge_state, other.edge_state)
        )

    __hash__ = None

    # --- serialization -----------------------------------------------------

    def dump(self, graph: Graph):
        """Line dump: ``U <node> <0|1>`` per invitation, then ``E <u> <v> <0|1>``."""
        lines = []
        for i in self.invited:
            lines.append(f"U {graph.node_ids[i]} {int(self.user_state[i])}")
        for e in range(graph.m):
            if self.edge_state[e] != TriState.UNKNOWN:
                a, b = graph.edges[e]
                lines.append(f"E {graph.node_ids[a]} {graph.node_ids[b]} {int(self.edge_state[e])}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_dump(cls, graph: Graph, text, path="<psi>"):
        psi = cls.empty(graph)
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith(("#", "%")):
                continue
            parts = line.split()
            if parts[0] == "U" and len(parts) == 3:
                i = graph.index_of(parts[1])
                psi = psi.with_user_state(i, _parse_bit(parts[2], path, line_no))
            elif parts[0] == "E" and len(parts) == 4:
                e = graph.edge_index(parts[1], parts[2])
                psi = psi.with_edge_state(e, _parse_bit(parts[3], path, line_no))
            else:
                raise ParseError(path, line_no, f"expected 'U <node> <0|1>' or 'E <u> <v> <0|1>', got {line!r}")
        return psi

    def __repr__(self):
        return f"PartialRealization(invited={len(self.invited)}, edges_observed={len(self.dy)})"


def _parse_bit(token, path, line_no):
    if token == "0":
        return TriState.ZERO
    if token == "1":
        return TriState.ONE
    raise ParseError(path, line_no, f"state must be 0 or 1, got {token!r}")


class HopAssignment:
    """Participant -> minimum hop map over a graph's internal indices."""

    __slots__ = ("hops", "_graph")

    def __init__(self, hops, graph: Graph):
        self.hops = hops
        self._graph = graph

    def hop_of(self, node_id):
        """Hop of a participant, or None."""
        h = int(self.hops[self._graph.index_of(node_id)])
        return h if h >= 0 else None

    def as_dict(self):
        return {
            self._graph.node_ids[v]: int(h)
            for v, h in enumerate(self.hops)
            if h >= 0
        }

    def participant_count(self):
        return int(np.count_nonzero(self.hops >= 0))


def assign_hops(graph: Graph, psi: PartialRealization, k: int) -> HopAssignment:
    """Minimum-hop labels: BFS from every accepted initiator over live edges."""
    hops = _backend.kernels.assign_hops(
        graph.indptr, graph.indices, graph.adj_eid, psi.edge_state, psi.user_state, int(k)
    )
    return HopAssignment(hops, graph)


def revenue(hops: HopAssignment, params: GameParams) -> int:
    """Total revenue units of a hop assignment: sum of R_hop over participants."""
    if hops.hops.size and int(hops.hops.max()) > params.k:
        raise ContractViolation(
            f"hop {int(hops.hops.max())} exceeds the revenue table (k={params.k})"
        )
    return _backend.kernels.total_revenue(hops.hops, params.revenue_array())


def simulate_invitation(graph: Graph, psi: PartialRealization, u, params: GameParams, rng):
    """Invite u and observe the outcome.

    Samples the acceptance (probability theta_u); on acceptance runs the
    cascade round by round, each node newly at hop r-1 sampling its unknown
    incident edges, stopping after round k. Already-determined states are
    never touched. Returns (grown realization, accepted flag).
    """
    i = graph.index_of(u)
    if i in psi.dx:
        raise ContractViolation(f"node {u!r} was already invited")
    gen = _as_generator(rng)
    us = psi.user_state.copy()
    es = psi.edge_state.copy()
    accepted = _backend.kernels.simulate_invitation(
        graph.indptr, graph.indices, graph.adj_eid, graph.edge_p, graph.theta,
        us, es, i, params.k, gen,
    )
    return PartialRealization(us, es, psi.invited + (i,)), accepted


def current_revenue(graph: Graph, psi: PartialRealization, params: GameParams) -> int:
    """Revenue already determined by psi.

    The cascade semantics determine every participant's hop as soon as it is
    reached, so this value never changes when unobserved far-away edges are
    revealed later.
    """
    return revenue(assign_hops(graph, psi, params.k), params)
