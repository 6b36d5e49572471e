"""Pure-Python cascade kernels.

This module is the reference implementation of the hot inner loops. The
compiled module ``_core`` mirrors it operation for operation: both draw
scalars from the same PCG64 bit stream (``Generator.random()`` is a single
``next_double`` call) and accumulate floats in the same order, so the two
backends produce bit-identical results. Keep any change here in lockstep
with ``_core.pyx``.

Array conventions shared by both backends:

    indptr   int64[n+1]   CSR row pointers
    indices  int32[nnz]   CSR neighbor indices, sorted within each row
    adj_eid  int32[nnz]   edge id for each CSR slot
    edge_p   float64[m]   per-edge success probability
    theta    float64[n]   per-node acceptance probability
    user_state int8[n]    -1 unknown, 0 rejected, 1 accepted
    edge_state int8[m]    -1 unknown, 0 failed, 1 live
    revenue  int64[k+1]   units per hop

State arrays are mutated in place; callers own the copies.
"""

from __future__ import annotations

import math

import numpy as np

UNKNOWN = -1
ZERO = 0
ONE = 1


def assign_hops(indptr, indices, adj_eid, edge_state, user_state, k):
    """Minimum hop label for every cascade participant.

    Multi-source BFS from all accepted initiators along live (One) edges,
    truncated at depth k. Returns int32[n] with -1 for non-participants.
    """
    n = user_state.shape[0]
    hops = np.full(n, -1, dtype=np.int32)
    frontier = []
    for v in range(n):
        if user_state[v] == ONE:
            hops[v] = 0
            frontier.append(v)
    d = 0
    while frontier and d < k:
        d += 1
        nxt = []
        for v in frontier:
            for s in range(indptr[v], indptr[v + 1]):
                w = indices[s]
                if edge_state[adj_eid[s]] == ONE and hops[w] < 0:
                    hops[w] = d
                    nxt.append(w)
        frontier = nxt
    return hops


def total_revenue(hops, revenue):
    """Sum of revenue units over all participants (int)."""
    total = 0
    for h in hops:
        if h >= 0:
            total += int(revenue[h])
    return total


def bfs_ball(indptr, indices, sources, radius):
    """Structural distances from `sources`, ignoring edge states.

    Returns int32[n]: distance for nodes within `radius` hops of any source,
    -1 beyond. A negative radius marks nothing, not even the sources.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    if radius < 0:
        return dist
    frontier = []
    for v in sources:
        v = int(v)
        if dist[v] < 0:
            dist[v] = 0
            frontier.append(v)
    d = 0
    while frontier and d < radius:
        d += 1
        nxt = []
        for v in frontier:
            for s in range(indptr[v], indptr[v + 1]):
                w = indices[s]
                if dist[w] < 0:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def potentials(indptr, indices, k, revenue):
    """Best-case revenue anchored at each node: every edge assumed live.

    For node i with BFS layers S_0={i}, S_1, ..., S_k over the full graph,
    returns P_i = sum_j revenue[j] * |S_j| as int64[n].
    """
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.int64)
    src = np.empty(1, dtype=np.int32)
    for i in range(n):
        src[0] = i
        dist = bfs_ball(indptr, indices, src, k)
        p = 0
        for v in range(n):
            if dist[v] >= 0:
                p += int(revenue[dist[v]])
        out[i] = p
    return out


def complete_rounds(indptr, indices, adj_eid, edge_p, user_state, edge_state, k, rng):
    """Run every still-open cascade round, sampling unknown edges in place.

    Round r lets each node currently at hop r-1 sample its unknown incident
    edges. Iteration order is fixed (ascending node index, then CSR slot
    order) because the compiled backend must consume the identical draw
    sequence. Returns the number of edges drawn.
    """
    n = user_state.shape[0]
    drawn = 0
    for r in range(1, k + 1):
        hops = assign_hops(indptr, indices, adj_eid, edge_state, user_state, k)
        target = r - 1
        seen_level = False
        for v in range(n):
            if hops[v] != target:
                continue
            seen_level = True
            for s in range(indptr[v], indptr[v + 1]):
                e = adj_eid[s]
                if edge_state[e] == UNKNOWN:
                    edge_state[e] = ONE if rng.random() < edge_p[e] else ZERO
                    drawn += 1
        if not seen_level:
            # No node at hop r-1 means later levels cannot exist either.
            break
    return drawn


def has_open_rounds(indptr, indices, adj_eid, edge_state, user_state, k):
    """True if completing the open rounds would sample at least one edge.

    Draw-free: up to the first sampled edge the process is deterministic, so
    a single hop pass decides whether any randomness remains.
    """
    n = user_state.shape[0]
    hops = assign_hops(indptr, indices, adj_eid, edge_state, user_state, k)
    for v in range(n):
        if 0 <= hops[v] <= k - 1:
            for s in range(indptr[v], indptr[v + 1]):
                if edge_state[adj_eid[s]] == UNKNOWN:
                    return True
    return False


def simulate_invitation(indptr, indices, adj_eid, edge_p, theta, user_state, edge_state, u, k, rng):
    """Invite node u: acceptance draw, then the cascade rounds. In place."""
    accepted = rng.random() < theta[u]
    user_state[u] = ONE if accepted else ZERO
    if accepted:
        complete_rounds(indptr, indices, adj_eid, edge_p, user_state, edge_state, k, rng)
    return bool(accepted)


def mc_gain(indptr, indices, adj_eid, edge_p, theta, user_state, edge_state, u, k, revenue, n_samples, rng):
    """Monte Carlo estimate of the expected revenue gain of inviting u.

    Each sample draws the acceptance, then (on acceptance) the revenue with
    and without u as a fresh initiator, completing any open rounds both
    times; rejected samples contribute zero. Returns (mean, stderr).
    """
    n = user_state.shape[0]
    open0 = has_open_rounds(indptr, indices, adj_eid, edge_state, user_state, k)
    base = 0
    if not open0:
        hops = assign_hops(indptr, indices, adj_eid, edge_state, user_state, k)
        base = total_revenue(hops, revenue)
    us = np.empty_like(user_state)
    es = np.empty_like(edge_state)
    acc = 0.0
    acc_sq = 0.0
    for _ in range(n_samples):
        inc = 0.0
        if rng.random() < theta[u]:
            if open0:
                np.copyto(us, user_state)
                np.copyto(es, edge_state)
                complete_rounds(indptr, indices, adj_eid, edge_p, us, es, k, rng)
                rev0 = total_revenue(assign_hops(indptr, indices, adj_eid, es, us, k), revenue)
            else:
                rev0 = base
            np.copyto(us, user_state)
            np.copyto(es, edge_state)
            us[u] = ONE
            complete_rounds(indptr, indices, adj_eid, edge_p, us, es, k, rng)
            rev1 = total_revenue(assign_hops(indptr, indices, adj_eid, es, us, k), revenue)
            inc = float(rev1 - rev0)
        acc += inc
        acc_sq += inc * inc
    mean = acc / n_samples
    if n_samples > 1:
        var = (acc_sq - n_samples * mean * mean) / (n_samples - 1)
        if var < 0.0:
            var = 0.0
        stderr = math.sqrt(var / n_samples)
    else:
        stderr = 0.0
    return mean, stderr


def heuristic_gain(indptr, indices, adj_eid, edge_p, edge_state, theta, hops, u, k, revenue):
    """Layered-BFS approximation of the expected revenue gain of inviting u.

    Layers S_0..S_k are BFS distances from u over non-failed edges. Each
    node's participation probability is propagated layer by layer treating
    predecessor events as independent:

        P(v in S_i joins) = 1 - prod over w in S_{i-1} adjacent via a
                            non-failed edge of (1 - P(w) * q_wv)

    with q_wv = 1 for an already-live edge and p_wv for an unknown one. A
    node joining at layer i gains revenue[i] if it is fresh, the upgrade
    revenue[i] - revenue[h] if it currently sits at hop h > i, and nothing
    otherwise. Exact whenever k <= 1 or all relevant unknown edges have
    p = 1; an approximation elsewhere.

    `hops` is the current participant labeling (from assign_hops).
    Accumulation order is fixed: layers ascending, node index ascending,
    CSR slot order inside each product.
    """
    n = indptr.shape[0] - 1
    layer = np.full(n, -1, dtype=np.int32)
    layer[u] = 0
    frontier = [u]
    d = 0
    while frontier and d < k:
        d += 1
        nxt = []
        for v in frontier:
            for s in range(indptr[v], indptr[v + 1]):
                w = indices[s]
                if edge_state[adj_eid[s]] != ZERO and layer[w] < 0:
                    layer[w] = d
                    nxt.append(w)
        frontier = nxt

    prob = np.zeros(n, dtype=np.float64)
    prob[u] = 1.0
    h = hops[u]
    if h < 0:
        total = float(revenue[0])
    elif h > 0:
        total = float(revenue[0] - revenue[h])
    else:
        total = 0.0
    for i in range(1, k + 1):
        for v in range(n):
            if layer[v] != i:
                continue
            miss = 1.0
            for s in range(indptr[v], indptr[v + 1]):
                w = indices[s]
                e = adj_eid[s]
                if layer[w] == i - 1 and edge_state[e] != ZERO:
                    q = 1.0 if edge_state[e] == ONE else edge_p[e]
                    miss *= 1.0 - prob[w] * q
            pv = 1.0 - miss
            prob[v] = pv
            h = hops[v]
            if h < 0:
                gain = float(revenue[i])
            elif h > i:
                gain = float(revenue[i] - revenue[h])
            else:
                gain = 0.0
            total += pv * gain
    return theta[u] * total
