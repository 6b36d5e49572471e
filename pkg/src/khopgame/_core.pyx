# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cascade kernels.

Operation-for-operation mirror of ``_purepy``; see that module for the
array conventions and the semantics. Scalar uniforms come straight from
the generator's PCG64 bit stream (one ``next_double`` per draw, taken
under the bit generator's lock), and float accumulation follows the same
order as the reference code, so both backends are bit-identical. The
extension is built with contraction disabled; keep it that way or the
reference arithmetic diverges.
"""

import math

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int8_t, int32_t, int64_t
from numpy.random cimport bitgen_t

UNKNOWN = -1
ZERO = 0
ONE = 1


cdef bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef void _assign_hops_c(const int64_t[:] indptr, const int32_t[:] indices,
                         const int32_t[:] adj_eid, const int8_t[:] edge_state,
                         const int8_t[:] user_state, long long k,
                         int32_t[:] hops, int32_t[:] cur, int32_t[:] nxt) noexcept:
    cdef Py_ssize_t n = user_state.shape[0]
    cdef Py_ssize_t v, s, w, i, ncur, nnxt
    cdef long long d
    cdef int32_t[:] tmp
    for v in range(n):
        hops[v] = -1
    ncur = 0
    for v in range(n):
        if user_state[v] == 1:
            hops[v] = 0
            cur[ncur] = <int32_t> v
            ncur += 1
    d = 0
    while ncur > 0 and d < k:
        d += 1
        nnxt = 0
        for i in range(ncur):
            v = cur[i]
            for s in range(indptr[v], indptr[v + 1]):
                w = indices[s]
                if edge_state[adj_eid[s]] == 1 and hops[w] < 0:
                    hops[w] = <int32_t> d
                    nxt[nnxt] = <int32_t> w
                    nnxt += 1
        tmp = cur
        cur = nxt
        nxt = tmp
        ncur = nnxt


cdef long long _total_revenue_c(const int32_t[:] hops, const int64_t[:] revenue) noexcept:
    cdef Py_ssize_t v, n = hops.shape[0]
    cdef long long total = 0
    for v in range(n):
        if hops[v] >= 0:
            total += revenue[hops[v]]
    return total


cdef void _bfs_ball_c(const int64_t[:] indptr, const int32_t[:] indices,
                      const int32_t[:] sources, long long radius,
                      int32_t[:] dist, int32_t[:] cur, int32_t[:] nxt) noexcept:
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t v, s, w, i, ncur, nnxt
    cdef long long d
    cdef int32_t[:] tmp
    for v in range(n):
        dist[v] = -1
    if radius < 0:
        return
    ncur = 0
    for i in range(sources.shape[0]):
        v = sources[i]
        if dist[v] < 0:
            dist[v] = 0
            cur[ncur] = <int32_t> v
            ncur += 1
    d = 0
    while ncur > 0 and d < radius:
        d += 1
        nnxt = 0
        for i in range(ncur):
            v = cur[i]
            for s in range(indptr[v], indptr[v + 1]):
                w = indices[s]
                if dist[w] < 0:
                    dist[w] = <int32_t> d
                    nxt[nnxt] = <int32_t> w
                    nnxt += 1
        tmp = cur
        cur = nxt
        nxt = tmp
        ncur = nnxt


cdef long long _complete_rounds_c(const int64_t[:] indptr, const int32_t[:] indices,
                                  const int32_t[:] adj_eid, const double[:] edge_p,
                                  int8_t[:] user_state, int8_t[:] edge_state,
                                  long long k, bitgen_t *bg,
                                  int32_t[:] hops, int32_t[:] cur, int32_t[:] nxt) noexcept:
    cdef Py_ssize_t n = user_state.shape[0]
    cdef Py_ssize_t v, s, e
    cdef long long r, target, drawn = 0
    cdef bint seen_level
    for r in range(1, k + 1):
        _assign_hops_c(indptr, indices, adj_eid, edge_state, user_state, k, hops, cur, nxt)
        target = r - 1
        seen_level = False
        for v in range(n):
            if hops[v] != target:
                continue
            seen_level = True
            for s in range(indptr[v], indptr[v + 1]):
                e = adj_eid[s]
                if edge_state[e] == -1:
                    edge_state[e] = 1 if bg.next_double(bg.state) < edge_p[e] else 0
                    drawn += 1
        if not seen_level:
            break
    return drawn


cdef bint _has_open_rounds_c(const int64_t[:] indptr, const int32_t[:] indices,
                             const int32_t[:] adj_eid, const int8_t[:] edge_state,
                             const int8_t[:] user_state, long long k,
                             int32_t[:] hops, int32_t[:] cur, int32_t[:] nxt) noexcept:
    cdef Py_ssize_t n = user_state.shape[0]
    cdef Py_ssize_t v, s
    _assign_hops_c(indptr, indices, adj_eid, edge_state, user_state, k, hops, cur, nxt)
    for v in range(n):
        if 0 <= hops[v] <= k - 1:
            for s in range(indptr[v], indptr[v + 1]):
                if edge_state[adj_eid[s]] == -1:
                    return True
    return False


def assign_hops(indptr, indices, adj_eid, edge_state, user_state, k):
    n = user_state.shape[0]
    hops = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    _assign_hops_c(indptr, indices, adj_eid, edge_state, user_state, int(k), hops, cur, nxt)
    return hops


def total_revenue(hops, revenue):
    return int(_total_revenue_c(hops, revenue))


def bfs_ball(indptr, indices, sources, radius):
    n = indptr.shape[0] - 1
    src = np.ascontiguousarray(sources, dtype=np.int32)
    dist = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    _bfs_ball_c(indptr, indices, src, int(radius), dist, cur, nxt)
    return dist


def potentials(indptr, indices, k, revenue):
    cdef Py_ssize_t i, v
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef long long p
    out = np.zeros(n, dtype=np.int64)
    src = np.empty(1, dtype=np.int32)
    dist = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    cdef int64_t[:] out_v = out
    cdef int32_t[:] src_v = src
    cdef int32_t[:] dist_v = dist
    cdef int32_t[:] cur_v = cur
    cdef int32_t[:] nxt_v = nxt
    cdef const int64_t[:] indptr_v = indptr
    cdef const int32_t[:] indices_v = indices
    cdef const int64_t[:] revenue_v = revenue
    cdef long long kk = int(k)
    for i in range(n):
        src_v[0] = <int32_t> i
        _bfs_ball_c(indptr_v, indices_v, src_v, kk, dist_v, cur_v, nxt_v)
        p = 0
        for v in range(n):
            if dist_v[v] >= 0:
                p += revenue_v[dist_v[v]]
        out_v[i] = p
    return out


def complete_rounds(indptr, indices, adj_eid, edge_p, user_state, edge_state, k, rng):
    cdef bitgen_t *bg = _bitgen(rng)
    n = user_state.shape[0]
    hops = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    cdef long long drawn
    with rng.bit_generator.lock:
        drawn = _complete_rounds_c(
            indptr, indices, adj_eid, edge_p, user_state, edge_state, int(k), bg, hops, cur, nxt
        )
    return int(drawn)


def has_open_rounds(indptr, indices, adj_eid, edge_state, user_state, k):
    n = user_state.shape[0]
    hops = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    return bool(
        _has_open_rounds_c(indptr, indices, adj_eid, edge_state, user_state, int(k), hops, cur, nxt)
    )


def simulate_invitation(indptr, indices, adj_eid, edge_p, theta, user_state, edge_state, u, k, rng):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef const double[:] theta_v = theta
    cdef int8_t[:] us = user_state
    cdef int8_t[:] es = edge_state
    cdef Py_ssize_t uu = int(u)
    cdef bint accepted
    n = user_state.shape[0]
    hops = np.empty(n, dtype=np.int32)
    cur = np.empty(n, dtype=np.int32)
    nxt = np.empty(n, dtype=np.int32)
    with rng.bit_generator.lock:
        accepted = bg.next_double(bg.state) < theta_v[uu]
        us[uu] = 1 if accepted else 0
        if accepted:
            _complete_rounds_c(indptr, indices, adj_eid, edge_p, us, es, int(k), bg, hops, cur, nxt)
    return bool(accepted)


def mc_gain(indptr, indices, adj_eid, edge_p, theta, user_state, edge_state, u, k, revenue, n_samples, rng):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef const int64_t[:] indptr_v = indptr
    cdef const int32_t[:] indices_v = indices
    cdef const int32_t[:] adj_eid_v = adj_eid
    cdef const double[:] edge_p_v = edge_p
    cdef const double[:] theta_v = theta
    cdef const int8_t[:] us0 = user_state
    cdef const int8_t[:] es0 = edge_state
    cdef const int64_t[:] revenue_v = revenue
    cdef Py_ssize_t uu = int(u)
    cdef long long kk = int(k)
    cdef long long ns = int(n_samples)
    cdef Py_ssize_t n = user_state.shape[0]
    cdef Py_ssize_t m = edge_state.shape[0]

    hops_a = np.empty(n, dtype=np.int32)
    cur_a = np.empty(n, dtype=np.int32)
    nxt_a = np.empty(n, dtype=np.int32)
    us_a = np.empty(n, dtype=np.int8)
    es_a = np.empty(m, dtype=np.int8)
    cdef int32_t[:] hops = hops_a
    cdef int32_t[:] cur = cur_a
    cdef int32_t[:] nxt = nxt_a
    cdef int8_t[:] us = us_a
    cdef int8_t[:] es = es_a

    cdef bint open0 = _has_open_rounds_c(indptr_v, indices_v, adj_eid_v, es0, us0, kk, hops, cur, nxt)
    cdef long long base = 0
    if not open0:
        _assign_hops_c(indptr_v, indices_v, adj_eid_v, es0, us0, kk, hops, cur, nxt)
        base = _total_revenue_c(hops, revenue_v)

    cdef double acc = 0.0
    cdef double acc_sq = 0.0
    cdef double inc, mean, var, stderr
    cdef long long i, rev0, rev1
    cdef Py_ssize_t j
    with rng.bit_generator.lock:
        for i in range(ns):
            inc = 0.0
            if bg.next_double(bg.state) < theta_v[uu]:
                if open0:
                    for j in range(n):
                        us[j] = us0[j]
                    for j in range(m):
                        es[j] = es0[j]
                    _complete_rounds_c(indptr_v, indices_v, adj_eid_v, edge_p_v, us, es, kk, bg, hops, cur, nxt)
                    _assign_hops_c(indptr_v, indices_v, adj_eid_v, es, us, kk, hops, cur, nxt)
                    rev0 = _total_revenue_c(hops, revenue_v)
                else:
                    rev0 = base
                for j in range(n):
                    us[j] = us0[j]
                for j in range(m):
                    es[j] = es0[j]
                us[uu] = 1
                _complete_rounds_c(indptr_v, indices_v, adj_eid_v, edge_p_v, us, es, kk, bg, hops, cur, nxt)
                _assign_hops_c(indptr_v, indices_v, adj_eid_v, es, us, kk, hops, cur, nxt)
                rev1 = _total_revenue_c(hops, revenue_v)
                inc = <double> (rev1 - rev0)
            acc += inc
            acc_sq += inc * inc
    mean = acc / ns
    if ns > 1:
        var = (acc_sq - ns * mean * mean) / (ns - 1)
        if var < 0.0:
            var = 0.0
        stderr = math.sqrt(var / ns)
    else:
        stderr = 0.0
    return mean, stderr


def heuristic_gain(indptr, indices, adj_eid, edge_p, edge_state, theta, hops, u, k, revenue):
    cdef const int64_t[:] indptr_v = indptr
    cdef const int32_t[:] indices_v = indices
    cdef const int32_t[:] adj_eid_v = adj_eid
    cdef const double[:] edge_p_v = edge_p
    cdef const int8_t[:] edge_state_v = edge_state
    cdef const double[:] theta_v = theta
    cdef const int32_t[:] hops_v = hops
    cdef const int64_t[:] revenue_v = revenue
    cdef Py_ssize_t uu = int(u)
    cdef long long kk = int(k)
    cdef Py_ssize_t n = indptr.shape[0] - 1

    layer_a = np.empty(n, dtype=np.int32)
    cur_a = np.empty(n, dtype=np.int32)
    nxt_a = np.empty(n, dtype=np.int32)
    prob_a = np.zeros(n, dtype=np.float64)
    cdef int32_t[:] layer = layer_a
    cdef int32_t[:] cur = cur_a
    cdef int32_t[:] nxt = nxt_a
    cdef double[:] prob = prob_a
    cdef int32_t[:] tmp

    cdef Py_ssize_t v, s, w, e, idx, ncur, nnxt
    cdef long long d, i, h
    for v in range(n):
        layer[v] = -1
    layer[uu] = 0
    cur[0] = <int32_t> uu
    ncur = 1
    d = 0
    while ncur > 0 and d < kk:
        d += 1
        nnxt = 0
        for idx in range(ncur):
            v = cur[idx]
            for s in range(indptr_v[v], indptr_v[v + 1]):
                w = indices_v[s]
                if edge_state_v[adj_eid_v[s]] != 0 and layer[w] < 0:
                    layer[w] = <int32_t> d
                    nxt[nnxt] = <int32_t> w
                    nnxt += 1
        tmp = cur
        cur = nxt
        nxt = tmp
        ncur = nnxt

    cdef double total, miss, q, pv, gain
    prob[uu] = 1.0
    h = hops_v[uu]
    if h < 0:
        total = <double> revenue_v[0]
    elif h > 0:
        total = <double> (revenue_v[0] - revenue_v[h])
    else:
        total = 0.0
    for i in range(1, kk + 1):
        for v in range(n):
            if layer[v] != i:
                continue
            miss = 1.0
            for s in range(indptr_v[v], indptr_v[v + 1]):
                w = indices_v[s]
                e = adj_eid_v[s]
                if layer[w] == i - 1 and edge_state_v[e] != 0:
                    q = 1.0 if edge_state_v[e] == 1 else edge_p_v[e]
                    miss *= 1.0 - prob[w] * q
            pv = 1.0 - miss
            prob[v] = pv
            h = hops_v[v]
            if h < 0:
                gain = <double> revenue_v[i]
            elif h > i:
                gain = <double> (revenue_v[i] - revenue_v[h])
            else:
                gain = 0.0
            total += pv * gain
    return theta_v[uu] * total
