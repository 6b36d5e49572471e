"""Compare the pure-Python and compiled kernel backends.

Times the four hot kernels on a seeded random graph and prints a table
with per-call times and speedups. The two backends are imported directly
(bypassing the env-var selection) so both are exercised in one process.

Usage: python3 benchmarks/bench_backends.py [--nodes 300] [--degree 6]
       [--k 2] [--repeat 5]
"""

import argparse
import time

import numpy as np

from khopgame import _purepy, seeding
from khopgame.network import Graph

try:
    from khopgame import _core
except ImportError:
    _core = None


def random_graph(n, avg_degree, seed):
    rng = np.random.default_rng(seed)
    target_m = int(n * avg_degree / 2)
    seen = set()
    edges = []
    while len(edges) < target_m:
        u, v = rng.integers(n, size=2)
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        edges.append((f"v{key[0]}", f"v{key[1]}", 0.5))
    theta = rng.random(n)
    return Graph.build([f"v{i}" for i in range(n)], edges, theta=theta)


def time_call(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=300)
    ap.add_argument("--degree", type=float, default=6.0)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--mc-samples", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _core is None:
        print("compiled backend unavailable; build the extension first")
        return 1

    g = random_graph(args.nodes, args.degree, args.seed)
    revenue = np.asarray([8, 6, 4, 2][: args.k + 1], dtype=np.int64)
    k = args.k
    us = np.full(g.n, -1, dtype=np.int8)
    es = np.full(g.m, -1, dtype=np.int8)
    us[0] = 1

    def seeded_state():
        u, e = us.copy(), es.copy()
        _purepy.complete_rounds(g.indptr, g.indices, g.adj_eid, g.edge_p, u, e, k, seeding.generator(1))
        return u, e

    us_done, es_done = seeded_state()
    hops = _purepy.assign_hops(g.indptr, g.indices, g.adj_eid, es_done, us_done, k)

    cases = {
        "assign_hops": lambda mod: mod.assign_hops(g.indptr, g.indices, g.adj_eid, es_done, us_done, k),
        "complete_rounds": lambda mod: mod.complete_rounds(
            g.indptr, g.indices, g.adj_eid, g.edge_p, us.copy(), es.copy(), k, seeding.generator(2)
        ),
        "mc_gain": lambda mod: mod.mc_gain(
            g.indptr, g.indices, g.adj_eid, g.edge_p, g.theta, us, es, 1, k, revenue,
            args.mc_samples, seeding.generator(3),
        ),
        "heuristic_gain": lambda mod: mod.heuristic_gain(
            g.indptr, g.indices, g.adj_eid, g.edge_p, es_done, g.theta, hops, 1, k, revenue
        ),
    }

    print(f"graph: n={g.n} m={g.m} k={k} mc_samples={args.mc_samples} (best of {args.repeat})")
    print(f"{'kernel':<16}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py, r_py = time_call(lambda: call(_purepy), args.repeat)
        t_c, r_c = time_call(lambda: call(_core), args.repeat)
        if isinstance(r_py, np.ndarray):
            agree = np.array_equal(r_py, r_c)
        else:
            agree = r_py == r_c
        flag = "" if agree else "  MISMATCH"
        print(f"{name:<16}{t_py * 1e3:>10.3f}ms{t_c * 1e3:>10.3f}ms{t_py / t_c:>9.1f}x{flag}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
