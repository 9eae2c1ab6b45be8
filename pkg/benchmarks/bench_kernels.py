#!/usr/bin/env python3
"""Benchmark the hot kernels (biased walks, skip-gram training) under
the numba backend and the pure-Python/numpy fallback.

The backend is fixed at import time by TGNC_DISABLE_NUMBA, so the
script re-launches itself in a subprocess for the other path and then
prints a side-by-side comparison plus an agreement check (walks are
integer draws and must match exactly; trained vectors to 1e-9).

Usage: python benchmarks/bench_kernels.py [--nodes N] [--json]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def build_graph(n_nodes, avg_degree, seed):
    from tgnc.embedding import GraphView

    rng = np.random.default_rng(seed)
    ids = [f"n{i:04d}" for i in range(n_nodes)]
    pairs = set()
    while len(pairs) < n_nodes * avg_degree:
        u, v = rng.integers(0, n_nodes, size=2)
        if u != v:
            pairs.add((ids[int(min(u, v))], ids[int(max(u, v))]))
    edges = [(u, v, float(rng.uniform(0.5, 2.0))) for u, v in sorted(pairs)]
    return GraphView.from_edges(ids, edges, directed=False)


def run_measurement(n_nodes):
    from tgnc import _kernels
    from tgnc.embedding import SkipGramConfig, WalkConfig, generate_walk_matrix, node2vec

    graph = build_graph(n_nodes, avg_degree=4, seed=1)
    walk_cfg = WalkConfig(walks_per_node=4, walk_length=30,
                          return_param=0.5, inout_param=2.0, seed=2)
    sg_cfg = SkipGramConfig(dim=32, window=4, negatives=5, epochs=2, seed=2)

    # warm-up triggers JIT compilation so it is not billed to the kernel
    generate_walk_matrix(graph, walk_cfg)

    t0 = time.perf_counter()
    walks = generate_walk_matrix(graph, walk_cfg)
    walk_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    matrix = node2vec(graph, walk_cfg, sg_cfg)
    node2vec_seconds = time.perf_counter() - t0

    return {
        "backend": "numba" if _kernels.NUMBA_ENABLED else "numpy-fallback",
        "nodes": n_nodes,
        "walk_tokens": int((walks >= 0).sum()),
        "walk_seconds": walk_seconds,
        "node2vec_seconds": node2vec_seconds,
        "walks": walks.tolist(),
        "vectors": matrix.vectors.tolist(),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=300)
    parser.add_argument("--json", action="store_true", help="emit raw JSON")
    parser.add_argument("--_child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    result = run_measurement(args.nodes)
    if args._child:
        print(json.dumps(result))
        return

    env = dict(os.environ)
    env["TGNC_DISABLE_NUMBA"] = "0" if os.environ.get("TGNC_DISABLE_NUMBA") not in (None, "", "0") else "1"
    other = json.loads(subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--nodes", str(args.nodes), "--_child"],
        env=env, capture_output=True, text=True, check=True).stdout)

    results = {result["backend"]: result, other["backend"]: other}
    fast = results.get("numba")
    slow = results.get("numpy-fallback")
    if fast is None or slow is None:
        print("numba unavailable; only the fallback path was measured:")
        print(json.dumps({k: v for k, v in result.items()
                          if k not in ("walks", "vectors")}, indent=2))
        return

    walks_equal = fast["walks"] == slow["walks"]
    vec_close = np.allclose(np.array(fast["vectors"]), np.array(slow["vectors"]),
                            rtol=1e-9, atol=1e-12)
    if args.json:
        print(json.dumps({
            "nodes": fast["nodes"],
            "walk_tokens": fast["walk_tokens"],
            "numba": {k: fast[k] for k in ("walk_seconds", "node2vec_seconds")},
            "numpy_fallback": {k: slow[k] for k in ("walk_seconds", "node2vec_seconds")},
            "walks_identical": walks_equal,
            "vectors_allclose": vec_close,
        }, indent=2))
    else:
        print(f"graph: {fast['nodes']} nodes, {fast['walk_tokens']} walk tokens")
        print(f"{'kernel':<12} {'numba':>12} {'numpy':>12} {'speedup':>9}")
        for label, key in (("walks", "walk_seconds"), ("node2vec", "node2vec_seconds")):
            ratio = slow[key] / fast[key] if fast[key] > 0 else float("inf")
            print(f"{label:<12} {fast[key]:>11.3f}s {slow[key]:>11.3f}s {ratio:>8.1f}x")
        print(f"walks identical across backends: {walks_equal}")
        print(f"vectors allclose across backends: {vec_close}")
    if not (walks_equal and vec_close):
        sys.exit(1)


if __name__ == "__main__":
    main()
