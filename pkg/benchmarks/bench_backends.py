#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs single-source and boundary all-pairs shortest paths on a sequence of
box graphs under both backends and prints a timing table.  Usage:

    python benchmarks/bench_backends.py [--sizes 20,40,80] [--repeat 3]
"""

import argparse
import time

import numpy as np

import hamlip as hl
from hamlip import backend


def build(n):
    frame = hl.Euclidean(2)
    dom = hl.build_domain("box", [[0.0, 1.0], [0.0, 1.0]], 1.0 / n, frame=frame)
    return hl.build_graph(dom, frame, hl.StencilSpec(2))


def bench(graph, name, repeat):
    backend.set_backend(name)
    src = graph.domain.vertex_near([0.5, 0.5])
    boundary = graph.domain.boundary_ids[:32]
    # warm up (numba compilation)
    hl.dist_from(graph, hl.PNorm(), 1.0, src)
    t_single = []
    t_pairs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        f1 = hl.dist_from(graph, hl.PNorm(), 1.0, src)
        t_single.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        m1 = hl.all_pairs(graph, hl.PNorm(), 1.0, boundary, targets=boundary)
        t_pairs.append(time.perf_counter() - t0)
    backend.set_backend(None)
    return min(t_single), min(t_pairs), f1.values, m1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="20,40,80")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"{'n':>4} {'V':>7} {'E':>8}   "
          f"{'sssp numba':>11} {'sssp numpy':>11} {'speedup':>8}   "
          f"{'pairs numba':>11} {'pairs numpy':>11} {'speedup':>8}")
    for n in sizes:
        graph = build(n)
        s_nb, p_nb, f_nb, m_nb = bench(graph, "numba", args.repeat)
        s_np, p_np, f_np, m_np = bench(graph, "numpy", args.repeat)
        assert np.array_equal(f_nb, f_np), "backends disagree on the distance field"
        assert np.array_equal(m_nb, m_np), "backends disagree on the all-pairs matrix"
        print(f"{n:>4} {graph.num_vertices:>7} {graph.num_edges:>8}   "
              f"{s_nb:>10.4f}s {s_np:>10.4f}s {s_np / s_nb:>7.1f}x   "
              f"{p_nb:>10.4f}s {p_np:>10.4f}s {p_np / p_nb:>7.1f}x")


if __name__ == "__main__":
    main()
