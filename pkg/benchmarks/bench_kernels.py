#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Workloads mirror real usage: FNV-1a over canonical-state-sized blobs,
Levenshtein over action-token traces, and the splitmix64 stall stream.
"""

from __future__ import annotations

import argparse
import random
import time

from opsai._kernels import pure

try:
    from opsai._kernels import _ckern as ckern
except ImportError:
    ckern = None


def _bench(fn, args_list, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def workloads():
    rng = random.Random(42)
    blobs = [bytes(rng.randrange(256) for _ in range(400)) for _ in range(500)]
    traces = []
    for _ in range(400):
        a = bytes(rng.choice(b"PRGXLUTSB") for _ in range(rng.randrange(10, 60)))
        b = bytes(rng.choice(b"PRGXLUTSB") for _ in range(rng.randrange(10, 60)))
        traces.append((a, b))
    seeds = [(rng.randrange(2**64),) for _ in range(20_000)]
    return [
        ("fnv1a64 (400B x500)", "fnv1a64", [(b,) for b in blobs]),
        ("levenshtein (10-60 tok x400)", "levenshtein", traces),
        ("splitmix64_next (x20k)", "splitmix64_next", seeds),
    ]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if ckern is None:
        print("compiled kernels not built; showing pure-Python timings only\n")

    rows = []
    for label, name, payload in workloads():
        pure_t = _bench(getattr(pure, name), payload, args.repeat)
        if ckern is not None:
            c_t = _bench(getattr(ckern, name), payload, args.repeat)
            rows.append((label, pure_t, c_t, pure_t / c_t))
        else:
            rows.append((label, pure_t, None, None))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}")
    for label, pure_t, c_t, speedup in rows:
        if c_t is None:
            print(f"{label:<{width}}  {pure_t * 1e3:>8.2f}ms  {'-':>10}  {'-':>8}")
        else:
            print(
                f"{label:<{width}}  {pure_t * 1e3:>8.2f}ms  {c_t * 1e3:>8.2f}ms  {speedup:>7.1f}x"
            )


if __name__ == "__main__":
    main()
