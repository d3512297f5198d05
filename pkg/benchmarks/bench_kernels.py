#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the two hot kernels (Markov scan, phase fill) and a full preset trace
generation under each backend, and checks the outputs are bit-identical.

    python benchmarks/bench_kernels.py [n_snapshots]
"""

import sys
import time

import numpy as np

from railtdl import GenConfig, preset_5gr
from railtdl import _kernels_py

try:
    from railtdl import _ext
except ImportError:
    _ext = None


def timeit(fn, repeats=5):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_kernels(n):
    p = preset_5gr()
    L = p.n_taps
    rng = np.random.default_rng(0)
    p01 = np.array([t.chain.p01 for t in p.taps])
    p11 = np.array([t.chain.p11 for t in p.taps])
    s0 = (rng.random(L) < np.array([t.chain.p1_init for t in p.taps])).astype(np.uint8)
    u = rng.random((n - 1, L))

    rows = []
    t_py, states = timeit(lambda: _kernels_py.markov_scan(u, p01, p11, s0))
    rows.append(("markov_scan", t_py, None))
    if _ext is not None:
        t_cy, states_cy = timeit(lambda: _ext.markov_scan(u, p01, p11, s0))
        assert np.array_equal(states, states_cy), "backend outputs differ"
        rows[-1] = ("markov_scan", t_py, t_cy)

    starts = states.astype(bool).copy()
    starts[1:] &= states[:-1] == 0
    births = starts.sum(axis=0)
    offsets = np.concatenate(([0], np.cumsum(births))).astype(np.int64)
    phase0 = rng.uniform(0, np.pi, offsets[-1])
    incr = rng.uniform(-1, 1, offsets[-1])

    t_py, phases = timeit(lambda: _kernels_py.phase_fill(states, phase0, incr, offsets[:-1]))
    rows.append(("phase_fill", t_py, None))
    if _ext is not None:
        t_cy, phases_cy = timeit(lambda: _ext.phase_fill(states, phase0, incr, offsets[:-1]))
        assert np.array_equal(phases, phases_cy), "backend outputs differ"
        rows[-1] = ("phase_fill", t_py, t_cy)
    return rows


def bench_generate(n):
    # full pipeline through railtdl.generate under each backend
    import railtdl.generator as gen_mod
    import railtdl.kernels as kernels

    p = preset_5gr()
    cfg = GenConfig(n_snapshots=n, rng_seed=1)

    def run_with(impl):
        saved = (kernels.markov_scan, kernels.phase_fill,
                 gen_mod.kernels.markov_scan, gen_mod.kernels.phase_fill)
        kernels.markov_scan = impl.markov_scan
        kernels.phase_fill = impl.phase_fill
        try:
            return timeit(lambda: gen_mod.generate(p, cfg), repeats=3)
        finally:
            (kernels.markov_scan, kernels.phase_fill,
             gen_mod.kernels.markov_scan, gen_mod.kernels.phase_fill) = saved

    t_py, trace_py = run_with(_kernels_py)
    if _ext is None:
        return [("generate (full)", t_py, None)]
    t_cy, trace_cy = run_with(_ext)
    assert np.array_equal(trace_py.gains, trace_cy.gains), "traces differ"
    return [("generate (full)", t_py, t_cy)]


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
    print(f"n_snapshots = {n}, taps = 5"
          + ("" if _ext is not None else "  (extension not built: python only)"))
    rows = bench_kernels(n) + bench_generate(n)
    print(f"{'kernel':<18}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, t_py, t_cy in rows:
        if t_cy is None:
            print(f"{name:<18}{t_py * 1e3:>10.1f}ms{'-':>12}{'-':>10}")
        else:
            print(f"{name:<18}{t_py * 1e3:>10.1f}ms{t_cy * 1e3:>10.1f}ms"
                  f"{t_py / t_cy:>9.1f}x")
    if _ext is not None:
        print("outputs bit-identical across backends")


if __name__ == "__main__":
    main()
