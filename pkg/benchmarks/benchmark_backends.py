#!/usr/bin/env python3
"""Benchmark the compiled stepping kernels against the pure-Python fallback.

Runs the production preset on each available backend, reports wall time and
per-step cost, and quantifies cross-backend agreement on a shortened run
(the loop is discontinuous feedback, so long-horizon trajectories of the two
backends may eventually diverge at branch boundaries; the short-run check is
the meaningful one).

Usage:
    python benchmarks/benchmark_backends.py [--preset ges_fig2] [--repeats 3]
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nkslab import cli, engine                      # noqa: E402
from nkslab.backend import available_backends, get_backend   # noqa: E402


def time_backend(cfg, name, repeats):
    kern = get_backend(name)
    best = np.inf
    log = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        log = engine.run_closed_loop(cfg, backend=kern)
        best = min(best, time.perf_counter() - t0)
    return best, log


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", default="ges_fig2")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cfg = cli.parse_config(args.preset)
    steps = int(round(cfg.t_final / cfg.dt))
    backends = available_backends()
    print(f"preset {args.preset}: {steps} steps, backends: {', '.join(backends)}")

    times = {}
    for name in backends:
        elapsed, log = time_backend(cfg, name, args.repeats)
        times[name] = elapsed
        print(f"  {name:>8}: {elapsed:8.3f} s  ({1e6 * elapsed / steps:7.3f} us/step)"
              f"  V(end)={log.v_total[-1]:.6e}")
    if len(times) == 2:
        print(f"  speedup: {times['python'] / times['compiled']:.1f}x")

        short = replace(cfg, t_final=cfg.t_final / 40, output_stride=1)
        log_c = engine.run_closed_loop(short, backend=get_backend("compiled"))
        log_p = engine.run_closed_loop(short, backend=get_backend("python"))
        scale = np.maximum(np.abs(log_p.v_total), 1e-300)
        dev = np.max(np.abs(log_c.v_total - log_p.v_total) / scale)
        print(f"  max relative V deviation over {len(log_c)} rows "
              f"({short.t_final:.1e} s horizon): {dev:.3e}")


if __name__ == "__main__":
    main()
