"""Compare the compiled kernel backend against the pure-Python fallback.

Each backend runs in its own interpreter so the timing reflects the real
import-time selection (``QSUC_PURE_PYTHON=1`` forces the fallback). The
worker times the exhaustive scan across problem sizes and a fixed batch of
annealing sweeps, reporting the best of several repeats.

Usage: python3 benchmarks/bench_kernels.py [--sizes 12,16,20] [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from qsuc import kernels

sizes = json.loads(sys.argv[1])
repeats = int(sys.argv[2])
rng = np.random.default_rng(7)
report = {"backend": kernels.BACKEND, "scan": [], "anneal": []}

for n in sizes:
    lin = rng.uniform(-10.0, 10.0, n)
    w = rng.uniform(-5.0, 5.0, (n, n))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    kernels.exhaustive_scan(lin, w, 0.0)  # warmup
    best = min(
        _timed(lambda: kernels.exhaustive_scan(lin, w, 0.0)) for _ in range(repeats)
    )
    report["scan"].append({"n": n, "seconds": best})

for n in (64, 128, 256):
    lin = rng.uniform(-10.0, 10.0, n)
    w = rng.uniform(-5.0, 5.0, (n, n))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    sweeps = 200
    betas = np.linspace(0.1, 5.0, sweeps)
    uniforms = rng.random(sweeps * n)
    x0 = rng.integers(0, 2, n).astype(np.uint8)

    def run():
        x = x0.copy()
        fld = lin + w @ x
        e0 = float(lin @ x + 0.5 * x @ w @ x)
        best_x = x.copy()
        kernels.anneal_sweeps(lin, w, x, fld, e0, betas, uniforms, best_x)

    run()  # warmup
    best = min(_timed(run) for _ in range(repeats))
    report["anneal"].append({"n": n, "sweeps": sweeps, "seconds": best})

print(json.dumps(report))
"""

TIMER = r"""
def _timed(fn):
    import time
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start
"""


def run_backend(pure: bool, sizes, repeats: int) -> dict:
    env = dict(os.environ)
    if pure:
        env["QSUC_PURE_PYTHON"] = "1"
    else:
        env.pop("QSUC_PURE_PYTHON", None)
    proc = subprocess.run(
        [sys.executable, "-c", TIMER + WORKER, json.dumps(sizes), str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="12,16,20",
                        help="comma-separated exhaustive-scan sizes")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]

    fast = run_backend(pure=False, sizes=sizes, repeats=args.repeats)
    slow = run_backend(pure=True, sizes=sizes, repeats=args.repeats)
    if fast["backend"] == slow["backend"]:
        print("note: compiled backend unavailable, both runs used the fallback")

    print(f"{'kernel':<10} {'n':>6} {fast['backend']:>12} {slow['backend']:>12} {'speedup':>9}")
    for a, b in zip(fast["scan"], slow["scan"]):
        ratio = b["seconds"] / a["seconds"] if a["seconds"] > 0 else float("inf")
        print(f"{'scan':<10} {a['n']:>6} {a['seconds']:>11.6f}s {b['seconds']:>11.6f}s {ratio:>8.1f}x")
    for a, b in zip(fast["anneal"], slow["anneal"]):
        ratio = b["seconds"] / a["seconds"] if a["seconds"] > 0 else float("inf")
        print(f"{'anneal':<10} {a['n']:>6} {a['seconds']:>11.6f}s {b['seconds']:>11.6f}s {ratio:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
