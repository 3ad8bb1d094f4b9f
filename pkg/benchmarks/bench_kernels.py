"""Compare the numba and pure-numpy kernels.

    python3 benchmarks/bench_kernels.py [--steps 16384] [--repeat 20]

Reports the best time per call for each kernel and backend, the speedup,
and the largest disagreement between the two backends.
"""
import argparse
import os
import time

import numpy as np

from jumpiter._accel import HAS_NUMBA
from jumpiter.harness.config import preset_config
from jumpiter.harness.runner import replicate_rows
from jumpiter.kernels import affine_scan, cell_signature


def best_of(fn, repeat):
    fn()  # warm-up (numba compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=16384)
    p.add_argument("--cells", type=int, default=256)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)
    if not HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    k = args.steps
    dc, qv = rng.normal(0, np.sqrt(1 / k), k), np.full(k, 1 / k)
    jv1 = np.where(rng.random(k) < 1e-3, rng.normal(size=k), 0.0)
    jv2 = np.column_stack((np.zeros(k), jv1))
    bounds = np.linspace(0, k, args.cells + 1).astype(np.int64)
    a, b = np.exp(rng.normal(0, 0.01, k)), rng.normal(0, 0.01, k)

    cases = {
        "cell_signature d=1": lambda be: cell_signature(dc, qv, jv1, bounds, backend=be),
        "cell_signature d=2": lambda be: cell_signature(dc, qv, jv2, bounds, backend=be),
        "affine_scan": lambda be: (affine_scan(a, b, 0.0, backend=be),),
    }
    print(f"steps={k} cells={args.cells} repeat={args.repeat}")
    print(f"{'kernel':22s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s} {'max |diff|':>11s}")
    for name, fn in cases.items():
        t_nb = best_of(lambda: fn("numba"), args.repeat)
        t_np = best_of(lambda: fn("numpy"), args.repeat)
        diff = max(float(np.max(np.abs(x - y))) for x, y in zip(fn("numba"), fn("numpy")))
        print(f"{name:22s} {1e3 * t_nb:10.3f} {1e3 * t_np:10.3f} {t_np / t_nb:8.1f} {diff:11.2e}")

    cfg = preset_config("mixed", n_list=(8, 16, 32, 64, 128, 256))
    for backend in ("numba", "numpy"):
        os.environ["JUMPITER_BACKEND"] = backend
        t = best_of(lambda: [replicate_rows(cfg, r) for r in range(5)], max(1, args.repeat // 10)) / 5
        print(f"mixed preset replicate ({backend:5s}): {1e3 * t:8.2f} ms")


if __name__ == "__main__":
    main()
