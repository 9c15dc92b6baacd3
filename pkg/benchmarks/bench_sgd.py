"""Compare the compiled SGD kernel against the pure-Python fallback.

Runs the same epoch workload through both implementations, checks they
produce identical parameters, and reports throughput.

    python3 benchmarks/bench_sgd.py [--images 500] [--dim 128] [--epochs 5]
"""

import argparse
import time

import numpy as np

from phrasecap import _sgd_py

try:
    from phrasecap import _sgd_cy
except ImportError:
    _sgd_cy = None


def make_workload(rng, n_images, n, m, c, negatives):
    x_rows = rng.standard_normal((n_images, n))
    u = rng.uniform(-1 / np.sqrt(n), 1 / np.sqrt(n), size=(n, m))
    v = rng.standard_normal((m, c))
    img_idx = np.arange(n_images, dtype=np.int64)
    pos_ids = rng.integers(0, c, size=n_images, dtype=np.int64)
    neg_ids = rng.integers(0, c, size=(n_images, negatives), dtype=np.int64)
    return x_rows, u, v, img_idx, pos_ids, neg_ids


def run(kernel, args, seed=0):
    rng = np.random.default_rng(seed)
    x_rows, u, v, img_idx, pos_ids, neg_ids = make_workload(
        rng, args.images, args.dim, args.embed_dim, args.phrases, args.negatives
    )
    u, v = u.copy(), v.copy()
    start = time.perf_counter()
    loss = 0.0
    for _ in range(args.epochs):
        loss = kernel.sgd_epoch(x_rows, u, v, img_idx, pos_ids, neg_ids, 0.01)
    elapsed = time.perf_counter() - start
    steps = args.images * args.epochs
    return elapsed, steps / elapsed, loss, u, v


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--images", type=int, default=500)
    parser.add_argument("--dim", type=int, default=128, help="image feature size")
    parser.add_argument("--embed-dim", type=int, default=50)
    parser.add_argument("--phrases", type=int, default=2000)
    parser.add_argument("--negatives", type=int, default=15)
    parser.add_argument("--epochs", type=int, default=5)
    args = parser.parse_args()

    py_time, py_rate, py_loss, py_u, py_v = run(_sgd_py, args)
    print(f"python : {py_time:8.3f}s  {py_rate:10.0f} steps/s  loss {py_loss:.6f}")

    if _sgd_cy is None:
        print("cython : not built (pure-Python install)")
        return

    cy_time, cy_rate, cy_loss, cy_u, cy_v = run(_sgd_cy, args)
    print(f"cython : {cy_time:8.3f}s  {cy_rate:10.0f} steps/s  loss {cy_loss:.6f}")
    print(f"speedup: {py_time / cy_time:.1f}x")

    du = np.max(np.abs(py_u - cy_u))
    dv = np.max(np.abs(py_v - cy_v))
    print(f"max parameter difference: U {du:.2e}, V {dv:.2e}")
    assert du < 1e-9 and dv < 1e-9, "kernels diverged"


if __name__ == "__main__":
    main()
