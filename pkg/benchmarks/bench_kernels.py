"""Benchmark the compiled kernels against the pure-Python fallback.

Usage:
    python benchmarks/bench_kernels.py [--size 1200] [--pixels 400000] [--repeat 3]

Times connected-component labeling on a random burn mask and the
severity-binned carbon-loss accumulation over a random pixel list, then
prints both backends side by side and checks they agree exactly.
"""

import argparse
import time

import numpy as np

from pyroledger._kernels import _fallback

try:
    from pyroledger._kernels import _core
except ImportError:
    _core = None


def best_of(repeat, fn, *args):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_labeling(size, repeat):
    rng = np.random.default_rng(12345)
    mask = (rng.uniform(size=(size, size)) < 0.45).astype(np.uint8)
    rows = [("label_components", f"{size}x{size} mask")]
    t_py, (labels_py, n_py) = best_of(repeat, _fallback.label_components, mask, 4)
    results = [("python", t_py)]
    if _core is not None:
        t_cy, (labels_cy, n_cy) = best_of(repeat, _core.label_components, mask, 4)
        assert n_py == n_cy
        assert np.array_equal(labels_py, labels_cy), "backends disagree"
        results.append(("cython", t_cy))
    return rows[0], results


def bench_loss_sum(pixels, repeat):
    rng = np.random.default_rng(54321)
    side = int(np.sqrt(pixels)) + 1
    pre = rng.uniform(0, 30, size=(side, side))
    dnbr = rng.uniform(-0.5, 1.5, size=(side, side))
    rows_idx = rng.integers(0, side, size=pixels).astype(np.int64)
    cols_idx = rng.integers(0, side, size=pixels).astype(np.int64)
    bounds = np.array([0.1, 0.27, 0.44, 0.66])
    fracs = np.array([0.2, 0.4, 0.6, 0.8])
    args = (pre, dnbr, rows_idx, cols_idx, bounds, fracs, -9999.0, -9999.0)
    header = ("severity_loss_sum", f"{pixels} pixels")
    t_py, out_py = best_of(repeat, _fallback.severity_loss_sum, *args)
    results = [("python", t_py)]
    if _core is not None:
        t_cy, out_cy = best_of(repeat, _core.severity_loss_sum, *args)
        assert out_py == out_cy, "backends disagree"
        results.append(("cython", t_cy))
    return header, results


def print_block(header, results):
    name, detail = header
    print(f"\n{name} ({detail})")
    baseline = dict(results).get("python")
    for backend, seconds in results:
        speedup = f"  {baseline / seconds:6.1f}x vs python" if backend != "python" else ""
        print(f"  {backend:<8} {seconds * 1000:10.2f} ms{speedup}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=1200,
                        help="mask side length for labeling")
    parser.add_argument("--pixels", type=int, default=400000,
                        help="pixel count for the loss accumulation")
    parser.add_argument("--repeat", type=int, default=3, help="best-of repeats")
    args = parser.parse_args()

    if _core is None:
        print("compiled kernels not available; timing the fallback only")
    print_block(*bench_labeling(args.size, args.repeat))
    print_block(*bench_loss_sum(args.pixels, args.repeat))
    print("\nbackends agree on all outputs" if _core is not None else "")


if __name__ == "__main__":
    main()
