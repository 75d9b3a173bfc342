"""Benchmark the numba kernels against their pure-numpy fallbacks.

Both variants live in dynembed.kernels, so one process can time them side by
side: the *_np functions are the fallbacks, and the dispatched names are the
jitted versions whenever numba imported cleanly. Run with
DYNEMBED_DISABLE_NUMBA=1 to confirm the fallback path alone.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from dynembed import kernels


def _workloads():
    rng = np.random.default_rng(0)
    z = rng.normal(size=(500, 500))
    h = 1.0 / (1.0 + np.exp(-z))
    x = rng.normal(size=(100, 1000))
    w = rng.normal(size=(1000, 256)) * 0.05
    b = rng.normal(size=256)
    target = np.where(rng.random((500, 500)) < 0.1, 1.0, 0.0)
    xhat = rng.random((500, 500))
    urand = rng.random((1000, 1000))
    labels = np.repeat(np.arange(4, dtype=np.int64), 250)
    hits = (rng.random(5000) < 0.02).astype(np.float64)

    return [
        ("sigmoid", kernels.sigmoid_np, kernels.sigmoid, (z,)),
        ("sigmoid_grad", kernels.sigmoid_grad_np, kernels.sigmoid_grad, (z, h)),
        ("affine_sigmoid", kernels.affine_sigmoid_np, kernels.affine_sigmoid, (x, w, b)),
        ("weighted_sq_error", kernels.weighted_sq_error_np, kernels.weighted_sq_error,
         (xhat, target, 5.0)),
        ("weighted_error_grad", kernels.weighted_error_grad_np, kernels.weighted_error_grad,
         (xhat, target, 5.0)),
        ("block_sample", kernels.block_sample_np, kernels.block_sample,
         (urand, labels, 0.1, 0.01)),
        ("average_precision", kernels.average_precision_np, kernels.average_precision,
         (hits, 100)),
    ]


def _best_ms(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of repeats per kernel")
    args = ap.parse_args()

    have_numba = kernels.BACKEND == "numba"
    print(f"active backend: {kernels.BACKEND}")
    if not have_numba:
        print("numba unavailable or disabled; timing the numpy fallback only\n")
    else:
        kernels.warmup()  # JIT compile outside the timed region
        print()

    header = f"{'kernel':<22}{'numpy ms':>12}"
    if have_numba:
        header += f"{'numba ms':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for name, np_fn, jit_fn, call_args in _workloads():
        t_np = _best_ms(np_fn, call_args, args.repeat)
        row = f"{name:<22}{t_np:>12.4f}"
        if have_numba:
            t_nb = _best_ms(jit_fn, call_args, args.repeat)
            row += f"{t_nb:>12.4f}{t_np / t_nb:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
