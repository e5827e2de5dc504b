"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times the batched CIM kernel on a few shapes and a full training run of each
variant, once per backend, and checks the two backends agree.
"""

import argparse
import json
import platform
import time

import numpy as np

from caeac import _accel, _kernels
from caeac.caea import CAEA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def kernel_case(n, K, d, J, rng):
    X = rng.normal(size=(n, d))
    W = rng.normal(size=(K, d))
    group_of = np.arange(d) % J
    size = np.bincount(group_of, minlength=J).astype(float)
    sigma = rng.uniform(0.3, 2.0, size=J)
    return X, W, group_of, size, sigma


def train_case(variant, n, d, rng):
    centers = rng.normal(scale=5.0, size=(4, d))
    X = centers[rng.integers(0, 4, size=n)] + rng.normal(size=(n, d))
    return lambda: CAEA(40, 10, variant).train(X)


def run(repeat=5):
    rng = np.random.default_rng(0)
    rows = []
    for n, K, d, J in [(1, 64, 8, 1), (1, 256, 16, 16), (1, 256, 16, 4), (512, 256, 16, 4)]:
        args = kernel_case(n, K, d, J, rng)
        res = {}
        for backend in (True, False):
            _accel.use_numba(backend)
            _kernels.grouped_cim(*args)  # warm-up / compile
            res[backend] = best_of(lambda: _kernels.grouped_cim(*args), repeat)
        err = float(np.abs(res[True][1] - res[False][1]).max())
        rows.append(("grouped_cim", f"n={n} K={K} d={d} J={J}", res[True][0], res[False][0], err))

    for variant in ("base", "individual", "clustering"):
        fn = train_case(variant, 2000, 8, rng)
        res = {}
        for backend in (True, False):
            _accel.use_numba(backend)
            fn()
            res[backend] = best_of(fn, max(1, repeat // 2))
        err = float(np.abs(res[True][1].weights - res[False][1].weights).max()) if (
            res[True][1].n_nodes == res[False][1].n_nodes
        ) else float("nan")
        rows.append(("train", f"{variant} n=2000 d=8", res[True][0], res[False][0], err))
    _accel.use_numba(True)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rows = run(args.repeat)
    print(f"{'what':12} {'case':26} {'numba [s]':>11} {'numpy [s]':>11} {'speedup':>8} {'max |diff|':>11}")
    for what, case, t_nb, t_np, err in rows:
        print(f"{what:12} {case:26} {t_nb:11.5f} {t_np:11.5f} {t_np / t_nb:8.1f} {err:11.2e}")
    if args.json:
        doc = {
            "python": platform.python_version(),
            "machine": platform.machine(),
            "rows": [dict(zip(("what", "case", "numba_s", "numpy_s", "max_abs_diff"), r)) for r in rows],
        }
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=1)


if __name__ == "__main__":
    main()
