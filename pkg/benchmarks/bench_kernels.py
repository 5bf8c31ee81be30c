"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the per-call kernels on both backends, then one end-to-end solve in a
subprocess per backend (the fallback is forced with NLHOP_PURE_PYTHON=1).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nlhop import _core_py

try:
    from nlhop import _core
except ImportError:
    sys.exit("compiled extension not built; run: pip install -e . --no-build-isolation")

SOLVE = (
    "import time, nlhop;"
    "t = time.perf_counter();"
    "nlhop.k_sweep(nlhop.ModelParams(), [16, 32, 64]);"
    "print(time.perf_counter() - t)"
)


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_rows(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for k in (16, 128, 1024):
        u = rng.uniform(0.0, 1.0, size=k)
        psi = u * np.exp(1j * rng.uniform(0, 2 * np.pi, size=k))
        cases = {
            "sums_real": lambda m: m.sums_real(u, 1.0),
            "sums_real s=1.5": lambda m: m.sums_real(u, 1.5),
            "el_field": lambda m: m.el_field(u, -1.0, 1.0, 1.0, 1.0),
            "rk4_run 200 steps": lambda m: m.rk4_run(psi, 1.0, 1.0, 1.0, 1e-3, 200, 50),
        }
        for name, call in cases.items():
            number = 3 if name.startswith("rk4") else 200
            tc = best(lambda: call(_core), repeat, number)
            tp = best(lambda: call(_core_py), repeat, number)
            rows.append((name, k, tc, tp))
    return rows


def end_to_end():
    out = {}
    for label, extra in (("cython", {}), ("python", {"NLHOP_PURE_PYTHON": "1"})):
        env = dict(os.environ, **extra)
        res = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True, text=True,
                             check=True)
        out[label] = float(res.stdout.strip())
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<20}{'k':>6}{'cython [us]':>14}{'numpy [us]':>14}{'speedup':>10}")
    for name, k, tc, tp in kernel_rows(args.repeat):
        print(f"{name:<20}{k:>6}{tc * 1e6:>14.1f}{tp * 1e6:>14.1f}{tp / tc:>10.1f}")
    e2e = end_to_end()
    print(f"\nk-sweep 16,32,64: cython {e2e['cython']:.2f} s, numpy {e2e['python']:.2f} s, "
          f"speedup {e2e['python'] / e2e['cython']:.1f}")


if __name__ == "__main__":
    main()
