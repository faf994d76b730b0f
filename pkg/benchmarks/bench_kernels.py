"""Compare the compiled and numpy kernel backends.

Times one loss-and-gradient evaluation (forward derivative streams plus the
reverse sweep) at a few problem sizes and checks both backends agree.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from contact_pinn.backend import get_kernels
from contact_pinn.benchmarks import default_config, build_case

SIZES = [
    ("lame 3x25, 330 pts", "lame", {}),
    ("block 5x25, 514 pts", "block", {}),
    ("hertz 5x25, ~6k pts", "hertz", {}),
    ("hertz 5x50, ~6k pts", "hertz", {"network": {"hidden_layers": [50] * 5}}),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    try:
        compiled = get_kernels("cython")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return
    fallback = get_kernels("python")
    print(f"{'case':<24} {'cython (ms)':>12} {'numpy (ms)':>12} {'speed-up':>9} {'max |dg|':>10}")
    for label, case, over in SIZES:
        cfg = default_config(case)
        cfg.update(over)
        setup = build_case(cfg)
        params = setup.init_params()
        prob = setup.problem
        _, g_c = prob.loss_and_grad(params, compiled)
        _, g_p = prob.loss_and_grad(params, fallback)
        times = {}
        for name, k in (("cython", compiled), ("numpy", fallback)):
            t = timeit.repeat(lambda: prob.loss_and_grad(params, k), number=1,
                              repeat=args.repeat)
            times[name] = 1e3 * min(t)
        print(f"{label:<24} {times['cython']:>12.2f} {times['numpy']:>12.2f} "
              f"{times['numpy'] / times['cython']:>8.2f}x {np.max(np.abs(g_c - g_p)):>10.1e}")


if __name__ == "__main__":
    main()
