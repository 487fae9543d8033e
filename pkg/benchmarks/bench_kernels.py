"""Compare the compiled and numpy kernel backends.

Run from the repository root after an editable install::

    python benchmarks/bench_kernels.py [--repeat 20]

Kernel timings call both backend modules directly. End-to-end solver timings
run in subprocesses so ``CHEBMOTION_PURE_PYTHON`` takes effect at import.
"""
import argparse
import json
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from chebmotion import kernels

SOLVE_SNIPPET = """
import json, math, time
from chebmotion import kernels
from chebmotion.harness import SyntheticMechanism, synthetic_properties
from chebmotion.plant import fit_property_model
from chebmotion.profile import MotionTask
from chebmotion.optimize import OptimizationContext, solve_bfgs
from chebmotion.genetic import solve_ga
task = MotionTask(0.0, math.radians(173.6), 0.0, 0.0735, jerk_zero={jz}, degree={degree})
mech = SyntheticMechanism("slider_crank")
model = fit_property_model(synthetic_properties(mech, (-0.2, task.theta_B + 0.2), 200), task)
ctx = OptimizationContext(task, model)
out = {{"backend": kernels.BACKEND}}
for name, solve in (("bfgs", solve_bfgs), ("ga", lambda c: solve_ga(c, seed=0))):
    t = time.perf_counter(); r = solve(ctx); out[name] = time.perf_counter() - t
print(json.dumps(out))
"""


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    coeffs = rng.normal(size=21)
    x = np.cos(np.linspace(0, math.pi, 201))
    rows = rng.uniform(-1, 1, size=(200, 201))
    w = np.full(201, 2.0 / 201)
    cases = {
        "clenshaw (21 coeffs, 201 pts)": lambda k: k.clenshaw(coeffs, x),
        "rms_batch (200 x 201)": lambda k: k.rms_batch(rows, rows, rows, w, coeffs, coeffs, coeffs,
                                                      1.3, 0.7, 2.0, 0.01, 1e-4),
    }
    print(f"{'kernel':32s} {'python [us]':>12s} {'cython [us]':>12s} {'speed-up':>9s}")
    for label, fn in cases.items():
        times = {}
        for name in ("python", "cython"):
            mod = kernels.get_backend(name)
            n = 50
            times[name] = min(timeit.repeat(lambda: fn(mod), number=n, repeat=repeat)) / n * 1e6
        print(f"{label:32s} {times['python']:12.1f} {times['cython']:12.1f} "
              f"{times['python'] / times['cython']:8.1f}x")


def bench_solves(degree, jerk_zero):
    results = {}
    for pure in ("1", "0"):
        env = dict(os.environ, CHEBMOTION_PURE_PYTHON=pure)
        code = SOLVE_SNIPPET.format(degree=degree, jz=jerk_zero)
        proc = subprocess.run([sys.executable, "-c", code], env=env, check=True,
                              capture_output=True, text=True)
        data = json.loads(proc.stdout)
        results[data["backend"]] = data
    tag = f"{'J0' if jerk_zero else 'JF'} n={degree}"
    for solver in ("bfgs", "ga"):
        py, cy = results["python"][solver], results["cython"][solver]
        print(f"{tag + ' ' + solver:32s} {py * 1e3:10.1f}ms {cy * 1e3:10.1f}ms {py / cy:8.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--skip-solves", action="store_true")
    args = parser.parse_args()
    try:
        kernels.get_backend("cython")
    except ImportError:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    bench_kernels(args.repeat)
    if not args.skip_solves:
        print()
        for degree, jz in ((9, False), (13, True)):
            bench_solves(degree, jz)


if __name__ == "__main__":
    main()
