"""Time the compiled and NumPy kernel backends side by side.

Each backend runs in its own interpreter (CUBICML_PURE_PYTHON selects the
fallback), so both see a cold import. Usage:

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from cubicml import kernels
from cubicml.metrics import kendall_tau
from cubicml.predictor import GbdtConfig, MlpConfig, fit_gbdt, fit_mlp_ensemble

repeat, quick = int(sys.argv[1]), sys.argv[2] == "1"
rng = np.random.default_rng(0)

def best_of(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

n = 2000 if quick else 5000
x, y = rng.integers(0, 50, n).astype(float), rng.integers(0, 50, n).astype(float)
xs = np.sort(rng.uniform(size=20000))
rs = rng.normal(size=20000)
codes = rng.integers(0, 12, size=20000).astype(np.int64)
p = [rng.normal(size=400_000)]
m, v, vh = np.zeros_like(p[0]), np.zeros_like(p[0]), np.zeros_like(p[0])
g = rng.normal(size=p[0].size)

onehot = (rng.uniform(size=(60, 48)) < 0.27).astype(float)
target = onehot @ rng.normal(size=48)
mlp = MlpConfig(members=2, epochs=20 if quick else 60)
xg = np.c_[rng.uniform(size=(423, 10)), rng.integers(0, 6, size=(423, 3))]
yg = np.sin(xg[:, 0] * 4) + xg[:, 10]
gbdt = GbdtConfig(n_trees=60 if quick else 300)

res = {
    "backend": kernels.BACKEND,
    "kendall_tau n=%d" % n: best_of(lambda: kendall_tau(x, y)),
    "numeric split n=20000": best_of(lambda: kernels.best_numeric_split(xs, rs, 2)),
    "categorical split n=20000": best_of(lambda: kernels.best_categorical_split(codes, rs, 12, 2)),
    "amsgrad update 400k params": best_of(lambda: kernels.amsgrad_update(p[0], g, m, v, vh, 1e-3, 5e-3, 0.9, 0.999, 1e-8, 0.5)),
    "mlp fit 2x%d epochs, 60 rows" % mlp.epochs: best_of(lambda: fit_mlp_ensemble(onehot, target, mlp, seed=0)),
    "gbdt fit %d trees, 423 rows" % gbdt.n_trees: best_of(lambda: fit_gbdt(xg, yg, [False] * 10 + [True] * 3, gbdt)),
}
print(json.dumps(res))
"""


def run(pure: bool, repeat: int, quick: bool) -> dict:
    env = dict(os.environ, CUBICML_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat), "1" if quick else "0"],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="best-of repetitions per case")
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)

    fast = run(False, args.repeat, args.quick)
    slow = run(True, args.repeat, args.quick)
    if fast.pop("backend") != "cython":
        print("compiled extension not importable; both columns use the NumPy fallback", file=sys.stderr)
    slow.pop("backend")
    width = max(map(len, fast))
    print(f"{'case':<{width}}  {'compiled s':>11}  {'numpy s':>11}  {'speedup':>8}")
    for case, t in fast.items():
        print(f"{case:<{width}}  {t:>11.4f}  {slow[case]:>11.4f}  {slow[case] / t:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
