"""Numba vs numpy timings for the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each case is timed after one untimed call, so the numba column excludes
compilation. Results from the two paths are compared before timing.
"""
import argparse
import json
import math
import platform
import time

import numpy as np

from abstract_intersection import _kernels


def _best(fn, repeat):
    fn()
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def resolvent_cases(rng):
    for dim, nodes in [(8, 1024), (32, 1024), (32, 4096), (64, 2048)]:
        A = np.diag(rng.uniform(0.05, 0.95, dim) + 1j * rng.uniform(-20, 20, dim))
        B = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim)) / np.sqrt(dim)
        A = B @ A @ np.linalg.inv(B)
        t = np.linspace(0, 2 * np.pi, nodes, endpoint=False)
        s = 0.5 + 25 * np.exp(1j * t)
        w = 1j * 25 * np.exp(1j * t) * (2 * np.pi / nodes) / (2j * np.pi)
        yield f"resolvent dim={dim} nodes={nodes}", (A, s, w)


def power_cases(rng):
    for two_g, N in [(40, 500), (200, 500), (200, 5000), (1000, 5000)]:
        log_mu = (rng.uniform(-0.1, 0.1, two_g) + 1j * rng.uniform(-200, 200, two_g)) * math.log(4)
        w = rng.integers(1, 3, two_g).astype(np.complex128)
        yield f"power sums 2g={two_g} N={N}", (log_mu, w, N)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", help="also write the table as JSON")
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(args.seed)
    rows = []
    pairs = [(resolvent_cases(rng), _kernels.resolvent_sum_numpy, _kernels.resolvent_sum_numba),
             (power_cases(rng), _kernels.power_sums_numpy, _kernels.power_sums_numba)]
    for cases, f_np, f_nb in pairs:
        for name, case in cases:
            ref = f_np(*case)
            diff = float(np.max(np.abs(f_nb(*case) - ref)) / max(1.0, float(np.max(np.abs(ref)))))
            t_np = _best(lambda: f_np(*case), args.repeat)
            t_nb = _best(lambda: f_nb(*case), args.repeat)
            rows.append({"case": name, "numpy_s": t_np, "numba_s": t_nb,
                         "speedup": t_np / t_nb, "max_rel_diff": diff})

    width = max(len(r["case"]) for r in rows)
    print(f"{'case':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}  {'rel diff':>9}")
    for r in rows:
        print(f"{r['case']:<{width}}  {r['numpy_s'] * 1e3:8.2f}ms  {r['numba_s'] * 1e3:8.2f}ms  "
              f"{r['speedup']:7.2f}x  {r['max_rel_diff']:9.1e}")
    print(f"python {platform.python_version()}, numpy {np.__version__}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
