"""Compiled vs pure-Python heat convolution.

    python3 benchmarks/bench_heat.py [--repeat 5] [--json out.json]

Times hhlab.heat.apply_semigroup with each backend on a few inputs and grid
sizes, and checks that both backends return the same values.
"""

import argparse
import json
import statistics
import time

import numpy as np

from hhlab import heat
from hhlab.radial import RadialFunction, log_grid


def cases():
    for n in (512, 1024, 2048):
        nodes = log_grid(1e-8, 1e3, n)
        yield f"gaussian d=3 n={n}", RadialFunction.gaussian(3, 1.0, nodes), 1.0
        yield f"power r^-2 d=5 n={n}", RadialFunction.power_law(2.0, 5, nodes=nodes).truncated(10.0), 0.1
        yield f"ball d=3 n={n}", RadialFunction.indicator_ball(3, 1.0, nodes=nodes), 0.01


def timed(f, t, compiled, repeat):
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = heat.apply_semigroup(f, t, use_compiled=compiled)
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args()
    if heat.backend() != "compiled":
        print("compiled core not built; only the Python backend is timed")
    rows = []
    print(f"{'case':28s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, f, t in cases():
        py, ref = timed(f, t, False, args.repeat)
        row = {"case": name, "python_ms": 1e3 * py}
        if heat.backend() == "compiled":
            cc, out = timed(f, t, True, args.repeat)
            diff = float(np.max(np.abs(out.values - ref.values)) / np.max(np.abs(ref.values)))
            row |= {"compiled_ms": 1e3 * cc, "speedup": py / cc, "max_rel_diff": diff}
            print(f"{name:28s} {1e3 * py:10.1f} {1e3 * cc:12.1f} {py / cc:8.1f} {diff:13.2e}")
        else:
            print(f"{name:28s} {1e3 * py:10.1f}")
        rows.append(row)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
