"""Time the compiled and pure-Python shooting kernels on the same trajectories.

    python3 benchmarks/bench_shoot.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from choquard import _backend
from choquard.kernel import sphere_area
from choquard.shooting import DEFAULT_TOL as TOL


def run(shoot, amplitudes, n=3):
    steps = 0
    for a in amplitudes:
        _, r, _, _ = shoot(a, n, sphere_area(n), TOL.r_start, TOL.r_max, TOL.ode,
                           TOL.atol_factor * TOL.ode * a, TOL.event, TOL.decay * a, 0.0,
                           TOL.max_steps)
        steps += r.size
    return steps


def bench(shoot, amplitudes, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        steps = run(shoot, amplitudes)
        best = min(best, time.perf_counter() - start)
    return best, steps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--count", type=int, default=20)
    args = parser.parse_args()
    amplitudes = np.geomspace(0.05, 5.0, args.count)
    py_time, steps = bench(_backend.python_shoot, amplitudes, args.repeat)
    print(f"python    {py_time:9.4f} s  ({steps} accepted steps)")
    if _backend.compiled_shoot is None:
        print("compiled  (extension not built)")
        return
    c_time, c_steps = bench(_backend.compiled_shoot, amplitudes, args.repeat)
    print(f"compiled  {c_time:9.4f} s  ({c_steps} accepted steps)")
    print(f"speed-up  {py_time / c_time:9.1f}x")


if __name__ == "__main__":
    main()
