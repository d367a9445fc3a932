"""Compiled vs. pure-Python time stepping.

    python benchmarks/bench_kernels.py [--repeat 3]

Times one protocol run per ramp velocity on the L=3, N=2 ring (joint
dimension 36) and one short ramp on L=5, N=3 (dimension 1225, sparse path),
then prints wall time per backend and the largest state difference.
"""

import argparse
import math
import time

import numpy as np

from ringmes import ModelParams, available_backends, run_protocol
from ringmes.dynamics import RampGenerator, ground_state, propagate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; only the python backend is timed")

    cases = []
    small = ModelParams(3, 2, C=1.0, U=0.125, V=0.125)
    for alpha in (0.1, 0.02, 0.005):
        cases.append((f"protocol L=3 N=2 alpha={alpha}", lambda b, a=alpha: run_protocol(small, a, sample_count=11, backend=b).final_state))

    big = ModelParams(5, 3, C=1.0, U=0.3, V=0.3)
    gen = RampGenerator.from_params(big)
    psi0, _, _ = ground_state(big, 0.0)
    cases.append(("ramp L=5 N=3 t=0..5", lambda b: propagate(gen, psi0, [0.0, 5.0], alpha=0.1, backend=b)[0][-1]))

    print(f"{'case':34s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}{'max|diff|':>12s}")
    for name, fn in cases:
        row, finals = [], []
        for b in backends:
            t, psi = best_of(lambda: fn(b), args.repeat)
            row.append(t)
            finals.append(psi)
        speed = row[-1] / row[0] if len(row) == 2 else math.nan
        diff = float(np.abs(finals[0] - finals[-1]).max())
        print(f"{name:34s}" + "".join(f"{t:11.3f}s" for t in row) + f"{speed:9.1f}x{diff:12.1e}")


if __name__ == "__main__":
    main()
