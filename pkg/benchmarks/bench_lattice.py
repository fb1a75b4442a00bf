"""Benchmark the lattice kernels: compiled extension vs numpy fallback.

Both backends are driven through the same lattice_solve entry point by
swapping the functions on asymrisk.backend, so the comparison includes the
full per-layer bookkeeping, not just the inner kernel. Values must match
bit for bit; the script exits nonzero if they ever differ.

Usage:
    python benchmarks/bench_lattice.py
    python benchmarks/bench_lattice.py --steps-1d 8000 --steps-2d 600 --repeats 5
"""

import argparse
import math
from time import perf_counter

from asymrisk import _lattice_python, backend
from asymrisk.grids import TimeGrid
from asymrisk.lattice import TerminalSpec, lattice_solve

try:
    from asymrisk import _lattice_kernels
except ImportError:
    _lattice_kernels = None


def _single_driver_spec() -> TerminalSpec:
    return TerminalSpec(lambda w1, w2: w1 * w1, growth="quadratic-subcritical",
                        depends_on="w1_only", name="quadratic")


def _two_driver_spec() -> TerminalSpec:
    return TerminalSpec(lambda w1, w2: w1 * w2, growth="quadratic-subcritical",
                        name="product")


def _time_solve(impl, spec, steps: int, repeats: int):
    backend.step_1d = impl.step_1d
    backend.step_2d = impl.step_2d
    grid = TimeGrid(1.0, steps)
    best = math.inf
    value = None
    for _ in range(repeats):
        t0 = perf_counter()
        value = lattice_solve(spec, 0.2, 0.2, grid, keep_surfaces=False).y0
        best = min(best, perf_counter() - t0)
    return value, best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps-1d", type=int, nargs="+", default=[1000, 2000, 4000])
    parser.add_argument("--steps-2d", type=int, nargs="+", default=[100, 200, 400])
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repeats per case; best time is reported")
    args = parser.parse_args()

    if _lattice_kernels is None:
        print("compiled extension not importable; timing the fallback only")
    cases = ([("1d", _single_driver_spec(), n) for n in args.steps_1d]
             + [("2d", _two_driver_spec(), n) for n in args.steps_2d])

    original = (backend.step_1d, backend.step_2d)
    mismatches = 0
    print(f"{'case':>6} {'steps':>6} {'python':>10} {'compiled':>10} "
          f"{'speedup':>8}  match")
    try:
        for kind, spec, steps in cases:
            v_py, t_py = _time_solve(_lattice_python, spec, steps, args.repeats)
            if _lattice_kernels is None:
                print(f"{kind:>6} {steps:>6} {t_py:>9.3f}s {'-':>10} {'-':>8}")
                continue
            v_c, t_c = _time_solve(_lattice_kernels, spec, steps, args.repeats)
            match = v_py == v_c
            mismatches += 0 if match else 1
            print(f"{kind:>6} {steps:>6} {t_py:>9.3f}s {t_c:>9.3f}s "
                  f"{t_py / t_c:>7.1f}x  {match}")
    finally:
        backend.step_1d, backend.step_2d = original

    if mismatches:
        print(f"{mismatches} case(s) disagree between backends")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
