"""Time the compiled kernels against their plain-Python bodies.

    python3 benchmarks/bench_kernels.py [--tasks 400] [--sites 5] [--repeat 3]

Both paths run the same source on the same inputs; results are checked for
equality before timings are reported.
"""

import argparse
import time

import numpy as np

from bodt import kernels
from bodt._accel import NUMBA_ENABLED, pure
from bodt.heuristics import MoveLedger, longest_first, nearest_plan, receiver_order
from bodt.workload import GeneratorSpec, generate_scenario


def best_of(repeat, fn):
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def heuristic_case(scenario, start, kernel, *extra):
    arr = scenario.arrays
    recv, order = receiver_order(scenario), longest_first(scenario)

    def call(fn):
        def run():
            assign = start.copy()
            ledger = MoveLedger.for_scenario(scenario).moves
            moves = fn(arr.exec_ticks, recv, order, assign, arr.deploy_ticks, arr.block_ticks, *extra, ledger)
            return moves, assign.tobytes()
        return run

    return call(kernel), call(pure(kernel))


def oracle_case(n_tasks, n_sites):
    s = generate_scenario(GeneratorSpec(n_locations=4, n_sites=n_sites, n_tasks=n_tasks, block_seconds=20.0))
    arr = s.arrays
    args = (arr.exec_ticks, arr.deploy_ticks, arr.block_ticks)

    def call(fn_max, fn_best):
        def run():
            peak, blocks, _ = fn_max(*args)
            best = np.zeros(arr.n_tasks, np.int64)
            value, count = fn_best(*args, kernels.OBJ_SCORE, 0.5, peak / 1e6, blocks, False, best)
            return value, count, best.tobytes()
        return run

    return (call(kernels.enumerate_maxima, kernels.enumerate_best),
            call(pure(kernels.enumerate_maxima), pure(kernels.enumerate_best)))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tasks", type=int, default=400)
    parser.add_argument("--sites", type=int, default=5)
    parser.add_argument("--oracle-tasks", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not NUMBA_ENABLED:
        parser.error("numba is disabled (BODT_DISABLE_NUMBA); nothing to compare")

    scenario = generate_scenario(GeneratorSpec(n_locations=12, n_sites=args.sites, n_tasks=args.tasks,
                                               block_seconds=600.0, deploy_time=30.0))
    nearest = nearest_plan(scenario).to_vector(scenario)
    piled = np.zeros(len(scenario.tasks), np.int64)
    cases = {
        "reduce_blocks": heuristic_case(scenario, nearest, kernels.reduce_blocks, 1),
        "balance": heuristic_case(scenario, piled, kernels.balance, True, -1),
        f"enumerate 3^{args.oracle_tasks}": oracle_case(args.oracle_tasks, 3),
    }
    print(f"{'kernel':<18}{'numba s':>10}{'python s':>11}{'speedup':>9}")
    for name, (fast, slow) in cases.items():
        fast()  # compile outside the timing
        t_fast, r_fast = best_of(args.repeat, fast)
        t_slow, r_slow = best_of(args.repeat, slow)
        if r_fast != r_slow:
            raise SystemExit(f"{name}: compiled and pure results differ")
        print(f"{name:<18}{t_fast:>10.4f}{t_slow:>11.4f}{t_slow / t_fast:>8.0f}x")


if __name__ == "__main__":
    main()
