"""Time the greedy matching loop on the compiled and the NumPy backend.

    python benchmarks/bench_kernels.py [--repeat 5] [--ports 4 8] [--modes butler steering]

Candidate tables are built once per case; only ``greedy_match`` is timed.
Both backends must return the same links, which is checked on every case.
"""

import argparse
import statistics
import time

from leoisl import kernels
from leoisl.config import TABLE_I
from leoisl.constellation import build_constellation
from leoisl.linkbudget import LinkBudgetContext
from leoisl.matching import enumerate_feasible_edges, greedy_match, make_snapshot


def candidates(mode, K, dt, seed=1, t=0.0):
    cfg = TABLE_I.with_(mode=mode, ports=K, dt=dt)
    con = build_constellation(cfg, seed=seed)
    ctx = LinkBudgetContext.from_config(cfg)
    return enumerate_feasible_edges(make_snapshot(con, t, ctx), make_snapshot(con, t + dt, ctx),
                                    cfg, con.planes, ctx)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, min(times), statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--ports", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--modes", nargs="+", default=["butler", "steering"])
    ap.add_argument("--dt", type=float, default=30.0)
    args = ap.parse_args()

    if "cython" not in kernels.BACKENDS:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'mode':<10}{'K':>3}{'edges':>7}{'links':>7}{'numpy ms':>11}{'cython ms':>11}{'speedup':>9}")
    for mode in args.modes:
        for K in args.ports:
            cands = candidates(mode, K, args.dt)
            py, py_best, _ = best_of(lambda: greedy_match(cands, backend="python"), args.repeat)
            cy, cy_best, _ = best_of(lambda: greedy_match(cands, backend="cython"), args.repeat)
            if py.links != cy.links:
                raise SystemExit(f"backends disagree for {mode} K={K}")
            print(f"{mode:<10}{K:>3}{len(cands):>7}{len(cy.links):>7}"
                  f"{1e3 * py_best:>11.2f}{1e3 * cy_best:>11.2f}{py_best / cy_best:>9.1f}")


if __name__ == "__main__":
    main()
