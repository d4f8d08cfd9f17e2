"""Cores, chunks and wall time for one network under different core sizes.

More cores means fewer neurons per core but a quadratically growing number
of connection chunks. Spikes are identical for every layout; only the
bookkeeping changes.

    python scripts/partition_tradeoff.py --neurons 500 --threads 4
"""

import argparse
import tempfile
import time

from lavanet import Experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--neurons", type=int, default=500, help="total reservoir size (ex = 4/5)")
    ap.add_argument("--per-core", type=int, nargs="+", default=[500, 250, 128, 64, 32])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--trials", type=int, default=3)
    args = ap.parse_args()

    n_ex = args.neurons * 4 // 5
    ref = None
    print(f"{'perCore':>8} {'cores':>6} {'chunks':>7} {'nonempty':>9} {'seconds':>8}  same")
    with tempfile.TemporaryDirectory() as out:
        for k in args.per_core:
            exp = Experiment("tradeoff", {
                "reservoirExSize": n_ex, "reservoirInSize": args.neurons - n_ex, "neuronsPerCore": k,
                "trials": args.trials, "hostThreads": args.threads, "outputDirectory": out,
                "inputNumTargetNeurons": max(1, min(40, n_ex // 3)),
            })
            exp.build()
            t0 = time.perf_counter()
            exp.run()
            dt = time.perf_counter() - t0
            nonempty = sum(c.nnz > 0 for row in exp.net.grid.chunks for c in row)
            same = "-" if ref is None else str(bool((exp.raster == ref).all()))
            ref = exp.raster if ref is None else ref
            print(f"{k:>8} {exp.derived.coreCount:>6} {exp.derived.chunkCount:>7} {nonempty:>9} {dt:>8.3f}  {same}")


if __name__ == "__main__":
    main()
