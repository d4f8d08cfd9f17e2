"""Sequence-learning experiment: three input clusters per trial, plastic ex->ex weights.

    python scripts/sequence_experiment.py --seed 2 --out runs

Prints spike counts, the mean ex->ex weight after every trial and the
spectral radius of the initial and final matrices; writes raster.svg.
"""

import argparse

import numpy as np

from lavanet import Experiment
from lavanet.experiments import SEQUENCE
from lavanet.sparse import spectral_radius


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--out", default="runs")
    ap.add_argument("--no-learning", action="store_true")
    args = ap.parse_args()

    overrides = {**SEQUENCE, "seed": args.seed, "outputDirectory": args.out, "plotRaster": True}
    if args.no_learning:
        overrides["isLearningRule"] = False
    exp = Experiment("random-network-sequence-learning", overrides)
    exp.build()
    exp.run()

    n_ex = exp.p.reservoirExSize
    print(f"run_dir: {exp.run_dir}")
    for pool, n in exp.spike_counts().items():
        print(f"spikes_{pool}: {n}")
    ee0 = exp.net.weights.ee
    print(f"ee_mean_initial: {ee0.values.mean():.4f}")
    for k, w in enumerate(exp.net.datasets.weights):
        ee = w.submatrix(0, n_ex, 0, n_ex).values
        print(f"ee_mean_trial_{k}: {ee.mean():.4f}")
    print(f"spectral_radius_initial: {spectral_radius(exp.net.weights.full):.4f}")
    print(f"spectral_radius_final: {spectral_radius(exp.final_weights()):.4f}")

    # how strongly the input clusters respond inside their own windows
    T = exp.p.stepsPerTrial
    for i, block in enumerate(exp.net.plan.trials[0]):
        s, e = block.window
        cols = np.concatenate([np.arange(k * T + s, k * T + e) for k in range(exp.p.trials)])
        rate = exp.raster[np.ix_(block.targets, cols)].mean()
        print(f"cluster_{i}_rate: {rate:.4f}")


if __name__ == "__main__":
    main()
