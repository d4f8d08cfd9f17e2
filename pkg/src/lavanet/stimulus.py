"""Input plans: which excitatory neurons are driven, when, in every trial.

Plans are built once, before the run, from the parameters and a seeded
stream; the engine replays them through SpikeGenerators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLeaveOut, RegionsDontFit, SquareOutOfBounds, WindowOverflow
from .params import grid_shape

# Default inputWeight: one generator spike of weight c on a resting neuron
# (currentTau=5, voltageTau=100) gives v1 = c, v2 = 1.79 c, v3 = 2.4121 c.
# Crossing thresholdMant=1200 by step 3 needs c >= 497.5, hence 500.


@dataclass(frozen=True)
class InputBlock:
    targets: np.ndarray
    window: tuple  # [start, end) within the trial
    spikeProb: float
    injectedWeight: float
    region: int = 0


@dataclass(frozen=True)
class InputPlan:
    mode: str
    trials: tuple  # per trial: tuple of InputBlock
    regions: tuple = ()  # the distinct target sets the plan draws from

    def windows(self, trial):
        return [b.window for b in self.trials[trial]]

    def all_targets(self):
        out = set()
        for blocks in self.trials:
            for b in blocks:
                out.update(int(i) for i in b.targets)
        return out


def _disjoint_sets(n_pool, count, size, rng):
    picks = rng.choice(n_pool, size=count * size, replace=False)
    return [np.sort(picks[k * size:(k + 1) * size]) for k in range(count)]


def build_sequence_input(p, rng):
    if p.inputSequenceSize * p.inputSteps > p.stepsPerTrial:
        raise WindowOverflow(
            f"{p.inputSequenceSize} inputs x {p.inputSteps} steps do not fit in {p.stepsPerTrial} steps")
    if p.inputSequenceSize * p.inputNumTargetNeurons > p.reservoirExSize:
        raise RegionsDontFit("sequence target sets do not fit in the excitatory pool")
    sets = _disjoint_sets(p.reservoirExSize, p.inputSequenceSize, p.inputNumTargetNeurons, rng)
    blocks = tuple(
        InputBlock(s, (k * p.inputSteps, (k + 1) * p.inputSteps), p.inputGenSpikeProb, p.inputWeight, k)
        for k, s in enumerate(sets)
    )
    return InputPlan("sequence", tuple(blocks for _ in range(p.trials)), tuple(sets))


def build_leave_n_out_input(p, rng):
    if not 0 <= p.inputLeaveOutCount < p.inputNumTargetNeurons:
        raise InvalidLeaveOut(
            f"cannot leave {p.inputLeaveOutCount} of {p.inputNumTargetNeurons} neurons out")
    base = np.sort(rng.choice(p.reservoirExSize, size=p.inputNumTargetNeurons, replace=False))
    trials = []
    for _ in range(p.trials):
        out = rng.choice(len(base), size=p.inputLeaveOutCount, replace=False)
        keep = np.delete(base, out)
        trials.append((InputBlock(keep, (0, p.inputSteps), p.inputGenSpikeProb, p.inputWeight),))
    return InputPlan("leave-n-out", tuple(trials), (base,))


def square_targets(width, height, x, y, side):
    if x < 0 or y < 0 or x + side > width or y + side > height:
        raise SquareOutOfBounds(f"{side}x{side} square at ({x}, {y}) leaves the {width}x{height} grid")
    ys, xs = np.meshgrid(np.arange(y, y + side), np.arange(x, x + side), indexing="ij")
    return (ys * width + xs).ravel()


def build_topological_input(p):
    g = grid_shape(p)
    if g is None or g[0] * g[1] != p.reservoirExSize:
        raise SquareOutOfBounds("topological input needs a 2D excitatory grid")
    targets = square_targets(g[0], g[1], p.inputSquareX, p.inputSquareY, p.inputSquareSide)
    block = (InputBlock(targets, (0, p.inputSteps), p.inputGenSpikeProb, p.inputWeight),)
    return InputPlan("topological", tuple(block for _ in range(p.trials)), (targets,))


def build_alternating_input(p, rng):
    if p.inputRegionCount < 2:
        raise RegionsDontFit("alternating input needs at least two regions")
    if p.inputRegionCount * p.inputNumTargetNeurons > p.reservoirExSize:
        raise RegionsDontFit(
            f"{p.inputRegionCount} regions of {p.inputNumTargetNeurons} neurons exceed "
            f"{p.reservoirExSize} excitatory neurons")
    regions = _disjoint_sets(p.reservoirExSize, p.inputRegionCount, p.inputNumTargetNeurons, rng)
    picks = rng.integers(0, p.inputRegionCount, size=p.trials)
    trials = tuple(
        (InputBlock(regions[k], (0, p.inputSteps), p.inputGenSpikeProb, p.inputWeight, int(k)),)
        for k in picks
    )
    return InputPlan("alternating", trials, tuple(regions))


def build_input(p, rng):
    """Plan for whichever input mode is enabled (empty plan when none)."""
    if p.inputIsSequence:
        return build_sequence_input(p, rng)
    if p.inputIsTopological:
        return build_topological_input(p)
    if p.inputIsLeaveNOut:
        return build_leave_n_out_input(p, rng)
    if p.inputIsAlternating:
        return build_alternating_input(p, rng)
    return InputPlan("none", tuple(() for _ in range(p.trials)))
