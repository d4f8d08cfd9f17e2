"""Per-core probes, post-run stacking, pooling readout and spike smoothing."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import NeuronConfig, lif_update
from .errors import IncompleteRun
from .partition import merge as merge_chunks
from .sparse import save as save_csr


class ProbeStore:
    """Raw recordings, one buffer per core (single writer each)."""

    def __init__(self, layout, total_steps, voltages=False):
        self.layout = layout
        self.total_steps = total_steps
        cores = layout.coreCount
        self.spike_steps = [[] for _ in range(cores)]
        self.spike_neurons = [[] for _ in range(cores)]
        self.steps_recorded = [0] * cores
        self.last_step = [-1] * cores
        self.voltages = [[] for _ in range(cores)] if voltages else None
        self.weight_snapshots = []
        self.input_events = []  # (step, neuron indices) of input generators
        self.output_steps = []
        self.output_neurons = []

    def record_step(self, core_id, local_spikes, t, voltage=None):
        if t <= self.last_step[core_id]:
            raise ValueError(f"core {core_id}: step {t} recorded out of order")
        self.last_step[core_id] = t
        self.steps_recorded[core_id] += 1
        idx = np.flatnonzero(local_spikes)
        if len(idx):
            self.spike_steps[core_id].append(np.full(len(idx), t, dtype=np.int64))
            self.spike_neurons[core_id].append(idx)
        if self.voltages is not None and voltage is not None:
            self.voltages[core_id].append(np.array(voltage, copy=True))

    def record_input(self, t, neurons):
        if len(neurons):
            self.input_events.append((t, np.asarray(neurons, dtype=np.int64)))

    def record_output(self, t, spikes):
        idx = np.flatnonzero(spikes)
        if len(idx):
            self.output_steps.append(np.full(len(idx), t, dtype=np.int64))
            self.output_neurons.append(idx)

    def snapshot_weights(self, grid):
        self.weight_snapshots.append(grid)

    def local_buffer(self, core_id):
        """(steps, local indices) recorded for one core."""
        if not self.spike_steps[core_id]:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate(self.spike_steps[core_id]), np.concatenate(self.spike_neurons[core_id])

    @property
    def total_spikes(self):
        return sum(len(a) for buf in self.spike_steps for a in buf)


@dataclass
class Datasets:
    """Whole-network data stacked from the per-core probes."""

    raster: np.ndarray  # bool, (reservoirSize, totalSteps)
    weights: list = field(default_factory=list)  # SparseMatrix per trial
    voltages: np.ndarray | None = None
    input_raster: np.ndarray | None = None  # bool, (reservoirSize, totalSteps)
    output_raster: np.ndarray | None = None


def post_process(store, layout, output_size=0):
    n, T = layout.size, store.total_steps
    for c, count in enumerate(store.steps_recorded):
        if count != T:
            raise IncompleteRun(f"core {c} recorded {count} of {T} steps")
    raster = np.zeros((n, T), dtype=bool)
    for c, off in enumerate(layout.offsets):
        steps, local = store.local_buffer(c)
        raster[local + off, steps] = True
    volts = None
    if store.voltages is not None:
        volts = np.concatenate([np.stack(v, axis=1) for v in store.voltages], axis=0)
    inputs = np.zeros((n, T), dtype=bool)
    for t, neurons in store.input_events:
        inputs[neurons, t] = True
    out = None
    if output_size:
        out = np.zeros((output_size, T), dtype=bool)
        if store.output_steps:
            out[np.concatenate(store.output_neurons), np.concatenate(store.output_steps)] = True
    weights = [merge_chunks(g) for g in store.weight_snapshots]
    return Datasets(raster, weights, volts, inputs, out)


# --- pooling readout -------------------------------------------------------


class PoolingReadout:
    """Output neurons, each summing the spikes of a contiguous excitatory pool."""

    def __init__(self, n_ex, output_size, output_weight, config: NeuronConfig):
        self.pools = [(int(b[0]), int(b[-1]) + 1) for b in np.array_split(np.arange(n_ex), output_size)]
        self.output_weight = float(output_weight)
        self.config = config
        self.bounds = np.array([s for s, _ in self.pools] + [n_ex])
        self.v = np.zeros(output_size)
        self.u = np.zeros(output_size)
        self.refractory = np.zeros(output_size, dtype=np.int64)

    @property
    def size(self):
        return len(self.pools)

    def pool_counts(self, ex_spikes):
        c = np.concatenate(([0], np.cumsum(ex_spikes, dtype=np.int64)))
        return c[self.bounds[1:]] - c[self.bounds[:-1]]

    def reset(self):
        self.v[:] = 0.0
        self.u[:] = 0.0
        self.refractory[:] = 0


def pool_and_step(readout, ex_spikes):
    """Feed one step of excitatory spikes; returns output spikes of the next step."""
    current = readout.output_weight * readout.pool_counts(ex_spikes)
    return lif_update(readout.v, readout.u, readout.refractory, current, 0.0, readout.config)


# --- analysis --------------------------------------------------------------


def smooth_spikes(row, window):
    """Centred moving average; windows cut at the edges average what remains."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(row, dtype=float)
    half_lo = (window - 1) // 2
    half_hi = window - 1 - half_lo
    c = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(len(x))
    lo = np.maximum(idx - half_lo, 0)
    hi = np.minimum(idx + half_hi + 1, len(x))
    return (c[hi] - c[lo]) / (hi - lo)


# --- exports ---------------------------------------------------------------


def write_spike_csv(raster, path):
    """``step,neuron`` lines, sorted by step then neuron; no header."""
    neurons, steps = np.nonzero(raster)
    order = np.lexsort((neurons, steps))
    with open(path, "w") as fh:
        for t, i in zip(steps[order], neurons[order]):
            fh.write(f"{t},{i}\n")
    return len(order)


def read_spike_csv(path):
    steps, neurons = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t, i = line.split(",")
            steps.append(int(t))
            neurons.append(int(i))
    return np.array(steps, dtype=np.int64), np.array(neurons, dtype=np.int64)


def write_weight_snapshots(weights, run_dir):
    paths = []
    for k, w in enumerate(weights):
        path = Path(run_dir) / f"weights_trial_{k}.csr"
        save_csr(w, path)
        paths.append(path)
    return paths
