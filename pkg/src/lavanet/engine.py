"""Multi-core CUBA LIF simulation.

Per timestep and neuron (non-refractory)::

    u <- u * (1 - 1/currentTau) + sum_j w(i<-j) * spike_j(t-1) + external_i(t)
    v <- v * (1 - 1/voltageTau) + u
    spike if v >= threshold; then v <- 0, refractory <- refractoryDelay

A refractory neuron keeps integrating u, holds v at 0 and counts its
refractory period down. Spikes reach their targets one step after emission,
so each core needs only the previous step's global spike vector and its own
row block of chunks. Cores step independently between barriers.

Synaptic input is accumulated entry by entry in ascending global source
order, whatever the partition, which makes the result bit-identical across
core counts.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .partition import ChunkGrid


@dataclass(frozen=True)
class NeuronConfig:
    voltageTau: float
    currentTau: float
    threshold: float
    refractoryDelay: int

    def __post_init__(self):
        if self.voltageTau < 1 or self.currentTau < 1:
            raise ValueError("taus must be >= 1 timestep")
        if self.refractoryDelay < 0:
            raise ValueError("refractoryDelay must be non-negative")

    @property
    def voltage_decay(self):
        return 1.0 - 1.0 / self.voltageTau

    @property
    def current_decay(self):
        return 1.0 - 1.0 / self.currentTau

    @classmethod
    def from_params(cls, p):
        return cls(float(p.voltageTau), float(p.currentTau), float(p.thresholdMant), int(p.refractoryDelay))


@dataclass
class CoreState:
    """State owned by one core: its neurons and its row block of chunks."""

    core_id: int
    offset: int
    size: int
    source_ranges: tuple
    chunks: list
    v: np.ndarray = None
    u: np.ndarray = None
    refractory: np.ndarray = None
    entry_rows: list = field(default_factory=list)

    def __post_init__(self):
        if self.v is None:
            self.v = np.zeros(self.size)
        if self.u is None:
            self.u = np.zeros(self.size)
        if self.refractory is None:
            self.refractory = np.zeros(self.size, dtype=np.int64)
        self.entry_rows = [ch.entry_rows() for ch in self.chunks]

    def set_chunk(self, b, chunk):
        if chunk.shape != self.chunks[b].shape:
            raise ValueError("chunk shape changed")
        if not np.array_equal(chunk.rowPointers, self.chunks[b].rowPointers):
            self.entry_rows[b] = chunk.entry_rows()
        self.chunks[b] = chunk

    def synaptic_input(self, spikes):
        rows, vals = [], []
        for (s0, s1), chunk, er in zip(self.source_ranges, self.chunks, self.entry_rows):
            if chunk.nnz == 0:
                continue
            hit = spikes[s0:s1][chunk.columnIndices]
            if hit.any():
                rows.append(er[hit])
                vals.append(chunk.values[hit])
        if not rows:
            return np.zeros(self.size)
        # bincount adds in array order: per target row this is a left fold
        # over sources in ascending global index
        return np.bincount(np.concatenate(rows), weights=np.concatenate(vals), minlength=self.size)


def lif_update(v, u, refractory, synaptic, external, config):
    """One CUBA LIF step on state arrays (modified in place); returns spikes."""
    u *= config.current_decay
    u += synaptic
    u += external
    refr = refractory > 0
    v *= config.voltage_decay
    v += u
    v[refr] = 0.0
    refractory[refr] -= 1
    spikes = ~refr & (v >= config.threshold)
    v[spikes] = 0.0
    refractory[spikes] = config.refractoryDelay
    return spikes


def step_core(state, spikes_prev, external, config):
    """Advance one core by one step; returns its local spike vector."""
    syn = state.synaptic_input(spikes_prev)
    return lif_update(state.v, state.u, state.refractory, syn, external, config)


def make_cores(grid):
    layout = grid.layout
    return [
        CoreState(a, s, e - s, layout.neuronRanges, list(grid.chunks[a]))
        for a, (s, e) in enumerate(layout.neuronRanges)
    ]


def run_timestep(cores, spikes_prev, external, config, pool=None):
    """Step every core against the same previous spike set; barrier; concat."""
    def work(core):
        ext = external[core.offset:core.offset + core.size]
        return step_core(core, spikes_prev, ext, config)

    if pool is None:
        parts = [work(c) for c in cores]
    else:
        parts = list(pool.map(work, cores))
    return np.concatenate(parts)


def reset_trial(cores, traces=None, also_reset_traces=True):
    """Zero voltages, currents and refractory counters; weights untouched."""
    for c in cores:
        c.v[:] = 0.0
        c.u[:] = 0.0
        c.refractory[:] = 0
    if traces is not None and also_reset_traces:
        traces.clear()


@dataclass
class SpikeGenerator:
    """Bernoulli spike source feeding current into target neurons.

    Windows are [start, end) global steps. Each emitted spike injects
    ``injectedWeight`` into the target's synaptic current at the same step.
    """

    targetNeurons: np.ndarray
    activeWindows: list
    spikeProb: float
    injectedWeight: float

    def __post_init__(self):
        self.targetNeurons = np.asarray(self.targetNeurons, dtype=np.int64)
        ws = sorted(tuple(w) for w in self.activeWindows)
        for (s0, e0), (s1, _) in zip(ws, ws[1:]):
            if s1 < e0:
                raise ValueError("generator windows overlap")
        self.activeWindows = ws

    def active(self, t):
        return any(s <= t < e for s, e in self.activeWindows)

    def emit(self, t, rng):
        """Targets that receive a spike at step t (draws only while active)."""
        if len(self.targetNeurons) == 0 or not self.active(t):
            return self.targetNeurons[:0]
        fire = rng.random(len(self.targetNeurons)) < self.spikeProb
        return self.targetNeurons[fire]


def build_noise(p, n_neurons, total_steps, rng):
    """Noise generator on ``noiseNeurons`` distinct, uniformly chosen neurons."""
    if p.noiseNeurons > n_neurons:
        raise ValueError("noiseNeurons exceeds the reservoir size")
    targets = np.sort(rng.choice(n_neurons, size=p.noiseNeurons, replace=False))
    return SpikeGenerator(targets, [(0, total_steps)], p.noiseSpikeProb, p.noiseWeight)


def inject(generators, rngs, t, n):
    """External current at step t and each generator's fired targets."""
    current = np.zeros(n)
    fired = []
    for gen, rng in zip(generators, rngs):
        hit = gen.emit(t, rng)
        np.add.at(current, hit, gen.injectedWeight)
        fired.append(hit)
    return current, fired


class Simulator:
    """Cores of one network plus the global spike vector between barriers."""

    def __init__(self, grid: ChunkGrid, config: NeuronConfig, threads=1):
        self.layout = grid.layout
        self.config = config
        self.cores = make_cores(grid)
        self.n = self.layout.size
        self.spikes = np.zeros(self.n, dtype=bool)
        self.threads = threads
        self._pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def step(self, external=None):
        if external is None:
            external = np.zeros(self.n)
        self.spikes = run_timestep(self.cores, self.spikes, external, self.config, self._pool)
        return self.spikes

    def reset(self, traces=None, also_reset_traces=True):
        reset_trial(self.cores, traces, also_reset_traces)
        self.spikes = np.zeros(self.n, dtype=bool)

    def grid(self):
        return ChunkGrid(self.layout, tuple(tuple(c.chunks) for c in self.cores))

    @property
    def voltages(self):
        return np.concatenate([c.v for c in self.cores])

    @property
    def currents(self):
        return np.concatenate([c.u for c in self.cores])

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
