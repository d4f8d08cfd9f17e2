"""Distribution of one reservoir matrix onto cores.

Neurons go to cores in contiguous blocks of ``neuronsPerCore``. A matrix over
N neurons on C cores becomes a C x C grid of chunks; chunk[a][b] holds the
connections from core b's neurons into core a's neurons. Empty chunks are
kept, so a grid always has exactly C**2 chunks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentChunkShapes, PerCoreOutOfRange, ShapeMismatch
from .params import MAX_NEURONS_PER_CORE
from .sparse import SparseMatrix, hstack_blocks


@dataclass(frozen=True)
class CoreLayout:
    coreCount: int
    neuronRanges: tuple  # ((start, end), ...) per core

    @property
    def size(self):
        return self.neuronRanges[-1][1] if self.neuronRanges else 0

    @property
    def sizes(self):
        return [e - s for s, e in self.neuronRanges]

    @property
    def offsets(self):
        return [s for s, _ in self.neuronRanges]

    def core_of(self, neuron):
        for c, (s, e) in enumerate(self.neuronRanges):
            if s <= neuron < e:
                return c
        raise IndexError(neuron)


@dataclass(frozen=True)
class ChunkGrid:
    layout: CoreLayout
    chunks: tuple  # chunks[a][b], a = target core, b = source core

    def __post_init__(self):
        c = self.layout.coreCount
        if len(self.chunks) != c or any(len(row) != c for row in self.chunks):
            raise InconsistentChunkShapes(f"expected a {c} x {c} grid of chunks")
        sizes = self.layout.sizes
        for a, row in enumerate(self.chunks):
            for b, chunk in enumerate(row):
                if chunk.shape != (sizes[a], sizes[b]):
                    raise InconsistentChunkShapes(
                        f"chunk ({a}, {b}) has shape {chunk.shape}, expected {(sizes[a], sizes[b])}")

    def __len__(self):
        return self.layout.coreCount ** 2

    @property
    def nnz(self):
        return sum(ch.nnz for row in self.chunks for ch in row)


def compute_layout(nNeurons, neuronsPerCore):
    if not 1 <= neuronsPerCore <= MAX_NEURONS_PER_CORE:
        raise PerCoreOutOfRange(
            f"neuronsPerCore={neuronsPerCore}: must be in [1, {MAX_NEURONS_PER_CORE}]; "
            f"a core time-multiplexes at most {MAX_NEURONS_PER_CORE} compartments")
    if nNeurons < 1:
        raise ShapeMismatch("need at least one neuron")
    cores = math.ceil(nNeurons / neuronsPerCore)
    ranges = tuple((c * neuronsPerCore, min((c + 1) * neuronsPerCore, nNeurons)) for c in range(cores))
    return CoreLayout(cores, ranges)


def chunk_count(layout):
    return layout.coreCount ** 2


def split(W, layout):
    if W.rows != W.cols:
        raise ShapeMismatch(f"weight matrix must be square, got {W.shape}")
    if W.rows != layout.size:
        raise ShapeMismatch(f"matrix has {W.rows} neurons, layout covers {layout.size}")
    chunks = []
    for r0, r1 in layout.neuronRanges:
        # one pass over the row block, then bucket entries by source core
        lo, hi = W.rowPointers[r0], W.rowPointers[r1]
        cols = W.columnIndices[lo:hi]
        vals = W.values[lo:hi]
        local_rows = W.entry_rows()[lo:hi] - r0
        src_core = np.searchsorted([s for s, _ in layout.neuronRanges], cols, side="right") - 1
        row = []
        for b, (c0, c1) in enumerate(layout.neuronRanges):
            keep = src_core == b
            rp = np.concatenate(([0], np.cumsum(np.bincount(local_rows[keep], minlength=r1 - r0))))
            row.append(SparseMatrix(r1 - r0, c1 - c0, rp, cols[keep] - c0, vals[keep]))
        chunks.append(tuple(row))
    return ChunkGrid(layout, tuple(chunks))


def merge(grid):
    """Reassemble the full matrix; exact inverse of split."""
    return hstack_blocks([list(row) for row in grid.chunks])


def describe(layout):
    """key: value report lines for the partition of a network."""
    return [
        f"neurons: {layout.size}",
        f"cores: {layout.coreCount}",
        f"chunks: {chunk_count(layout)}",
        "core_sizes: " + " ".join(str(s) for s in layout.sizes),
    ]
