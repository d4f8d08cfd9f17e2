"""Counter-based random streams keyed by (seed, entity kind, entity index).

Every stochastic entity (weight initializer, stimulus planner, each spike
generator in each trial, ...) draws from its own Philox stream. Streams never
share state, so results do not depend on the order in which entities are
evaluated or on how many host threads step the cores.
"""

import numpy as np

KINDS = {
    "weights": 1,
    "stimulus": 2,
    "input": 3,
    "noise": 4,
    "noise_targets": 5,
}


def stream(seed, kind, *index):
    """Return an independent generator for entity ``(kind, *index)``."""
    if kind not in KINDS:
        raise KeyError(f"unknown stream kind {kind!r}")
    key = (KINDS[kind],) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
