import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lavanet.engine import NeuronConfig
from lavanet.errors import IncompleteRun
from lavanet.partition import compute_layout, split
from lavanet.probes import (PoolingReadout, ProbeStore, pool_and_step, post_process, read_spike_csv,
                            smooth_spikes, write_spike_csv, write_weight_snapshots)
from lavanet.sparse import load

from .conftest import random_sparse

NEURON = NeuronConfig(100.0, 5.0, 1200.0, 2)


def fill_store(raster, per_core):
    layout = compute_layout(raster.shape[0], per_core)
    store = ProbeStore(layout, raster.shape[1])
    for t in range(raster.shape[1]):
        for c, (s0, s1) in enumerate(layout.neuronRanges):
            store.record_step(c, raster[s0:s1, t], t)
    return layout, store


def test_empty_step_adds_nothing():
    store = ProbeStore(compute_layout(4, 4), 3)
    store.record_step(0, np.zeros(4, bool), 0)
    assert store.total_spikes == 0 and store.spike_steps[0] == []


def test_local_spike_stacks_to_global_index():
    layout = compute_layout(12, 4)
    store = ProbeStore(layout, 2)
    for t in range(2):
        for c in range(3):
            local = np.zeros(4, bool)
            if (c, t) == (1, 1):
                local[2] = True
            store.record_step(c, local, t)
    raster = post_process(store, layout).raster
    assert np.argwhere(raster).tolist() == [[6, 1]]


def test_hand_built_raster():
    expected = np.random.default_rng(0).random((12, 25)) < 0.2
    layout, store = fill_store(expected, 4)
    ds = post_process(store, layout)
    assert np.array_equal(ds.raster, expected)
    assert store.total_spikes == expected.sum()


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(1, 30), st.integers(1, 40), st.integers(0, 2**31))
def test_stacking_is_lossless(n, steps, per_core, seed):
    raster = np.random.default_rng(seed).random((n, steps)) < 0.3
    layout, store = fill_store(raster, per_core)
    ds = post_process(store, layout)
    assert ds.raster.shape == (n, steps)
    for c, (s0, s1) in enumerate(layout.neuronRanges):
        t, i = store.local_buffer(c)
        back = np.zeros((s1 - s0, steps), bool)
        back[i, t] = True
        assert np.array_equal(back, ds.raster[s0:s1])


def test_incomplete_run():
    layout = compute_layout(8, 4)
    store = ProbeStore(layout, 5)
    for t in range(5):
        store.record_step(0, np.zeros(4, bool), t)
    for t in range(4):
        store.record_step(1, np.zeros(4, bool), t)
    with pytest.raises(IncompleteRun):
        post_process(store, layout)


def test_out_of_order_step_rejected():
    store = ProbeStore(compute_layout(4, 4), 5)
    store.record_step(0, np.zeros(4, bool), 2)
    with pytest.raises(ValueError):
        store.record_step(0, np.zeros(4, bool), 2)


def test_weight_snapshots_merge(tmp_path):
    m, _ = random_sparse(np.random.default_rng(1), 10, fill=0.4)
    layout = compute_layout(10, 3)
    store = ProbeStore(layout, 0)
    for _ in range(3):
        store.snapshot_weights(split(m, layout))
    ds = post_process(store, layout)
    assert len(ds.weights) == 3 and all(w.same_as(m) for w in ds.weights)
    paths = write_weight_snapshots(ds.weights, tmp_path)
    assert [p.name for p in paths] == ["weights_trial_0.csr", "weights_trial_1.csr", "weights_trial_2.csr"]
    assert load(paths[2]).same_as(m)


# --- pooling ---------------------------------------------------------------


def test_pools_of_fifty():
    r = PoolingReadout(400, 8, 100.0, NEURON)
    assert [b - a for a, b in r.pools] == [50] * 8
    assert r.pools[0] == (0, 50) and r.pools[-1] == (350, 400)


def test_uneven_pools_differ_by_one():
    r = PoolingReadout(403, 8, 100.0, NEURON)
    sizes = [b - a for a, b in r.pools]
    assert max(sizes) - min(sizes) <= 1 and sum(sizes) == 403


def test_no_spikes_no_current():
    r = PoolingReadout(400, 8, 100.0, NEURON)
    out = pool_and_step(r, np.zeros(400, bool))
    assert not out.any() and not r.u.any()


def test_full_pool_fires_output():
    r = PoolingReadout(400, 8, 100.0, NEURON)
    ex = np.zeros(400, bool)
    ex[50:100] = True
    out = pool_and_step(r, ex)
    # 50 spikes x 100 = 5000 >= 1200 in one step
    assert out.tolist() == [False, True] + [False] * 6


def test_pool_counts():
    r = PoolingReadout(10, 3, 1.0, NEURON)
    assert r.pools == [(0, 4), (4, 7), (7, 10)]
    ex = np.array([1, 1, 0, 0, 1, 0, 1, 1, 1, 1], bool)
    assert r.pool_counts(ex).tolist() == [2, 2, 3]


# --- smoothing -------------------------------------------------------------


def smooth_oracle(row, window):
    half_lo = (window - 1) // 2
    out = []
    for i in range(len(row)):
        seg = row[max(i - half_lo, 0):i - half_lo + window]
        out.append(sum(seg) / len(seg))
    return np.array(out)


def test_all_ones():
    assert np.array_equal(smooth_spikes(np.ones(17), 5), np.ones(17))


def test_single_spike_plateau():
    row = np.zeros(11)
    row[5] = 1
    out = smooth_spikes(row, 5)
    assert np.allclose(out[3:8], 0.2) and not out[:3].any() and not out[8:].any()


def test_single_spike_at_edge():
    row = np.zeros(11)
    row[0] = 1
    out = smooth_spikes(row, 5)
    assert np.allclose(out[:3], [1 / 3, 1 / 4, 1 / 5])


@settings(max_examples=100)
@given(st.integers(1, 60), st.integers(1, 12), st.integers(0, 2**31))
def test_smoothing_matches_oracle(n, window, seed):
    row = (np.random.default_rng(seed).random(n) < 0.3).astype(float)
    assert np.allclose(smooth_spikes(row, window), smooth_oracle(row, window), rtol=0, atol=1e-12)


@settings(max_examples=100)
@given(st.integers(1, 12), st.integers(0, 2**31))
def test_mean_preserved_away_from_edges(window, seed):
    row = (np.random.default_rng(seed).random(100) < 0.3).astype(float)
    row[:window] = row[-window:] = 0.0
    assert abs(smooth_spikes(row, window).mean() - row.mean()) <= 1e-12


# --- csv -------------------------------------------------------------------


def test_spike_csv_sorted(tmp_path):
    raster = np.zeros((4, 5), bool)
    raster[3, 0] = raster[1, 0] = raster[0, 4] = raster[2, 2] = True
    assert write_spike_csv(raster, tmp_path / "s.csv") == 4
    assert (tmp_path / "s.csv").read_text() == "0,1\n0,3\n2,2\n4,0\n"
    steps, neurons = read_spike_csv(tmp_path / "s.csv")
    assert steps.tolist() == [0, 0, 2, 4] and neurons.tolist() == [1, 3, 2, 0]


def test_empty_spike_csv(tmp_path):
    assert write_spike_csv(np.zeros((3, 3), bool), tmp_path / "s.csv") == 0
    assert (tmp_path / "s.csv").read_text() == ""
