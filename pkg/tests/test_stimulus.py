import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lavanet import params as P
from lavanet.errors import InvalidLeaveOut, RegionsDontFit, SquareOutOfBounds, WindowOverflow
from lavanet.rng import stream
from lavanet.stimulus import (build_alternating_input, build_input, build_leave_n_out_input,
                              build_sequence_input, build_topological_input, square_targets)


def params(**kw):
    # bypass validation: these tests exercise the builders' own checks
    return P.merge(P.defaults(), kw)


def test_sequence_windows():
    plan = build_sequence_input(params(), stream(1, "stimulus"))
    assert plan.windows(0) == [(0, 20), (20, 40), (40, 60)]
    assert all(plan.windows(k) == plan.windows(0) for k in range(10))


def test_sequence_of_one():
    plan = build_sequence_input(params(inputSequenceSize=1), stream(1, "stimulus"))
    assert plan.windows(3) == [(0, 20)]


def test_sequence_sets_are_disjoint():
    plan = build_sequence_input(params(), stream(1, "stimulus"))
    targets = np.concatenate([b.targets for b in plan.trials[0]])
    assert len(targets) == 120 and len(set(targets.tolist())) == 120


def test_sequence_overflow():
    with pytest.raises(WindowOverflow):
        build_sequence_input(params(inputSteps=21), stream(1, "stimulus"))


def test_sequence_sets_must_fit():
    with pytest.raises(RegionsDontFit):
        build_sequence_input(params(inputNumTargetNeurons=150), stream(1, "stimulus"))


def test_leave_none_out():
    plan = build_leave_n_out_input(params(inputIsLeaveNOut=True, inputLeaveOutCount=0), stream(1, "stimulus"))
    base = plan.regions[0]
    assert all(np.array_equal(t[0].targets, base) for t in plan.trials)


def test_leave_five_out():
    plan = build_leave_n_out_input(params(inputLeaveOutCount=5), stream(1, "stimulus"))
    base = set(plan.regions[0].tolist())
    for (block,) in plan.trials:
        assert len(block.targets) == 35 and set(block.targets.tolist()) <= base


def test_leave_out_frequency():
    plan = build_leave_n_out_input(params(trials=100, inputLeaveOutCount=5), stream(3, "stimulus"))
    base = plan.regions[0]
    left_out = np.array([[n not in set(t[0].targets.tolist()) for n in base] for t in plan.trials])
    freq = left_out.mean(axis=0)
    p = 5 / 40
    assert np.all(np.abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / 100))
    assert left_out.any(axis=0).all()


def test_leave_out_too_many():
    with pytest.raises(InvalidLeaveOut):
        build_leave_n_out_input(params(inputLeaveOutCount=40), stream(1, "stimulus"))


def test_square_corner():
    assert sorted(square_targets(4, 4, 0, 0, 2).tolist()) == [0, 1, 4, 5]


def test_square_whole_grid():
    assert sorted(square_targets(4, 4, 0, 0, 4).tolist()) == list(range(16))


def test_square_out_of_bounds():
    with pytest.raises(SquareOutOfBounds):
        square_targets(4, 4, 2, 2, 3)


def test_topological_plan():
    p = params(reservoirExSize=400, gridWidth=20, gridHeight=20, inputIsSequence=False,
               inputIsTopological=True, inputSquareSide=3, inputSquareX=5, inputSquareY=2)
    plan = build_topological_input(p)
    assert sorted(plan.trials[0][0].targets.tolist()) == [45, 46, 47, 65, 66, 67, 85, 86, 87]
    assert plan.windows(0) == [(0, 20)]


def test_alternating_is_balanced():
    p = params(trials=100, inputIsSequence=False, inputIsAlternating=True, inputRegionCount=2)
    plan = build_alternating_input(p, stream(1, "stimulus"))
    picks = np.array([t[0].region for t in plan.trials])
    assert all(len(t) == 1 for t in plan.trials)
    assert abs((picks == 0).sum() - 50) <= 3 * np.sqrt(25)
    for t in plan.trials:
        assert np.array_equal(t[0].targets, plan.regions[t[0].region])
    assert not set(plan.regions[0].tolist()) & set(plan.regions[1].tolist())


def test_alternating_capacity():
    with pytest.raises(RegionsDontFit):
        build_alternating_input(params(inputRegionCount=11, inputNumTargetNeurons=40), stream(1, "stimulus"))


def test_no_input_mode():
    plan = build_input(params(inputIsSequence=False), stream(1, "stimulus"))
    assert plan.mode == "none" and all(len(t) == 0 for t in plan.trials)


modes = st.sampled_from([
    {"inputIsSequence": True},
    {"inputIsSequence": False, "inputIsLeaveNOut": True},
    {"inputIsSequence": False, "inputIsAlternating": True, "inputRegionCount": 3},
])


@settings(max_examples=30, deadline=None)
@given(modes, st.integers(0, 2**31), st.integers(20, 400))
def test_plans_are_pure_and_excitatory(mode, seed, n_ex):
    p = params(reservoirExSize=n_ex, inputNumTargetNeurons=6, **mode)
    a = build_input(p, stream(seed, "stimulus"))
    b = build_input(p, stream(seed, "stimulus"))
    assert all(max(a.all_targets()) < n_ex for _ in [0])
    for ta, tb in zip(a.trials, b.trials):
        assert len(ta) == len(tb)
        for x, y in zip(ta, tb):
            assert np.array_equal(x.targets, y.targets) and x.window == y.window
            assert 0 <= x.window[0] < x.window[1] <= p.stepsPerTrial
