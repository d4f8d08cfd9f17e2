import numpy as np
import pytest

from lavanet import params as P
from lavanet.sparse import from_coo

_acceptance = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call":
        return
    key = marker.kwargs["criterion"]
    title = marker.kwargs.get("title", item.name)
    ok = call.excinfo is None
    prev = _acceptance.get(key, (title, True))
    _acceptance[key] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_acceptance):
        title, ok = _acceptance[key]
        terminalreporter.write_line(f"criterion {key:>2} {'PASS' if ok else 'FAIL'}: {title}")


@pytest.fixture
def outdir(tmp_path):
    return str(tmp_path / "runs")


@pytest.fixture
def small(outdir):
    """Overrides for a fast 60-neuron network."""
    return {
        "reservoirExSize": 48,
        "reservoirInSize": 12,
        "reservoirConnPerNeuron": 10,
        "neuronsPerCore": 20,
        "trials": 3,
        "stepsPerTrial": 30,
        "inputSequenceSize": 3,
        "inputSteps": 10,
        "inputNumTargetNeurons": 8,
        "outputDirectory": outdir,
    }


def random_sparse(rng, n, m=None, fill=0.3, integer=False):
    m = n if m is None else m
    mask = rng.random((n, m)) < fill
    vals = rng.integers(-9, 10, size=(n, m)).astype(float) if integer else rng.normal(size=(n, m))
    dense = np.where(mask, vals, 0.0)
    r, c = np.nonzero(dense)
    return from_coo(n, m, r, c, dense[r, c]), dense


@pytest.fixture
def sequence_params():
    from lavanet.experiments import SEQUENCE

    return P.merge(P.defaults(), SEQUENCE)
