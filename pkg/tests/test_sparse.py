import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lavanet import sparse as S
from lavanet.errors import GridMismatch, InvalidDistributionParams, NonSquare, ShapeMismatch
from lavanet.rng import stream

from .conftest import random_sparse


def test_from_dense_small():
    m = S.from_dense([[0, 1], [2, 0]])
    assert list(m.rowPointers) == [0, 1, 2]
    assert list(m.columnIndices) == [1, 0]
    assert list(m.values) == [1, 2]


def test_all_zero():
    m = S.from_dense(np.zeros((3, 3)))
    assert m.nnz == 0 and list(m.rowPointers) == [0, 0, 0, 0]


def test_random_round_trip():
    rng = np.random.default_rng(0)
    dense = np.where(rng.random((20, 20)) < 0.3, rng.normal(size=(20, 20)), 0.0)
    assert np.array_equal(S.to_dense(S.from_dense(dense)), dense)


@settings(max_examples=200)
@given(st.integers(0, 64), st.integers(0, 64), st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_round_trip_any_shape(n, m, fill, seed):
    rng = np.random.default_rng(seed)
    dense = np.where(rng.random((n, m)) < fill, rng.normal(size=(n, m)), 0.0)
    back = S.to_dense(S.from_dense(dense))
    assert back.shape == dense.shape and np.array_equal(back, dense)


def test_from_coo_matches_dense():
    m, dense = random_sparse(np.random.default_rng(1), 15, 9, fill=0.4)
    assert np.array_equal(S.to_dense(m), dense)


def test_invalid_csr_rejected():
    with pytest.raises(ShapeMismatch):
        S.SparseMatrix(2, 2, [0, 2, 2], [1, 0], [1.0, 2.0])  # columns decrease within row 0
    with pytest.raises(ShapeMismatch):
        S.SparseMatrix(2, 2, [0, 1, 3], [0, 1], [1.0, 2.0])
    with pytest.raises(ShapeMismatch):
        S.SparseMatrix(2, 2, [0, 1, 2], [0, 5], [1.0, 2.0])


def test_submatrix():
    m, dense = random_sparse(np.random.default_rng(2), 12, fill=0.5)
    sub = m.submatrix(3, 9, 2, 7)
    assert np.array_equal(S.to_dense(sub), dense[3:9, 2:7])


def test_text_format_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    dense = np.where(rng.random((17, 11)) < 0.4, rng.lognormal(size=(17, 11)) * 1e-3, 0.0)
    m = S.from_dense(dense)
    S.save(m, tmp_path / "w.csr")
    text = (tmp_path / "w.csr").read_text()
    assert text.splitlines()[0] == f"csr 17 11 {m.nnz}"
    back = S.load(tmp_path / "w.csr")
    assert back.same_as(m)
    assert back.values.tobytes() == m.values.tobytes()


def test_text_format_keeps_explicit_zeros():
    m = S.SparseMatrix(2, 2, [0, 1, 2], [1, 0], [0.0, -3.5])
    assert S.loads(S.dumps(m)).same_as(m)


def test_text_format_empty_matrix():
    m = S.empty(4, 4)
    assert S.loads(S.dumps(m)).same_as(m)


# --- initializers ----------------------------------------------------------


def column_counts(w):
    return np.bincount(w.full.columnIndices, minlength=w.full.cols)


def test_reference_connectivity():
    w = S.init_random(400, 100, 35, "lognormal", stream(1, "weights"), 12.0, 0.5, 36.0, 0.5)
    assert np.all(column_counts(w) == 35)
    assert w.obeys_dale()
    assert not w.has_self_connections()


def test_zero_connections():
    w = S.init_random(10, 3, 0, "normal", stream(1, "weights"), 1.0, 1.0, 1.0, 1.0)
    assert w.full.nnz == 0


def test_bad_sigma():
    with pytest.raises(InvalidDistributionParams):
        S.init_random(10, 3, 2, "lognormal", stream(1, "weights"), 1.0, 0.0, 1.0, 1.0)


def test_lognormal_mean_matches_closed_form():
    mean, sigma, n = 12.0, 0.5, 100_000
    x = S.draw_magnitudes("lognormal", mean, sigma, n, np.random.default_rng(5))
    # moments of exp(N(mu, sigma^2)) with mu chosen for the requested mean
    mu = np.log(mean) - sigma**2 / 2
    analytic_mean = np.exp(mu + sigma**2 / 2)
    analytic_sd = np.sqrt((np.exp(sigma**2) - 1) * np.exp(2 * mu + sigma**2))
    assert abs(x.mean() - analytic_mean) < 3 * analytic_sd / np.sqrt(n)


def test_constant_values_and_signs():
    w = S.init_constant(40, 10, 7, 4.0, 3.0, stream(2, "weights"))
    cols = w.full.columnIndices
    assert np.all(w.full.values[cols < 40] == 4.0)
    assert np.all(w.full.values[cols >= 40] == -3.0)
    assert np.all(column_counts(w) == 7)


def test_blocks_compose_to_full():
    w = S.init_random(30, 8, 6, "normal", stream(3, "weights"), 5.0, 2.0, 9.0, 2.0)
    rebuilt = S.hstack_blocks([[w.ee, w.ei], [w.ie, w.ii]])
    assert rebuilt.same_as(w.full)
    assert np.all(w.ee.values > 0) and np.all(w.ii.values < 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["normal", "lognormal", "constant"]),
       st.integers(1, 30), st.integers(1, 10), st.integers(0, 12))
def test_initializers_obey_dale(seed, kind, n_ex, n_in, conn):
    conn = min(conn, n_ex + n_in - 1)
    rng = stream(seed, "weights")
    if kind == "constant":
        w = S.init_constant(n_ex, n_in, conn, 2.0, 5.0, rng)
    else:
        w = S.init_random(n_ex, n_in, conn, kind, rng, 3.0, 1.0, 6.0, 1.0)
    assert w.obeys_dale()
    assert not w.has_self_connections()
    assert np.all(column_counts(w) == conn)


# --- anisotropic -----------------------------------------------------------


def torus_offsets(w, width, height, sources):
    full = w.full
    rows = full.entry_rows()
    dx, dy = [], []
    for j in sources:
        t = rows[(full.columnIndices == j) & (rows < width * height)]
        ty, tx = np.divmod(t, width)
        sy, sx = divmod(j, width)
        dx.append((tx - sx + width // 2) % width - width // 2)
        dy.append((ty - sy + height // 2) % height - height // 2)
    return np.concatenate(dx), np.concatenate(dy)


def test_anisotropic_zero_shift_is_centred():
    width = height = 20
    w = S.init_anisotropic(width, height, 120, 0.0, 3.0, stream(4, "weights"))
    dx, dy = torus_offsets(w, width, height, range(width * height))
    assert np.hypot(dx.mean(), dy.mean()) < 0.5


def test_anisotropic_shift_moves_mean():
    width = height = 40
    k, sigma = 200, 3.0
    directions = np.zeros(width * height)
    w = S.init_anisotropic(width, height, k, 2.0, sigma, stream(5, "weights"), directions=directions)
    dx, dy = torus_offsets(w, width, height, [820])
    assert abs(dx.mean() - 2.0) < 3 * sigma / np.sqrt(k)
    assert abs(dy.mean()) < 3 * sigma / np.sqrt(k)


def test_anisotropic_with_inhibitory_pool():
    w = S.init_anisotropic(10, 10, 20, 1.0, 2.5, stream(6, "weights"), nEx=100, nIn=25)
    assert w.obeys_dale()
    assert not w.has_self_connections()
    assert np.all(column_counts(w) == 20)


def test_anisotropic_grid_mismatch():
    with pytest.raises(GridMismatch):
        S.init_anisotropic(10, 10, 5, 1.0, 2.0, stream(1, "weights"), nEx=99)


def test_direction_field_is_smooth():
    theta = S.direction_field(32, 32, np.random.default_rng(0)).reshape(32, 32)
    # neighbouring angles differ far less than random angles would
    diff = np.angle(np.exp(1j * (theta[:, 1:] - theta[:, :-1])))
    assert np.median(np.abs(diff)) < 0.5


# --- spectral radius -------------------------------------------------------


def test_spectral_radius_swap():
    assert S.spectral_radius(S.from_dense([[0, 1], [1, 0]])) == pytest.approx(1.0, rel=1e-6)


def test_spectral_radius_identity():
    assert S.spectral_radius(S.from_dense(np.eye(5))) == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("cutoff", [0, 256])
def test_spectral_radius_random(cutoff):
    m, dense = random_sparse(np.random.default_rng(7), 12, fill=0.4)
    oracle = np.max(np.abs(np.linalg.eigvals(dense)))
    assert S.spectral_radius(m, dense_cutoff=cutoff) == pytest.approx(oracle, rel=1e-5)


def test_spectral_radius_non_square():
    with pytest.raises(NonSquare):
        S.spectral_radius(S.empty(2, 3))
