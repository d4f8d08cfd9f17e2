"""CSR weight storage, reservoir initializers and spectral radius.

Orientation: entry (i, j) is the weight of the connection FROM neuron j TO
neuron i, so rows are targets and a column holds one neuron's outgoing
synapses. Accumulating a spike vector is ``W @ s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InvalidDistributionParams, NonSquare, ShapeMismatch

DENSE_EIG_CUTOFF = 256


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Compressed sparse row matrix.

    Constructors other than the raw one drop zeros. The raw constructor keeps
    whatever it is given so that plastic synapses whose weight reached 0 keep
    their slot in the sparsity pattern.
    """

    rows: int
    cols: int
    rowPointers: np.ndarray
    columnIndices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rp = np.asarray(self.rowPointers, dtype=np.int64)
        ci = np.asarray(self.columnIndices, dtype=np.int64)
        va = np.asarray(self.values, dtype=np.float64)
        for a in (rp, ci, va):
            a.setflags(write=False)
        object.__setattr__(self, "rowPointers", rp)
        object.__setattr__(self, "columnIndices", ci)
        object.__setattr__(self, "values", va)
        self.check()

    def check(self):
        rp, ci = self.rowPointers, self.columnIndices
        if self.rows < 0 or self.cols < 0:
            raise ShapeMismatch("negative shape")
        if rp.shape != (self.rows + 1,) or rp[0] != 0 or rp[-1] != len(self.values):
            raise ShapeMismatch("row pointers do not match the stored entries")
        if len(ci) != len(self.values):
            raise ShapeMismatch("column indices and values differ in length")
        if np.any(np.diff(rp) < 0):
            raise ShapeMismatch("row pointers must be non-decreasing")
        if len(ci):
            if ci.min() < 0 or ci.max() >= self.cols:
                raise ShapeMismatch("column index out of range")
            # strictly increasing inside each row: a non-increase is only
            # allowed where a new row starts
            steps = np.diff(ci) <= 0
            if np.any(steps):
                row_starts = np.zeros(len(ci), dtype=bool)
                row_starts[rp[1:-1][rp[1:-1] < len(ci)]] = True
                if np.any(steps & ~row_starts[1:]):
                    raise ShapeMismatch("column indices must increase within a row")

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return len(self.values)

    def entry_rows(self):
        """Row index of every stored entry (COO row array)."""
        return np.repeat(np.arange(self.rows, dtype=np.int64), np.diff(self.rowPointers))

    def with_values(self, values):
        """Same sparsity pattern, new values."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.values.shape:
            raise ShapeMismatch("new values must match the stored pattern")
        return SparseMatrix(self.rows, self.cols, self.rowPointers, self.columnIndices, values)

    def same_as(self, other):
        """Exact equality of shape, pattern and values."""
        return (
            self.shape == other.shape
            and np.array_equal(self.rowPointers, other.rowPointers)
            and np.array_equal(self.columnIndices, other.columnIndices)
            and np.array_equal(self.values, other.values)
        )

    def submatrix(self, r0, r1, c0, c1):
        """Entries with row in [r0, r1) and column in [c0, c1), reindexed locally."""
        lo, hi = self.rowPointers[r0], self.rowPointers[r1]
        ci = self.columnIndices[lo:hi]
        keep = (ci >= c0) & (ci < c1)
        local_rows = self.entry_rows()[lo:hi][keep] - r0
        counts = np.bincount(local_rows, minlength=r1 - r0)
        rp = np.concatenate(([0], np.cumsum(counts)))
        return SparseMatrix(r1 - r0, c1 - c0, rp, ci[keep] - c0, self.values[lo:hi][keep])

    def to_scipy(self):
        import scipy.sparse as sp

        return sp.csr_matrix((self.values, self.columnIndices, self.rowPointers), shape=self.shape)

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def empty(rows, cols):
    return SparseMatrix(rows, cols, np.zeros(rows + 1, dtype=np.int64), [], [])


def from_coo(rows, cols, r, c, v, shape_check=True):
    """Build CSR from coordinate triplets; zeros dropped, duplicates rejected."""
    r = np.asarray(r, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    v = np.asarray(v, dtype=np.float64)
    keep = v != 0
    r, c, v = r[keep], c[keep], v[keep]
    if shape_check and len(r) and (r.min() < 0 or r.max() >= rows or c.min() < 0 or c.max() >= cols):
        raise ShapeMismatch("coordinate out of range")
    order = np.lexsort((c, r))
    r, c, v = r[order], c[order], v[order]
    if len(r) > 1 and np.any((np.diff(r) == 0) & (np.diff(c) == 0)):
        raise ShapeMismatch("duplicate coordinates")
    rp = np.concatenate(([0], np.cumsum(np.bincount(r, minlength=rows))))
    return SparseMatrix(rows, cols, rp, c, v)


def from_dense(dense):
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim != 2:
        raise ShapeMismatch("expected a 2D array")
    r, c = np.nonzero(dense)
    return SparseMatrix(
        dense.shape[0], dense.shape[1],
        np.concatenate(([0], np.cumsum(np.count_nonzero(dense, axis=1)))),
        c, dense[r, c],
    )


def to_dense(m):
    out = np.zeros(m.shape)
    out[m.entry_rows(), m.columnIndices] = m.values
    return out


def hstack_blocks(blocks):
    """Assemble a 2D list of SparseMatrix blocks into one matrix."""
    row_heights = [row[0].rows for row in blocks]
    col_widths = [b.cols for b in blocks[0]]
    r_off = np.concatenate(([0], np.cumsum(row_heights)))
    c_off = np.concatenate(([0], np.cumsum(col_widths)))
    rs, cs, vs = [], [], []
    for a, row in enumerate(blocks):
        for b, blk in enumerate(row):
            if blk.rows != row_heights[a] or blk.cols != col_widths[b]:
                raise ShapeMismatch(f"block ({a}, {b}) has shape {blk.shape}")
            rs.append(blk.entry_rows() + r_off[a])
            cs.append(blk.columnIndices + c_off[b])
            vs.append(blk.values)
    rows, cols = int(r_off[-1]), int(c_off[-1])
    r, c, v = np.concatenate(rs), np.concatenate(cs), np.concatenate(vs)
    # keep explicit zeros: assembling must not change a pattern
    order = np.lexsort((c, r))
    rp = np.concatenate(([0], np.cumsum(np.bincount(r, minlength=rows))))
    return SparseMatrix(rows, cols, rp, c[order], v[order])


# --- CSR text format -------------------------------------------------------


def dumps(m):
    def line(a, fmt):
        return " ".join(fmt(x) for x in a)

    return "\n".join([
        f"csr {m.rows} {m.cols} {m.nnz}",
        line(m.rowPointers, str),
        line(m.columnIndices, str),
        line(m.values, lambda x: repr(float(x))),
    ]) + "\n"


def loads(text):
    lines = text.split("\n")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "csr":
        raise ValueError("not a csr document: bad header")
    rows, cols, nnz = (int(x) for x in head[1:])
    body = lines[1:4] + [""] * max(0, 4 - len(lines))
    rp = np.array([int(x) for x in body[0].split()], dtype=np.int64)
    ci = np.array([int(x) for x in body[1].split()], dtype=np.int64)
    va = np.array([float(x) for x in body[2].split()], dtype=np.float64)
    if len(va) != nnz:
        raise ValueError(f"header says {nnz} entries, found {len(va)}")
    return SparseMatrix(rows, cols, rp, ci, va)


def save(m, path):
    with open(path, "w") as fh:
        fh.write(dumps(m))


def load(path):
    with open(path) as fh:
        return loads(fh.read())


# --- reservoir initializers ------------------------------------------------


@dataclass(frozen=True)
class ReservoirWeights:
    """Excitatory/inhibitory blocks (target <- source) and the full matrix."""

    nEx: int
    nIn: int
    full: SparseMatrix

    @property
    def ee(self):
        return self.full.submatrix(0, self.nEx, 0, self.nEx)

    @property
    def ei(self):
        return self.full.submatrix(0, self.nEx, self.nEx, self.nEx + self.nIn)

    @property
    def ie(self):
        return self.full.submatrix(self.nEx, self.nEx + self.nIn, 0, self.nEx)

    @property
    def ii(self):
        return self.full.submatrix(self.nEx, self.nEx + self.nIn, self.nEx, self.nEx + self.nIn)

    def obeys_dale(self):
        cols = self.full.columnIndices
        vals = self.full.values
        return bool(np.all(vals[cols < self.nEx] >= 0) and np.all(vals[cols >= self.nEx] <= 0))

    def has_self_connections(self):
        return bool(np.any(self.full.entry_rows() == self.full.columnIndices))


def draw_magnitudes(kind, mean, sigma, size, rng):
    """Positive weight magnitudes with mean ``mean``.

    lognormal: sigma is the shape of the underlying normal, its location is
    chosen so the magnitudes have mean ``mean``. normal: |N(mean, sigma)|.
    """
    if mean <= 0:
        raise InvalidDistributionParams(f"mean must be positive, got {mean}")
    if kind == "constant":
        return np.full(size, float(mean))
    if sigma <= 0:
        raise InvalidDistributionParams(f"sigma must be positive, got {sigma}")
    if kind == "lognormal":
        mu = np.log(mean) - sigma**2 / 2
        return rng.lognormal(mu, sigma, size)
    if kind == "normal":
        return np.abs(rng.normal(mean, sigma, size))
    raise InvalidDistributionParams(f"unknown distribution {kind!r}")


def _random_targets(n, k, source, rng):
    # k distinct targets from 0..n-1 without `source`
    t = rng.choice(n - 1, size=k, replace=False)
    return t + (t >= source)


def _assemble(nEx, nIn, srcs, tgts, mags):
    n = nEx + nIn
    srcs = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
    tgts = np.concatenate(tgts) if tgts else np.zeros(0, dtype=np.int64)
    mags = np.concatenate(mags) if mags else np.zeros(0)
    signed = np.where(srcs < nEx, mags, -mags)
    return ReservoirWeights(nEx, nIn, from_coo(n, n, tgts, srcs, signed))


def _fixed_outdegree(nEx, nIn, conn, ex_mags, in_mags, rng, sources=None):
    n = nEx + nIn
    if conn >= n:
        raise InvalidDistributionParams("connPerNeuron must be < nEx + nIn")
    sources = range(n) if sources is None else sources
    srcs, tgts, mags = [], [], []
    for j in sources:
        if conn == 0:
            break
        srcs.append(np.full(conn, j))
        tgts.append(_random_targets(n, conn, j, rng))
        mags.append(ex_mags(conn) if j < nEx else in_mags(conn))
    return srcs, tgts, mags


def init_random(nEx, nIn, connPerNeuron, distribution, rng,
                ex_mean=1.0, ex_sigma=1.0, in_mean=1.0, in_sigma=1.0):
    """Fixed out-degree reservoir with random magnitudes and Dale signs."""
    if distribution not in ("normal", "lognormal"):
        raise InvalidDistributionParams(f"unknown distribution {distribution!r}")
    for m, s in ((ex_mean, ex_sigma), (in_mean, in_sigma)):
        if m <= 0 or s <= 0:
            raise InvalidDistributionParams(f"mean and sigma must be positive, got {m}, {s}")
    ex = lambda k: draw_magnitudes(distribution, ex_mean, ex_sigma, k, rng)  # noqa: E731
    inh = lambda k: draw_magnitudes(distribution, in_mean, in_sigma, k, rng)  # noqa: E731
    return _assemble(nEx, nIn, *_fixed_outdegree(nEx, nIn, connPerNeuron, ex, inh, rng))


def init_constant(nEx, nIn, connPerNeuron, valueEx, valueIn, rng):
    if valueEx <= 0 or valueIn <= 0:
        raise InvalidDistributionParams("constant magnitudes must be positive")
    ex = lambda k: np.full(k, float(valueEx))  # noqa: E731
    inh = lambda k: np.full(k, float(valueIn))  # noqa: E731
    return _assemble(nEx, nIn, *_fixed_outdegree(nEx, nIn, connPerNeuron, ex, inh, rng))


def direction_field(width, height, rng, cell=4):
    """Smooth preferred-direction angle per grid position (row-major).

    Random unit vectors on a coarse periodic lattice, bilinearly interpolated
    and renormalised to an angle; periodic so the torus has no seams.
    """
    lw, lh = max(1, -(-width // cell)), max(1, -(-height // cell))
    lattice = rng.uniform(0, 2 * np.pi, size=(lh, lw))
    vx, vy = np.cos(lattice), np.sin(lattice)
    ys, xs = np.divmod(np.arange(width * height), width)
    fx, fy = xs / cell, ys / cell
    x0, y0 = np.floor(fx).astype(int), np.floor(fy).astype(int)
    tx, ty = fx - x0, fy - y0
    x1, y1 = (x0 + 1) % lw, (y0 + 1) % lh
    x0, y0 = x0 % lw, y0 % lh

    def interp(v):
        top = v[y0, x0] * (1 - tx) + v[y0, x1] * tx
        bottom = v[y1, x0] * (1 - tx) + v[y1, x1] * tx
        return top * (1 - ty) + bottom * ty

    return np.arctan2(interp(vy), interp(vx))


def shifted_targets(x, y, theta, width, height, k, shift, sigma, rng, max_draws=None):
    """k distinct grid targets ~ Gaussian around (x, y) + shift * (cos, sin)(theta).

    Distances wrap on the torus; the source itself is never a target.
    """
    if k > width * height - 1:
        raise InvalidDistributionParams("more targets requested than grid cells")
    cx, cy = x + shift * np.cos(theta), y + shift * np.sin(theta)
    me = y * width + x
    chosen = []
    seen = {me}
    budget = max_draws or 1000 * max(k, 1)
    drawn = 0
    while len(chosen) < k:
        batch = rng.normal(0.0, sigma, size=(2 * (k - len(chosen)) + 8, 2))
        tx = np.rint(cx + batch[:, 0]).astype(int) % width
        ty = np.rint(cy + batch[:, 1]).astype(int) % height
        for idx in ty * width + tx:
            if idx not in seen:
                seen.add(idx)
                chosen.append(int(idx))
                if len(chosen) == k:
                    break
        drawn += len(batch)
        if drawn > budget:
            raise InvalidDistributionParams(
                f"could not place {k} distinct targets with sigma={sigma}; increase anisotropicSigma")
    return np.array(chosen, dtype=np.int64)


def init_anisotropic(gridWidth, gridHeight, connPerNeuron, shiftMagnitude, profileSigma, rng,
                     nEx=None, nIn=0, distribution="lognormal", ex_mean=1.0, ex_sigma=1.0,
                     in_mean=1.0, in_sigma=1.0, directions=None):
    """Excitatory sheet with direction-shifted Gaussian connectivity.

    Excitatory neurons live row-major on a gridWidth x gridHeight torus. Of
    their connPerNeuron outgoing synapses, a share proportional to the
    excitatory population goes to sheet neighbours drawn around the displaced
    centre; the rest go to random inhibitory neurons. Inhibitory neurons wire
    as in init_random. ``directions`` overrides the generated angle field.
    """
    if nEx is None:
        nEx = gridWidth * gridHeight
    if gridWidth * gridHeight != nEx:
        raise GridMismatch(f"{gridWidth} x {gridHeight} grid does not hold {nEx} neurons")
    n = nEx + nIn
    if connPerNeuron >= n:
        raise InvalidDistributionParams("connPerNeuron must be < nEx + nIn")
    if profileSigma <= 0:
        raise InvalidDistributionParams("profileSigma must be positive")
    if directions is None:
        directions = direction_field(gridWidth, gridHeight, rng)
    directions = np.asarray(directions, dtype=float)

    k_in = min(nIn, int(round(connPerNeuron * nIn / n)))
    k_ex = connPerNeuron - k_in
    if k_ex > nEx - 1:
        k_ex, k_in = nEx - 1, connPerNeuron - (nEx - 1)

    def mags(mean, sigma, k):
        return draw_magnitudes(distribution, mean, sigma, k, rng)

    srcs, tgts, vals = [], [], []
    for j in range(nEx):
        y, x = divmod(j, gridWidth)
        t = shifted_targets(x, y, directions[j], gridWidth, gridHeight, k_ex,
                            shiftMagnitude, profileSigma, rng)
        if k_in:
            t = np.concatenate((t, nEx + rng.choice(nIn, size=k_in, replace=False)))
        srcs.append(np.full(len(t), j))
        tgts.append(t)
        vals.append(mags(ex_mean, ex_sigma, len(t)))
    inh = lambda k: mags(in_mean, in_sigma, k)  # noqa: E731
    s2, t2, v2 = _fixed_outdegree(nEx, nIn, connPerNeuron, None, inh, rng, sources=range(nEx, n))
    return _assemble(nEx, nIn, srcs + s2, tgts + t2, vals + v2)


# --- utilities -------------------------------------------------------------


def spectral_radius(m, dense_cutoff=DENSE_EIG_CUTOFF):
    """Largest |eigenvalue|.

    Dense eigensolve up to ``dense_cutoff`` rows, ARPACK (implicitly
    restarted Arnoldi) above it.
    """
    if m.rows != m.cols:
        raise NonSquare(f"spectral radius needs a square matrix, got {m.shape}")
    if m.rows == 0 or m.nnz == 0:
        return 0.0
    if m.rows <= max(dense_cutoff, 3):
        return float(np.max(np.abs(np.linalg.eigvals(to_dense(m)))))
    from scipy.sparse.linalg import ArpackNoConvergence, eigs

    try:
        vals = eigs(m.to_scipy(), k=1, which="LM", return_eigenvectors=False, tol=0,
                    v0=np.ones(m.rows), maxiter=100 * m.rows)
    except ArpackNoConvergence:
        return float(np.max(np.abs(np.linalg.eigvals(to_dense(m)))))
    return float(np.abs(vals).max())
