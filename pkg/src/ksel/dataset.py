"""Supervised datasets in feature-major form.

A :class:`Dataset` stores the sample matrix as rows of per-feature vectors
(``features[k]`` is feature k over all n samples) next to the length-n
output vector.  Besides a strict CSV loader there are two synthetic
benchmark generators with known relevant features and a shuffling
train/test split.

Reproducibility protocol (fixed so independent reimplementations can
match it bit for bit): all randomness comes from counter-based Philox
generators keyed by ``numpy.random.SeedSequence(seed)``.  Standard-normal
variates are the inverse normal CDF of the strictly interior 53-bit
uniforms ``(m + 0.5) / 2**53``; the feature matrix is filled row-major
from spawned child stream 0 and the output noise comes from child
stream 1, so the draws for the leading (relevant) features do not depend
on the total feature count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DataError

REGRESSION = "regression"
CLASSIFICATION = "classification"
TASKS = (REGRESSION, CLASSIFICATION)

_MAX_SEED = 2**64


@dataclass(frozen=True)
class Dataset:
    """A supervised dataset with feature-major storage.

    Parameters
    ----------
    features : ndarray, shape (d, n)
        Row k holds feature k for all n samples.  Must be finite.
    output : ndarray, shape (n,)
        Real-valued for regression, categorical tokens for classification.
    task : str
        ``"regression"`` or ``"classification"``.
    feature_names : tuple of str, optional
        Length-d display names; defaults to ``X1 .. Xd`` when absent.
    truth : frozenset of int, optional
        Ground-truth relevant feature indices (benchmark datasets only).
    """

    features: np.ndarray
    output: np.ndarray
    task: str
    feature_names: tuple[str, ...] | None = None
    truth: frozenset[int] | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] < 1 or feats.shape[1] < 1:
            raise DataError("features must be a non-empty d x n matrix")
        if not np.isfinite(feats).all():
            raise DataError("features contain NaN or Inf")
        d, n = feats.shape
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.task == REGRESSION:
            out = np.asarray(self.output, dtype=np.float64)
            if out.ndim != 1 or out.shape[0] != n:
                raise DataError("output must be a length-n vector")
            if not np.isfinite(out).all():
                raise DataError("output contains NaN or Inf")
        else:
            out = np.asarray(self.output)
            if out.ndim != 1 or out.shape[0] != n:
                raise DataError("output must be a length-n vector")
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != d:
                raise DataError("feature_names length must equal feature count")
            object.__setattr__(self, "feature_names", names)
        if self.truth is not None:
            truth = frozenset(int(k) for k in self.truth)
            if any(k < 0 or k >= d for k in truth):
                raise DataError("truth indices out of range")
            object.__setattr__(self, "truth", truth)
        feats.setflags(write=False)
        out.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "output", out)

    @property
    def d(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def name_of(self, k: int) -> str:
        """Display name of feature ``k`` (0-based index, 1-based default name)."""
        if self.feature_names is not None:
            return self.feature_names[k]
        return f"X{k + 1}"


def _check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise ValueError("seed must be an integer")
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed


def _spawned_generators(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(_check_seed(seed)).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _standard_normal(gen: np.random.Generator, shape) -> np.ndarray:
    # inverse-CDF of (m + 0.5) / 2**53; interior uniforms keep ndtri finite
    m = gen.integers(0, 1 << 53, size=shape, dtype=np.int64)
    return ndtri((m + 0.5) * (1.0 / (1 << 53)))


def gen_data1(n: int, seed: int, d: int = 256) -> Dataset:
    """Additive-model benchmark with four relevant features.

    Features are i.i.d. standard normal and the output is
    ``y = -2 sin(2 x1) + x2**2 + x3 + exp(-x4) + e`` with unit normal
    noise ``e``.  ``d`` defaults to the benchmark's 256 features; smaller
    or larger values keep the same draws for the leading features, which
    is what scaling studies rely on.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if d < 4:
        raise ValueError("data1 needs at least 4 features")
    gen_x, gen_e = _spawned_generators(seed, 2)
    x = _standard_normal(gen_x, (d, n))
    e = _standard_normal(gen_e, n)
    y = -2.0 * np.sin(2.0 * x[0]) + x[1] ** 2 + x[2] + np.exp(-x[3]) + e
    names = tuple(f"X{k + 1}" for k in range(d))
    return Dataset(x, y, REGRESSION, names, frozenset(range(4)))


def gen_data2(n: int, seed: int, d: int = 1000) -> Dataset:
    """Non-additive-model benchmark with three relevant features.

    ``y = x1 * exp(2 x2) + x3**2 + e`` over i.i.d. standard-normal
    features; ``d`` defaults to the benchmark's 1000 features.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if d < 3:
        raise ValueError("data2 needs at least 3 features")
    gen_x, gen_e = _spawned_generators(seed, 2)
    x = _standard_normal(gen_x, (d, n))
    e = _standard_normal(gen_e, n)
    y = x[0] * np.exp(2.0 * x[1]) + x[2] ** 2 + e
    names = tuple(f"X{k + 1}" for k in range(d))
    return Dataset(x, y, REGRESSION, names, frozenset(range(3)))


def split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition by uniform shuffle.

    The train part receives ``floor(train_fraction * n)`` samples; indices
    within each part are kept in ascending order.  Raises ``ValueError``
    when either part would be empty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = data.n
    n_train = int(train_fraction * n)
    if n_train < 1 or n - n_train < 1:
        raise ValueError("train_fraction yields an empty part")
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(_check_seed(seed))))
    perm = gen.permutation(n)
    idx_train = np.sort(perm[:n_train])
    idx_test = np.sort(perm[n_train:])

    def _take(idx):
        return Dataset(
            data.features[:, idx],
            data.output[idx],
            data.task,
            data.feature_names,
            data.truth,
        )

    return _take(idx_train), _take(idx_test)


def _parse_finite(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(
            f"non-numeric value {cell!r} at row {row}, column {column!r}"
        ) from None
    if not np.isfinite(value):
        raise DataError(f"non-finite value {cell!r} at row {row}, column {column!r}")
    return value


def load_csv(path, output_column, task: str) -> Dataset:
    """Load a header-first comma-separated table as a Dataset.

    ``output_column`` is matched against header names first; failing that,
    a token that parses as an integer is used as a 0-based column index.
    Feature cells must be finite numbers (NaN/Inf are rejected rather than
    imputed); in classification mode the output cells are kept as
    categorical tokens.  Errors name the offending data row (1-based,
    header excluded) and column.
    """
    if task not in TASKS:
        raise DataError(f"unknown task {task!r}")
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    rows = [row for row in rows if row]
    if not rows:
        raise DataError(f"{path}: empty table")
    header = [cell.strip() for cell in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")

    out_idx = None
    token = str(output_column).strip()
    if token in header:
        out_idx = header.index(token)
    else:
        try:
            candidate = int(token)
        except ValueError:
            candidate = None
        if candidate is not None and 0 <= candidate < len(header):
            out_idx = candidate
    if out_idx is None:
        raise DataError(f"output column {output_column!r} absent from header {header}")
    if len(header) < 2:
        raise DataError(f"{path}: table has no feature columns")

    n = len(body)
    feature_cols = [j for j in range(len(header)) if j != out_idx]
    features = np.empty((len(feature_cols), n), dtype=np.float64)
    raw_output: list = []
    for i, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {i} has {len(row)} cells, expected {len(header)}"
            )
        for fk, j in enumerate(feature_cols):
            features[fk, i - 1] = _parse_finite(row[j].strip(), i, header[j])
        raw_output.append(row[out_idx].strip())

    if task == REGRESSION:
        output = np.array(
            [_parse_finite(cell, i + 1, header[out_idx]) for i, cell in enumerate(raw_output)]
        )
    else:
        output = np.array(raw_output)
    names = tuple(header[j] for j in feature_cols)
    return Dataset(features, output, task, names)
