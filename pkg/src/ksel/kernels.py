"""Gram matrices, double centering, and spectral normalization.

Every dependence computation in this package runs on doubly centered
Gram matrices: symmetric n x n kernels pre- and post-multiplied by the
centering projection ``I - (1/n) 11^T`` so that all row and column sums
vanish.  This module builds the Gaussian and delta kernels, centers
them, and applies the spectral normalization ``K (K + eps*n*I)^{-1}``
used by the normalized (NOCCO) dependence measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateBandwidth

GAUSSIAN_MEDIAN = "gaussian-median"
GAUSSIAN = "gaussian"
DELTA = "delta"
PRECOMPUTED = "precomputed"
KERNEL_KINDS = (GAUSSIAN_MEDIAN, GAUSSIAN, DELTA, PRECOMPUTED)

DEFAULT_NOCCO_EPSILON = 1e-3

# CenteredGram invariant tolerances, relative to max |entry|
SYMMETRY_RTOL = 1e-12
CENTERING_RTOL = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to apply to a variable, plus optional normalization.

    ``sigma`` is required for the explicit-bandwidth Gaussian kind and
    forbidden otherwise; ``nocco_epsilon`` (when set) requests the
    spectral normalization with that regularizer.
    """

    kind: str = GAUSSIAN_MEDIAN
    sigma: float | None = None
    nocco_epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == GAUSSIAN:
            if self.sigma is None or self.sigma <= 0:
                raise ValueError("explicit Gaussian kernel needs sigma > 0")
        elif self.sigma is not None:
            raise ValueError(f"sigma is only valid for kind={GAUSSIAN!r}")
        if self.nocco_epsilon is not None and self.nocco_epsilon <= 0:
            raise ValueError("nocco_epsilon must be positive")


@dataclass(frozen=True)
class CenteredGram:
    """An n x n symmetric, doubly centered Gram matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("centered Gram must be a square matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def zero(cls, n: int) -> "CenteredGram":
        """The zero Gram, used for degenerate (constant) features."""
        return cls(np.zeros((n, n)))

    def validate(self) -> None:
        """Raise ``ValueError`` unless symmetry and centering hold."""
        m = self.matrix
        scale = float(np.abs(m).max()) if m.size else 0.0
        if scale == 0.0:
            return
        if float(np.abs(m - m.T).max()) > SYMMETRY_RTOL * scale:
            raise ValueError("centered Gram is not symmetric")
        bound = CENTERING_RTOL * self.n * scale
        if float(np.abs(m.sum(axis=0)).max()) > bound:
            raise ValueError("centered Gram has non-zero column sums")
        if float(np.abs(m.sum(axis=1)).max()) > bound:
            raise ValueError("centered Gram has non-zero row sums")


def median_bandwidth(values) -> float:
    """Median of the n(n-1)/2 pairwise absolute differences.

    Only unordered pairs i < j enter (the zero self-differences are
    excluded); with an even pair count the mean of the two middle values
    is taken.  Raises :class:`DegenerateBandwidth` when the median is
    zero, which happens exactly when more than half of all pairs
    coincide (a constant vector being the canonical case).
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    n = v.size
    if n < 2:
        raise ValueError("median bandwidth needs at least 2 values")
    iu = np.triu_indices(n, k=1)
    diffs = np.abs(v[:, None] - v[None, :])[iu]
    med = float(np.median(diffs))
    if med == 0.0:
        raise DegenerateBandwidth("median pairwise difference is zero")
    return med


def gaussian_gram(values, sigma: float) -> np.ndarray:
    """Gaussian kernel matrix ``exp(-(x_i - x_j)^2 / (2 sigma^2))``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    v = np.asarray(values, dtype=np.float64).ravel()
    diff = v[:, None] - v[None, :]
    return np.exp(diff * diff / (-2.0 * sigma * sigma))


def delta_gram(labels) -> np.ndarray:
    """Class-indicator kernel: ``1/n_y`` for same-class pairs, else 0.

    Trace equals the number of classes; the matrix is block diagonal
    under any class-sorted ordering.
    """
    lab = np.asarray(labels).ravel()
    if lab.size < 1:
        raise ValueError("delta kernel needs at least 1 label")
    _, inv, counts = np.unique(lab, return_inverse=True, return_counts=True)
    same = inv[:, None] == inv[None, :]
    return same * (1.0 / counts[inv])[:, None]


def center(gram) -> CenteredGram:
    """Doubly center a symmetric Gram matrix.

    Computes ``G K G`` with ``G = I - (1/n) 11^T`` via row/column mean
    subtraction and re-symmetrizes to keep roundoff asymmetry below the
    :class:`CenteredGram` tolerance.
    """
    k = np.asarray(gram, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("gram must be a square matrix")
    scale = float(np.abs(k).max()) if k.size else 0.0
    if scale > 0 and float(np.abs(k - k.T).max()) > 1e-8 * scale:
        raise ValueError("gram must be symmetric")
    row = k.mean(axis=1, keepdims=True)
    col = k.mean(axis=0, keepdims=True)
    centered = k - row - col + k.mean()
    centered = 0.5 * (centered + centered.T)
    return CenteredGram(centered)


def nocco_transform(kc: CenteredGram, epsilon: float) -> CenteredGram:
    """Spectral normalization ``K (K + eps*n*I)^{-1}`` of a centered Gram.

    Computed through the symmetric eigendecomposition: eigenvalues mu of
    the input map to ``mu / (mu + eps*n)``, so the result's spectrum lies
    in [0, 1).  Tiny negative eigenvalues (roundoff on a PSD input) are
    clamped to zero first.  Centering is preserved because the all-ones
    direction stays in the null space.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    m = kc.matrix
    n = kc.n
    w, q = np.linalg.eigh(m)
    w = np.maximum(w, 0.0)
    s = w / (w + epsilon * n)
    out = (q * s) @ q.T
    return CenteredGram(0.5 * (out + out.T))


def load_precomputed_gram(path, expected_n: int | None = None) -> np.ndarray:
    """Read an n x n numeric CSV matrix and validate it as a raw Gram.

    The table is headerless, comma-delimited.  Symmetry is required (to
    1e-8 relative) before the caller centers the matrix; ``expected_n``
    cross-checks against the dataset's sample count.
    """
    try:
        m = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read gram matrix {path}: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError(f"{path}: gram matrix must be square, got {m.shape}")
    if not np.isfinite(m).all():
        raise DataError(f"{path}: gram matrix contains NaN or Inf")
    scale = float(np.abs(m).max())
    if scale > 0 and float(np.abs(m - m.T).max()) > 1e-8 * scale:
        raise DataError(f"{path}: gram matrix is not symmetric")
    if expected_n is not None and m.shape[0] != expected_n:
        raise DataError(
            f"{path}: gram is {m.shape[0]} x {m.shape[0]}, dataset has {expected_n} samples"
        )
    return m
