"""Empirical dependence scores and quadratic-program assembly.

The dependence score between two variables is the Frobenius inner
product of their centered Gram matrices (the empirical Hilbert-Schmidt
independence criterion; the same contraction applied to spectrally
normalized Grams gives the NOCCO variant).  Stacking all feature/feature
and feature/output scores yields the quadratic program

    min_alpha  0.5 alpha' H alpha - c' alpha + const,

whose solution under a non-negative L1 penalty is the selection
criterion solved in :mod:`ksel.solver`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .kernels import CenteredGram

HSIC_METHOD = "hsic"
NOCCO_METHOD = "nocco"
METHODS = (HSIC_METHOD, NOCCO_METHOD)

# feature block width for the chunked H assembly; bounds extra memory at
# 2 * _BLOCK * n^2 floats instead of the full d * n^2 design matrix
_BLOCK = 256


@dataclass(frozen=True)
class QuadraticProblem:
    """Pairwise dependence matrix H, relevance vector c, and constant.

    ``H[k, l]`` is the dependence score between features k and l, ``c[k]``
    the score between feature k and the output, and ``const_term`` half
    the output's self-score, kept so objective values match the raw
    Frobenius-norm form.
    """

    H: np.ndarray
    c: np.ndarray
    const_term: float = 0.0
    method: str = HSIC_METHOD

    def __post_init__(self):
        h = np.asarray(self.H, dtype=np.float64)
        cv = np.asarray(self.c, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("H must be square")
        if cv.ndim != 1 or cv.shape[0] != h.shape[0]:
            raise ValueError("c must have one entry per feature")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        h.setflags(write=False)
        cv.setflags(write=False)
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "c", cv)

    @property
    def d(self) -> int:
        return self.c.shape[0]


def hsic(kc: CenteredGram, lc: CenteredGram) -> float:
    """Dependence score tr(K L) of two centered Grams.

    For symmetric matrices the trace of the product equals the entrywise
    (Frobenius) inner product, which is how it is computed.
    """
    a = kc.matrix
    b = lc.matrix
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.vdot(a, b))


def assemble_problem(
    feature_grams: Iterable[CenteredGram],
    output_gram: CenteredGram,
    method: str = HSIC_METHOD,
) -> QuadraticProblem:
    """Build H, c, and the constant term from centered Grams.

    Works block-wise over features so no flattened n^2 x d design matrix
    is ever allocated; the result is symmetrized to remove roundoff
    asymmetry before any solver sees it.
    """
    grams = list(feature_grams)
    d = len(grams)
    if d == 0:
        raise ValueError("need at least one feature gram")
    n = output_gram.n
    for k, g in enumerate(grams):
        if g.n != n:
            raise ValueError(f"feature gram {k} has n={g.n}, output has n={n}")
    lvec = output_gram.matrix.ravel()

    H = np.empty((d, d), dtype=np.float64)
    c = np.empty(d, dtype=np.float64)
    starts = list(range(0, d, _BLOCK))

    def _stack(lo, hi):
        return np.stack([grams[k].matrix.ravel() for k in range(lo, hi)])

    for i0 in starts:
        i1 = min(i0 + _BLOCK, d)
        ai = _stack(i0, i1)
        c[i0:i1] = ai @ lvec
        for j0 in starts:
            if j0 > i0:
                break
            j1 = min(j0 + _BLOCK, d)
            aj = ai if j0 == i0 else _stack(j0, j1)
            block = ai @ aj.T
            H[i0:i1, j0:j1] = block
            if j0 != i0:
                H[j0:j1, i0:i1] = block.T
    H = 0.5 * (H + H.T)
    const = 0.5 * float(lvec @ lvec)
    return QuadraticProblem(H, c, const, method)
