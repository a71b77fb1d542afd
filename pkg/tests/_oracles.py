"""Independent reference implementations used by the tests.

Everything here is deliberately brute force: pair enumeration, explicit
centering matrices, vectorized design matrices, and exhaustive
active-set enumeration.  None of it shares code with the library paths
it checks.
"""

import itertools

import numpy as np


def pairwise_median(values):
    """Median over all unordered-pair absolute differences, by enumeration."""
    v = list(values)
    diffs = sorted(abs(v[i] - v[j]) for i in range(len(v)) for j in range(i + 1, len(v)))
    m = len(diffs)
    if m % 2 == 1:
        return diffs[m // 2]
    return 0.5 * (diffs[m // 2 - 1] + diffs[m // 2])


def explicit_center(k):
    """Center through the explicit projection matrix."""
    k = np.asarray(k, dtype=float)
    n = k.shape[0]
    gamma = np.eye(n) - np.ones((n, n)) / n
    return gamma @ k @ gamma


def frobenius_inner(a, b):
    """Entrywise-sum inner product."""
    total = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            total += a[i, j] * b[i, j]
    return total


def vectorized_normal_equations(feature_grams, output_gram):
    """H and c through the explicit n^2 x d design matrix."""
    design = np.column_stack([np.asarray(g).ravel() for g in feature_grams])
    lvec = np.asarray(output_gram).ravel()
    return design.T @ design, design.T @ lvec


def frobenius_objective(feature_grams, output_gram, alpha, lam):
    """0.5 || L - sum_k alpha_k K_k ||_F^2 + lam * ||alpha||_1."""
    resid = np.asarray(output_gram, dtype=float).copy()
    for a, g in zip(alpha, feature_grams):
        resid -= a * np.asarray(g)
    return 0.5 * float((resid * resid).sum()) + lam * float(np.abs(alpha).sum())


def active_set_oracle(H, c, lam):
    """Global minimum of the non-negative L1 program by support enumeration.

    Tries every support set, solves the stationarity system on it, keeps
    the best feasible candidate.  Exponential in d; fine for d <= 4.
    """
    H = np.asarray(H, dtype=float)
    c = np.asarray(c, dtype=float)
    d = c.size
    best_alpha = np.zeros(d)
    best_obj = 0.0  # empty support
    for r in range(1, d + 1):
        for support in itertools.combinations(range(d), r):
            s = list(support)
            hs = H[np.ix_(s, s)]
            rhs = c[s] - lam
            sol, *_ = np.linalg.lstsq(hs, rhs, rcond=None)
            if np.linalg.norm(hs @ sol - rhs) > 1e-9 * max(1.0, np.linalg.norm(rhs)):
                continue  # no stationary point on this face
            if (sol < 0).any():
                continue
            alpha = np.zeros(d)
            alpha[s] = sol
            obj = 0.5 * alpha @ H @ alpha - c @ alpha + lam * alpha.sum()
            if obj < best_obj:
                best_obj = obj
                best_alpha = alpha
    return best_alpha, best_obj


def random_psd_problem(rng, d, extra_rows=3):
    """A random PSD quadratic problem with positive relevance scores."""
    a = rng.standard_normal((d + extra_rows, d))
    H = a.T @ a
    c = np.abs(rng.standard_normal(d)) + 0.1
    return H, c


def recompute_kkt(H, c, lam, alpha):
    """Test-local KKT residual, mirroring the documented definition."""
    g = np.asarray(H) @ np.asarray(alpha) - np.asarray(c) + lam
    parts = []
    for gk, ak in zip(g, alpha):
        parts.append(abs(gk) if ak > 0 else max(0.0, -gk))
    return max(parts) / max(1.0, float(np.abs(c).max()))
