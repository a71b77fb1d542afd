import numpy as np
import pytest

import _oracles
from ksel import (
    CenteredGram,
    QuadraticProblem,
    assemble_problem,
    center,
    gaussian_gram,
    hsic,
    median_bandwidth,
)


def random_centered_grams(rng, d, n):
    grams = []
    for _ in range(d):
        v = rng.standard_normal(n)
        grams.append(center(gaussian_gram(v, median_bandwidth(v))))
    return grams


class TestHsic:
    def test_self_score_is_squared_frobenius_norm(self):
        coeff = (1.0 - np.exp(-0.5)) / 2.0
        kc = CenteredGram(coeff * np.array([[1.0, -1.0], [-1.0, 1.0]]))
        expected = _oracles.frobenius_inner(kc.matrix, kc.matrix)
        assert hsic(kc, kc) == pytest.approx(expected, rel=1e-14)
        assert hsic(kc, kc) == pytest.approx(4.0 * coeff**2, rel=1e-12)
        assert hsic(kc, kc) >= 0.0

    def test_zero_gram_scores_zero(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(8)
        lc = center(gaussian_gram(v, median_bandwidth(v)))
        assert hsic(CenteredGram.zero(8), lc) == 0.0

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(1)
        a, b = random_centered_grams(rng, 2, 12)
        assert hsic(a, b) == pytest.approx(hsic(b, a), rel=1e-15)

    def test_trace_equals_entrywise_sum(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            n = int(rng.integers(2, 15))
            a, b = random_centered_grams(rng, 2, n)
            trace = float(np.trace(a.matrix @ b.matrix))
            assert hsic(a, b) == pytest.approx(trace, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            hsic(CenteredGram.zero(3), CenteredGram.zero(4))

    def test_independent_features_score_small(self):
        # empirical dependence of independent draws shrinks as O(1/sqrt(n))
        rng = np.random.default_rng(3)
        n = 1000
        a = center(gaussian_gram(rng.standard_normal(n), 1.0))
        bvals = rng.standard_normal(n)
        b = center(gaussian_gram(bvals, median_bandwidth(bvals)))
        normalized = hsic(a, b) / np.sqrt(hsic(a, a) * hsic(b, b))
        assert normalized < 0.05


class TestAssembleProblem:
    def test_single_feature(self):
        rng = np.random.default_rng(4)
        (g,) = random_centered_grams(rng, 1, 9)
        (l,) = random_centered_grams(rng, 1, 9)
        problem = assemble_problem([g], l)
        assert problem.H.shape == (1, 1)
        assert problem.H[0, 0] == pytest.approx(hsic(g, g), rel=1e-12)
        assert problem.c[0] == pytest.approx(hsic(g, l), rel=1e-12)
        assert problem.const_term == pytest.approx(0.5 * hsic(l, l), rel=1e-12)

    def test_duplicate_feature_rows_match(self):
        rng = np.random.default_rng(5)
        g1, g2, l = random_centered_grams(rng, 3, 10)
        problem = assemble_problem([g1, g1, g2], l)
        assert np.allclose(problem.H[0], problem.H[1])
        assert np.allclose(problem.H[:, 0], problem.H[:, 1])
        assert problem.c[0] == problem.c[1]

    def test_matches_vectorized_construction(self):
        rng = np.random.default_rng(6)
        grams = random_centered_grams(rng, 3, 5)
        (l,) = random_centered_grams(rng, 1, 5)
        problem = assemble_problem(grams, l)
        H_ref, c_ref = _oracles.vectorized_normal_equations(
            [g.matrix for g in grams], l.matrix
        )
        assert np.abs(problem.H - H_ref).max() <= 1e-10
        assert np.abs(problem.c - c_ref).max() <= 1e-10

    def test_block_boundaries(self):
        # d above the internal block width exercises the chunked path
        rng = np.random.default_rng(7)
        grams = random_centered_grams(rng, 70, 4)
        (l,) = random_centered_grams(rng, 1, 4)
        problem = assemble_problem(grams, l)
        H_ref, c_ref = _oracles.vectorized_normal_equations(
            [g.matrix for g in grams], l.matrix
        )
        assert np.abs(problem.H - H_ref).max() <= 1e-10 * max(1, np.abs(H_ref).max())
        assert np.abs(problem.c - c_ref).max() <= 1e-10

    def test_symmetric_and_psd(self):
        rng = np.random.default_rng(8)
        grams = random_centered_grams(rng, 6, 12)
        (l,) = random_centered_grams(rng, 1, 12)
        problem = assemble_problem(grams, l)
        assert np.array_equal(problem.H, problem.H.T)
        norm = np.abs(problem.H).max()
        assert np.linalg.eigvalsh(problem.H).min() >= -1e-8 * norm
        for _ in range(5):
            alpha = np.abs(rng.standard_normal(6))
            assert alpha @ problem.H @ alpha >= -1e-10 * norm

    def test_hsic_scores_nonnegative(self):
        rng = np.random.default_rng(9)
        grams = random_centered_grams(rng, 5, 15)
        (l,) = random_centered_grams(rng, 1, 15)
        problem = assemble_problem(grams, l)
        assert (problem.c >= -1e-12).all()
        assert (problem.H.diagonal() >= 0).all()

    def test_objective_equivalence(self):
        # Frobenius-residual form equals the quadratic expansion
        rng = np.random.default_rng(10)
        for _ in range(10):
            d, n = int(rng.integers(1, 6)), int(rng.integers(3, 9))
            grams = random_centered_grams(rng, d, n)
            (l,) = random_centered_grams(rng, 1, n)
            problem = assemble_problem(grams, l)
            alpha = np.abs(rng.standard_normal(d))
            lam = float(rng.uniform(0.01, 1.0))
            direct = _oracles.frobenius_objective(
                [g.matrix for g in grams], l.matrix, alpha, lam
            )
            expanded = (
                0.5 * alpha @ problem.H @ alpha
                - problem.c @ alpha
                + lam * np.abs(alpha).sum()
                + problem.const_term
            )
            assert expanded == pytest.approx(direct, rel=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            assemble_problem([CenteredGram.zero(3)], CenteredGram.zero(4))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            assemble_problem([], CenteredGram.zero(3))


class TestQuadraticProblem:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            QuadraticProblem(np.ones((2, 3)), np.ones(2))
        with pytest.raises(ValueError):
            QuadraticProblem(np.ones((2, 2)), np.ones(3))

    def test_method_validation(self):
        with pytest.raises(ValueError):
            QuadraticProblem(np.eye(2), np.ones(2), method="other")
