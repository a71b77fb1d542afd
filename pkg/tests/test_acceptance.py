"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s``.  The recovery
benchmarks (criteria 1, 2, 7) dominate the runtime; everything is
deterministic, seeded by the trial protocol (run r uses seed base+r).
"""

import time

import numpy as np
import pytest

import _oracles
from ksel import (
    CenteredGram,
    Dataset,
    QuadraticProblem,
    SolverConfig,
    assemble_problem,
    center,
    gaussian_gram,
    gen_data1,
    gen_data2,
    hsic_lasso_select,
    kkt_residual,
    lambda_max,
    median_bandwidth,
    nocco_lasso_select,
    redundancy_rate,
    solve_nn_lasso,
    fraction_correct,
)
from ksel.dataset import REGRESSION
from ksel.selection import build_feature_grams, build_output_gram
from ksel.solver import ACCELERATED_PROXIMAL, COORDINATE_DESCENT

TRIALS = 20
BASE_SEED = 0


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"\n[criterion {criterion}] {'PASS' if passed else 'FAIL'}: {detail}", flush=True)


def mean_fraction(generator, method_fn, n, k, trials=TRIALS):
    fractions = []
    for trial in range(trials):
        data = generator(n, BASE_SEED + trial)
        result = method_fn(data, k)
        fractions.append(fraction_correct(result, data.truth))
    return float(np.mean(fractions))


class TestCriterion1AdditiveRecovery:
    @pytest.mark.slow
    def test_data1_hsic_lasso_recovery(self):
        started = time.perf_counter()
        grid = (100, 200, 300)
        means = {n: mean_fraction(gen_data1, hsic_lasso_select, n, k=4) for n in grid}
        elapsed = time.perf_counter() - started
        dips = [
            means[b] - means[a]
            for a, b in zip(grid, grid[1:])
            if means[b] < means[a]
        ]
        detail = (
            f"data1 hsic-lasso mean fractions {means}, "
            f"{len(dips)} dip(s), {elapsed:.0f}s"
        )
        passed = (
            means[300] >= 0.8
            and len(dips) <= 1
            and all(abs(d) <= 0.05 for d in dips)
        )
        report("1", passed, detail)
        assert passed, detail


class TestCriterion2NonAdditiveRecovery:
    @pytest.mark.slow
    def test_data2_hsic_lasso_recovery(self):
        started = time.perf_counter()
        mean = mean_fraction(gen_data2, hsic_lasso_select, 300, k=3)
        detail = f"data2 hsic-lasso mean fraction {mean:.3f} at n=300, {time.perf_counter() - started:.0f}s"
        passed = mean >= 0.8
        report("2 (hsic-lasso)", passed, detail)
        assert passed, detail

    @pytest.mark.slow
    def test_data2_nocco_lasso_recovery(self):
        # Known failure at the default epsilon: the spectral normalization
        # flattens the score spectrum so the weakest true features sit at
        # the noise-maximum level at n=300 (recovery does reach this
        # threshold at larger n or larger epsilon).  The threshold stays
        # asserted instead of tuning epsilon away from its default.
        started = time.perf_counter()
        mean = mean_fraction(gen_data2, nocco_lasso_select, 300, k=3)
        detail = f"data2 nocco-lasso mean fraction {mean:.3f} at n=300, {time.perf_counter() - started:.0f}s"
        passed = mean >= 0.8
        report("2 (nocco-lasso)", passed, detail)
        assert passed, detail


class TestCriterion3Scaling:
    def test_wall_clock_grows_subquadratically(self):
        n = 100
        grid = list(range(100, 1001, 100))
        hsic_lasso_select(gen_data2(n, BASE_SEED, d=grid[0]), 3)  # warm caches
        times = []
        for d in grid:
            data = gen_data2(n, BASE_SEED, d=d)
            started = time.perf_counter()
            hsic_lasso_select(data, 3)
            times.append(time.perf_counter() - started)
        slope = float(np.polyfit(np.log(grid), np.log(times), 1)[0])
        detail = (
            f"t(d=1000)={times[-1]:.2f}s, log-log slope {slope:.2f} "
            f"over d={grid[0]}..{grid[-1]}"
        )
        passed = times[-1] < 300.0 and slope <= 2.3
        report("3", passed, detail)
        assert passed, detail


class TestCriterion4OracleEquivalence:
    def test_matches_exhaustive_active_set_oracle(self):
        rng = np.random.default_rng(1234)
        failures = 0
        worst = 0.0
        for _ in range(200):
            d = int(rng.integers(1, 5))
            H, c = _oracles.random_psd_problem(rng, d)
            problem = QuadraticProblem(H, c)
            lam = float(rng.uniform(0.05, 1.2)) * max(lambda_max(problem), 0.1)
            sol = solve_nn_lasso(problem, lam)
            _, oracle_obj = _oracles.active_set_oracle(H, c, lam)
            gap = abs(sol.objective - oracle_obj)
            worst = max(worst, gap)
            if gap > 1e-6:
                failures += 1
        detail = f"200 problems d<=4, worst objective gap {worst:.2e}, {failures} failures"
        passed = failures == 0
        report("4", passed, detail)
        assert passed, detail


class TestCriterion5KktCertification:
    def test_certificates_recompute_below_tolerance(self):
        rng = np.random.default_rng(99)
        failures = 0
        worst = 0.0
        for _ in range(100):
            d = int(rng.integers(2, 51))
            H, c = _oracles.random_psd_problem(rng, d)
            problem = QuadraticProblem(H, c)
            lam = float(rng.uniform(0.05, 0.9)) * lambda_max(problem)
            for backend in (COORDINATE_DESCENT, ACCELERATED_PROXIMAL):
                sol = solve_nn_lasso(problem, lam, SolverConfig(backend=backend))
                recomputed = _oracles.recompute_kkt(H, c, lam, sol.alpha)
                worst = max(worst, recomputed)
                if not sol.converged or recomputed > 1e-8:
                    failures += 1
        detail = f"100 problems x 2 backends, worst recomputed residual {worst:.2e}"
        passed = failures == 0
        report("5 (certificates)", passed, detail)
        assert passed, detail

    def test_alpha_is_exactly_zero_above_lambda_max(self):
        rng = np.random.default_rng(7)
        failures = 0
        for _ in range(20):
            d = int(rng.integers(1, 20))
            H, c = _oracles.random_psd_problem(rng, d)
            problem = QuadraticProblem(H, c)
            lam = 1.001 * lambda_max(problem)
            for backend in (COORDINATE_DESCENT, ACCELERATED_PROXIMAL):
                sol = solve_nn_lasso(problem, lam, SolverConfig(backend=backend))
                if not (sol.alpha == 0.0).all():
                    failures += 1
        detail = f"20 problems x 2 backends at 1.001*lambda_max, {failures} nonzero"
        passed = failures == 0
        report("5 (zero at lambda_max)", passed, detail)
        assert passed, detail


class TestCriterion6AlgebraicIdentities:
    def random_grams(self, rng, d, n):
        grams = []
        for _ in range(d):
            v = rng.standard_normal(n)
            grams.append(center(gaussian_gram(v, median_bandwidth(v))))
        return grams

    def test_frobenius_objective_equals_expansion(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(20):
            d, n = int(rng.integers(1, 7)), int(rng.integers(3, 10))
            grams = self.random_grams(rng, d, n)
            (lgram,) = self.random_grams(rng, 1, n)
            problem = assemble_problem(grams, lgram)
            alpha = np.abs(rng.standard_normal(d))
            lam = float(rng.uniform(0.01, 1.0))
            direct = _oracles.frobenius_objective(
                [g.matrix for g in grams], lgram.matrix, alpha, lam
            )
            expanded = (
                0.5 * alpha @ problem.H @ alpha
                - problem.c @ alpha
                + lam * alpha.sum()
                + problem.const_term
            )
            worst = max(worst, abs(expanded - direct) / max(1.0, abs(direct)))
        detail = f"20 instances, worst relative gap {worst:.2e}"
        passed = worst <= 1e-9
        report("6 (objective identity)", passed, detail)
        assert passed, detail

    def test_assembly_matches_vectorized_design(self):
        rng = np.random.default_rng(12)
        worst = 0.0
        for _ in range(10):
            grams = self.random_grams(rng, 3, 5)
            (lgram,) = self.random_grams(rng, 1, 5)
            problem = assemble_problem(grams, lgram)
            H_ref, c_ref = _oracles.vectorized_normal_equations(
                [g.matrix for g in grams], lgram.matrix
            )
            worst = max(
                worst,
                float(np.abs(problem.H - H_ref).max()),
                float(np.abs(problem.c - c_ref).max()),
            )
        detail = f"10 instances d=3 n=5, worst entry gap {worst:.2e}"
        passed = worst <= 1e-10
        report("6 (vectorized construction)", passed, detail)
        assert passed, detail

    def test_centering_idempotent_with_zero_sums(self):
        rng = np.random.default_rng(13)
        worst_idem = 0.0
        for _ in range(20):
            n = int(rng.integers(2, 30))
            v = rng.standard_normal(n)
            once = center(gaussian_gram(v, median_bandwidth(v)))
            once.validate()  # symmetry + zero row/column sums at type tolerances
            twice = center(once.matrix)
            scale = float(np.abs(once.matrix).max())
            worst_idem = max(
                worst_idem, float(np.abs(twice.matrix - once.matrix).max()) / scale
            )
        detail = f"20 instances, worst idempotence gap {worst_idem:.2e} (relative)"
        passed = worst_idem <= 1e-12
        report("6 (centering)", passed, detail)
        assert passed, detail


class TestCriterion7RedundancyElimination:
    DUPLICATED = 1  # the non-additive benchmark's dominant feature

    def duplicated_dataset(self, seed, n=200):
        base = gen_data2(n, seed)
        feats = np.vstack([base.features, base.features[self.DUPLICATED : self.DUPLICATED + 1]])
        return Dataset(feats, base.output, REGRESSION, truth=base.truth), base.d

    @pytest.mark.slow
    def test_duplicate_excluded_and_less_redundant_than_marginal(self):
        started = time.perf_counter()
        one_copy = 0
        red_wins = 0
        for seed in range(TRIALS):
            data, dup_index = self.duplicated_dataset(BASE_SEED + seed)
            result = hsic_lasso_select(data, 3)
            top3 = set(result.ranked[:3])
            if len({self.DUPLICATED, dup_index} & top3) <= 1:
                one_copy += 1
            grams, _ = build_feature_grams(data)
            lgram, _ = build_output_gram(data)
            problem = assemble_problem(grams, lgram)
            order = np.lexsort((np.arange(data.d), -problem.c))
            marginal_top3 = [int(j) for j in order[:3]]
            if len(result.ranked) >= 2 and redundancy_rate(
                data, result.ranked
            ) < redundancy_rate(data, marginal_top3):
                red_wins += 1
        detail = (
            f"one copy in top-3 on {one_copy}/{TRIALS} seeds, lasso redundancy "
            f"below marginal baseline on {red_wins}/{TRIALS} seeds, "
            f"{time.perf_counter() - started:.0f}s"
        )
        passed = one_copy >= 16 and red_wins >= 16
        report("7", passed, detail)
        assert passed, detail


class TestCriterion8Invariances:
    def random_instance(self, seed, d=12, n=50):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((d, n))
        y = 1.5 * x[0] + x[1] ** 2 + 0.4 * rng.standard_normal(n)
        return Dataset(x, y, REGRESSION), rng

    def test_feature_scale_invariance(self):
        failures = 0
        for seed in range(20):
            data, rng = self.random_instance(seed)
            base = hsic_lasso_select(data, 3)
            feats = data.features.copy()
            j = int(rng.integers(0, data.d))
            feats[j] *= float(10 ** rng.uniform(-2, 2))
            scaled = hsic_lasso_select(Dataset(feats, data.output, REGRESSION), 3)
            if scaled.ranked != base.ranked:
                failures += 1
        detail = f"20 instances, {failures} ranking changes under feature scaling"
        passed = failures == 0
        report("8 (feature scale)", passed, detail)
        assert passed, detail

    def test_sample_permutation_invariance(self):
        failures = 0
        worst_h = 0.0
        for seed in range(20):
            data, rng = self.random_instance(seed)
            perm = rng.permutation(data.n)
            permuted = Dataset(data.features[:, perm], data.output[perm], REGRESSION)
            grams_a, _ = build_feature_grams(data)
            grams_b, _ = build_feature_grams(permuted)
            la, _ = build_output_gram(data)
            lb, _ = build_output_gram(permuted)
            pa = assemble_problem(grams_a, la)
            pb = assemble_problem(grams_b, lb)
            scale = max(float(np.abs(pa.H).max()), 1.0)
            gap = max(
                float(np.abs(pa.H - pb.H).max()) / scale,
                float(np.abs(pa.c - pb.c).max()) / max(1.0, float(np.abs(pa.c).max())),
            )
            worst_h = max(worst_h, gap)
            if gap > 1e-9:
                failures += 1
                continue
            if hsic_lasso_select(data, 3).ranked != hsic_lasso_select(permuted, 3).ranked:
                failures += 1
        detail = f"20 instances, worst H/c gap {worst_h:.2e}, {failures} failures"
        passed = failures == 0
        report("8 (sample permutation)", passed, detail)
        assert passed, detail
