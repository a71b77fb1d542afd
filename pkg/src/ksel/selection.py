"""End-to-end feature-selection pipelines and evaluation metrics.

Three selectors share the same kernel front end (per-feature Gaussian
Grams with median bandwidths; Gaussian-median, delta, or precomputed
output Gram):

* ``hsic_lasso_select`` - non-negative lasso over HSIC scores,
* ``nocco_lasso_select`` - the same program on spectrally normalized Grams,
* ``fhsic_forward_select`` - greedy forward selection maximizing the
  dependence of the growing feature subset with the output.

The lasso selectors search for a penalty whose support size lies in
``[k, k+10]`` and then keep the top k features by coefficient.  Metrics
cover benchmark recovery (``fraction_correct``) and the average absolute
pairwise correlation of a selection (``redundancy_rate``).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import CLASSIFICATION, Dataset
from .dependence import HSIC_METHOD, NOCCO_METHOD, assemble_problem, hsic
from .errors import DegenerateBandwidth
from .kernels import (
    DEFAULT_NOCCO_EPSILON,
    CenteredGram,
    center,
    delta_gram,
    gaussian_gram,
    median_bandwidth,
    nocco_transform,
)
from .parallel import parallel_map
from .solver import SolverConfig, search_lambda_for_k, solve_nn_lasso

HSIC_LASSO = "hsic-lasso"
NOCCO_LASSO = "nocco-lasso"
FHSIC = "fhsic"
SELECTORS = (HSIC_LASSO, NOCCO_LASSO, FHSIC)

# support-size window above the requested k for the penalty search
LAMBDA_WINDOW = 10


@dataclass(frozen=True)
class SelectionResult:
    """Ranked feature indices with scores and pipeline diagnostics.

    ``ranked`` holds distinct 0-based indices.  For the lasso selectors
    the scores are coefficients sorted non-increasingly; for greedy
    selection they are the per-step dependence gains in pick order.
    """

    ranked: tuple[int, ...]
    scores: tuple[float, ...]
    lam: float | None
    method: str
    diagnostics: dict = field(default_factory=dict)


def build_feature_grams(
    data: Dataset, nocco_epsilon: float | None = None
) -> tuple[list[CenteredGram], list[float | None]]:
    """Centered Gaussian-median Gram per feature, in feature order.

    Features whose median pairwise difference is zero get the zero Gram
    (their bandwidth is reported as ``None``), which removes them from
    every downstream score instead of aborting the pipeline.
    """

    def one(k: int):
        row = data.features[k]
        try:
            sigma = median_bandwidth(row)
        except DegenerateBandwidth:
            return CenteredGram.zero(data.n), None
        gram = center(gaussian_gram(row, sigma))
        if nocco_epsilon is not None:
            gram = nocco_transform(gram, nocco_epsilon)
        return gram, sigma

    results = parallel_map(one, range(data.d))
    grams = [g for g, _ in results]
    bandwidths = [s for _, s in results]
    return grams, bandwidths


def build_output_gram(
    data: Dataset,
    precomputed=None,
    nocco_epsilon: float | None = None,
) -> tuple[CenteredGram, float | None]:
    """Centered output Gram plus the bandwidth used (None when not Gaussian).

    Precomputed raw Grams bypass the kernel choice entirely; otherwise
    classification outputs use the delta kernel and regression outputs a
    Gaussian-median kernel.  A constant regression output degenerates to
    the zero Gram, mirroring the feature-side fallback.
    """
    bandwidth: float | None = None
    if precomputed is not None:
        raw = np.asarray(precomputed, dtype=np.float64)
        if raw.shape != (data.n, data.n):
            raise ValueError(f"precomputed gram must be {data.n} x {data.n}")
        gram = center(raw)
    elif data.task == CLASSIFICATION:
        gram = center(delta_gram(data.output))
    else:
        try:
            bandwidth = median_bandwidth(data.output)
        except DegenerateBandwidth:
            return CenteredGram.zero(data.n), None
        gram = center(gaussian_gram(data.output, bandwidth))
    if nocco_epsilon is not None:
        gram = nocco_transform(gram, nocco_epsilon)
    return gram, bandwidth


def _rank_support(alpha: np.ndarray, c: np.ndarray, k: int) -> list[int]:
    # descending coefficient, ties broken by larger relevance then lower index
    order = np.lexsort((np.arange(alpha.size), -c, -alpha))
    ranked = [int(j) for j in order if alpha[j] > 0]
    return ranked[:k]


def _lasso_select(
    data: Dataset,
    k: int,
    cfg: SolverConfig | None,
    epsilon: float | None,
    output_gram,
    lam: float | None,
) -> SelectionResult:
    if not 1 <= k <= data.d:
        raise ValueError("k must lie in [1, d]")
    if data.n < 2:
        raise ValueError("need at least 2 samples")
    cfg = cfg or SolverConfig()

    t0 = time.perf_counter()
    grams, bandwidths = build_feature_grams(data, epsilon)
    lgram, out_bw = build_output_gram(data, output_gram, epsilon)
    t1 = time.perf_counter()
    problem = assemble_problem(grams, lgram, NOCCO_METHOD if epsilon else HSIC_METHOD)
    t2 = time.perf_counter()

    in_window: bool | None
    if lam is not None:
        solution = solve_nn_lasso(problem, lam, cfg)
        in_window = None
    else:
        found = search_lambda_for_k(problem, k, LAMBDA_WINDOW, cfg)
        solution = found.solution
        lam = found.lam
        in_window = found.in_window
    t3 = time.perf_counter()

    ranked = _rank_support(solution.alpha, problem.c, k)
    scores = [float(solution.alpha[j]) for j in ranked]
    diagnostics = {
        "support_size": solution.support_size,
        "in_window": in_window,
        "converged": solution.converged,
        "iterations": solution.iterations,
        "kkt_residual": solution.kkt_residual,
        "objective": solution.objective,
        "lambda_max": float(max(0.0, problem.c.max())),
        "output_bandwidth": out_bw,
        "feature_bandwidths": bandwidths,
        "degenerate_features": [j for j, s in enumerate(bandwidths) if s is None],
        "backend": cfg.backend,
        "tol": cfg.tol,
        "epsilon": epsilon,
        "stage_seconds": {
            "grams": t1 - t0,
            "assemble": t2 - t1,
            "solve": t3 - t2,
        },
    }
    tag = NOCCO_LASSO if epsilon else HSIC_LASSO
    return SelectionResult(tuple(ranked), tuple(scores), float(lam), tag, diagnostics)


def hsic_lasso_select(
    data: Dataset,
    k: int,
    cfg: SolverConfig | None = None,
    output_gram=None,
    lam: float | None = None,
) -> SelectionResult:
    """Select k features by the HSIC lasso pipeline.

    ``lam`` overrides the support-size search with a fixed penalty;
    ``output_gram`` supplies a raw precomputed output kernel (structured
    outputs), bypassing the Gaussian/delta choice.
    """
    return _lasso_select(data, k, cfg, None, output_gram, lam)


def nocco_lasso_select(
    data: Dataset,
    k: int,
    cfg: SolverConfig | None = None,
    epsilon: float = DEFAULT_NOCCO_EPSILON,
    output_gram=None,
    lam: float | None = None,
) -> SelectionResult:
    """HSIC lasso on spectrally normalized Grams (features and output)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return _lasso_select(data, k, cfg, epsilon, output_gram, lam)


def fhsic_forward_select(
    data: Dataset,
    k: int,
    cfg: SolverConfig | None = None,
    output_gram=None,
) -> SelectionResult:
    """Greedy forward selection maximizing subset dependence with the output.

    At each step the candidate whose addition maximizes tr(M L) is taken,
    where M is the centered Gaussian Gram over the selected sub-vectors
    with the median of their pairwise Euclidean distances as bandwidth
    (recomputed every step since the sub-vector dimension grows).
    ``cfg`` is accepted for signature parity and ignored: there is no
    solver in this path.  Scores record the per-step gains; steps whose
    best gain is negative are listed in the diagnostics.
    """
    del cfg
    if not 1 <= k <= data.d:
        raise ValueError("k must lie in [1, d]")
    if data.n < 2:
        raise ValueError("need at least 2 samples")
    n = data.n
    t0 = time.perf_counter()
    lgram, out_bw = build_output_gram(data, output_gram)

    iu = np.triu_indices(n, k=1)
    sq_selected = np.zeros((n, n))
    remaining = list(range(data.d))
    selected: list[int] = []
    gains: list[float] = []
    step_bandwidths: list[float | None] = []
    negative_steps: list[int] = []
    trace_prev = 0.0

    def candidate_score(j: int) -> tuple[float, float | None]:
        row = data.features[j]
        diff = row[:, None] - row[None, :]
        sq = sq_selected + diff * diff
        med = float(np.median(np.sqrt(sq[iu])))
        if med == 0.0:
            return 0.0, None
        gram = center(np.exp(sq / (-2.0 * med * med)))
        return hsic(gram, lgram), med

    for step in range(k):
        results = parallel_map(candidate_score, remaining)
        best_pos = 0
        for pos in range(1, len(remaining)):
            if results[pos][0] > results[best_pos][0]:
                best_pos = pos
        j = remaining.pop(best_pos)
        score, med = results[best_pos]
        gain = score - trace_prev
        if gain < 0:
            negative_steps.append(step)
        selected.append(j)
        gains.append(float(gain))
        step_bandwidths.append(med)
        trace_prev = score
        row = data.features[j]
        diff = row[:, None] - row[None, :]
        sq_selected += diff * diff

    diagnostics = {
        "output_bandwidth": out_bw,
        "step_bandwidths": step_bandwidths,
        "negative_gain_steps": negative_steps,
        "final_trace": trace_prev,
        "stage_seconds": {"greedy": time.perf_counter() - t0},
    }
    return SelectionResult(tuple(selected), tuple(gains), None, FHSIC, diagnostics)


def fraction_correct(result: SelectionResult, truth) -> float:
    """Share of ground-truth features among the top-|truth| ranked ones."""
    truth = frozenset(int(t) for t in truth) if truth is not None else frozenset()
    if not truth:
        raise ValueError("missing truth")
    if len(result.ranked) < len(truth):
        raise ValueError(
            f"result has {len(result.ranked)} entries, need at least {len(truth)}"
        )
    top = set(result.ranked[: len(truth)])
    return len(top & truth) / len(truth)


def redundancy_rate(data: Dataset, selected) -> float:
    """Average absolute pairwise correlation with denominator m(m-1).

    The sum runs over the m(m-1)/2 unordered pairs, so the value tops out
    at 0.5 for perfectly correlated selections.  Pairs involving a
    constant feature contribute 0 and trigger a diagnostic warning.
    """
    idx = [int(j) for j in selected]
    m = len(idx)
    if m < 2:
        raise ValueError("redundancy rate needs at least 2 selected features")
    if len(set(idx)) != m:
        raise ValueError("selected indices must be distinct")
    if any(j < 0 or j >= data.d for j in idx):
        raise ValueError("selected index out of range")
    rows = data.features[idx].astype(np.float64)
    centered = rows - rows.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    zero = norms == 0
    if zero.any():
        warnings.warn(
            "constant feature in selection; its correlations are treated as 0",
            stacklevel=2,
        )
    safe = np.where(zero, 1.0, norms)
    corr = (centered @ centered.T) / np.outer(safe, safe)
    corr[zero, :] = 0.0
    corr[:, zero] = 0.0
    iu = np.triu_indices(m, k=1)
    return float(np.abs(corr[iu]).sum() / (m * (m - 1)))
