"""
Choosing the regularization strength by SURE or leave-one-out CV.

Scores come in an exact form (dense oracle: K y, tr K, K_ii) and a forest
form (sample means, mean root count, diagonal accumulators). grid_search
evaluates one score per candidate mu, with q = mu * q_profile, and keeps the
smallest; ties go to the smaller candidate.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSmootherError, ParameterError, TuningError
from .forest import DiagQ, sample_ensemble, seed_sequence
from .smoother import ESTIMATORS, DenseOracle, SmoothEstimate

logger = logging.getLogger(__name__)

DEGENERATE_DIAGONAL = 1.0 - 1e-9
DEFAULT_MU_GRID = tuple(0.5 * k for k in range(1, 11))   # 0.5, 1.0, ..., 5.0
METHODS = ("sure_exact", "sure_rsf", "loocv_exact", "loocv_rsf")


@dataclass
class TuningResult:
    """
    Scores over a candidate grid. fits[i] holds the smoothed signal of
    candidate i: an array for exact methods, a SmoothEstimate for forest
    methods, None where the candidate was degenerate.
    """

    grid: np.ndarray
    scores: np.ndarray
    best: float
    best_index: int
    method: str
    fits: list = field(default_factory=list)

    @property
    def best_fit(self):
        return self.fits[self.best_index] if self.fits else None

    @property
    def best_values(self):
        fit = self.best_fit
        return fit.values if isinstance(fit, SmoothEstimate) else fit

    def to_csv(self, path):
        """Header candidate,score; one row per grid value."""
        with open(path, "w") as fh:
            fh.write("candidate,score\n")
            for candidate, score in zip(self.grid.tolist(), self.scores.tolist()):
                fh.write(f"{candidate!r},{score!r}\n")


def parse_grid(text):
    """'0.5:0.5:5.0' (start:step:stop, inclusive) or '0.1,1,10'."""
    try:
        if ":" in text:
            start, step, stop = (float(part) for part in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = np.round(start + step * np.arange(count), 12)
        else:
            values = np.array([float(part) for part in text.split(",") if part])
    except ValueError as exc:
        raise ParameterError(f"bad grid {text!r}: {exc}") from exc
    if values.size == 0 or (values <= 0).any():
        raise ParameterError(f"grid {text!r} must hold positive values")
    return values


def select_best(grid, scores):
    """Index of the smallest finite score, ties broken toward the smaller candidate."""
    scores = np.asarray(scores, dtype=float)
    finite = np.isfinite(scores)
    if not finite.any():
        raise TuningError("every grid candidate is degenerate")
    lowest = scores[finite].min()
    tied = np.flatnonzero(finite & (scores == lowest))
    return int(tied[np.argmin(np.asarray(grid)[tied])])


# ============================================
# SURE
# ============================================

def _sure(y, fitted, trace, sigma2):
    if sigma2 < 0:
        raise ParameterError(f"noise variance must be >= 0, got {sigma2}")
    y = np.asarray(y, dtype=float)
    columns = 1 if y.ndim == 1 else y.shape[1]
    n = y.shape[0]
    residual = float(np.sum((y - fitted) ** 2))
    return -n * columns * sigma2 + residual + 2.0 * sigma2 * columns * trace


def sure_exact(oracle, y, sigma2):
    """-n sigma^2 + ||y - K y||^2 + 2 sigma^2 tr K."""
    return _sure(y, oracle.apply(y), float(np.trace(oracle.K)), sigma2)


def sure_rsf(ensemble, y, sigma2, which):
    """SURE with K y replaced by the forest mean and tr K by the mean root count."""
    y = np.asarray(y, dtype=float)
    fitted = ensemble.mean(which).reshape(y.shape)
    return _sure(y, fitted, ensemble.mean_root_count, sigma2)


def true_risk(oracle, x, sigma2):
    """E ||K y - x||^2 for y = x + N(0, sigma2 I): bias ||(K - I)x||^2 + sigma2 ||K||_F^2."""
    x = np.asarray(x, dtype=float)
    bias = oracle.apply(x) - x
    return float(np.sum(bias ** 2) + sigma2 * np.sum(oracle.K ** 2))


# ============================================
# LOOCV
# ============================================

def loocv_score(fitted, y, diag, labeled=None):
    """
    (1/|l|) sum_{i in l} ||(fitted_i - y_i) / (1 - diag_i)||^2.

    labeled defaults to every node. Raises DegenerateSmootherError naming the
    first node whose diagonal reaches DEGENERATE_DIAGONAL.
    """
    fitted = np.asarray(fitted, dtype=float)
    y = np.asarray(y, dtype=float)
    diag = np.asarray(diag, dtype=float)
    nodes = np.arange(y.shape[0]) if labeled is None else np.asarray(labeled, dtype=np.int64)
    if nodes.size == 0:
        raise ParameterError("LOOCV needs a nonempty label set")

    d = diag[nodes]
    degenerate = np.flatnonzero(d >= DEGENERATE_DIAGONAL)
    if degenerate.size:
        node = int(nodes[degenerate[0]])
        raise DegenerateSmootherError(
            f"smoother diagonal at node {node} is {diag[node]:.12g}; "
            "leave-one-out is undefined there",
            node=node,
        )
    gap = 1.0 - d
    residual = fitted[nodes] - y[nodes]
    residual = residual / (gap[:, None] if residual.ndim == 2 else gap)
    return float(np.sum(residual ** 2) / nodes.size)


def loocv_exact(oracle, y, labeled=None):
    """LOOCV of the linear smoother K."""
    return loocv_score(oracle.apply(y), y, np.diag(oracle.K), labeled)


def loocv_rsf(ensemble, y, labeled=None, which="bar"):
    """LOOCV with K y and K_ii replaced by forest means and diagonal accumulators."""
    y = np.asarray(y, dtype=float)
    fitted = ensemble.mean(which).reshape(y.shape)
    return loocv_score(fitted, y, ensemble.diagonal(which), labeled)


# ============================================
# GRID SEARCH
# ============================================

def grid_search(g, y, grid=DEFAULT_MU_GRID, method="sure_exact", *, sigma2=None,
                labeled=None, q_profile=None, which="bar", n_forests=20, seed=None,
                threads=1):
    """
    Score every candidate mu with q = mu * q_profile (default all ones).

    Forest methods draw fresh, independently seeded forests per candidate.
    Degenerate candidates score +inf; if all are degenerate a TuningError
    is raised.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0 or (grid <= 0).any():
        raise ParameterError("grid must be a nonempty list of positive values")
    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}, got {method!r}")
    if method.startswith("sure") and sigma2 is None:
        raise ParameterError("SURE needs the noise variance sigma2")
    if method.endswith("rsf") and which not in ESTIMATORS:
        raise ParameterError(f"estimator must be one of {ESTIMATORS}, got {which!r}")
    profile = np.ones(g.n) if q_profile is None else np.asarray(q_profile, dtype=float)
    y = np.asarray(y, dtype=float)
    squeeze = y.ndim == 1

    children = seed_sequence(seed).spawn(grid.size)
    scores, fits = [], []
    for mu, child in zip(grid, children):
        q = DiagQ.of(mu * profile, g.n)
        try:
            if method.endswith("exact"):
                oracle = DenseOracle.build(g, q)
                fit = oracle.apply(y)
                if method == "sure_exact":
                    score = sure_exact(oracle, y, sigma2)
                else:
                    score = loocv_exact(oracle, y, labeled)
            else:
                ensemble = sample_ensemble(g, q, y, n_forests, seed=child, threads=threads)
                fit = SmoothEstimate.from_ensemble(ensemble, which, squeeze=squeeze)
                if method == "sure_rsf":
                    score = sure_rsf(ensemble, y, sigma2, which)
                else:
                    score = loocv_rsf(ensemble, y, labeled, which)
        except DegenerateSmootherError as exc:
            logger.info("candidate %g skipped: %s", mu, exc)
            score, fit = np.inf, None
        logger.debug("%s candidate %g -> %.6g", method, mu, score)
        scores.append(score)
        fits.append(fit)

    scores = np.asarray(scores, dtype=float)
    best_index = select_best(grid, scores)
    return TuningResult(grid, scores, float(grid[best_index]), best_index, method, fits)
