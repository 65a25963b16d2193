"""
Tikhonov smoothing x_hat = (L + Q)^-1 Q y, exactly and by random forests.

Two forest estimators are provided:
    tilde: x(i) = y(root(i))                       (root value propagated)
    bar:   x(i) = sum_{j in tree(i)} q_j y_j / sum_{j in tree(i)} q_j
Both are unbiased for x_hat; bar never has larger q-weighted variance.

DenseOracle holds K = (L + Q)^-1 Q for small graphs and backs the variance
formulas, SURE/LOOCV exact scores and the statistical tests.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .baselines import cg_solve
from .errors import CapabilityError, NumericError, ParameterError
from .forest import DiagQ, ForestEnsemble, sample_ensemble
from .graph import DENSE_MAX_N, Spectrum, as_signal, dense_laplacian, laplacian_spectrum, scale_rows

logger = logging.getLogger(__name__)

CG_TOLERANCE = 1e-10
ESTIMATORS = ("tilde", "bar")


@dataclass(frozen=True, eq=False)
class DenseOracle:
    """Dense K = (L + Q)^-1 Q, the inverse (L + Q)^-1 and optionally the spectrum of L."""

    K: np.ndarray
    inverse: np.ndarray
    q: np.ndarray
    spectrum: Spectrum | None = None

    @classmethod
    def build(cls, g, q, with_spectrum=False):
        if g.n > DENSE_MAX_N:
            raise CapabilityError(f"dense oracle needs n <= {DENSE_MAX_N}, got {g.n}")
        q = DiagQ.of(q, g.n).require_finite()
        q.check_reachable(g)
        system = dense_laplacian(g) + np.diag(q.values)
        inverse = scipy.linalg.solve(system, np.eye(g.n), assume_a="pos")
        K = inverse * q.values[None, :]
        spectrum = laplacian_spectrum(g) if with_spectrum else None
        return cls(K, inverse, q.values, spectrum)

    @property
    def n(self):
        return self.K.shape[0]

    def apply(self, y):
        return self.K @ np.asarray(y, dtype=float)


@dataclass(frozen=True, eq=False)
class SmoothEstimate:
    """
    Sample mean of N single-forest estimates.

    variance is the per-node (unweighted) sample variance of the single-forest
    estimates, so variance / n_forests is the squared standard error of values.
    """

    values: np.ndarray
    n_forests: int
    variance: np.ndarray
    mean_root_count: float
    which: str
    ensemble: ForestEnsemble

    @property
    def standard_error(self):
        return np.sqrt(self.variance / self.n_forests)

    def weighted_variance(self, q):
        """sum_i q_i Var_i (the q-weighted error of a single forest)."""
        q = np.asarray(q, dtype=float)
        return float(np.sum(scale_rows(q, self.variance)))

    @classmethod
    def from_ensemble(cls, ensemble, which, squeeze=False):
        values = ensemble.mean(which)
        variance = ensemble.variance(which)
        if squeeze:
            values, variance = values[:, 0], variance[:, 0]
        return cls(values, ensemble.count, variance, ensemble.mean_root_count, which, ensemble)


# ============================================
# EXACT SOLUTION
# ============================================

def exact_smooth(g, q, y):
    """
    Solve (L + Q) x = Q y.

    Dense Cholesky up to DENSE_MAX_N nodes, Jacobi-preconditioned CG to
    relative residual CG_TOLERANCE beyond.
    """
    q = DiagQ.of(q, g.n).require_finite()
    q.check_reachable(g)
    y = as_signal(g, y)

    if g.n <= DENSE_MAX_N:
        system = dense_laplacian(g) + np.diag(q.values)
        return scipy.linalg.solve(system, scale_rows(q.values, y), assume_a="pos")

    columns = y.reshape(g.n, -1)
    out = np.empty_like(columns)
    for c in range(columns.shape[1]):
        result = cg_solve(g, q, columns[:, c], tol=CG_TOLERANCE, precond="jacobi")
        if not result.converged:
            raise NumericError(
                f"CG stopped at relative residual {result.residual_norms[-1]:.3g} "
                f"after {result.iterations} iterations"
            )
        logger.debug("CG column %d converged in %d iterations", c, result.iterations)
        out[:, c] = result.x
    return out.reshape(y.shape)


# ============================================
# FOREST ESTIMATES
# ============================================

def _estimate(which, g, q, y, n_forests, seed, threads):
    y = as_signal(g, y)
    ensemble = sample_ensemble(g, q, y, n_forests, seed=seed, threads=threads)
    return SmoothEstimate.from_ensemble(ensemble, which, squeeze=y.ndim == 1)


def estimate_tilde(g, q, y, n_forests, seed=None, threads=1):
    """Mean over N forests of y(root(i))."""
    return _estimate("tilde", g, q, y, n_forests, seed, threads)


def estimate_bar(g, q, y, n_forests, seed=None, threads=1):
    """Mean over N forests of the q-weighted tree average of y."""
    return _estimate("bar", g, q, y, n_forests, seed, threads)


def estimate(which, g, q, y, n_forests, seed=None, threads=1):
    """estimate_tilde or estimate_bar by name."""
    if which not in ESTIMATORS:
        raise ParameterError(f"estimator must be one of {ESTIMATORS}, got {which!r}")
    return _estimate(which, g, q, y, n_forests, seed, threads)


# ============================================
# VARIANCE ORACLES
# ============================================

def variance_oracle(oracle, y, which):
    """
    Expected q-weighted squared error of one forest:
        tilde: y' (Q - K'QK) y
        bar:   y' (QK - K'QK) y
    Summed over columns for an n x C signal.
    """
    y = np.asarray(y, dtype=float)
    smoothed = oracle.apply(y)
    q = oracle.q
    spread = float(np.sum(scale_rows(q, smoothed * smoothed)))
    if which == "tilde":
        return float(np.sum(scale_rows(q, y * y))) - spread
    if which == "bar":
        return float(np.sum(scale_rows(q, y * smoothed))) - spread
    raise ParameterError(f"estimator must be 'tilde' or 'bar', got {which!r}")


def per_node_variance_oracle(oracle, y):
    """Per-node variance of the tilde estimator: K(y^2) - (Ky)^2."""
    y = np.asarray(y, dtype=float)
    return oracle.apply(y * y) - oracle.apply(y) ** 2
