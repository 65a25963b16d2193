"""
Deterministic comparison solvers for x_hat = (L + Q)^-1 Q y.

- cg_solve: conjugate gradient, plain or Jacobi-preconditioned
- chebyshev_setup / chebyshev_apply: polynomial approximation of the
  filter h(lambda) = q / (q + lambda) on [0, b], with b = lambda_max or the
  trivial bound 2 * d_max
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import ParameterError
from .forest import DiagQ
from .graph import as_signal, dense_laplacian, laplacian_apply

logger = logging.getLogger(__name__)

LAMBDA_MAX_TOLERANCE = 1e-6
DENSE_EIGEN_MAX_N = 200       # below this, lambda_max comes from a dense eigvalsh
B_MODES = ("exact_lambda_max", "gershgorin")


# ============================================
# CONJUGATE GRADIENT
# ============================================

@dataclass
class CGResult:
    """Solution plus the relative residual ||r_k|| / ||Qy|| after every iteration."""

    x: np.ndarray
    iterations: int
    residual_norms: list = field(default_factory=list)
    converged: bool = False


def cg_solve(g, q, y, max_iters=None, tol=1e-10, precond="none", x0=None):
    """
    Conjugate gradient on (L + Q) x = Q y.

    Parameters
    ----------
    max_iters : int, optional
        Iteration cap (default 10 n).
    tol : float or None
        Relative residual target. None runs exactly max_iters iterations.
    precond : {"none", "jacobi"}
        Jacobi uses diag(L + Q) = d + q.
    x0 : array, optional
        Initial guess (default zero).

    Returns
    -------
    CGResult
    """
    q = DiagQ.of(q, g.n).require_finite()
    q.check_reachable(g)
    y = as_signal(g, y)
    if y.ndim != 1:
        raise ParameterError("cg_solve takes a single signal")
    if precond not in ("none", "jacobi"):
        raise ParameterError(f"unknown preconditioner {precond!r}")
    max_iters = 10 * g.n if max_iters is None else int(max_iters)
    if max_iters < 0:
        raise ParameterError(f"max_iters must be >= 0, got {max_iters}")

    qv = q.values
    if precond == "jacobi":
        inv_diag = 1.0 / (np.asarray(g.degree) + qv)
    else:
        inv_diag = None

    def matvec(z):
        return laplacian_apply(g, z) + qv * z

    b = qv * y
    b_norm = np.linalg.norm(b)
    x = np.zeros(g.n) if x0 is None else np.array(x0, dtype=float)
    if b_norm == 0.0:
        return CGResult(np.zeros(g.n), 0, [0.0], True)

    r = b - matvec(x)
    z = r if inv_diag is None else inv_diag * r
    p = z.copy()
    rz = r @ z
    history = [np.linalg.norm(r) / b_norm]
    converged = tol is not None and history[-1] <= tol

    iterations = 0
    while not converged and iterations < max_iters:
        if rz == 0.0:
            converged = True
            break
        ap = matvec(p)
        alpha = rz / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        iterations += 1
        history.append(np.linalg.norm(r) / b_norm)
        if tol is not None and history[-1] <= tol:
            converged = True
            break
        z = r if inv_diag is None else inv_diag * r
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next

    if tol is not None and not converged:
        logger.info("CG hit the iteration cap %d at residual %.3g", max_iters, history[-1])
    return CGResult(x, iterations, history, converged)


# ============================================
# CHEBYSHEV FILTER
# ============================================

@dataclass(frozen=True)
class FilterSpec:
    """Chebyshev series of h(lambda) = q / (q + lambda) on [0, b]."""

    q: float
    b: float
    degree: int
    coefficients: np.ndarray

    def response(self, lam):
        """Polynomial value at eigenvalue(s) lam."""
        return chebyshev.chebval(2.0 * np.asarray(lam) / self.b - 1.0, self.coefficients)


def lambda_max(g, tol=LAMBDA_MAX_TOLERANCE):
    """Largest Laplacian eigenvalue (Lanczos, or dense for small graphs)."""
    if g.n == 1 or g.n_edges == 0:
        return 0.0
    if g.n <= DENSE_EIGEN_MAX_N:
        return float(scipy.linalg.eigvalsh(dense_laplacian(g))[-1])
    operator = LinearOperator((g.n, g.n), matvec=lambda z: laplacian_apply(g, z), dtype=float)
    start = np.random.default_rng(0).standard_normal(g.n)
    value = eigsh(operator, k=1, which="LA", tol=tol, v0=start, return_eigenvectors=False)
    return float(value[0])


def chebyshev_setup(g, q, degree, b_mode="exact_lambda_max"):
    """
    Interpolate h at the degree+1 Chebyshev points of [0, b].

    b_mode "exact_lambda_max" estimates lambda_n (relative tolerance 1e-6,
    inflated by that tolerance so b >= lambda_n); "gershgorin" uses 2 d_max.
    """
    if degree < 1:
        raise ParameterError(f"Chebyshev degree must be >= 1, got {degree}")
    q = DiagQ.of(q, g.n).scalar
    if b_mode == "exact_lambda_max":
        b = lambda_max(g) * (1.0 + LAMBDA_MAX_TOLERANCE)
    elif b_mode == "gershgorin":
        b = 2.0 * float(np.max(g.degree))
    else:
        raise ParameterError(f"b_mode must be one of {B_MODES}, got {b_mode!r}")
    if b <= 0.0:
        b = 1.0

    def h(x):
        return q / (q + 0.5 * b * (x + 1.0))

    coefficients = chebyshev.chebinterpolate(h, int(degree))
    return FilterSpec(q=q, b=b, degree=int(degree), coefficients=coefficients)


def chebyshev_apply(g, spec, y):
    """Evaluate sum_k c_k T_k(2L/b - I) y by the three-term recurrence (degree matvecs)."""
    y = as_signal(g, y)
    scale = 2.0 / spec.b

    def shifted(v):
        return scale * laplacian_apply(g, v) - v

    c = spec.coefficients
    previous = y
    current = shifted(y)
    out = c[0] * previous + c[1] * current
    for k in range(2, c.size):
        previous, current = current, 2.0 * shifted(current) - previous
        out = out + c[k] * current
    return out
