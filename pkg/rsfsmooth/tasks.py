"""
Downstream problems reduced to Tikhonov smoothing.

- interpolate: extend a signal known on a node subset
- label_propagate: harmonic classification (exact Dirichlet solve, or walks
  absorbed on the labeled nodes)
- generalized_ssl: f_c = D^(1-eta) K D^(eta-1) y_c with Q = (mu/2) D
- newton_poisson: Newton's method for a Poisson log-likelihood with Laplacian
  penalty, each step one smoothing call
- irls_l1: iteratively reweighted least squares for an l1 edge penalty
- psnr / accuracy metrics
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import splu
from scipy.special import xlogy

from .errors import DegenerateSmootherError, ParameterError, SingularReductionError
from .forest import DiagQ, sample_ensemble, seed_sequence
from .graph import as_signal, incidence_apply, laplacian_apply
from .smoother import DenseOracle, estimate, estimate_bar, exact_smooth
from .tuning import DEFAULT_MU_GRID, TuningResult, loocv_score, select_best

logger = logging.getLogger(__name__)

# Newton line search
ALPHA0 = 1.0
SHRINK = 0.5
ARMIJO = 1e-4
MAX_HALVINGS = 30
NEWTON_TOL = 1e-9
NEWTON_MAX_ITERS = 100
GRADIENT_TOL = 1e-12       # relative to mu * (1 + max count)
T_CLAMP = 30.0
MAX_REJECTED_STEPS = 3     # consecutive failed line searches before a stochastic run stops

# IRLS
IRLS_EPS_RELATIVE = 1e-8
IRLS_EPS_FLOOR = 1e-12
IRLS_MAX_ITERS = 50
IRLS_TOL = 1e-8
NORMALIZATIONS = ("printed", "balanced")

POWER_ITERATION_TOL = 1e-12
POWER_ITERATION_MAX = 1_000_000


# ============================================
# PROBLEM AND RESULT TYPES
# ============================================

@dataclass(frozen=True, eq=False)
class LabeledProblem:
    """Labeled nodes, their classes in 0..C-1, and the one-hot prior Y."""

    n: int
    nodes: np.ndarray
    classes: np.ndarray
    n_classes: int

    @classmethod
    def from_labels(cls, labels, n_classes=None):
        """From a length-n array with -1 for unlabeled nodes."""
        labels = np.asarray(labels, dtype=np.int64)
        nodes = np.flatnonzero(labels >= 0)
        return cls.from_pairs(labels.size, nodes, labels[nodes], n_classes)

    @classmethod
    def from_pairs(cls, n, nodes, classes, n_classes=None):
        nodes = np.asarray(nodes, dtype=np.int64)
        classes = np.asarray(classes, dtype=np.int64)
        if nodes.size == 0:
            raise ParameterError("the label set is empty")
        if nodes.size != classes.size:
            raise ParameterError("nodes and classes differ in length")
        if np.unique(nodes).size != nodes.size:
            raise ParameterError("a node is labeled twice")
        if nodes.min() < 0 or nodes.max() >= n:
            raise ParameterError(f"labeled node outside 0..{n - 1}")
        n_classes = int(classes.max()) + 1 if n_classes is None else int(n_classes)
        if classes.min() < 0 or classes.max() >= n_classes:
            raise ParameterError(f"class id outside 0..{n_classes - 1}")
        order = np.argsort(nodes)
        return cls(n, nodes[order], classes[order], n_classes)

    @property
    def Y(self):
        prior = np.zeros((self.n, self.n_classes))
        prior[self.nodes, self.classes] = 1.0
        return prior

    @property
    def unlabeled(self):
        mask = np.ones(self.n, dtype=bool)
        mask[self.nodes] = False
        return np.flatnonzero(mask)


def sample_labeled(ground_truth, m, seed=None, n_classes=None):
    """Pick m nodes per class at random (all of a class if it has fewer)."""
    ground_truth = np.asarray(ground_truth, dtype=np.int64)
    if m < 1:
        raise ParameterError(f"need at least one label per class, got m={m}")
    rng = np.random.default_rng(seed)
    n_classes = int(ground_truth.max()) + 1 if n_classes is None else n_classes
    picked = []
    for c in range(n_classes):
        members = np.flatnonzero(ground_truth == c)
        if members.size:
            picked.append(rng.choice(members, size=min(m, members.size), replace=False))
    nodes = np.concatenate(picked)
    return LabeledProblem.from_pairs(ground_truth.size, nodes, ground_truth[nodes], n_classes)


@dataclass(frozen=True, eq=False)
class ClassificationResult:
    """Classification function F (n x C), argmax classes and the labeled nodes."""

    F: np.ndarray
    assigned: np.ndarray
    labeled: np.ndarray

    @classmethod
    def from_scores(cls, F, labeled):
        # np.argmax returns the first maximum: ties go to the smallest class
        return cls(F, np.argmax(F, axis=1), np.asarray(labeled, dtype=np.int64))

    def to_csv(self, path):
        """Header node,assigned,score_0..score_{C-1}."""
        header = ["node", "assigned"] + [f"score_{c}" for c in range(self.F.shape[1])]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for node, (label, row) in enumerate(zip(self.assigned.tolist(), self.F.tolist())):
                fh.write(f"{node},{label}," + ",".join(repr(x) for x in row) + "\n")


@dataclass
class IterateTrace:
    """Per-iteration loss, step size and update norm of an outer loop."""

    initial_loss: float
    losses: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    update_norms: list = field(default_factory=list)
    converged: bool = False
    clamped: bool = False

    def append(self, loss, alpha, update_norm):
        self.losses.append(float(loss))
        self.alphas.append(float(alpha))
        self.update_norms.append(float(update_norm))

    @property
    def final_loss(self):
        return self.losses[-1] if self.losses else self.initial_loss

    def to_csv(self, path):
        """Header iter,loss,alpha,update_norm; iteration 0 is the starting point."""
        with open(path, "w") as fh:
            fh.write("iter,loss,alpha,update_norm\n")
            fh.write(f"0,{self.initial_loss!r},0.0,0.0\n")
            for k, (loss, alpha, norm) in enumerate(
                zip(self.losses, self.alphas, self.update_norms), start=1
            ):
                fh.write(f"{k},{loss!r},{alpha!r},{norm!r}\n")


# ============================================
# HARMONIC EXTENSION
# ============================================

def _check_labels_reach(g, nodes):
    labels = g.components()
    reached = np.zeros(labels.max() + 1, dtype=bool)
    reached[labels[nodes]] = True
    if not reached.all():
        node = int(np.flatnonzero(~reached[labels])[0])
        raise ParameterError(f"node {node} is not connected to any labeled node")


def _harmonic_exact(g, nodes, values, unlabeled):
    """Solve L_uu F_u = W_ul F_l (values: |l| x C)."""
    adjacency = g.adjacency
    w_uu = adjacency[unlabeled][:, unlabeled]
    w_ul = adjacency[unlabeled][:, nodes]
    system = (diags(np.asarray(g.degree)[unlabeled]) - w_uu).tocsc()
    rhs = np.asarray(w_ul @ values).reshape(unlabeled.size, -1)
    return splu(system).solve(rhs)


def _harmonic_rsf(g, nodes, values, n_forests, seed, threads):
    """Root-value estimate with walks absorbed exactly on the labeled nodes."""
    q = np.zeros(g.n)
    q[nodes] = np.inf
    y = np.zeros((g.n, values.shape[1]))
    y[nodes] = values
    ensemble = sample_ensemble(g, DiagQ.of(q, g.n), y, n_forests, seed=seed, threads=threads)
    return ensemble.tilde_mean


def interpolate(g, labeled, x_labeled, mu=0.0, method="exact", n_forests=20, seed=None,
                threads=1, allow_fallback=True):
    """
    Minimize z'(L + mu I)z subject to z = x on the labeled nodes.

    The unknown part solves (L_{G\\l} + Q) z_u = Q y on the graph without the
    labeled nodes, Q_ii = mu + sum_{j in l} w(i, j), y = Q^-1 W_ul x_l, so the
    forest methods sample forests on that reduced graph. If some Q_ii is zero
    (mu = 0 and a node with no labeled neighbour) the harmonic solution is used
    instead, or SingularReductionError when allow_fallback is False.
    """
    nodes = np.asarray(labeled, dtype=np.int64)
    x_labeled = np.asarray(x_labeled, dtype=float)
    if nodes.size == 0:
        raise ParameterError("interpolation needs at least one known node")
    if nodes.size != x_labeled.size or np.unique(nodes).size != nodes.size:
        raise ParameterError("known nodes must be distinct and match the known values")
    if nodes.min() < 0 or nodes.max() >= g.n:
        raise ParameterError(f"known node outside 0..{g.n - 1}")
    if mu < 0:
        raise ParameterError(f"mu must be >= 0, got {mu}")
    if method not in ("exact", "tilde", "bar"):
        raise ParameterError(f"method must be exact, tilde or bar, got {method!r}")

    out = np.empty(g.n)
    out[nodes] = x_labeled
    mask = np.ones(g.n, dtype=bool)
    mask[nodes] = False
    unlabeled = np.flatnonzero(mask)
    if unlabeled.size == 0:
        return out

    w_ul = g.adjacency[unlabeled][:, nodes]
    boundary = np.asarray(w_ul.sum(axis=1)).ravel()
    q = mu + boundary

    if np.any(q <= 0):
        if not allow_fallback:
            raise SingularReductionError(
                f"mu = 0 and node {int(unlabeled[np.argmax(q <= 0)])} has no known neighbour"
            )
        _check_labels_reach(g, nodes)
        values = x_labeled[:, None]
        if method == "exact":
            out[unlabeled] = _harmonic_exact(g, nodes, values, unlabeled)[:, 0]
        else:
            out[unlabeled] = _harmonic_rsf(g, nodes, values, n_forests, seed, threads)[unlabeled, 0]
        return out

    reduced = g.subgraph(unlabeled)
    y = (w_ul @ x_labeled) / q
    if method == "exact":
        out[unlabeled] = exact_smooth(reduced, q, y)
    else:
        out[unlabeled] = estimate(method, reduced, q, y, n_forests, seed, threads).values
    return out


# ============================================
# LABEL PROPAGATION
# ============================================

def label_propagate(g, problem, method="exact", n_forests=20, seed=None, threads=1):
    """
    Harmonic classification: (L F)_u = 0 with F_l = Y_l.

    method "exact" factorizes L_uu; "rsf" lets every unlabeled node inherit
    the label of the first labeled node its walk reaches, averaged over N
    forests.
    """
    if method not in ("exact", "rsf"):
        raise ParameterError(f"method must be 'exact' or 'rsf', got {method!r}")
    _check_labels_reach(g, problem.nodes)
    Y = problem.Y
    F = Y.copy()
    unlabeled = problem.unlabeled
    if unlabeled.size:
        values = Y[problem.nodes]
        if method == "exact":
            F[unlabeled] = _harmonic_exact(g, problem.nodes, values, unlabeled)
        else:
            F[unlabeled] = _harmonic_rsf(g, problem.nodes, values, n_forests, seed, threads)[unlabeled]
    return ClassificationResult.from_scores(F, problem.nodes)


def label_propagate_iterative(g, problem, tol=POWER_ITERATION_TOL, max_iters=POWER_ITERATION_MAX):
    """
    Power iteration F <- D^-1 W F with F_l clamped to Y_l, from F = Y.

    Returns (ClassificationResult, iterations).
    """
    if np.any(np.asarray(g.degree) == 0):
        raise ParameterError("power iteration needs every node to have a neighbour")
    Y = problem.Y
    nodes = problem.nodes
    inv_degree = 1.0 / np.asarray(g.degree)
    F = Y.copy()
    for iteration in range(1, max_iters + 1):
        updated = inv_degree[:, None] * (g.adjacency @ F)
        updated[nodes] = Y[nodes]
        change = np.max(np.abs(updated - F))
        F = updated
        if change < tol:
            break
    else:
        logger.info("power iteration stopped at the cap, last change %.3g", change)
    return ClassificationResult.from_scores(F, nodes), iteration


# ============================================
# GENERALIZED SSL
# ============================================

def _gssl_parts(g, problem, mu, eta):
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    d = np.asarray(g.degree)
    if np.any(d == 0):
        raise ParameterError(f"node {int(np.argmax(d == 0))} has degree zero")
    q = DiagQ.of(0.5 * mu * d, g.n)
    source = problem.Y * (d ** (eta - 1.0))[:, None]
    return q, source, d ** (1.0 - eta)


def generalized_ssl(g, problem, mu, eta=0.0, method="exact", n_forests=20, seed=None, threads=1):
    """
    f_c = D^(1-eta) K D^(eta-1) y_c with K = (L + (mu/2) D)^-1 (mu/2) D.
    All classes share the same forests.
    """
    if method not in ("exact", "tilde", "bar"):
        raise ParameterError(f"method must be exact, tilde or bar, got {method!r}")
    q, source, left = _gssl_parts(g, problem, mu, eta)
    if method == "exact":
        smoothed = exact_smooth(g, q, source)
    else:
        smoothed = estimate(method, g, q, source, n_forests, seed, threads).values
    return ClassificationResult.from_scores(left[:, None] * smoothed, problem.nodes)


def tune_generalized_ssl(g, problem, grid=DEFAULT_MU_GRID, eta=0.0, method="exact",
                         n_forests=20, seed=None, threads=1):
    """
    LOOCV over mu on the labeled nodes. The diagonal of D^(1-eta) K D^(eta-1)
    equals diag(K), so the same leave-one-out shortcut applies.

    fits[i] is the ClassificationResult of candidate i.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or (grid <= 0).any():
        raise ParameterError("grid must be a nonempty list of positive values")
    children = seed_sequence(seed).spawn(grid.size)
    Y = problem.Y
    scores, fits = [], []
    for mu, child in zip(grid, children):
        q, source, left = _gssl_parts(g, problem, mu, eta)
        if method == "exact":
            oracle = DenseOracle.build(g, q)
            smoothed, diag = oracle.apply(source), np.diag(oracle.K)
        else:
            ensemble = sample_ensemble(g, q, source, n_forests, seed=child, threads=threads)
            smoothed, diag = ensemble.mean(method), ensemble.diagonal(method)
        F = left[:, None] * smoothed
        try:
            score = loocv_score(F, Y, diag, problem.nodes)
        except DegenerateSmootherError as exc:
            logger.info("candidate %g skipped: %s", mu, exc)
            score = np.inf
        scores.append(score)
        fits.append(ClassificationResult.from_scores(F, problem.nodes))
    scores = np.asarray(scores)
    best_index = select_best(grid, scores)
    return TuningResult(grid, scores, float(grid[best_index]), best_index,
                        f"loocv_{method}", fits)


# ============================================
# NEWTON FOR POISSON
# ============================================

def poisson_loss(g, t, y, mu):
    """
    mu * sum(exp t - y t - y + y log y) + 0.5 t'Lt, with 0 log 0 = 0.
    Differs from the negative log-likelihood plus penalty by a constant.
    """
    data = np.exp(t) - y * t - y + xlogy(y, y)
    return float(mu * np.sum(data) + 0.5 * t @ laplacian_apply(g, t))


def poisson_gradient(g, t, y, mu):
    """mu exp(t) - mu y + L t."""
    return mu * np.exp(t) - mu * y + laplacian_apply(g, t)


def newton_poisson(g, y, mu, method="exact", n_forests=20, seed=None, threads=1, t0=None,
                   max_iters=NEWTON_MAX_ITERS, tol=NEWTON_TOL, alpha0=ALPHA0, shrink=SHRINK,
                   armijo=ARMIJO, max_halvings=MAX_HALVINGS):
    """
    Minimize the Poisson loss in log-intensity t by damped Newton steps.

    The step (mu diag(e^t) + L)^-1 g is the smoothing K y' with q = mu e^t and
    y' = g / (mu e^t), computed exactly or by the bar estimator. Step sizes
    come from Armijo backtracking; a sampled step that is not a descent
    direction is replaced by the scaled gradient g / (mu e^t). t stays in
    [-T_CLAMP, T_CLAMP].

    Returns (t, IterateTrace).
    """
    y = as_signal(g, y)
    if y.ndim != 1 or np.any(y < 0) or not np.isfinite(y).all():
        raise ParameterError("Poisson counts must be a finite nonnegative signal")
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if method not in ("exact", "bar"):
        raise ParameterError(f"method must be 'exact' or 'bar', got {method!r}")

    t = np.log(np.maximum(y, 0.5)) if t0 is None else np.array(t0, dtype=float)
    t = np.clip(t, -T_CLAMP, T_CLAMP)
    loss = poisson_loss(g, t, y, mu)
    trace = IterateTrace(initial_loss=loss)
    children = seed_sequence(seed).spawn(max_iters)
    rejected = 0

    for k in range(max_iters):
        gradient = poisson_gradient(g, t, y, mu)
        if np.max(np.abs(gradient)) <= GRADIENT_TOL * mu * (1.0 + y.max()):
            trace.converged = True
            break
        weight = mu * np.exp(t)
        source = gradient / weight
        if method == "exact":
            step = exact_smooth(g, weight, source)
        else:
            step = estimate_bar(g, weight, source, n_forests, seed=children[k], threads=threads).values
        slope = float(gradient @ step)
        if slope <= 0.0:
            # forest step is not a descent direction; use the scaled gradient
            logger.info("iteration %d: sampled step has slope %.3g, using the gradient", k, slope)
            step = source
            slope = float(gradient @ step)

        alpha = alpha0
        candidate, new_loss = None, np.inf
        for _ in range(max_halvings + 1):
            candidate = np.clip(t - alpha * step, -T_CLAMP, T_CLAMP)
            new_loss = poisson_loss(g, candidate, y, mu)
            if np.isfinite(new_loss) and new_loss <= min(loss, loss - armijo * alpha * slope):
                break
            alpha *= shrink
        else:
            rejected += 1
            trace.append(loss, 0.0, 0.0)
            logger.info("iteration %d: line search failed (%d in a row)", k, rejected)
            if method == "exact" or rejected >= MAX_REJECTED_STEPS:
                break
            continue

        rejected = 0
        if np.any(np.abs(t - alpha * step) > T_CLAMP):
            trace.clamped = True
        decrease = loss - new_loss
        update_norm = float(np.linalg.norm(candidate - t))
        t, loss = candidate, new_loss
        trace.append(loss, alpha, update_norm)
        logger.debug("iteration %d: loss %.10g, alpha %g", k, loss, alpha)
        if decrease < tol * (1.0 + abs(loss)):
            trace.converged = True
            break
    return t, trace


# ============================================
# IRLS FOR L1
# ============================================

def huber_edges(r, eps):
    """|r| above eps, r^2 / (2 eps) + eps / 2 below (smoothed absolute value)."""
    r = np.abs(r)
    return np.where(r >= eps, r, r * r / (2.0 * eps) + 0.5 * eps)


def irls_target(y, normalization="printed"):
    """Signal the data term is centred on: y / 2 for the printed recursion, y otherwise."""
    if normalization not in NORMALIZATIONS:
        raise ParameterError(f"normalization must be one of {NORMALIZATIONS}")
    return 0.5 * y if normalization == "printed" else y


def irls_objective(g, y, z, mu, eps, normalization="printed"):
    """mu ||target - z||^2 + sum_e huber((B z)_e, eps); nonincreasing along exact IRLS."""
    target = irls_target(np.asarray(y, dtype=float), normalization)
    return float(mu * np.sum((target - z) ** 2) + np.sum(huber_edges(incidence_apply(g, z), eps)))


def irls_l1(g, y, mu, method="exact", n_forests=20, seed=None, threads=1, eps=None,
            max_iters=IRLS_MAX_ITERS, tol=IRLS_TOL, z0=None, normalization="printed"):
    """
    IRLS for an l1 penalty on edge differences.

    Each iterate is z_{k+1} = (2 mu I + B'M_k B)^-1 mu y with
    M_k = diag(1 / max(|B z_k|, eps)); B'M_k B is the Laplacian of the graph
    with weights w_e / max(|B z_k|_e, eps), so each update smooths y / 2 with
    scalar q = 2 mu on that graph. normalization="balanced" smooths y instead,
    i.e. (mu I + B'M_k B / 2)^-1 mu y.

    eps defaults to 1e-8 times the median initial |B z| (at least 1e-12).
    Returns (z, IterateTrace) with the smoothed objective as loss.
    """
    y = as_signal(g, y)
    if y.ndim != 1:
        raise ParameterError("irls_l1 takes a single signal")
    if mu <= 0:
        raise ParameterError(f"mu must be positive, got {mu}")
    if method not in ("exact", "bar"):
        raise ParameterError(f"method must be 'exact' or 'bar', got {method!r}")
    source = irls_target(y, normalization)

    z = y.copy() if z0 is None else as_signal(g, z0).copy()
    _, _, weights = g.edge_list
    if eps is None:
        initial = np.abs(incidence_apply(g, z))
        scale = float(np.median(initial)) if initial.size else 0.0
        eps = max(IRLS_EPS_RELATIVE * scale, IRLS_EPS_FLOOR)
    elif eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")

    q = DiagQ.of(2.0 * mu, g.n)
    trace = IterateTrace(initial_loss=irls_objective(g, y, z, mu, eps, normalization))
    children = seed_sequence(seed).spawn(max_iters)

    for k in range(max_iters):
        edge_values = np.abs(incidence_apply(g, z))
        reweighted = g.reweighted(weights / np.maximum(edge_values, eps))
        if method == "exact":
            updated = exact_smooth(reweighted, q, source)
        else:
            updated = estimate_bar(reweighted, q, source, n_forests, seed=children[k], threads=threads).values
        update_norm = float(np.linalg.norm(updated - z))
        z = updated
        trace.append(irls_objective(g, y, z, mu, eps, normalization), 1.0, update_norm)
        if update_norm < tol * (1.0 + np.linalg.norm(z)):
            trace.converged = True
            break
    return z, trace


# ============================================
# METRICS
# ============================================

def psnr(x, x_ref, peak=1.0):
    """10 log10(peak^2 n / ||x - x_ref||^2); +inf for identical signals."""
    x = np.asarray(x, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    if x.shape != x_ref.shape:
        raise ParameterError(f"shape mismatch {x.shape} vs {x_ref.shape}")
    error = float(np.sum((x - x_ref) ** 2))
    if error == 0.0:
        return np.inf
    return float(10.0 * np.log10(peak ** 2 * x.size / error))


def accuracy(result, ground_truth):
    """Share of correctly assigned unlabeled nodes (all nodes if every node is labeled)."""
    ground_truth = np.asarray(ground_truth, dtype=np.int64)
    if ground_truth.size != result.assigned.size:
        raise ParameterError("ground truth length does not match the result")
    mask = np.ones(ground_truth.size, dtype=bool)
    mask[result.labeled] = False
    if not mask.any():
        mask[:] = True
    return float(np.mean(result.assigned[mask] == ground_truth[mask]))


def constant_classifier_accuracy(ground_truth, labeled):
    """Accuracy of predicting the most frequent class of the unlabeled nodes."""
    ground_truth = np.asarray(ground_truth, dtype=np.int64)
    mask = np.ones(ground_truth.size, dtype=bool)
    mask[np.asarray(labeled, dtype=np.int64)] = False
    if not mask.any():
        mask[:] = True
    counts = np.bincount(ground_truth[mask])
    return float(counts.max() / mask.sum())
