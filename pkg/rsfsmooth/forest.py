"""
Random spanning forests.

A forest is sampled by absorbed loop-erased random walks: each node u is
linked to an absorbing sink with weight q_u, walks stop in the sink (u becomes
a root) or in the part of the forest already built. The resulting forest has
probability proportional to prod_{roots} q_r * prod_{edges} w.

This module provides:
1. DiagQ: per-node absorption weights
2. sample_forest / sample_forests: single forests and successor/root arrays
3. sample_ensemble: streaming estimator statistics over N forests
4. Dense-oracle identities for the root process and the walk cost
5. enumerate_forests: brute-force forest weights for tiny graphs

Random streams: forests are drawn in blocks of BLOCK_SIZE; block b is seeded
with word b of a numpy SeedSequence, so any forest index maps to the same
stream whatever the thread count.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapabilityError, DimensionError, ParameterError, StepBudgetError
from .graph import as_signal

logger = logging.getLogger(__name__)

STEP_BUDGET = 10**9        # RandomSuccessor draws per forest before aborting
BLOCK_SIZE = 64            # forests per RNG stream
EMPIRICAL_MARGINAL_MAX_N = 50
ENUMERATION_MAX_N = 8


# ============================================
# ABSORPTION WEIGHTS
# ============================================

@dataclass(frozen=True, eq=False)
class DiagQ:
    """
    Diagonal of Q: nonnegative absorption weight per node.

    inf marks an absorbing node (a root in every forest, walks stop on entry).
    Build with DiagQ.of(q, n); a scalar q means q_i = q for every node.
    """

    values: np.ndarray

    @classmethod
    def of(cls, q, n):
        if isinstance(q, DiagQ):
            if q.n != n:
                raise DimensionError(f"q has {q.n} entries, graph has {n} nodes")
            return q
        values = np.asarray(q, dtype=float)
        if values.ndim == 0:
            values = np.full(n, float(values))
        if values.shape != (n,):
            raise DimensionError(f"q has shape {values.shape}, expected ({n},)")
        if np.isnan(values).any() or (values < 0).any():
            raise ParameterError("q must be nonnegative everywhere")
        if not (values > 0).any():
            raise ParameterError("q is zero everywhere; at least one q_i must be positive")
        values = values.copy()
        values.flags.writeable = False
        return cls(values)

    @property
    def n(self):
        return self.values.size

    @property
    def absorbing(self):
        return np.isinf(self.values)

    @property
    def is_uniform(self):
        return bool(np.all(self.values == self.values[0]))

    @property
    def scalar(self):
        """The common value of a uniform q."""
        if not self.is_uniform:
            raise ParameterError("q is not uniform")
        return float(self.values[0])

    def require_finite(self):
        if self.absorbing.any():
            raise ParameterError("infinite q is only supported by the forest sampler")
        return self

    def check_reachable(self, g):
        """Every connected component of g must hold a node with q_i > 0."""
        labels = g.components()
        covered = np.zeros(labels.max() + 1, dtype=bool)
        covered[labels[self.values > 0]] = True
        if not covered.all():
            bad = int(np.flatnonzero(~covered)[0])
            node = int(np.flatnonzero(labels == bad)[0])
            raise ParameterError(
                f"the component containing node {node} has q = 0 everywhere; "
                "walks there can never be absorbed"
            )


def _graph_and_q(g, q):
    q = DiagQ.of(q, g.n)
    q.check_reachable(g)
    return q


# ============================================
# FORESTS
# ============================================

@dataclass(frozen=True, eq=False)
class Forest:
    """
    One rooted spanning forest.

    next[i] is the successor of i towards its root (-1 for roots), root_of[i]
    the root of i's tree, tree_id[i] the tree index (trees numbered by
    increasing root), tree_qmass[t] the sum of q over tree t.
    """

    next: np.ndarray
    root_of: np.ndarray
    tree_id: np.ndarray
    roots: np.ndarray
    tree_qmass: np.ndarray
    walk_steps: int

    @property
    def n_roots(self):
        return self.roots.size

    def to_csv(self, path):
        """Debug dump with header node,next,root,tree_id."""
        with open(path, "w") as fh:
            fh.write("node,next,root,tree_id\n")
            for i, (nx_, r, t) in enumerate(
                zip(self.next.tolist(), self.root_of.tolist(), self.tree_id.tolist())
            ):
                fh.write(f"{i},{nx_},{r},{t}\n")


@dataclass(frozen=True, eq=False)
class ForestBatch:
    """Successor and root arrays of N forests, one row per forest."""

    next: np.ndarray
    root_of: np.ndarray
    walk_steps: np.ndarray

    @property
    def count(self):
        return self.walk_steps.size

    @property
    def root_counts(self):
        return (self.next < 0).sum(axis=1)


def _block_plan(n_forests, first_block=0):
    if n_forests < 1:
        raise ParameterError(f"need at least one forest, got {n_forests}")
    n_blocks = -(-n_forests // BLOCK_SIZE)
    counts = [BLOCK_SIZE] * (n_blocks - 1) + [n_forests - BLOCK_SIZE * (n_blocks - 1)]
    return list(range(first_block, first_block + n_blocks)), counts


def seed_sequence(seed):
    """Accept None, an int or an already spawned SeedSequence."""
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def block_seeds(seed, first_block, n_blocks):
    """One 32-bit stream seed per block, stable under changes of n_blocks."""
    sequence = seed_sequence(seed)
    words = sequence.generate_state(first_block + n_blocks, dtype=np.uint32)
    return [int(word) for word in words[first_block:]]


def _run_blocks(task, jobs, threads):
    if threads is None or threads <= 1 or len(jobs) == 1:
        return [task(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: task(*job), jobs))


def _budget_error(g):
    return StepBudgetError(
        f"a walk on {g.name} exceeded {STEP_BUDGET} steps; q is too small for this graph"
    )


def sample_forests(g, q, n_forests, seed=None, threads=1, first_block=0):
    """Sample N forests, returning their successor and root arrays."""
    q = _graph_and_q(g, q)
    indptr, indices, cumulative, degree = g.walk_arrays
    blocks, counts = _block_plan(n_forests, first_block)
    seeds = block_seeds(seed, first_block, len(blocks))

    nxt = np.empty((n_forests, g.n), dtype=np.int64)
    root_of = np.empty((n_forests, g.n), dtype=np.int64)
    steps = np.empty(n_forests, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)])

    def task(index, block_seed):
        lo, hi = offsets[index], offsets[index + 1]
        return _kernels.forest_block(
            indptr, indices, cumulative, degree, q.values, q.absorbing, block_seed,
            STEP_BUDGET, nxt[lo:hi], root_of[lo:hi], steps[lo:hi],
        )

    ok = _run_blocks(task, list(enumerate(seeds)), threads)
    if not all(ok):
        raise _budget_error(g)
    return ForestBatch(nxt, root_of, steps)


def sample_forest(g, q, seed=None):
    """Sample one forest (the first forest of sample_forests with the same seed)."""
    q = _graph_and_q(g, q)
    batch = sample_forests(g, q, 1, seed=seed)
    nxt, root_of = batch.next[0], batch.root_of[0]
    roots = np.flatnonzero(nxt < 0)
    tree_index = np.full(g.n, -1, dtype=np.int64)
    tree_index[roots] = np.arange(roots.size)
    tree_id = tree_index[root_of]
    finite_q = np.where(q.absorbing, 0.0, q.values)
    tree_qmass = np.bincount(tree_id, weights=finite_q, minlength=roots.size)
    tree_qmass[q.absorbing[roots]] = np.inf
    return Forest(nxt, root_of, tree_id, roots, tree_qmass, int(batch.walk_steps[0]))


# ============================================
# ENSEMBLES
# ============================================

@dataclass(frozen=True, eq=False)
class ForestEnsemble:
    """
    Streaming statistics over N forests for an n x C signal.

    tilde_* track the root-value estimator y[root(i)], bar_* the tree
    q-weighted average; *_mean are running means, *_m2 sums of squared
    deviations. diag_tilde / diag_bar are running means of 1{root(i) = i} and
    q_i / tree_qmass, whose expectations are the diagonal of K.
    """

    count: int
    tilde_mean: np.ndarray
    tilde_m2: np.ndarray
    bar_mean: np.ndarray
    bar_m2: np.ndarray
    diag_tilde: np.ndarray
    diag_bar: np.ndarray
    root_counts: np.ndarray
    walk_steps: np.ndarray

    def mean(self, which):
        return self._pick(which, self.tilde_mean, self.bar_mean)

    def variance(self, which):
        """Per-node sample variance of the single-forest estimates (0 for N = 1)."""
        m2 = self._pick(which, self.tilde_m2, self.bar_m2)
        return m2 / max(self.count - 1, 1)

    def diagonal(self, which):
        return self._pick(which, self.diag_tilde, self.diag_bar)

    @property
    def mean_root_count(self):
        return float(self.root_counts.mean())

    @property
    def root_count_variance(self):
        return float(self.root_counts.var(ddof=1)) if self.count > 1 else 0.0

    @property
    def mean_walk_steps(self):
        return float(self.walk_steps.mean())

    @staticmethod
    def _pick(which, tilde, bar):
        if which == "tilde":
            return tilde
        if which == "bar":
            return bar
        raise ParameterError(f"estimator must be 'tilde' or 'bar', got {which!r}")

    def merge(self, other):
        """Combine with an ensemble built from other forests on the same (g, q, y)."""
        if self.tilde_mean.shape != other.tilde_mean.shape:
            raise DimensionError("cannot merge ensembles of different shapes")
        n_a, n_b = self.count, other.count
        total = n_a + n_b
        share = n_b / total

        def mean(a, b):
            return a + (b - a) * share

        def m2(mean_a, mean_b, m2_a, m2_b):
            delta = mean_b - mean_a
            return m2_a + m2_b + delta * delta * (n_a * n_b / total)

        return ForestEnsemble(
            count=total,
            tilde_mean=mean(self.tilde_mean, other.tilde_mean),
            tilde_m2=m2(self.tilde_mean, other.tilde_mean, self.tilde_m2, other.tilde_m2),
            bar_mean=mean(self.bar_mean, other.bar_mean),
            bar_m2=m2(self.bar_mean, other.bar_mean, self.bar_m2, other.bar_m2),
            diag_tilde=mean(self.diag_tilde, other.diag_tilde),
            diag_bar=mean(self.diag_bar, other.diag_bar),
            root_counts=np.concatenate([self.root_counts, other.root_counts]),
            walk_steps=np.concatenate([self.walk_steps, other.walk_steps]),
        )


def sample_ensemble(g, q, y, n_forests, seed=None, threads=1, first_block=0):
    """
    Sample N forests and accumulate both estimators for y (n or n x C).

    All columns of y share the same forests. Blocks are merged in block
    order, so the result does not depend on `threads`.
    """
    q = _graph_and_q(g, q)
    y = as_signal(g, y)
    block = np.ascontiguousarray(y.reshape(g.n, -1))
    if not np.isfinite(block).all():
        raise ParameterError("signal contains non-finite values")
    indptr, indices, cumulative, degree = g.walk_arrays
    blocks, counts = _block_plan(n_forests, first_block)
    seeds = block_seeds(seed, first_block, len(blocks))

    def task(block_seed, count):
        return _kernels.ensemble_block(
            indptr, indices, cumulative, degree, q.values, q.absorbing, block,
            block_seed, count, STEP_BUDGET,
        )

    ensemble = None
    for result in _run_blocks(task, list(zip(seeds, counts)), threads):
        ok, t_mean, t_m2, b_mean, b_m2, d_t, d_b, roots, steps = result
        if not ok:
            raise _budget_error(g)
        part = ForestEnsemble(roots.size, t_mean, t_m2, b_mean, b_m2, d_t, d_b, roots, steps)
        ensemble = part if ensemble is None else ensemble.merge(part)

    logger.debug(
        "%d forests on %s: mean roots %.3f, mean walk steps %.1f",
        ensemble.count, g.name, ensemble.mean_root_count, ensemble.mean_walk_steps,
    )
    return ensemble


# ============================================
# ORACLES AND DIAGNOSTICS
# ============================================

def expected_roots_oracle(oracle):
    """Mean and variance of the root count: tr(K) and tr(K - K^2)."""
    K = oracle.K
    trace = float(np.trace(K))
    return trace, trace - float(np.sum(K * K.T))


def expected_roots_spectral(spectrum, q):
    """Same moments for scalar q from the Laplacian spectrum."""
    lam = np.clip(spectrum.eigenvalues, 0.0, None)
    ratio = q / (q + lam)
    return float(ratio.sum()), float(np.sum(lam * q / (q + lam) ** 2))


def walk_cost_oracle(g, q, oracle):
    """Expected number of walk draws per forest: tr((L + Q)^-1 (D + Q))."""
    q = DiagQ.of(q, g.n).require_finite()
    return float(np.sum(np.diag(oracle.inverse) * (np.asarray(g.degree) + q.values)))


def walk_cost_bound(g, q):
    """Upper bound n + sum(d) / q on the walk cost for scalar q (n + 2|E|/q unweighted)."""
    q = DiagQ.of(q, g.n).scalar
    return g.n + float(np.sum(g.degree)) / q


def root_marginal_empirical(g, q, n_forests, seed=None, threads=1):
    """Empirical P(root(i) = j) as an n x n matrix (n <= 50)."""
    if g.n > EMPIRICAL_MARGINAL_MAX_N:
        raise CapabilityError(
            f"empirical root marginals limited to n <= {EMPIRICAL_MARGINAL_MAX_N}"
        )
    batch = sample_forests(g, q, n_forests, seed=seed, threads=threads)
    cells = np.arange(g.n)[None, :] * g.n + batch.root_of
    counts = np.bincount(cells.ravel(), minlength=g.n * g.n)
    return counts.reshape(g.n, g.n) / n_forests


def enumerate_forests(g, q):
    """
    All rooted spanning forests of a tiny graph with their unnormalized
    probabilities prod_{roots} q_r * prod_{i not root} w(i, next[i]).

    Returns a list of (next tuple, weight) with positive weight.
    """
    if g.n > ENUMERATION_MAX_N:
        raise CapabilityError(f"forest enumeration limited to n <= {ENUMERATION_MAX_N}")
    q = DiagQ.of(q, g.n).require_finite()

    choices = []
    for i in range(g.n):
        nbrs, weights = g.neighbors(i)
        options = [(-1, q.values[i])] if q.values[i] > 0 else []
        options += list(zip(nbrs.tolist(), weights.tolist()))
        choices.append(options)

    forests = []
    for combo in itertools.product(*choices):
        nxt = tuple(int(target) for target, _ in combo)
        if _has_cycle(nxt):
            continue
        forests.append((nxt, float(np.prod([weight for _, weight in combo]))))
    return forests


def _has_cycle(nxt):
    n = len(nxt)
    for start in range(n):
        u = start
        for _ in range(n + 1):
            if nxt[u] < 0:
                break
            u = nxt[u]
        else:
            return True
    return False
