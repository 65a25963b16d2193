"""
Compiled inner loops of the forest sampler.

All kernels work on the CSR arrays from Graph.walk_arrays and use numba's
per-thread random state, seeded once per block of forests. They release the
GIL, so blocks can run on a thread pool.
"""

import numpy as np
from numba import njit

NO_SUCCESSOR = -1


@njit(cache=True, nogil=True)
def walk_forest(indptr, indices, cumulative, degree, q, absorbing, nxt, in_forest, budget):
    """
    One rooted spanning forest by absorbed loop-erased random walks.

    Walks start from every node in index order. At node u one uniform draw on
    [0, q_u + d_u) either absorbs (u becomes a root) or picks the neighbour
    whose cumulative-weight slot contains it. nxt is overwritten on revisits,
    which erases loops. Returns the number of draws, or -1 past the budget.
    """
    n = degree.shape[0]
    for i in range(n):
        nxt[i] = NO_SUCCESSOR
        in_forest[i] = absorbing[i]

    steps = 0
    for i in range(n):
        u = i
        while not in_forest[u]:
            steps += 1
            if steps > budget:
                return -1
            r = np.random.random() * (q[u] + degree[u])
            if r < q[u]:
                in_forest[u] = True
                nxt[u] = NO_SUCCESSOR
            else:
                start = indptr[u]
                stop = indptr[u + 1]
                k = start + np.searchsorted(cumulative[start:stop], r - q[u], "right")
                if k >= stop:
                    k = stop - 1
                nxt[u] = indices[k]
                u = indices[k]

        u = i
        while not in_forest[u]:
            in_forest[u] = True
            u = nxt[u]
    return steps


@njit(cache=True, nogil=True)
def label_trees(nxt, q, absorbing, root_of, tree_id, qmass, path):
    """
    Fill root_of, tree_id and per-tree q-mass from a successor array.

    Trees are numbered by increasing root index. A tree whose root is an
    absorbing node gets infinite mass. Returns the number of trees.
    """
    n = nxt.shape[0]
    n_trees = 0
    for i in range(n):
        root_of[i] = -1
        if nxt[i] < 0:
            tree_id[i] = n_trees
            qmass[n_trees] = np.inf if absorbing[i] else 0.0
            n_trees += 1

    for i in range(n):
        if root_of[i] >= 0:
            continue
        u = i
        length = 0
        while nxt[u] >= 0 and root_of[u] < 0:
            path[length] = u
            length += 1
            u = nxt[u]
        r = u if nxt[u] < 0 else root_of[u]
        root_of[u] = r
        for j in range(length):
            root_of[path[j]] = r

    for i in range(n):
        r = root_of[i]
        t = tree_id[r]
        tree_id[i] = t
        if not absorbing[r]:
            qmass[t] += q[i]
    return n_trees


@njit(cache=True, nogil=True)
def forest_block(indptr, indices, cumulative, degree, q, absorbing, seed, budget,
                 nxt_out, root_out, steps_out):
    """Sample len(steps_out) forests into preallocated rows. False on budget overrun."""
    np.random.seed(seed)
    n = degree.shape[0]
    in_forest = np.empty(n, np.bool_)
    tree_id = np.empty(n, np.int64)
    qmass = np.empty(n)
    path = np.empty(n, np.int64)
    for k in range(steps_out.shape[0]):
        s = walk_forest(indptr, indices, cumulative, degree, q, absorbing,
                        nxt_out[k], in_forest, budget)
        steps_out[k] = s
        if s < 0:
            return False
        label_trees(nxt_out[k], q, absorbing, root_out[k], tree_id, qmass, path)
    return True


@njit(cache=True, nogil=True)
def ensemble_block(indptr, indices, cumulative, degree, q, absorbing, y, seed, count, budget):
    """
    Sample `count` forests and accumulate, per node and column of y:
    running mean and M2 of the root-value estimator and of the tree-average
    estimator, plus running means of 1{root(i) = i} and q_i / tree q-mass.
    """
    np.random.seed(seed)
    n = degree.shape[0]
    c = y.shape[1]

    nxt = np.empty(n, np.int64)
    in_forest = np.empty(n, np.bool_)
    root_of = np.empty(n, np.int64)
    tree_id = np.empty(n, np.int64)
    qmass = np.empty(n)
    path = np.empty(n, np.int64)
    tree_sum = np.zeros((n, c))

    tilde_mean = np.zeros((n, c))
    tilde_m2 = np.zeros((n, c))
    bar_mean = np.zeros((n, c))
    bar_m2 = np.zeros((n, c))
    diag_tilde = np.zeros(n)
    diag_bar = np.zeros(n)
    roots = np.zeros(count, np.int64)
    steps = np.zeros(count, np.int64)

    for k in range(count):
        s = walk_forest(indptr, indices, cumulative, degree, q, absorbing, nxt, in_forest, budget)
        steps[k] = s
        if s < 0:
            return False, tilde_mean, tilde_m2, bar_mean, bar_m2, diag_tilde, diag_bar, roots, steps
        n_trees = label_trees(nxt, q, absorbing, root_of, tree_id, qmass, path)
        roots[k] = n_trees

        for t in range(n_trees):
            for j in range(c):
                tree_sum[t, j] = 0.0
        for i in range(n):
            if absorbing[root_of[i]]:
                continue
            t = tree_id[i]
            for j in range(c):
                tree_sum[t, j] += q[i] * y[i, j]

        inv = 1.0 / (k + 1)
        for i in range(n):
            r = root_of[i]
            t = tree_id[i]
            absorbed = absorbing[r]
            for j in range(c):
                xt = y[r, j]
                xb = xt if absorbed else tree_sum[t, j] / qmass[t]
                delta = xt - tilde_mean[i, j]
                tilde_mean[i, j] += delta * inv
                tilde_m2[i, j] += delta * (xt - tilde_mean[i, j])
                delta = xb - bar_mean[i, j]
                bar_mean[i, j] += delta * inv
                bar_m2[i, j] += delta * (xb - bar_mean[i, j])
            hit = 1.0 if r == i else 0.0
            share = hit if absorbed else q[i] / qmass[t]
            diag_tilde[i] += (hit - diag_tilde[i]) * inv
            diag_bar[i] += (share - diag_bar[i]) * inv

    return True, tilde_mean, tilde_m2, bar_mean, bar_m2, diag_tilde, diag_bar, roots, steps
