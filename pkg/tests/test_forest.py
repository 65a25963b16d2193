"""
Forest sampler: structure, distribution, root moments, marginals, walk cost
and reproducibility.

Monte Carlo checks use 4-sigma bands from the exact moments, with fixed
seeds.
"""

from collections import Counter, defaultdict

import networkx as nx
import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import path_graph, random_connected_graph
from rsfsmooth.errors import CapabilityError, DimensionError, ParameterError
from rsfsmooth.forest import (
    DiagQ,
    block_seeds,
    enumerate_forests,
    expected_roots_oracle,
    expected_roots_spectral,
    root_marginal_empirical,
    sample_ensemble,
    sample_forest,
    sample_forests,
    walk_cost_bound,
    walk_cost_oracle,
)
from rsfsmooth.graph import Graph, laplacian_spectrum
from rsfsmooth.smoother import DenseOracle


# every connected graph on 2 to 4 nodes, with its atlas index
SMALL_CONNECTED = [
    (index, atlas) for index, atlas in enumerate(nx.graph_atlas_g())
    if 2 <= atlas.number_of_nodes() <= 4 and nx.is_connected(atlas)
]


def forest_frequencies(batch):
    counts = Counter(map(tuple, batch.next.tolist()))
    return {key: value / batch.count for key, value in counts.items()}


class TestDiagQ:

    def test_scalar_expands(self):
        q = DiagQ.of(2.5, 4)
        np.testing.assert_array_equal(q.values, np.full(4, 2.5))
        assert q.is_uniform and q.scalar == 2.5

    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            DiagQ.of([1.0, -0.1], 2)

    def test_rejects_all_zero(self):
        with pytest.raises(ParameterError):
            DiagQ.of(0.0, 3)

    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionError):
            DiagQ.of([1.0, 1.0], 3)

    def test_component_without_absorption(self):
        g = Graph.from_edges(4, [0, 2], [1, 3])
        with pytest.raises(ParameterError, match="component"):
            sample_forest(g, [1.0, 0.0, 0.0, 0.0], seed=0)

    def test_scalar_and_array_agree(self, small_graph):
        y = np.arange(small_graph.n, dtype=float)
        a = sample_ensemble(small_graph, 0.7, y, 100, seed=5)
        b = sample_ensemble(small_graph, np.full(small_graph.n, 0.7), y, 100, seed=5)
        np.testing.assert_array_equal(a.bar_mean, b.bar_mean)
        np.testing.assert_array_equal(a.root_counts, b.root_counts)


class TestForestStructure:

    def test_invariants(self):
        g = random_connected_graph(20, seed=11)
        for seed in range(20):
            forest = sample_forest(g, 0.3, seed=seed)
            assert forest.n_roots >= 1
            for i in range(g.n):
                u = i
                for _ in range(g.n):
                    if forest.next[u] < 0:
                        break
                    u = forest.next[u]
                assert forest.next[u] < 0
                assert forest.root_of[i] == u
            np.testing.assert_array_equal(forest.root_of[forest.roots], forest.roots)
            assert np.all(forest.tree_id[forest.roots] == np.arange(forest.n_roots))

    def test_tree_qmass(self):
        g = random_connected_graph(10, seed=12)
        q = np.linspace(0.1, 1.0, 10)
        forest = sample_forest(g, q, seed=1)
        expected = np.bincount(forest.tree_id, weights=q)
        np.testing.assert_allclose(forest.tree_qmass, expected)

    def test_huge_q_all_roots(self):
        g = random_connected_graph(10, seed=13)
        forest = sample_forest(g, 1e12, seed=0)
        assert forest.n_roots == 10

    def test_zero_q_node_never_root(self, two_node):
        batch = sample_forests(two_node, [0.0, 1.0], 2000, seed=3)
        assert np.all(batch.next[:, 0] == 1)
        assert np.all(batch.root_of == 1)

    def test_csv_dump(self, tmp_path, path3):
        forest = sample_forest(path3, 1.0, seed=0)
        forest.to_csv(tmp_path / "forest.csv")
        lines = (tmp_path / "forest.csv").read_text().splitlines()
        assert lines[0] == "node,next,root,tree_id"
        assert len(lines) == 4


class TestForestDistribution:

    def test_two_node_outcomes(self, two_node):
        batch = sample_forests(two_node, 1.0, 100_000, seed=0)
        freq = forest_frequencies(batch)
        band = 4 * np.sqrt((1 / 3) * (2 / 3) / batch.count)
        for outcome in [(-1, -1), (-1, 0), (1, -1)]:
            assert abs(freq.get(outcome, 0.0) - 1 / 3) < band

    @pytest.mark.parametrize("n,seed", [(3, 0), (3, 1), (4, 2), (4, 3)])
    def test_matches_enumeration(self, n, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(n, p=0.7, seed=seed)
        q = rng.uniform(0.2, 1.5, n)
        weights = enumerate_forests(g, q)
        total = sum(w for _, w in weights)
        batch = sample_forests(g, q, 1_000_000, seed=seed)
        freq = forest_frequencies(batch)
        for outcome, weight in weights:
            p = weight / total
            band = 4 * np.sqrt(p * (1 - p) / batch.count) + 1e-12
            assert abs(freq.get(outcome, 0.0) - p) < band
        assert set(freq) <= {outcome for outcome, _ in weights}

    @pytest.mark.parametrize("index,atlas", SMALL_CONNECTED,
                             ids=[f"atlas{index}" for index, _ in SMALL_CONNECTED])
    def test_every_small_connected_graph(self, index, atlas):
        rng = np.random.default_rng(index)
        u, v = np.array(list(atlas.edges())).T
        g = Graph.from_edges(atlas.number_of_nodes(), u, v, rng.uniform(0.5, 2.0, u.size))
        q = rng.uniform(0.2, 1.5, g.n)
        weights = enumerate_forests(g, q)
        total = sum(w for _, w in weights)
        batch = sample_forests(g, q, 200_000, seed=index)
        counts = Counter(map(tuple, batch.next.tolist()))
        assert set(counts) <= {outcome for outcome, _ in weights}
        observed = np.array([counts.get(outcome, 0) for outcome, _ in weights], dtype=float)
        expected = np.array([w / total for _, w in weights]) * batch.count
        assert chisquare(observed, expected).pvalue > 1e-6

    @pytest.mark.parametrize("g", [
        Graph.from_edges(3, [0, 0, 1], [1, 2, 2], [1.0, 0.5, 2.0], name="triangle"),
        Graph.from_edges(4, [0, 0, 0, 1], [1, 2, 3, 2], [1.5, 0.7, 1.0, 1.2], name="kite"),
    ], ids=lambda g: g.name)
    def test_root_given_partition(self, g):
        # within a fixed tree the root is node i with probability q_i / q(tree)
        q = np.array([0.3, 1.2, 0.6, 0.9])[:g.n]
        batch = sample_forests(g, q, 200_000, seed=7)
        counts = defaultdict(Counter)
        for root_of in batch.root_of.tolist():
            trees = defaultdict(list)
            for node, root in enumerate(root_of):
                trees[root].append(node)
            partition = frozenset(tuple(members) for members in trees.values())
            for root, members in trees.items():
                counts[partition, tuple(members)][root] += 1

        checked = 0
        for (_, members), roots in counts.items():
            seen = sum(roots.values())
            if len(members) < 2 or seen < 1000:
                continue
            mass = q[list(members)].sum()
            for node in members:
                p = q[node] / mass
                band = 4 * np.sqrt(p * (1 - p) / seen)
                assert abs(roots[node] / seen - p) < band
            checked += 1
        assert checked >= 4

    def test_enumeration_normalizer(self, two_node):
        # Z = det(L + Q) for unit q on the 2-node graph: q^2 + 2 q w = 3
        total = sum(w for _, w in enumerate_forests(two_node, 1.0))
        assert abs(total - 3.0) < 1e-12

    def test_enumeration_limit(self):
        with pytest.raises(CapabilityError):
            enumerate_forests(path_graph(9), 1.0)


class TestRootMoments:

    def test_two_node_mean(self, two_node):
        oracle = DenseOracle.build(two_node, 1.0)
        mean, _ = expected_roots_oracle(oracle)
        assert abs(mean - 4 / 3) < 1e-12
        spectral_mean, _ = expected_roots_spectral(laplacian_spectrum(two_node), 1.0)
        assert abs(spectral_mean - 4 / 3) < 1e-12

    def test_limits(self):
        g = random_connected_graph(10, seed=14)
        spectrum = laplacian_spectrum(g)
        assert abs(expected_roots_spectral(spectrum, 1e12)[0] - 10) < 1e-6
        assert abs(expected_roots_spectral(spectrum, 1e-12)[0] - 1) < 1e-6

    def test_spectral_matches_dense(self):
        g = random_connected_graph(12, seed=15)
        oracle = DenseOracle.build(g, 0.8)
        np.testing.assert_allclose(
            expected_roots_spectral(laplacian_spectrum(g), 0.8), expected_roots_oracle(oracle)
        )

    @pytest.mark.parametrize("seed", range(10))
    def test_empirical_moments(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(5, 31))
        g = random_connected_graph(n, p=0.2, seed=100 + seed)
        q = float(rng.uniform(0.1, 2.0))
        mean, var = expected_roots_oracle(DenseOracle.build(g, q))
        ensemble = sample_ensemble(g, q, np.zeros(n), 100_000, seed=seed)
        N = ensemble.count
        assert abs(ensemble.mean_root_count - mean) < 4 * np.sqrt(var / N)
        # sample variance: relative standard error about sqrt(2 / N) for near-normal counts
        assert abs(ensemble.root_count_variance - var) < 4 * var * np.sqrt(3.0 / N) + 1e-9


class TestRootMarginals:

    def test_two_node(self, two_node):
        marginals = root_marginal_empirical(two_node, 1.0, 100_000, seed=1)
        K = np.array([[2, 1], [1, 2]]) / 3
        band = 4 * np.sqrt(K * (1 - K) / 100_000)
        assert np.all(np.abs(marginals - K) < band)
        np.testing.assert_allclose(marginals.sum(axis=1), 1.0)

    @pytest.mark.parametrize("uniform", [True, False])
    def test_matches_kernel(self, uniform):
        g = random_connected_graph(12, p=0.3, seed=16)
        q = 0.6 if uniform else np.random.default_rng(2).uniform(0.1, 2.0, 12)
        K = DenseOracle.build(g, q).K
        N = 100_000
        marginals = root_marginal_empirical(g, q, N, seed=2)
        band = 4 * np.sqrt(K * (1 - K) / N) + 1e-12
        assert np.all(np.abs(marginals - K) < band)

    def test_diagonal_sum_is_root_count(self):
        g = random_connected_graph(10, seed=17)
        batch = sample_forests(g, 0.5, 500, seed=3)
        hits = (batch.root_of == np.arange(g.n)).sum(axis=1)
        np.testing.assert_array_equal(hits, batch.root_counts)

    def test_size_limit(self):
        with pytest.raises(CapabilityError):
            root_marginal_empirical(path_graph(60), 1.0, 10)


class TestWalkCost:

    def test_two_node_oracle(self, two_node):
        oracle = DenseOracle.build(two_node, 1.0)
        assert abs(walk_cost_oracle(two_node, 1.0, oracle) - 8 / 3) < 1e-12

    def test_large_q_limit(self):
        g = random_connected_graph(9, seed=18)
        oracle = DenseOracle.build(g, 1e9)
        assert abs(walk_cost_oracle(g, 1e9, oracle) - 9) < 1e-6

    @pytest.mark.parametrize("q", [0.05, 0.5, 3.0])
    def test_empirical_and_bound(self, q):
        g = random_connected_graph(15, p=0.3, seed=19)
        expected = walk_cost_oracle(g, q, DenseOracle.build(g, q))
        ensemble = sample_ensemble(g, q, np.zeros(g.n), 20_000, seed=4)
        assert abs(ensemble.mean_walk_steps - expected) < 0.05 * expected
        assert expected <= walk_cost_bound(g, q) + 1e-9


class TestReproducibility:

    def test_threads_do_not_change_results(self):
        g = random_connected_graph(25, seed=20)
        y = np.random.default_rng(0).standard_normal((25, 2))
        one = sample_ensemble(g, 0.4, y, 300, seed=9, threads=1)
        four = sample_ensemble(g, 0.4, y, 300, seed=9, threads=4)
        np.testing.assert_array_equal(one.bar_mean, four.bar_mean)
        np.testing.assert_array_equal(one.tilde_m2, four.tilde_m2)
        np.testing.assert_array_equal(one.walk_steps, four.walk_steps)

    def test_forests_match_between_samplers(self):
        g = random_connected_graph(10, seed=21)
        batch = sample_forests(g, 0.5, 5, seed=7, threads=2)
        single = sample_forest(g, 0.5, seed=7)
        np.testing.assert_array_equal(batch.next[0], single.next)

    def test_block_seeds_are_prefix_stable(self):
        assert block_seeds(3, 0, 5)[2:] == block_seeds(3, 2, 3)

    def test_merge_equals_longer_run(self):
        g = random_connected_graph(10, seed=22)
        y = np.arange(10.0)
        whole = sample_ensemble(g, 0.5, y, 128, seed=6)
        first = sample_ensemble(g, 0.5, y, 64, seed=6)
        second = sample_ensemble(g, 0.5, y, 64, seed=6, first_block=1)
        merged = first.merge(second)
        np.testing.assert_allclose(merged.bar_mean, whole.bar_mean, atol=1e-12)
        np.testing.assert_allclose(merged.tilde_m2, whole.tilde_m2, atol=1e-10)
        np.testing.assert_array_equal(merged.root_counts, whole.root_counts)
