"""
SURE and leave-one-out scores, exact and forest-based, and the grid search.

2-node graph, w = 1, q = 1, y = (0, 1), sigma2 = 0.1:
    SURE = -0.2 + 2/9 + 0.2 * 4/3
"""

import numpy as np
import pytest

from conftest import path_graph, random_connected_graph, ring_graph
from rsfsmooth.errors import DegenerateSmootherError, ParameterError, TuningError
from rsfsmooth.forest import sample_ensemble
from rsfsmooth.graph import lowest_eigenvectors
from rsfsmooth.smoother import DenseOracle, variance_oracle
from rsfsmooth.tuning import (
    DEFAULT_MU_GRID,
    grid_search,
    loocv_exact,
    loocv_rsf,
    parse_grid,
    select_best,
    sure_exact,
    sure_rsf,
    true_risk,
)

Y2 = np.array([0.0, 1.0])


class TestParseGrid:

    def test_default_sweep(self):
        grid = parse_grid("0.5:0.5:5.0")
        np.testing.assert_allclose(grid, DEFAULT_MU_GRID)
        assert grid.size == 10

    def test_comma_list(self):
        np.testing.assert_allclose(parse_grid("0.1,1,10"), [0.1, 1.0, 10.0])

    @pytest.mark.parametrize("text", ["", "a:b:c", "1:0:2", "0,1"])
    def test_bad_grid(self, text):
        with pytest.raises(ParameterError):
            parse_grid(text)


class TestSelectBest:

    def test_ties_go_to_smaller_candidate(self):
        assert select_best([3.0, 1.0, 2.0], [0.5, 0.5, 0.7]) == 1

    def test_skips_infinite(self):
        assert select_best([1.0, 2.0], [np.inf, 4.0]) == 1

    def test_all_degenerate(self):
        with pytest.raises(TuningError):
            select_best([1.0, 2.0], [np.inf, np.inf])


class TestSureExact:

    def test_two_node(self, two_node):
        oracle = DenseOracle.build(two_node, 1.0)
        expected = -0.2 + 2 / 9 + 0.2 * 4 / 3
        assert abs(sure_exact(oracle, Y2, 0.1) - expected) < 1e-12

    def test_zero_noise_is_residual(self, small_graph):
        y = np.arange(8.0)
        oracle = DenseOracle.build(small_graph, 0.5)
        residual = np.sum((y - oracle.apply(y)) ** 2)
        assert abs(sure_exact(oracle, y, 0.0) - residual) < 1e-10

    def test_identity_smoother(self, small_graph):
        oracle = DenseOracle.build(small_graph, 1e12)
        y = np.random.default_rng(0).standard_normal(8)
        assert abs(sure_exact(oracle, y, 0.3) - 8 * 0.3) < 1e-6

    def test_unbiased_for_true_risk(self):
        g = random_connected_graph(20, p=0.2, seed=40)
        oracle = DenseOracle.build(g, 0.8)
        rng = np.random.default_rng(1)
        x = lowest_eigenvectors(g, 3) @ rng.standard_normal(3)
        sigma2 = 0.05
        noise = rng.normal(0.0, np.sqrt(sigma2), size=(20_000, g.n))
        scores = np.array([sure_exact(oracle, x + e, sigma2) for e in noise])
        risk = true_risk(oracle, x, sigma2)
        band = 4 * scores.std() / np.sqrt(scores.size)
        assert abs(scores.mean() - risk) < band


class TestSureRsf:

    def test_constant_signal_matches_exact(self, small_graph):
        y = np.full(8, 2.0)
        oracle = DenseOracle.build(small_graph, 0.5)
        ensemble = sample_ensemble(small_graph, 0.5, y, 200, seed=0)
        # root count only enters through the trace term
        gap = sure_rsf(ensemble, y, 0.0, "bar") - sure_exact(oracle, y, 0.0)
        assert abs(gap) < 1e-12

    def test_all_roots_single_forest(self, small_graph):
        y = np.random.default_rng(2).standard_normal(8)
        ensemble = sample_ensemble(small_graph, 1e12, y, 1, seed=0)
        for which in ("tilde", "bar"):
            assert abs(sure_rsf(ensemble, y, 0.2, which) - 8 * 0.2) < 1e-9

    def test_mean_root_count_estimates_trace(self, small_graph):
        oracle = DenseOracle.build(small_graph, 0.5)
        ensemble = sample_ensemble(small_graph, 0.5, np.zeros(8), 100_000, seed=1)
        trace = np.trace(oracle.K)
        band = 4 * np.sqrt(ensemble.root_count_variance / ensemble.count)
        assert abs(ensemble.mean_root_count - trace) < band

    def test_gap_is_estimator_variance(self, two_node):
        # single-forest bar on the 2-node graph: expected gap y'(K - K^2)y = 1/9
        oracle = DenseOracle.build(two_node, 1.0)
        exact = sure_exact(oracle, Y2, 0.0)
        gaps = [sure_rsf(sample_ensemble(two_node, 1.0, Y2, 1, seed=s), Y2, 0.0, "bar") - exact
                for s in range(10_000)]
        expected = variance_oracle(oracle, Y2, "bar")
        assert abs(np.mean(gaps) - expected) < 0.1 * expected
        assert np.mean(gaps) > 0


class TestLoocv:

    def test_constant_gives_zero(self, small_graph):
        oracle = DenseOracle.build(small_graph, 0.5)
        assert abs(loocv_exact(oracle, np.full(8, 1.3))) < 1e-20

    def test_small_q_limit(self):
        g = path_graph(5)
        y = np.array([0.3, -1.0, 2.0, 0.5, 1.1])
        oracle = DenseOracle.build(g, 1e-7)
        n = 5
        expected = np.mean(((y.mean() - y) / (1 - 1 / n)) ** 2)
        assert abs(loocv_exact(oracle, y) - expected) < 1e-5 * expected

    def test_large_q_is_degenerate(self, small_graph):
        oracle = DenseOracle.build(small_graph, 1e12)
        with pytest.raises(DegenerateSmootherError) as info:
            loocv_exact(oracle, np.arange(8.0))
        assert info.value.node == 0

    def test_labeled_subset(self, small_graph):
        oracle = DenseOracle.build(small_graph, 0.5)
        y = np.arange(8.0)
        K = oracle.K
        nodes = [1, 4, 6]
        expected = np.mean([((K @ y)[i] - y[i]) ** 2 / (1 - K[i, i]) ** 2 for i in nodes])
        assert abs(loocv_exact(oracle, y, nodes) - expected) < 1e-12

    def test_tilde_single_forest_all_roots(self, small_graph):
        ensemble = sample_ensemble(small_graph, 1e12, np.arange(8.0), 1, seed=0)
        with pytest.raises(DegenerateSmootherError):
            loocv_rsf(ensemble, np.arange(8.0), which="tilde")

    def test_bar_constant_gives_zero(self, small_graph):
        y = np.full(8, -0.4)
        ensemble = sample_ensemble(small_graph, 0.5, y, 50, seed=0)
        assert abs(loocv_rsf(ensemble, y, which="bar")) < 1e-20

    @pytest.mark.parametrize("which", ["tilde", "bar"])
    def test_forest_score_converges(self, which):
        g = random_connected_graph(10, p=0.3, seed=41)
        y = np.random.default_rng(3).standard_normal(10)
        exact = loocv_exact(DenseOracle.build(g, 0.6), y)
        ensemble = sample_ensemble(g, 0.6, y, 200_000, seed=5)
        assert abs(loocv_rsf(ensemble, y, which=which) - exact) < 0.02 * exact

    def test_diagonals_converge(self):
        g = random_connected_graph(15, p=0.3, seed=42)
        K = DenseOracle.build(g, 0.4).K
        N = 100_000
        ensemble = sample_ensemble(g, 0.4, np.zeros(15), N, seed=6)
        d = np.diag(K)
        band = 4 * np.sqrt(d * (1 - d) / N)
        assert np.all(np.abs(ensemble.diagonal("tilde") - d) < band)
        assert np.all(np.abs(ensemble.diagonal("bar") - d) < band)


class TestGridSearch:

    def test_single_candidate(self, small_graph):
        result = grid_search(small_graph, np.arange(8.0), [2.0], "sure_exact", sigma2=0.1)
        assert result.best == 2.0

    def test_sure_needs_sigma2(self, small_graph):
        with pytest.raises(ParameterError):
            grid_search(small_graph, np.arange(8.0), [1.0], "sure_exact")

    def test_degenerate_candidates_score_infinite(self, small_graph):
        result = grid_search(small_graph, np.arange(8.0), [1.0, 1e12], "loocv_exact")
        assert np.isinf(result.scores[1]) and result.best == 1.0
        assert result.fits[1] is None

    def test_all_degenerate(self, small_graph):
        with pytest.raises(TuningError):
            grid_search(small_graph, np.arange(8.0), [1e12], "loocv_rsf", which="tilde",
                        n_forests=1, seed=0)

    def test_forest_methods_are_seeded(self, small_graph):
        y = np.arange(8.0)
        a = grid_search(small_graph, y, DEFAULT_MU_GRID, "sure_rsf", sigma2=0.1, seed=3)
        b = grid_search(small_graph, y, DEFAULT_MU_GRID, "sure_rsf", sigma2=0.1, seed=3)
        np.testing.assert_array_equal(a.scores, b.scores)
        assert a.best_values.shape == (8,)

    def test_csv(self, small_graph, tmp_path):
        result = grid_search(small_graph, np.arange(8.0), DEFAULT_MU_GRID, "sure_exact",
                             sigma2=0.1)
        result.to_csv(tmp_path / "tune.csv")
        lines = (tmp_path / "tune.csv").read_text().splitlines()
        assert lines[0] == "candidate,score"
        assert len(lines) == 11

    def test_sure_picks_risk_minimizer(self):
        g = ring_graph(20)
        x = lowest_eigenvectors(g, 2)[:, 1]
        x = x / np.linalg.norm(x)
        sigma2 = 0.1
        grid = np.asarray(DEFAULT_MU_GRID)
        risks = [true_risk(DenseOracle.build(g, mu), x, sigma2) for mu in grid]
        target = grid[int(np.argmin(risks))]
        hits = 0
        for seed in range(50):
            y = x + np.random.default_rng(seed).normal(0.0, np.sqrt(sigma2), g.n)
            hits += grid_search(g, y, grid, "sure_exact", sigma2=sigma2).best == target
        assert hits >= 40
