"""
Graph construction, operators, generators, signals and file formats.

Hand-checked values:
- 2-node graph w=1, z=(0,1): L z = (-1, 1)
- path 0-1-2, z=(1,0,0): L z = (1, -1, 0)
- 2-node graph w=4, z=(0,1): B z = +-2
"""

import networkx as nx
import numpy as np
import pytest
import scipy.sparse as sp

from conftest import path_graph, random_connected_graph
from rsfsmooth.errors import DataError, DimensionError, ParameterError
from rsfsmooth.graph import (
    Graph,
    bandlimited_signal,
    dense_laplacian,
    erdos_renyi,
    generate,
    grid2d,
    graph_from_spec,
    incidence_apply,
    k_regular,
    knn_euclidean,
    laplacian_apply,
    laplacian_spectrum,
    largest_component,
    load_edge_list,
    load_labels,
    load_linqs,
    load_pgm,
    load_signal_csv,
    save_edge_list,
    save_pgm,
    save_signal_csv,
)

GENERATED = [
    ("erdos_renyi", {"n": 60, "avg_degree": 4.0}),
    ("barabasi_albert", {"n": 60, "m": 2}),
    ("k_regular", {"n": 60, "k": 4}),
    ("knn_euclidean", {"n": 60, "k": 5, "dim": 2}),
]


class TestGraphInvariants:

    def test_degree_equals_row_sums(self):
        g = random_connected_graph(12, seed=1)
        rebuilt = np.asarray(g.adjacency.toarray().sum(axis=1)).ravel()
        np.testing.assert_allclose(g.degree, rebuilt, rtol=0, atol=1e-14)

    def test_symmetric_positive_no_loops(self):
        g = random_connected_graph(12, seed=2)
        dense = g.adjacency.toarray()
        np.testing.assert_array_equal(dense, dense.T)
        assert np.all(np.diag(dense) == 0)
        assert g.adjacency.data.min() > 0

    def test_orientation_is_dropped(self):
        g = Graph.from_edges(3, [0, 2], [1, 1], [1.0, 2.0])
        assert g.adjacency[1, 0] == 1.0
        assert g.adjacency[1, 2] == 2.0

    def test_rejects_self_loop(self):
        with pytest.raises(ParameterError):
            Graph.from_edges(2, [0], [0])

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ParameterError):
            Graph.from_edges(2, [0], [1], [0.0])

    def test_rejects_asymmetric_adjacency(self):
        with pytest.raises(ParameterError):
            Graph.from_adjacency(sp.csr_matrix(np.array([[0.0, 1.0], [2.0, 0.0]])))

    def test_edge_list_sorted_upper(self):
        g = random_connected_graph(10, seed=4)
        u, v, w = g.edge_list
        assert np.all(u < v)
        keys = u * g.n + v
        assert np.all(np.diff(keys) > 0)
        assert u.size == g.n_edges

    @pytest.mark.parametrize("seed", range(6))
    def test_laplacian_is_psd(self, seed):
        rng = np.random.default_rng(seed)
        g = random_connected_graph(int(rng.integers(5, 40)), p=float(rng.uniform(0.05, 0.6)),
                                   seed=200 + seed)
        eigenvalues = np.linalg.eigvalsh(dense_laplacian(g))
        assert eigenvalues[0] >= -1e-10
        assert eigenvalues[1] > 1e-10
        z = rng.standard_normal(g.n)
        assert z @ laplacian_apply(g, z) >= -1e-12

    @pytest.mark.parametrize("kind,params", GENERATED)
    def test_generated_laplacian_is_psd(self, kind, params):
        g = generate(kind, params, seed=11)
        assert np.linalg.eigvalsh(dense_laplacian(g))[0] >= -1e-10


class TestLaplacianApply:

    def test_constant_is_annihilated(self):
        g = random_connected_graph(9, seed=5)
        np.testing.assert_allclose(laplacian_apply(g, np.full(9, 3.7)), 0.0, atol=1e-12)

    def test_two_node(self, two_node):
        np.testing.assert_allclose(laplacian_apply(two_node, [0.0, 1.0]), [-1.0, 1.0])

    def test_path(self, path3):
        np.testing.assert_allclose(laplacian_apply(path3, [1.0, 0.0, 0.0]), [1.0, -1.0, 0.0])

    def test_block_of_signals(self, path3):
        z = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        out = laplacian_apply(path3, z)
        np.testing.assert_allclose(out[:, 0], laplacian_apply(path3, z[:, 0]))
        np.testing.assert_allclose(out[:, 1], laplacian_apply(path3, z[:, 1]))

    def test_wrong_length(self, path3):
        with pytest.raises(DimensionError):
            laplacian_apply(path3, np.zeros(4))


class TestIncidenceApply:

    def test_constant_gives_zero(self):
        g = random_connected_graph(7, seed=6)
        np.testing.assert_allclose(incidence_apply(g, np.ones(7)), 0.0)

    def test_two_node_weight_four(self):
        g = path_graph(2, w=4.0)
        out = incidence_apply(g, [0.0, 1.0])
        assert out.shape == (1,)
        assert abs(abs(out[0]) - 2.0) < 1e-14

    def test_energy_identity(self):
        g = random_connected_graph(15, seed=7)
        z = np.random.default_rng(0).standard_normal(15)
        energy = np.sum(incidence_apply(g, z) ** 2)
        assert abs(energy - z @ laplacian_apply(g, z)) < 1e-10


class TestGenerators:

    def test_grid_3x3(self):
        g = grid2d(3, 3)
        assert (g.n, g.n_edges) == (9, 12)
        assert g.shape == (3, 3)

    def test_periodic_grid_100x100(self):
        g = grid2d(100, 100, periodic=True)
        assert (g.n, g.n_edges) == (10000, 20000)
        assert np.all(g.degree == 4)

    def test_periodic_grid_too_small(self):
        with pytest.raises(ParameterError):
            grid2d(2, 5, periodic=True)

    def test_k_regular_edge_count(self):
        g = k_regular(1000, 10, seed=1)
        assert g.n_edges == 5000
        assert np.all(g.degree == 10)

    def test_k_regular_infeasible(self):
        with pytest.raises(ParameterError):
            k_regular(9, 3, seed=1)

    def test_knn_connected(self):
        g = knn_euclidean(300, k=8, dim=3, seed=2)
        assert g.is_connected
        assert np.all(g.degree >= 8)

    def test_graph_from_spec(self):
        assert graph_from_spec("grid:4x5").n == 20
        assert graph_from_spec("grid:4x5:periodic").n_edges == 40
        assert graph_from_spec("ba:n=50,m=2", seed=3).n == 50

    def test_graph_from_spec_unknown(self):
        with pytest.raises(ParameterError):
            graph_from_spec("torus:10")

    def test_graph_from_spec_bad_parameter(self):
        with pytest.raises(ParameterError):
            graph_from_spec("er:n=100,p=0.1")

    def test_largest_component(self):
        g = Graph.from_edges(6, [0, 1, 3], [1, 2, 4])
        sub, index_map = largest_component(g)
        assert sub.n == 3
        np.testing.assert_array_equal(index_map, [0, 1, 2])

    @pytest.mark.parametrize("kind,params", GENERATED)
    def test_same_seed_same_edges(self, kind, params):
        first = generate(kind, params, seed=5).edge_list
        second = generate(kind, params, seed=5).edge_list
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_other_seed_other_edges(self):
        a = generate("erdos_renyi", {"n": 60, "avg_degree": 4.0}, seed=5)
        b = generate("erdos_renyi", {"n": 60, "avg_degree": 4.0}, seed=6)
        assert a.n != b.n or (a.adjacency != b.adjacency).nnz > 0

    def test_sparse_er_keeps_its_index_map(self):
        n, avg_degree = 200, 1.2
        g = erdos_renyi(n, avg_degree, seed=3)
        assert g.is_connected and g.n < n
        full = nx.fast_gnp_random_graph(n, avg_degree / (n - 1), seed=3)
        assert g.index_map.size == g.n
        assert nx.is_connected(full.subgraph(g.index_map.tolist()))
        u, v, _ = g.edge_list
        original = {tuple(sorted(e)) for e in full.subgraph(g.index_map.tolist()).edges()}
        assert {(int(a), int(b)) for a, b in zip(g.index_map[u], g.index_map[v])} == original

    def test_connected_generator_has_no_index_map(self):
        assert generate("barabasi_albert", {"n": 50, "m": 2}, seed=1).index_map is None
        assert grid2d(4, 4).index_map is None

    def test_index_maps_compose(self):
        g = Graph.from_edges(5, [0, 1, 3], [1, 2, 4])
        g = Graph(g.adjacency, name="cut", index_map=np.arange(10, 15))
        sub, index_map = largest_component(g)
        np.testing.assert_array_equal(index_map, [0, 1, 2])
        np.testing.assert_array_equal(sub.index_map, [10, 11, 12])


class TestBandlimitedSignal:

    def test_k1_is_constant(self):
        g = random_connected_graph(16, seed=8)
        x, _, _ = bandlimited_signal(g, 1, seed=0)
        np.testing.assert_allclose(np.abs(x), 1.0 / 4.0, atol=1e-10)

    def test_noise_variance_from_snr(self):
        g = grid2d(10, 10)
        _, _, sigma2 = bandlimited_signal(g, 5, snr=2.0, seed=0)
        assert abs(sigma2 - 0.005) < 1e-15

    def test_noise_energy(self):
        g = grid2d(10, 10)
        energies = []
        for seed in range(2000):
            x, y, _ = bandlimited_signal(g, 5, snr=2.0, seed=seed)
            energies.append(np.sum((y - x) ** 2))
        assert abs(np.mean(energies) - 0.5) < 0.025

    def test_unit_norm_and_bandlimit(self):
        g = grid2d(6, 6)
        x, _, _ = bandlimited_signal(g, 3, seed=1)
        assert abs(np.linalg.norm(x) - 1.0) < 1e-12
        coefficients = laplacian_spectrum(g).eigenvectors.T @ x
        assert np.max(np.abs(coefficients[3:])) < 1e-10

    def test_partial_spectrum_on_large_grid(self):
        g = grid2d(60, 60)
        x, y, sigma2 = bandlimited_signal(g, 5, seed=2)
        assert x.shape == (3600,)
        # low-frequency: small Dirichlet energy
        assert x @ laplacian_apply(g, x) < 0.05


class TestEdgeListIO:

    def test_duplicates_are_summed(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1 1\n1 0 1\n")
        g = load_edge_list(path)
        assert (g.n, g.n_edges) == (2, 1)
        assert g.adjacency[0, 1] == 2.0

    def test_header_and_comments(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("# nodes: 5\n0 1\n# comment\n1 2 0.5  # trailing\n")
        g = load_edge_list(path)
        assert g.n == 5
        assert g.adjacency[1, 2] == 0.5

    def test_bad_line_reports_line_number(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n1 x\n")
        with pytest.raises(DataError, match=":2:"):
            load_edge_list(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_edge_list(tmp_path / "absent.txt")

    def test_save_and_load(self, tmp_path):
        g = random_connected_graph(10, seed=9)
        save_edge_list(g, tmp_path / "g.txt")
        back = load_edge_list(tmp_path / "g.txt")
        assert abs(back.adjacency - g.adjacency).max() == 0


class TestLabelsAndSignals:

    def test_load_labels(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("0 1\n3 0\n")
        np.testing.assert_array_equal(load_labels(path, 5), [1, -1, -1, 0, -1])

    def test_signal_csv(self, tmp_path):
        values = np.array([0.1, -2.5, 1e-17])
        save_signal_csv(tmp_path / "s.csv", values)
        np.testing.assert_array_equal(load_signal_csv(tmp_path / "s.csv"), values)

    def test_partial_signal_is_nan(self, tmp_path):
        path = tmp_path / "known.csv"
        path.write_text("node,value\n0,1.0\n3,0.0\n")
        known = load_signal_csv(path, 4)
        assert np.isnan(known[1]) and np.isnan(known[2])


class TestPGM:

    def test_zero_image(self, tmp_path):
        path = tmp_path / "zero.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes(4))
        g, values = load_pgm(path)
        assert (g.n, g.n_edges) == (4, 4)
        np.testing.assert_array_equal(values, np.zeros(4))

    def test_write_then_read(self, tmp_path):
        values = np.linspace(0.0, 1.0, 12)
        save_pgm(tmp_path / "ramp.pgm", values, (3, 4))
        g, back = load_pgm(tmp_path / "ramp.pgm")
        assert g.shape == (3, 4)
        np.testing.assert_allclose(back, np.rint(values * 255) / 255)

    def test_not_p5(self, tmp_path):
        path = tmp_path / "ascii.pgm"
        path.write_text("P2\n1 1\n255\n0\n")
        with pytest.raises(DataError):
            load_pgm(path)


class TestLinqs:

    def write_dataset(self, tmp_path):
        content = tmp_path / "tiny.content"
        content.write_text("p10 0 1 Theory\np20 1 0 AI\np30 1 1 Theory\np40 0 0 AI\n")
        cites = tmp_path / "tiny.cites"
        cites.write_text("p10 p20\np20 p10\np30 p20\np30 p30\np99 p10\n")
        return cites, content

    def test_read(self, tmp_path):
        g, labels, classes, papers = load_linqs(*self.write_dataset(tmp_path))
        assert (g.n, g.n_edges) == (4, 2)
        assert g.adjacency[0, 1] == 1.0
        assert classes == ["AI", "Theory"]
        np.testing.assert_array_equal(labels, [1, 0, 1, 0])
        assert papers == ["p10", "p20", "p30", "p40"]
        assert g.name == "tiny"

    def test_largest_component_keeps_labels_aligned(self, tmp_path):
        g, labels, _, _ = load_linqs(*self.write_dataset(tmp_path))
        sub, index_map = largest_component(g)
        assert sub.n == 3
        np.testing.assert_array_equal(labels[index_map], [1, 0, 1])

    def test_bad_cites_line(self, tmp_path):
        cites, content = self.write_dataset(tmp_path)
        cites.write_text("p10 p20 p30\n")
        with pytest.raises(DataError, match=":1:"):
            load_linqs(cites, content)

    def test_missing(self, tmp_path):
        with pytest.raises(DataError):
            load_linqs(tmp_path / "x.cites", tmp_path / "x.content")
