import numpy as np
import pytest

from graphred import (
    Graph,
    InvalidGraphError,
    NumericalError,
    build_laplacian,
    eigendecompose,
    gft,
    igft,
    load_edge_list,
    quadratic_form,
    save_adjacency_csv,
    save_edge_list,
)
from graphred.datasets import generate_sensor_points
from graphred.construct import knn_graph, normalize_weights


def two_node_graph():
    return Graph(adjacency=np.array([[0.0, 1.0], [1.0, 0.0]]))


def path_graph():
    # 3-node path with weights (1, 0.5)
    w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.5], [0.0, 0.5, 0.0]])
    return Graph(adjacency=w)


def random_graph(seed, n=40, k=4):
    pts = generate_sensor_points(n, seed=seed)
    return normalize_weights(knn_graph(pts, k))


class TestGraphType:
    def test_basic_properties(self):
        g = path_graph()
        assert g.n_nodes == 3
        assert g.n_edges == 2

    def test_edges_listed_once_with_weights(self):
        g = path_graph()
        rows = g.edges()
        assert [(i, j) for i, j, _ in rows] == [(0, 1), (1, 2)]
        assert [w for _, _, w in rows] == [1.0, 0.5]

    def test_rejects_asymmetric(self):
        w = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(InvalidGraphError):
            Graph(adjacency=w)

    def test_rejects_negative_weight(self):
        w = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(InvalidGraphError):
            Graph(adjacency=w)

    def test_rejects_nonzero_diagonal(self):
        w = np.array([[1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(InvalidGraphError):
            Graph(adjacency=w)

    def test_rejects_single_node(self):
        with pytest.raises(InvalidGraphError):
            Graph(adjacency=np.zeros((1, 1)))

    def test_rejects_nonsquare(self):
        with pytest.raises(InvalidGraphError):
            Graph(adjacency=np.zeros((2, 3)))

    def test_rejects_nonfinite(self):
        w = np.array([[0.0, np.inf], [np.inf, 0.0]])
        with pytest.raises(InvalidGraphError):
            Graph(adjacency=w)


class TestBuildLaplacian:
    def test_two_node_single_edge(self):
        lap = build_laplacian(two_node_graph())
        assert np.array_equal(lap.matrix, np.array([[1.0, -1.0], [-1.0, 1.0]]))

    def test_three_node_path_hand_value(self):
        lap = build_laplacian(path_graph())
        expected = np.array([[1.0, -1.0, 0.0], [-1.0, 1.5, -0.5], [0.0, -0.5, 0.5]])
        assert np.allclose(lap.matrix, expected, atol=0)

    def test_annihilates_constants(self):
        for seed in range(5):
            lap = build_laplacian(random_graph(seed))
            ones = np.ones(lap.n_nodes)
            assert np.max(np.abs(lap.matrix @ ones)) <= 1e-12

    def test_degree_matches_row_sums(self):
        g = path_graph()
        lap = build_laplacian(g)
        assert np.allclose(lap.degree, g.adjacency.sum(axis=1))

    def test_symmetric_and_psd(self):
        for seed in range(5):
            lap = build_laplacian(random_graph(seed))
            assert np.array_equal(lap.matrix, lap.matrix.T)
            eigs = np.linalg.eigvalsh(lap.matrix)
            assert eigs.min() >= -1e-10


class TestEigendecompose:
    def test_two_node_spectrum(self):
        dec = eigendecompose(build_laplacian(two_node_graph()))
        assert np.allclose(dec.eigenvalues, [0.0, 2.0], atol=1e-12)
        assert np.allclose(np.abs(dec.basis[:, 0]), 1 / np.sqrt(2), atol=1e-12)

    def test_disconnected_zero_multiplicity(self):
        # two 2-node components: eigenvalue 0 appears twice
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 1.0
        w[2, 3] = w[3, 2] = 1.0
        dec = eigendecompose(build_laplacian(Graph(adjacency=w)))
        assert np.sum(np.abs(dec.eigenvalues) <= 1e-10) == 2

    def test_orthonormal_and_reconstructs(self):
        for seed in range(5):
            lap = build_laplacian(random_graph(seed))
            dec = eigendecompose(lap)
            n = lap.n_nodes
            assert np.linalg.norm(dec.basis.T @ dec.basis - np.eye(n)) <= 1e-8
            recon = (dec.basis * dec.eigenvalues) @ dec.basis.T
            rel = np.linalg.norm(recon - lap.matrix) / np.linalg.norm(lap.matrix)
            assert rel <= 1e-8

    def test_eigenvalues_ascending(self):
        dec = eigendecompose(build_laplacian(random_graph(1)))
        assert np.all(np.diff(dec.eigenvalues) >= -1e-12)

    def test_sign_normalization_deterministic(self):
        lap = build_laplacian(random_graph(2))
        a = eigendecompose(lap)
        b = eigendecompose(lap)
        assert np.array_equal(a.basis, b.basis)
        # largest-magnitude entry of each eigenvector is positive
        piv = np.argmax(np.abs(a.basis), axis=0)
        assert np.all(a.basis[piv, np.arange(lap.n_nodes)] > 0)

    def test_constant_sign_first_eigenvector_connected(self):
        dec = eigendecompose(build_laplacian(random_graph(3)))
        u1 = dec.basis[:, 0]
        assert np.all(u1 > 0) or np.all(u1 < 0)

    def test_reconstruction_guard_raises(self):
        lap = build_laplacian(random_graph(0))
        with pytest.raises(NumericalError):
            eigendecompose(lap, tol=1e-18)


class TestGft:
    def test_eigenvector_maps_to_unit_coefficient(self):
        dec = eigendecompose(build_laplacian(random_graph(0)))
        xhat = gft(dec, dec.basis[:, 2])
        expected = np.zeros(dec.n_nodes)
        expected[2] = 1.0
        assert np.allclose(xhat, expected, atol=1e-10)

    def test_constant_signal_concentrates_at_dc(self):
        dec = eigendecompose(build_laplacian(random_graph(1)))
        n = dec.n_nodes
        c = 3.5
        xhat = gft(dec, c * np.ones(n))
        assert abs(abs(xhat[0]) - c * np.sqrt(n)) <= 1e-10
        assert np.max(np.abs(xhat[1:])) <= 1e-10

    def test_round_trip_and_parseval(self):
        dec = eigendecompose(build_laplacian(random_graph(2, n=100, k=5)))
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(dec.n_nodes)
            back = igft(dec, gft(dec, x))
            assert np.max(np.abs(back - x)) <= 1e-10
            assert abs(np.linalg.norm(gft(dec, x)) - np.linalg.norm(x)) <= 1e-10

    def test_batched_columns(self):
        dec = eigendecompose(build_laplacian(random_graph(3)))
        rng = np.random.default_rng(1)
        x = rng.standard_normal((dec.n_nodes, 3))
        xhat = gft(dec, x)
        assert xhat.shape == x.shape
        for j in range(3):
            assert np.allclose(xhat[:, j], gft(dec, x[:, j]), atol=1e-12)

    def test_length_mismatch_raises(self):
        dec = eigendecompose(build_laplacian(two_node_graph()))
        with pytest.raises(ValueError):
            gft(dec, np.ones(3))


class TestQuadraticForm:
    def test_constant_is_zero(self):
        lap = build_laplacian(random_graph(0))
        assert abs(quadratic_form(lap, np.ones(lap.n_nodes))) <= 1e-12

    def test_two_node_hand_value(self):
        lap = build_laplacian(two_node_graph())
        assert abs(quadratic_form(lap, np.array([1.0, 0.0])) - 1.0) <= 1e-12

    def test_path_hand_value(self):
        lap = build_laplacian(path_graph())
        # 1*(1-0)^2 + 0.5*(0-2)^2 = 3
        assert abs(quadratic_form(lap, np.array([1.0, 0.0, 2.0])) - 3.0) <= 1e-12

    def test_matches_edge_sum_on_random_signals(self):
        g = random_graph(4, n=60, k=5)
        lap = build_laplacian(g)
        edges = g.edges()
        rng = np.random.default_rng(2)
        for _ in range(100):
            x = rng.standard_normal(g.n_nodes)
            via_edges = sum(w * (x[i] - x[j]) ** 2 for i, j, w in edges)
            q = quadratic_form(lap, x)
            assert q >= 0
            assert abs(q - via_edges) <= 1e-9 * max(1.0, abs(via_edges))

    def test_batched_matches_columns(self):
        lap = build_laplacian(random_graph(5))
        rng = np.random.default_rng(3)
        x = rng.standard_normal((lap.n_nodes, 4))
        q = quadratic_form(lap, x)
        assert q.shape == (4,)
        for j in range(4):
            assert abs(q[j] - quadratic_form(lap, x[:, j])) <= 1e-10


class TestEdgeListIO:
    def test_round_trip_exact(self, tmp_path):
        g = random_graph(6)
        path = tmp_path / "graph.edges"
        save_edge_list(g, path)
        back = load_edge_list(path, n_nodes=g.n_nodes)
        assert np.array_equal(back.adjacency, g.adjacency)

    def test_line_format(self, tmp_path):
        path = tmp_path / "g.edges"
        save_edge_list(two_node_graph(), path)
        assert path.read_text().strip() == "0 1 1"

    def test_infers_node_count(self, tmp_path):
        path = tmp_path / "g.edges"
        path.write_text("0 1 1.0\n1 2 0.5\n")
        g = load_edge_list(path)
        assert g.n_nodes == 3
        assert g.n_edges == 2

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.edges"
        path.write_text("0 1 1.0\n0 oops\n")
        with pytest.raises(InvalidGraphError, match=":2:"):
            load_edge_list(path)

    def test_adjacency_csv_written(self, tmp_path):
        path = tmp_path / "adj.csv"
        save_adjacency_csv(two_node_graph(), path)
        rows = [r.split(",") for r in path.read_text().strip().splitlines()]
        assert np.allclose(np.array(rows, dtype=float), [[0.0, 1.0], [1.0, 0.0]])
