import json

import numpy as np
import pytest

from graphred import (
    Denoiser,
    DivergenceError,
    RedProblem,
    build_laplacian,
    check_homogeneity,
    check_passivity,
    eigendecompose,
    knn_graph,
    lr_denoise,
    normalize_weights,
    red_cg_solve,
    red_gradient,
    red_gradient_descent,
    red_objective,
)
from graphred.datasets import generate_sensor_points
from graphred.graphs import Graph


def setup_graph(seed=0, n=50, k=5):
    pts = generate_sensor_points(n, seed=seed)
    lap = build_laplacian(normalize_weights(knn_graph(pts, k)))
    return lap, eigendecompose(lap)


def lr_problem(y, alpha_red, alpha_lr, lap, decomp=None):
    return RedProblem(
        y=y, alpha_red=alpha_red, denoiser=Denoiser(kind="lr", alpha=alpha_lr), lap=lap, decomp=decomp
    )


def stationarity_oracle(lap, y, alpha_red, alpha_lr):
    # direct solve of x - y + alpha_red (x - (I + alpha_lr L)^-1 x) = 0
    n = lap.n_nodes
    inner = np.linalg.inv(np.eye(n) + alpha_lr * lap.matrix)
    return np.linalg.solve((1 + alpha_red) * np.eye(n) - alpha_red * inner, y)


class TestObjective:
    def test_zero_at_constant_fixed_point(self):
        lap, _ = setup_graph()
        y = 2.0 * np.ones(lap.n_nodes)
        prob = lr_problem(y, 3.0, 1.0, lap)
        assert abs(red_objective(prob, y)) <= 1e-10

    def test_alpha_red_zero_is_data_term(self):
        lap, _ = setup_graph(1)
        rng = np.random.default_rng(0)
        y = rng.standard_normal(lap.n_nodes)
        x = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 0.0, 1.0, lap)
        assert abs(red_objective(prob, x) - 0.5 * np.sum((x - y) ** 2)) <= 1e-12

    def test_two_node_hand_value(self):
        lap = build_laplacian(Graph(adjacency=np.array([[0.0, 1.0], [1.0, 0.0]])))
        y = np.array([1.0, 0.0])
        prob = lr_problem(y, 1.0, 1.0, lap)
        # x = y: data 0, regularizer x^T (x - (2/3, 1/3)) / 2 = 1/6
        assert abs(red_objective(prob, y) - 1.0 / 6.0) <= 1e-12


class TestGradient:
    def test_zero_at_constant(self):
        lap, _ = setup_graph(2)
        y = -1.2 * np.ones(lap.n_nodes)
        prob = lr_problem(y, 2.0, 1.5, lap)
        assert np.max(np.abs(red_gradient(prob, y))) <= 1e-10

    def test_alpha_red_zero(self):
        lap, _ = setup_graph(3)
        rng = np.random.default_rng(1)
        y = rng.standard_normal(lap.n_nodes)
        x = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 0.0, 1.0, lap)
        assert np.allclose(red_gradient(prob, x), x - y, atol=1e-14)

    def test_matches_finite_differences(self):
        lap, dec = setup_graph(4, n=50)
        rng = np.random.default_rng(2)
        h = 1e-5
        for _ in range(5):
            y = rng.standard_normal(lap.n_nodes)
            x = rng.standard_normal(lap.n_nodes)
            a_red = rng.uniform(0.2, 3.0)
            a_lr = rng.uniform(0.2, 3.0)
            prob = lr_problem(y, a_red, a_lr, lap, dec)
            grad = red_gradient(prob, x)
            fd = np.zeros_like(grad)
            for i in range(lap.n_nodes):
                e = np.zeros(lap.n_nodes)
                e[i] = h
                fd[i] = (red_objective(prob, x + e) - red_objective(prob, x - e)) / (2 * h)
            assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) <= 1e-5


class TestGradientDescent:
    def test_alpha_red_zero_one_exact_step(self):
        lap, _ = setup_graph(5)
        rng = np.random.default_rng(3)
        y = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 0.0, 1.0, lap)
        report = red_gradient_descent(prob, 1.0, 3)
        assert np.array_equal(report.x, y)
        assert report.gradient_norm_history[1] == 0.0

    def test_gradient_norm_decreases(self):
        lap, dec = setup_graph(6)
        rng = np.random.default_rng(4)
        y = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 1.0, 2.0, lap, dec)
        report = red_gradient_descent(prob, 0.1, 50)
        assert report.gradient_norm_history[-1] < report.gradient_norm_history[0]

    def test_converges_to_stationarity_oracle(self):
        lap, dec = setup_graph(7, n=100)
        rng = np.random.default_rng(5)
        y = rng.standard_normal(100)
        a_red, a_lr = 1.0, 2.0
        prob = lr_problem(y, a_red, a_lr, lap, dec)
        report = red_gradient_descent(prob, 1.0 / (1 + a_red), 300)
        oracle = stationarity_oracle(lap, y, a_red, a_lr)
        assert np.linalg.norm(report.x - oracle) / np.linalg.norm(oracle) <= 1e-5

    def test_divergence_detected(self):
        lap, _ = setup_graph(8)
        rng = np.random.default_rng(6)
        y = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 5.0, 1.0, lap)
        with pytest.raises(DivergenceError):
            red_gradient_descent(prob, 50.0, 200)

    def test_history_lengths(self):
        lap, _ = setup_graph(9)
        prob = lr_problem(np.ones(lap.n_nodes), 1.0, 1.0, lap)
        report = red_gradient_descent(prob, 0.1, 7)
        assert report.iterations == 7
        assert len(report.gradient_norm_history) == 8
        assert len(report.objective_history) == 8

    def test_step_validated(self):
        lap, _ = setup_graph(9)
        prob = lr_problem(np.ones(lap.n_nodes), 1.0, 1.0, lap)
        with pytest.raises(ValueError):
            red_gradient_descent(prob, 0.0, 5)


class TestCgSolve:
    def test_alpha_red_zero_converges_first_iteration(self):
        lap, dec = setup_graph(0)
        rng = np.random.default_rng(7)
        y = rng.standard_normal(lap.n_nodes)
        for decomp in (None, dec):
            prob = lr_problem(y, 0.0, 1.0, lap, decomp)
            report = red_cg_solve(prob, 10)
            assert report.iterations == 1
            assert np.allclose(report.x, y, rtol=0, atol=1e-12 * np.linalg.norm(y))

    def test_matches_stationarity_oracle(self):
        lap, dec = setup_graph(1, n=100)
        rng = np.random.default_rng(8)
        y = rng.standard_normal(100)
        prob = lr_problem(y, 1.5, 0.8, lap, dec)
        report = red_cg_solve(prob, 60)
        oracle = stationarity_oracle(lap, y, 1.5, 0.8)
        assert np.linalg.norm(report.x - oracle) / np.linalg.norm(oracle) <= 1e-6

    def test_objective_history_non_increasing(self):
        lap, dec = setup_graph(2)
        rng = np.random.default_rng(9)
        y = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 1.0, 2.0, lap, dec)
        report = red_cg_solve(prob, 10)
        objs = np.array(report.objective_history, dtype=float)
        assert np.all(np.diff(objs) <= 1e-12)

    def test_beats_gradient_descent_at_equal_budget(self):
        # CG uses 2K+1 denoiser evaluations for K iterations
        lap, dec = setup_graph(3, n=100)
        rng = np.random.default_rng(10)
        y = rng.standard_normal(100)
        prob = lr_problem(y, 1.0, 2.0, lap, dec)
        K = 10
        cg = red_cg_solve(prob, K)
        gd = red_gradient_descent(prob, 1.0 / 2.0, 2 * K + 1)
        assert cg.objective_history[-1] <= gd.objective_history[-1] + 1e-12

    def test_spectral_path_matches_node_path(self):
        lap, dec = setup_graph(4)
        rng = np.random.default_rng(11)
        y = rng.standard_normal(lap.n_nodes)
        a = red_cg_solve(lr_problem(y, 1.2, 1.0, lap, None), 8)
        b = red_cg_solve(lr_problem(y, 1.2, 1.0, lap, dec), 8)
        assert np.linalg.norm(a.x - b.x) <= 1e-9 * np.linalg.norm(a.x)
        assert np.allclose(a.objective_history, b.objective_history, rtol=1e-9, atol=1e-12)

    def test_batched_matches_columns(self):
        lap, dec = setup_graph(5)
        rng = np.random.default_rng(12)
        y = rng.standard_normal((lap.n_nodes, 4))
        batched = red_cg_solve(lr_problem(y, 1.0, 1.5, lap, dec), 10)
        for j in range(4):
            single = red_cg_solve(lr_problem(y[:, j], 1.0, 1.5, lap, dec), 10)
            assert np.allclose(batched.x[:, j], single.x, rtol=1e-9, atol=1e-12)

    def test_pnp_inner_denoiser_runs(self):
        lap, dec = setup_graph(6)
        rng = np.random.default_rng(13)
        y = rng.standard_normal(lap.n_nodes)
        prob = RedProblem(
            y=y, alpha_red=1.0, denoiser=Denoiser(kind="pnp", alpha=1.0, rho=1.0), lap=lap, decomp=dec
        )
        report = red_cg_solve(prob, 10)
        assert np.all(np.isfinite(report.x))
        assert report.objective_history[-1] < report.objective_history[0]

    def test_per_layer_params_change_result(self):
        lap, dec = setup_graph(7)
        rng = np.random.default_rng(14)
        y = rng.standard_normal(lap.n_nodes)
        prob = lr_problem(y, 1.0, 1.0, lap, dec)
        K = 5
        flat = red_cg_solve(prob, K)
        varied = red_cg_solve(
            prob,
            K,
            alpha_red_layers=np.linspace(0.5, 2.0, K + 1),
            alpha_denoiser_layers=np.linspace(0.5, 2.0, K + 1),
        )
        assert not np.allclose(flat.x, varied.x)

    def test_layer_length_validated(self):
        lap, _ = setup_graph(8)
        prob = lr_problem(np.ones(lap.n_nodes), 1.0, 1.0, lap)
        with pytest.raises(ValueError):
            red_cg_solve(prob, 5, alpha_red_layers=[1.0] * 5)
        with pytest.raises(ValueError):
            red_cg_solve(prob, 0)
        with pytest.raises(ValueError):
            red_cg_solve(prob, 5, pnp_rho_layers=[1.0] * 6)

    def test_report_serializes_to_json(self):
        lap, _ = setup_graph(9)
        prob = lr_problem(np.ones(lap.n_nodes), 1.0, 1.0, lap)
        report = red_cg_solve(prob, 3)
        payload = json.dumps(report.to_dict())
        assert '"iterations"' in payload


class TestProblemValidation:
    def test_rejects_nonfinite_observation(self):
        lap, _ = setup_graph(0)
        y = np.ones(lap.n_nodes)
        y[0] = np.nan
        with pytest.raises(ValueError):
            lr_problem(y, 1.0, 1.0, lap)

    def test_rejects_negative_alpha_red(self):
        lap, _ = setup_graph(0)
        with pytest.raises(ValueError):
            lr_problem(np.ones(lap.n_nodes), -0.1, 1.0, lap)

    def test_rejects_mismatched_decomp(self):
        lap, _ = setup_graph(0, n=20)
        _, other = setup_graph(1, n=30)
        with pytest.raises(ValueError):
            lr_problem(np.ones(20), 1.0, 1.0, lap, other)


class TestConditionCheckers:
    def test_lr_homogeneity_machine_precision(self):
        lap, dec = setup_graph(1)
        den = Denoiser(kind="lr", alpha=1.0)
        rng = np.random.default_rng(15)
        for _ in range(20):
            x = rng.standard_normal(lap.n_nodes)
            assert check_homogeneity(den, x, 1.1, lap=lap, decomp=dec) <= 1e-12

    def test_any_denoiser_exact_at_unit_scale(self):
        lap, _ = setup_graph(2)
        den = Denoiser(kind="pnp", alpha=1.0, rho=1.0)
        rng = np.random.default_rng(16)
        x = rng.standard_normal(lap.n_nodes)
        assert check_homogeneity(den, x, 1.0, lap=lap) == 0.0

    def test_lr_passivity_bounded_by_one(self):
        lap, _ = setup_graph(3)
        den = Denoiser(kind="lr", alpha=2.0)
        rng = np.random.default_rng(17)
        for _ in range(100):
            x = rng.standard_normal(lap.n_nodes)
            assert check_passivity(den, x, lap=lap) <= 1.0

    def test_all_ones_probe_ratio_is_one(self):
        lap, _ = setup_graph(4)
        den = Denoiser(kind="lr", alpha=1.0)
        ratio = check_passivity(den, np.ones(lap.n_nodes), lap=lap)
        assert abs(ratio - 1.0) <= 1e-12

    def test_callable_denoiser_accepted(self):
        lap, _ = setup_graph(5)
        rng = np.random.default_rng(18)
        x = rng.standard_normal(lap.n_nodes)
        half = lambda v: 0.5 * v
        assert check_homogeneity(half, x, 1.1) <= 1e-15
        assert abs(check_passivity(half, x) - 0.25) <= 1e-12

    def test_input_validation(self):
        lap, _ = setup_graph(6)
        den = Denoiser(kind="lr", alpha=1.0)
        with pytest.raises(ValueError):
            check_homogeneity(den, np.zeros(lap.n_nodes), lap=lap)
        with pytest.raises(ValueError):
            check_homogeneity(den, np.ones(lap.n_nodes), c=-1.0, lap=lap)
        with pytest.raises(ValueError):
            check_passivity(den, np.zeros(lap.n_nodes), lap=lap)
