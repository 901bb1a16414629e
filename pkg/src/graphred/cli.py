"""Command line front end.

Subcommands: generate, tune, denoise, train, check, spectrum, eval.  Every
command reads a JSON config (validated strictly: unknown keys are rejected)
plus the global flags ``--config``, ``--seed``, ``--out``, ``--threads``.
Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .construct import knn_graph, normalize_weights
from .denoisers import Denoiser, lr_denoise_spectral, pnp_admm_denoise
from .exceptions import (
    ConfigError,
    GraphRedError,
    InvalidGraphError,
    NumericalError,
    ParseError,
    TrainingError,
)
from .graphs import build_laplacian, eigendecompose
from .red import RedProblem, check_homogeneity, check_passivity, red_cg_solve
from .spectral import ResponseComparison, compare_responses, h_lr, h_red, write_response_csv
from .unroll import (
    TrainConfig,
    TrainSample,
    UnrolledParams,
    load_params,
    rmse,
    save_loss_history,
    save_params,
    train,
    unrolled_forward,
)
from . import datasets as ds

METHODS = ("lr", "pnp", "red_lr", "red_pnp")
METHOD_PARAM_KEYS = {
    "lr": ("alpha_lr",),
    "pnp": ("alpha_pnp", "rho"),
    "red_lr": ("alpha_red", "alpha_lr"),
    "red_pnp": ("alpha_red", "alpha_pnp", "rho"),
}
DEFAULT_ALPHA_RANGE = (1e-3, 1e3)
DEFAULT_RHO_RANGE = (1e-2, 1e2)
DEFAULT_GRID_POINTS = 20
DEFAULT_CG_LAYERS = 10
DEFAULT_PNP_ITERS = 10


def _load_json_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc


def _check_keys(cfg: dict, allowed, required, where: str) -> None:
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    missing = sorted(set(required) - set(cfg))
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")


def _write_json(path, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _graph_setup(record: ds.DatasetRecord, rebuild_from=None, k: int | None = None):
    """Laplacian + decomposition for one record.

    ``rebuild_from`` swaps in a graph built from observed coordinates (the
    only graph available when denoising real noisy clouds).
    """
    graph = record.graph
    if rebuild_from is not None:
        graph = normalize_weights(knn_graph(np.asarray(rebuild_from), k))
    lap = build_laplacian(graph)
    return lap, eigendecompose(lap)


def _records_share_graph(records) -> bool:
    first = records[0].graph.adjacency
    return all(np.array_equal(r.graph.adjacency, first) for r in records[1:])


def _stack(signals) -> np.ndarray:
    cols = [s if s.ndim == 2 else s[:, None] for s in signals]
    return np.concatenate(cols, axis=1)


def apply_method(method, params, lap, decomp, y, cg_layers=DEFAULT_CG_LAYERS, pnp_iters=DEFAULT_PNP_ITERS):
    """Run one denoising method with explicit scalar parameters."""
    if method == "lr":
        return lr_denoise_spectral(decomp, y, params["alpha_lr"])
    if method == "pnp":
        return pnp_admm_denoise(
            lap, y, params["alpha_pnp"], params["rho"], iters=pnp_iters, decomp=decomp
        )
    if method == "red_lr":
        denoiser = Denoiser(kind="lr", alpha=params["alpha_lr"])
    elif method == "red_pnp":
        denoiser = Denoiser(kind="pnp", alpha=params["alpha_pnp"], rho=params["rho"], iters=pnp_iters)
    else:
        raise ConfigError(f"unknown method {method!r}")
    prob = RedProblem(y=y, alpha_red=params["alpha_red"], denoiser=denoiser, lap=lap, decomp=decomp)
    return red_cg_solve(prob, cg_layers).x


def solve_with_report(method, params, lap, decomp, y, cg_layers=DEFAULT_CG_LAYERS, pnp_iters=DEFAULT_PNP_ITERS):
    """Like :func:`apply_method` but returns the solver report (red_* only)."""
    if method == "red_lr":
        denoiser = Denoiser(kind="lr", alpha=params["alpha_lr"])
    elif method == "red_pnp":
        denoiser = Denoiser(kind="pnp", alpha=params["alpha_pnp"], rho=params["rho"], iters=pnp_iters)
    else:
        return None
    prob = RedProblem(y=y, alpha_red=params["alpha_red"], denoiser=denoiser, lap=lap, decomp=decomp)
    return red_cg_solve(prob, cg_layers)


def grid_candidates(method, alphas, rhos):
    """Parameter combinations in ascending lexicographic order.

    The tuner keeps the first minimum it sees, so ties resolve toward the
    smallest parameter values.
    """
    if method == "lr":
        return [{"alpha_lr": a} for a in alphas]
    if method == "pnp":
        return [{"alpha_pnp": a, "rho": r} for a, r in itertools.product(alphas, rhos)]
    if method == "red_lr":
        return [
            {"alpha_red": ar, "alpha_lr": al} for ar, al in itertools.product(alphas, alphas)
        ]
    if method == "red_pnp":
        return [
            {"alpha_red": ar, "alpha_pnp": ap, "rho": r}
            for ar, ap, r in itertools.product(alphas, alphas, rhos)
        ]
    raise ConfigError(f"unknown method {method!r}")


def tune_method(
    records,
    sigma,
    method,
    grid_points=DEFAULT_GRID_POINTS,
    alpha_range=DEFAULT_ALPHA_RANGE,
    rho_range=DEFAULT_RHO_RANGE,
    cg_layers=DEFAULT_CG_LAYERS,
    pnp_iters=DEFAULT_PNP_ITERS,
):
    """Exhaustive log-grid search minimizing mean RMSE over ``records``."""
    if grid_points < 1:
        raise ConfigError("grid_points must be >= 1")
    alphas = np.geomspace(alpha_range[0], alpha_range[1], grid_points)
    rhos = np.geomspace(rho_range[0], rho_range[1], grid_points)
    candidates = grid_candidates(method, alphas, rhos)
    if not _records_share_graph(records):
        raise ConfigError("tuning expects records on a shared graph")
    lap, decomp = _graph_setup(records[0])
    y = _stack([np.asarray(r.observed[sigma], dtype=float) for r in records])
    target = _stack([np.asarray(r.clean, dtype=float) for r in records])
    best = None
    best_rmse = np.inf
    for params in candidates:
        x = apply_method(method, params, lap, decomp, y, cg_layers, pnp_iters)
        err = rmse(x, target)
        if err < best_rmse:
            best, best_rmse = params, err
    entry = {"method": method, "sigma": float(sigma), "train_rmse": float(best_rmse)}
    entry.update({k: float(v) for k, v in best.items()})
    return entry


def _tuned_lookup(tuned_path, method, sigma) -> dict:
    with open(tuned_path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    for entry in payload.get("entries", []):
        if entry.get("method") == method and float(entry.get("sigma")) == float(sigma):
            return {k: float(entry[k]) for k in METHOD_PARAM_KEYS[method]}
    raise ConfigError(f"{tuned_path}: no entry for method={method} sigma={sigma:g}")


# ---------------------------------------------------------------- commands


def cmd_generate(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {
        "kind", "seed", "n_nodes", "side", "k", "n_band", "offset",
        "sigmas", "n_train", "n_test", "source", "m", "fps_start",
    }
    _check_keys(cfg, allowed, set(), "generate config")
    kind = cfg.get("kind", "synthetic")
    seed = int(seed_override if seed_override is not None else cfg.get("seed", 0))
    if kind == "synthetic":
        spec = ds.SyntheticSpec(
            n_nodes=int(cfg.get("n_nodes", 100)),
            side=float(cfg.get("side", 100.0)),
            k=int(cfg.get("k", 5)),
            n_band=int(cfg.get("n_band", 3)),
            offset=float(cfg.get("offset", 2.0)),
            sigmas=tuple(float(s) for s in cfg.get("sigmas", (10, 15, 20, 25, 30))),
            n_train=int(cfg.get("n_train", 10)),
            n_test=int(cfg.get("n_test", 5)),
            seed=seed,
        )
        dataset = ds.generate_synthetic_dataset(spec)
    elif kind == "pointcloud":
        _check_keys(cfg, allowed, {"source"}, "generate config")
        points = ds.load_point_cloud(cfg["source"])
        dataset = ds.generate_pointcloud_dataset(
            points,
            sigmas=[float(s) for s in cfg.get("sigmas", (10, 15, 20, 25, 30))],
            m=int(cfg.get("m", 500)),
            k=int(cfg.get("k", 5)),
            n_train=int(cfg.get("n_train", 10)),
            n_test=int(cfg.get("n_test", 5)),
            seed=seed,
            start=int(cfg.get("fps_start", 0)),
        )
    else:
        raise ConfigError(f"unknown dataset kind {kind!r}")
    ds.save_dataset(dataset, out_dir)
    print(f"wrote dataset ({kind}) to {out_dir}")


def cmd_tune(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {
        "dataset", "methods", "sigmas", "split", "grid_points",
        "alpha_range", "rho_range", "cg_layers", "pnp_iters",
    }
    _check_keys(cfg, allowed, {"dataset"}, "tune config")
    dataset = ds.load_dataset(cfg["dataset"])
    methods = cfg.get("methods", list(METHODS))
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}")
    sigmas = [float(s) for s in cfg.get("sigmas", dataset.sigmas)]
    records = dataset.split(cfg.get("split", "train"))
    if not records:
        raise ConfigError("tune: selected split is empty")
    entries = []
    for sigma in sigmas:
        for method in methods:
            entries.append(
                tune_method(
                    records,
                    sigma,
                    method,
                    grid_points=int(cfg.get("grid_points", DEFAULT_GRID_POINTS)),
                    alpha_range=tuple(cfg.get("alpha_range", DEFAULT_ALPHA_RANGE)),
                    rho_range=tuple(cfg.get("rho_range", DEFAULT_RHO_RANGE)),
                    cg_layers=int(cfg.get("cg_layers", DEFAULT_CG_LAYERS)),
                    pnp_iters=int(cfg.get("pnp_iters", DEFAULT_PNP_ITERS)),
                )
            )
            print(
                f"tuned {method} at sigma={sigma:g}: train_rmse={entries[-1]['train_rmse']:.6g}"
            )
    _write_json(os.path.join(out_dir, "tuned.json"), {"schema": "graphred-tuned-v1", "entries": entries})


def _resolve_denoise_params(cfg, method, sigma) -> dict:
    if method == "unrolled":
        if "unrolled_params" not in cfg:
            raise ConfigError("method 'unrolled' needs the 'unrolled_params' key")
        return {}
    if "params" in cfg:
        params = dict(cfg["params"])
        missing = sorted(set(METHOD_PARAM_KEYS[method]) - set(params))
        extra = sorted(set(params) - set(METHOD_PARAM_KEYS[method]))
        if missing or extra:
            raise ConfigError(
                f"params for {method} must have exactly {list(METHOD_PARAM_KEYS[method])}"
            )
        return {k: float(v) for k, v in params.items()}
    if "tuned" in cfg:
        return _tuned_lookup(cfg["tuned"], method, sigma)
    raise ConfigError(f"no parameters given for method {method!r} (use 'params' or 'tuned')")


def cmd_denoise(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {
        "dataset", "split", "method", "sigma", "params", "tuned", "unrolled_params",
        "cg_layers", "pnp_iters", "rebuild_graph_from_observed", "save_diagnostics",
    }
    _check_keys(cfg, allowed, {"dataset", "method", "sigma"}, "denoise config")
    dataset = ds.load_dataset(cfg["dataset"])
    method = cfg["method"]
    if method != "unrolled" and method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    sigma = float(cfg["sigma"])
    if sigma not in [float(s) for s in dataset.sigmas]:
        raise ConfigError(f"sigma {sigma:g} not in dataset (has {dataset.sigmas})")
    split = cfg.get("split", "test")
    records = dataset.split(split)
    if not records:
        raise ConfigError(f"denoise: split {split!r} is empty")
    params = _resolve_denoise_params(cfg, method, sigma)
    uparams = load_params(cfg["unrolled_params"]) if method == "unrolled" else None
    cg_layers = int(cfg.get("cg_layers", DEFAULT_CG_LAYERS))
    pnp_iters = int(cfg.get("pnp_iters", DEFAULT_PNP_ITERS))
    rebuild = bool(cfg.get("rebuild_graph_from_observed", False))
    if rebuild and dataset.manifest.get("kind") != "pointcloud":
        raise ConfigError("rebuild_graph_from_observed only applies to pointcloud datasets")
    save_diag = bool(cfg.get("save_diagnostics", False))

    def run_one(record):
        y = np.asarray(record.observed[sigma], dtype=float)
        rebuild_from = y if rebuild else None
        lap, decomp = _graph_setup(record, rebuild_from, int(dataset.manifest.get("k", 5)))
        if method == "unrolled":
            x = unrolled_forward(lap, y, uparams, decomp=decomp, pnp_iters=pnp_iters)
            report = None
        else:
            x = apply_method(method, params, lap, decomp, y, cg_layers, pnp_iters)
            report = (
                solve_with_report(method, params, lap, decomp, y, cg_layers, pnp_iters)
                if save_diag
                else None
            )
        return x, report

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run_one, records))

    denoised_dir = os.path.join(out_dir, "denoised")
    os.makedirs(denoised_dir, exist_ok=True)
    per_sample = []
    observed_rmse = []
    for record, (x, report) in zip(records, results):
        np.savetxt(
            os.path.join(denoised_dir, f"sample_{record.index:03d}.csv"),
            x, fmt="%.17g", delimiter=",",
        )
        per_sample.append(rmse(x, record.clean))
        observed_rmse.append(rmse(record.observed[sigma], record.clean))
        if report is not None:
            _write_json(
                os.path.join(out_dir, "diagnostics", f"sample_{record.index:03d}.json"),
                report.to_dict(),
            )
    metrics = {
        "schema": "graphred-metrics-v1",
        "method": method,
        "sigma": sigma,
        "split": split,
        "n_samples": len(records),
        "params": params if method != "unrolled" else {"file": cfg["unrolled_params"]},
        "per_sample_rmse": per_sample,
        "mean_rmse": float(np.mean(per_sample)),
        "observed_rmse": float(np.mean(observed_rmse)),
    }
    _write_json(os.path.join(out_dir, "metrics.json"), metrics)
    print(f"{method} sigma={sigma:g} mean_rmse={metrics['mean_rmse']:.6g} (observed {metrics['observed_rmse']:.6g})")


def _resolve_train_init(cfg, K, kind) -> tuple[UnrolledParams, int]:
    init_cfg = cfg.get("init", {})
    if not isinstance(init_cfg, dict):
        raise ConfigError("train config 'init' must be an object")
    allowed = {"alpha_red", "alpha_denoiser", "rho", "tuned", "method", "params"}
    _check_keys(init_cfg, allowed, set(), "train init")
    start_epoch = int(cfg.get("start_epoch", 0))
    if "params" in init_cfg:
        params = load_params(init_cfg["params"])
        if params.K != K or params.denoiser_kind != kind:
            raise ConfigError("resume params do not match the configured K / denoiser")
        return params, start_epoch
    if "tuned" in init_cfg:
        method = init_cfg.get("method", "red_lr" if kind == "lr" else "red_pnp")
        scalars = _tuned_lookup(init_cfg["tuned"], method, float(cfg["sigma"]))
        alpha_den = scalars.get("alpha_lr", scalars.get("alpha_pnp"))
        return (
            UnrolledParams.constant(K, kind, scalars["alpha_red"], alpha_den, scalars.get("rho")),
            start_epoch,
        )
    alpha_red = float(init_cfg.get("alpha_red", 1.0))
    alpha_den = float(init_cfg.get("alpha_denoiser", 1.0))
    rho = float(init_cfg.get("rho", 1.0)) if kind == "pnp" else None
    return UnrolledParams.constant(K, kind, alpha_red, alpha_den, rho), start_epoch


def cmd_train(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {
        "dataset", "split", "sigma", "mode", "denoiser", "K", "epochs",
        "learning_rate", "seed", "gradient_method", "init", "start_epoch",
        "pnp_iters", "sigma_n2n_range",
    }
    _check_keys(cfg, allowed, {"dataset", "sigma"}, "train config")
    dataset = ds.load_dataset(cfg["dataset"])
    sigma = float(cfg["sigma"])
    records = dataset.split(cfg.get("split", "train"))
    if not records:
        raise ConfigError("train: selected split is empty")
    if not _records_share_graph(records):
        raise ConfigError("training expects records on a shared graph")
    kind = cfg.get("denoiser", "lr")
    if kind not in ("lr", "pnp"):
        raise ConfigError(f"unknown denoiser {kind!r}")
    K = int(cfg.get("K", DEFAULT_CG_LAYERS))
    mode = cfg.get("mode", "supervised")
    config = TrainConfig(
        mode=mode,
        learning_rate=float(cfg.get("learning_rate", 0.01)),
        epochs=int(cfg.get("epochs", 200)),
        sigma_n2n_range=(
            tuple(float(v) for v in cfg["sigma_n2n_range"]) if "sigma_n2n_range" in cfg else None
        ),
        seed=int(seed_override if seed_override is not None else cfg.get("seed", 0)),
        gradient_method=cfg.get("gradient_method", "finite_difference"),
    )
    init, start_epoch = _resolve_train_init(cfg, K, kind)
    lap, decomp = _graph_setup(records[0])
    y = _stack([np.asarray(r.observed[sigma], dtype=float) for r in records])
    target = _stack([np.asarray(r.clean, dtype=float) for r in records]) if mode == "supervised" else None
    samples = [TrainSample(y=y, target=target)]
    params, history = train(samples, config, init, lap, decomp=decomp, start_epoch=start_epoch)
    save_params(params, os.path.join(out_dir, "params.json"))
    save_loss_history(history, os.path.join(out_dir, "loss_history.csv"))
    clean = _stack([np.asarray(r.clean, dtype=float) for r in records])
    final_rmse = rmse(unrolled_forward(lap, y, params, decomp=decomp), clean)
    _write_json(
        os.path.join(out_dir, "train_report.json"),
        {
            "schema": "graphred-train-v1",
            "mode": mode,
            "denoiser": kind,
            "K": K,
            "sigma": sigma,
            "epochs": config.epochs,
            "start_epoch": start_epoch,
            "first_loss": history[0],
            "final_loss": history[-1],
            "train_rmse_vs_clean": final_rmse,
            "n_params": params.n_params,
        },
    )
    print(f"trained {kind} K={K} mode={mode}: loss {history[0]:.6g} -> {history[-1]:.6g}")


def cmd_check(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {
        "datasets", "methods", "alpha_lr", "alpha_pnp", "rho",
        "pnp_iters", "n_signals", "c", "seed",
    }
    _check_keys(cfg, allowed, {"datasets"}, "check config")
    methods = cfg.get("methods", ["lr", "pnp"])
    for m in methods:
        if m not in ("lr", "pnp"):
            raise ConfigError(f"check supports methods 'lr' and 'pnp', got {m!r}")
    seed = int(seed_override if seed_override is not None else cfg.get("seed", 0))
    n_signals = int(cfg.get("n_signals", 100))
    c = float(cfg.get("c", 1.1))
    rows = []
    for path in cfg["datasets"]:
        dataset = ds.load_dataset(path)
        records = dataset.train or dataset.test
        lap, decomp = _graph_setup(records[0])
        rng = np.random.default_rng(seed)
        for method in methods:
            if method == "lr":
                den = Denoiser(kind="lr", alpha=float(cfg.get("alpha_lr", 1.0)))
            else:
                den = Denoiser(
                    kind="pnp",
                    alpha=float(cfg.get("alpha_pnp", 1.0)),
                    rho=float(cfg.get("rho", 1.0)),
                    iters=int(cfg.get("pnp_iters", DEFAULT_PNP_ITERS)),
                )
            max_dev = 0.0
            max_ratio = 0.0
            for _ in range(n_signals):
                x = rng.standard_normal(lap.n_nodes)
                max_dev = max(max_dev, check_homogeneity(den, x, c, lap=lap, decomp=decomp))
                max_ratio = max(max_ratio, check_passivity(den, x, lap=lap, decomp=decomp))
            ones = np.ones(lap.n_nodes)
            rows.append(
                {
                    "dataset": str(path), "method": method, "probe": "random",
                    "n_signals": n_signals, "c": c,
                    "max_homogeneity_deviation": max_dev,
                    "max_passivity_ratio": max_ratio,
                }
            )
            rows.append(
                {
                    "dataset": str(path), "method": method, "probe": "all_ones", "c": c,
                    "homogeneity_deviation": check_homogeneity(den, ones, c, lap=lap, decomp=decomp),
                    "passivity_ratio": check_passivity(den, ones, lap=lap, decomp=decomp),
                }
            )
    _write_json(os.path.join(out_dir, "check_report.json"), {"schema": "graphred-check-v1", "rows": rows})
    worst = max(
        (r.get("max_passivity_ratio", r.get("passivity_ratio", 0.0)) for r in rows), default=0.0
    )
    print(f"checked {len(rows)} rows; worst passivity ratio {worst:.9g}")


def cmd_spectrum(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {"dataset", "alpha_red", "alpha_lr", "tuned", "sigma", "lambda_max", "n_points"}
    _check_keys(cfg, allowed, set(), "spectrum config")
    if "tuned" in cfg:
        if "sigma" not in cfg:
            raise ConfigError("spectrum: 'tuned' needs 'sigma' to select the entry")
        scalars = _tuned_lookup(cfg["tuned"], "red_lr", float(cfg["sigma"]))
        alpha_red, alpha_lr = scalars["alpha_red"], scalars["alpha_lr"]
        source_params = {"tuned": cfg["tuned"], "sigma": float(cfg["sigma"])}
    else:
        if "alpha_red" not in cfg or "alpha_lr" not in cfg:
            raise ConfigError("spectrum needs alpha_red and alpha_lr (or a tuned file)")
        alpha_red, alpha_lr = float(cfg["alpha_red"]), float(cfg["alpha_lr"])
        source_params = {"explicit": True}
    if "dataset" in cfg:
        dataset = ds.load_dataset(cfg["dataset"])
        records = dataset.train or dataset.test
        lap, decomp = _graph_setup(records[0])
        comparison = compare_responses(decomp, alpha_red, alpha_lr)
        source = {"kind": "dataset", "path": str(cfg["dataset"]), **source_params}
    else:
        lam = np.linspace(0.0, float(cfg.get("lambda_max", 10.0)), int(cfg.get("n_points", 200)))
        comparison = ResponseComparison(
            eigenvalues=lam,
            h_lr=h_lr(lam, alpha_lr).response,
            h_red=h_red(lam, alpha_red, alpha_lr).response,
            alpha_red=alpha_red,
            alpha_lr=alpha_lr,
        )
        source = {"kind": "grid", **source_params}
    os.makedirs(out_dir, exist_ok=True)
    write_response_csv(os.path.join(out_dir, "spectrum.csv"), comparison)
    _write_json(
        os.path.join(out_dir, "spectrum_meta.json"),
        {
            "schema": "graphred-spectrum-v1",
            "alpha_red": alpha_red,
            "alpha_lr": alpha_lr,
            "n_points": len(comparison.eigenvalues),
            "source": source,
        },
    )
    print(f"wrote spectrum.csv ({len(comparison.eigenvalues)} rows)")


def cmd_eval(cfg: dict, out_dir: str, seed_override, threads: int) -> None:
    allowed = {"dataset", "denoised", "split", "sigma", "method"}
    _check_keys(cfg, allowed, {"dataset", "denoised", "sigma"}, "eval config")
    dataset = ds.load_dataset(cfg["dataset"])
    sigma = float(cfg["sigma"])
    split = cfg.get("split", "test")
    records = dataset.split(split)
    per_sample = []
    observed_rmse = []
    for record in records:
        path = os.path.join(cfg["denoised"], f"sample_{record.index:03d}.csv")
        x = np.loadtxt(path, delimiter=",", ndmin=1)
        if x.shape != np.asarray(record.clean).shape:
            raise ConfigError(f"{path}: shape {x.shape} does not match dataset")
        per_sample.append(rmse(x, record.clean))
        observed_rmse.append(rmse(record.observed[sigma], record.clean))
    metrics = {
        "schema": "graphred-metrics-v1",
        "method": cfg.get("method", "unknown"),
        "sigma": sigma,
        "split": split,
        "n_samples": len(records),
        "per_sample_rmse": per_sample,
        "mean_rmse": float(np.mean(per_sample)),
        "observed_rmse": float(np.mean(observed_rmse)),
    }
    _write_json(os.path.join(out_dir, "metrics.json"), metrics)
    print(f"eval mean_rmse={metrics['mean_rmse']:.6g} over {len(records)} samples")


COMMANDS = {
    "generate": cmd_generate,
    "tune": cmd_tune,
    "denoise": cmd_denoise,
    "train": cmd_train,
    "check": cmd_check,
    "spectrum": cmd_spectrum,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads for per-sample work")
    parser = argparse.ArgumentParser(prog="graphred", description="Graph-signal denoising toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    args = parser.parse_args(argv)
    try:
        cfg = _load_json_config(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](cfg, args.out, args.seed, max(1, args.threads))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, TrainingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ParseError, InvalidGraphError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except GraphRedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
