"""Synthetic data generation, point sampling, and dataset bundles on disk.

The synthetic protocol: uniform sensor positions in a square, a normalized
inverse-distance kNN graph, one bandlimited signal shared by all samples,
and per-sample white-Gaussian observations at several noise levels.  Point
clouds enter through CSV/OFF readers, get thinned by farthest point
sampling, and use their coordinates as a 3-channel signal.

All randomness goes through PCG64 generators keyed by
``SeedSequence([seed, split, sample, stream, ...])`` so every artifact is
reproducible from the manifest alone; signals are written with ``%.17g``
which round-trips float64 exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .construct import knn_graph, normalize_weights
from .exceptions import ConfigError, NumericalError, ParseError
from .graphs import Graph, SpectralDecomp, build_laplacian, eigendecompose, load_edge_list, save_edge_list

MANIFEST_SCHEMA = "graphred-dataset-v1"

# RNG stream tags (documented scheme: SeedSequence([seed, split, sample, stream, ...])).
STREAM_POINTS = 0
STREAM_NOISE = 2
SPLIT_CODES = {"train": 0, "test": 1}


def generate_sensor_points(n: int, side: float = 100.0, seed: int = 0) -> np.ndarray:
    """n i.i.d. uniform positions in the square [0, side]^2."""
    if n < 2:
        raise ValueError("need n >= 2 points")
    if side <= 0:
        raise ValueError("side must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([seed, STREAM_POINTS]))
    return rng.uniform(0.0, side, size=(n, 2))


def generate_bandlimited(decomp: SpectralDecomp, n_band: int = 3, offset: float = 2.0) -> np.ndarray:
    """Bandlimited signal spanned by the n_band lowest-frequency eigenvectors.

    Coefficients are d_k = sin(k pi / n_band) + offset for k = 1..n_band;
    everything above frequency n_band is exactly zero.
    """
    n = decomp.n_nodes
    if not (1 <= n_band <= n):
        raise ValueError(f"n_band must be in [1, {n}], got {n_band}")
    k = np.arange(1, n_band + 1)
    d = np.sin(k * np.pi / n_band) + offset
    return decomp.basis[:, :n_band] @ d


def add_noise(x: np.ndarray, sigma: float, seed) -> np.ndarray:
    """White Gaussian noise: ``y = x + N(0, sigma^2)`` elementwise.

    ``seed`` is an integer, a SeedSequence, or a Generator to draw from.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    x = np.asarray(x, dtype=float)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return x + sigma * rng.standard_normal(x.shape)


def fps(points: np.ndarray, m: int, start: int = 0) -> np.ndarray:
    """Farthest point sampling: greedy max-min subset of m points.

    Starting from index ``start``, repeatedly adds the point farthest from
    the already-selected set (ties go to the lower index).
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not (1 <= m <= n):
        raise ValueError(f"m must be in [1, {n}], got {m}")
    if not (0 <= start < n):
        raise ValueError(f"start must be in [0, {n - 1}]")
    selected = [start]
    min_dist = np.linalg.norm(points - points[start], axis=1)
    for _ in range(m - 1):
        nxt = int(np.argmax(min_dist))
        selected.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(points - points[nxt], axis=1))
    return points[np.array(selected)]


def save_point_cloud(points: np.ndarray, path) -> None:
    np.savetxt(path, np.asarray(points, dtype=float), fmt="%.17g", delimiter=",")


def _load_csv_points(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                row = [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"bad number: {exc}", path=str(path), line=line_no) from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f"expected {width} columns, got {len(row)}", path=str(path), line=line_no
                )
            rows.append(row)
    if not rows:
        raise ParseError("no points found", path=str(path), line=0)
    return np.array(rows)


def _load_off_points(path) -> np.ndarray:
    """Vertices of an OFF mesh; the face block is ignored."""
    with open(path, "r", encoding="ascii") as fh:
        lines = list(fh)

    def meaningful():
        for line_no, raw in enumerate(lines, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield line_no, text

    stream = meaningful()
    try:
        line_no, header = next(stream)
    except StopIteration:
        raise ParseError("empty OFF file", path=str(path), line=0) from None
    if not header.startswith("OFF"):
        raise ParseError("missing OFF header", path=str(path), line=line_no)
    rest = header[3:].split()
    if not rest:
        try:
            line_no, counts_text = next(stream)
        except StopIteration:
            raise ParseError("missing OFF counts line", path=str(path), line=line_no) from None
        rest = counts_text.split()
    if len(rest) != 3:
        raise ParseError("OFF counts line needs 3 integers", path=str(path), line=line_no)
    try:
        n_vertices = int(rest[0])
    except ValueError as exc:
        raise ParseError(f"bad vertex count: {exc}", path=str(path), line=line_no) from exc
    if n_vertices < 1:
        raise ParseError("OFF file declares no vertices", path=str(path), line=line_no)

    points = []
    for _ in range(n_vertices):
        try:
            line_no, text = next(stream)
        except StopIteration:
            raise ParseError(
                f"expected {n_vertices} vertices, file ended early", path=str(path), line=len(lines)
            ) from None
        parts = text.split()
        if len(parts) < 3:
            raise ParseError("vertex line needs 3 coordinates", path=str(path), line=line_no)
        try:
            points.append([float(v) for v in parts[:3]])
        except ValueError as exc:
            raise ParseError(f"bad coordinate: {exc}", path=str(path), line=line_no) from exc
    return np.array(points)


def load_point_cloud(path, format: str | None = None) -> np.ndarray:
    """Read points from CSV (one point per row) or OFF (faces skipped)."""
    if format is None:
        ext = os.path.splitext(str(path))[1].lower()
        format = "off" if ext == ".off" else "csv"
    if format == "csv":
        return _load_csv_points(path)
    if format == "off":
        return _load_off_points(path)
    raise ValueError(f"unknown point-cloud format {format!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic sensor-graph protocol."""

    n_nodes: int = 100
    side: float = 100.0
    k: int = 5
    n_band: int = 3
    offset: float = 2.0
    sigmas: tuple = (10.0, 15.0, 20.0, 25.0, 30.0)
    n_train: int = 10
    n_test: int = 5
    seed: int = 0


@dataclass(frozen=True)
class DatasetRecord:
    """One sample: its graph, the clean signal, and observations per sigma."""

    graph: Graph
    clean: np.ndarray
    observed: dict
    split: str
    index: int


@dataclass(frozen=True)
class Dataset:
    manifest: dict
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)

    def split(self, name: str) -> list:
        if name not in SPLIT_CODES:
            raise ValueError(f"unknown split {name!r}")
        return self.train if name == "train" else self.test

    @property
    def sigmas(self):
        return [float(s) for s in self.manifest["sigmas"]]


def _checked_noise(clean, sigma, rng):
    y = add_noise(clean, sigma, rng)
    if sigma > 0 and clean.size >= 50:
        std = float(np.sqrt(np.mean((y - clean) ** 2)))
        # ~7 standard errors at N=100; only a wiring bug can trip this.
        if abs(std - sigma) > 0.5 * sigma:
            raise NumericalError(
                f"generated noise std {std:.3g} inconsistent with sigma {sigma:.3g}"
            )
    return y


def generate_synthetic_dataset(spec: SyntheticSpec) -> Dataset:
    """Full synthetic protocol: points, graph, signal, noisy splits."""
    points = generate_sensor_points(spec.n_nodes, spec.side, spec.seed)
    graph = normalize_weights(knn_graph(points, spec.k))
    decomp = eigendecompose(build_laplacian(graph))
    clean = generate_bandlimited(decomp, spec.n_band, spec.offset)
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "kind": "synthetic",
        "seed": spec.seed,
        "n_nodes": spec.n_nodes,
        "side": spec.side,
        "k": spec.k,
        "n_band": spec.n_band,
        "offset": spec.offset,
        "sigmas": [float(s) for s in spec.sigmas],
        "n_train": spec.n_train,
        "n_test": spec.n_test,
        "rng": "pcg64 seeded by SeedSequence([seed, split, sample, stream, sigma_index])",
    }
    splits = {"train": [], "test": []}
    for split, count in (("train", spec.n_train), ("test", spec.n_test)):
        code = SPLIT_CODES[split]
        for idx in range(count):
            observed = {}
            for s_idx, sigma in enumerate(spec.sigmas):
                rng = np.random.default_rng(
                    np.random.SeedSequence([spec.seed, code, idx, STREAM_NOISE, s_idx])
                )
                observed[float(sigma)] = _checked_noise(clean, float(sigma), rng)
            splits[split].append(
                DatasetRecord(graph=graph, clean=clean, observed=observed, split=split, index=idx)
            )
    return Dataset(manifest=manifest, train=splits["train"], test=splits["test"])


def generate_pointcloud_dataset(
    points: np.ndarray,
    sigmas,
    m: int = 500,
    k: int = 5,
    n_train: int = 10,
    n_test: int = 5,
    seed: int = 0,
    start: int = 0,
) -> Dataset:
    """Dataset whose clean signal is the (FPS-thinned) coordinates themselves.

    Samples are independent noise realizations of the same cloud; the stored
    graph is built from the clean coordinates (rebuilding from observed
    coordinates is a denoising-time choice).
    """
    points = np.asarray(points, dtype=float)
    m = min(m, points.shape[0])
    sampled = fps(points, m, start=start)
    graph = normalize_weights(knn_graph(sampled, k))
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "kind": "pointcloud",
        "seed": seed,
        "n_nodes": int(sampled.shape[0]),
        "dims": int(sampled.shape[1]),
        "k": k,
        "fps_m": m,
        "fps_start": start,
        "sigmas": [float(s) for s in sigmas],
        "n_train": n_train,
        "n_test": n_test,
        "rng": "pcg64 seeded by SeedSequence([seed, split, sample, stream, sigma_index])",
    }
    splits = {"train": [], "test": []}
    for split, count in (("train", n_train), ("test", n_test)):
        code = SPLIT_CODES[split]
        for idx in range(count):
            observed = {}
            for s_idx, sigma in enumerate(sigmas):
                rng = np.random.default_rng(
                    np.random.SeedSequence([seed, code, idx, STREAM_NOISE, s_idx])
                )
                observed[float(sigma)] = _checked_noise(sampled, float(sigma), rng)
            splits[split].append(
                DatasetRecord(graph=graph, clean=sampled, observed=observed, split=split, index=idx)
            )
    return Dataset(manifest=manifest, train=splits["train"], test=splits["test"])


def _sigma_name(sigma: float) -> str:
    return f"observed_sigma{sigma:g}.csv"


def _save_signal(path, signal) -> None:
    np.savetxt(path, np.asarray(signal, dtype=float), fmt="%.17g", delimiter=",")


def _load_signal(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=1)


def save_dataset(dataset: Dataset, out_dir) -> None:
    """Bundle layout: manifest.json plus per-sample directories per split.

    Each sample directory holds ``graph.edges``, ``clean.csv``, and one
    ``observed_sigma{s}.csv`` per noise level.
    """
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="ascii") as fh:
        json.dump(dataset.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for split in ("train", "test"):
        for record in dataset.split(split):
            sample_dir = os.path.join(out_dir, split, f"sample_{record.index:03d}")
            os.makedirs(sample_dir, exist_ok=True)
            save_edge_list(record.graph, os.path.join(sample_dir, "graph.edges"))
            _save_signal(os.path.join(sample_dir, "clean.csv"), record.clean)
            for sigma, y in sorted(record.observed.items()):
                _save_signal(os.path.join(sample_dir, _sigma_name(sigma)), y)


def load_dataset(path) -> Dataset:
    manifest_path = os.path.join(path, "manifest.json")
    try:
        with open(manifest_path, "r", encoding="ascii") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad manifest JSON: {exc}", path=manifest_path, line=exc.lineno) from exc
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise ConfigError(
            f"unsupported dataset schema {manifest.get('schema')!r} (expected {MANIFEST_SCHEMA})"
        )
    n_nodes = int(manifest["n_nodes"])
    sigmas = [float(s) for s in manifest["sigmas"]]
    splits = {"train": [], "test": []}
    for split, count_key in (("train", "n_train"), ("test", "n_test")):
        for idx in range(int(manifest[count_key])):
            sample_dir = os.path.join(path, split, f"sample_{idx:03d}")
            graph = load_edge_list(os.path.join(sample_dir, "graph.edges"), n_nodes=n_nodes)
            clean = _load_signal(os.path.join(sample_dir, "clean.csv"))
            observed = {
                sigma: _load_signal(os.path.join(sample_dir, _sigma_name(sigma)))
                for sigma in sigmas
            }
            splits[split].append(
                DatasetRecord(graph=graph, clean=clean, observed=observed, split=split, index=idx)
            )
    return Dataset(manifest=manifest, train=splits["train"], test=splits["test"])
