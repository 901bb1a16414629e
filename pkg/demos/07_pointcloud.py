"""Denoise 3-D point cloud coordinates on a graph built from the cloud.

Loads the bundled torus mesh, downsamples it with farthest point sampling,
treats each coordinate channel as a graph signal, and denoises all three
channels at once (signals batch as matrix columns).  When only the noisy
cloud exists the graph itself must be rebuilt from noisy coordinates; the
comparison below shows the cost of that.
"""

import numpy as np

from graphred import (
    Denoiser,
    RedProblem,
    add_noise,
    build_laplacian,
    eigendecompose,
    fps,
    knn_graph,
    load_point_cloud,
    normalize_weights,
    red_cg_solve,
    rmse,
)


def main():
    cloud = load_point_cloud("data/torus.off")
    points = fps(cloud, 256)
    print(f"torus: {cloud.shape[0]} vertices, downsampled to {points.shape[0]} by FPS")

    noisy = add_noise(points, sigma=0.2, seed=4)
    print(f"coordinate noise rmse {rmse(noisy, points):.4f}")

    def denoise_on(graph_points, tag):
        lap = build_laplacian(normalize_weights(knn_graph(graph_points, k=5)))
        decomp = eigendecompose(lap)
        prob = RedProblem(
            y=noisy, alpha_red=10.0, denoiser=Denoiser(kind="lr", alpha=0.1), lap=lap, decomp=decomp
        )
        restored = red_cg_solve(prob, K=10).x
        print(f"denoised rmse ({tag}): {rmse(restored, points):.4f}")

    denoise_on(points, "graph from clean coordinates")
    denoise_on(noisy, "graph rebuilt from noisy coordinates")
    print("a graph from clean geometry recovers far more; rebuilding from the")
    print("noisy cloud blurs the neighborhoods the denoiser relies on.")


if __name__ == "__main__":
    main()
