"""Graph construction from point clouds.

k-nearest-neighbour graphs with inverse-distance weights, plus the weight
normalization that keeps regularization parameters comparable across graphs
of different scale.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DegenerateDistanceError, InvalidGraphError, NoEdgesError
from .graphs import Graph

# Two points closer than this are treated as coincident: an inverse-distance
# weight would blow up, so we refuse instead of silently clipping.
MIN_NEIGHBOR_DISTANCE = 1e-12


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def knn_graph(
    points: np.ndarray,
    k: int,
    weighted: bool = True,
    values: np.ndarray | None = None,
) -> Graph:
    """Symmetric k-nearest-neighbour graph over rows of ``points``.

    Each point is connected to its ``k`` nearest neighbours by Euclidean
    distance, and the directed neighbour sets are merged by union, so a node
    can end up with more than ``k`` edges.  Distance ties are broken toward
    the lower point index.  Weights are ``1 / distance`` when ``weighted``,
    else 1.  By default the weight distance is the coordinate distance;
    passing ``values`` (a per-node vector or scalar array) switches the
    weight formula to distances between signal values while neighbour
    selection still uses the coordinates.  Raises
    :class:`DegenerateDistanceError` if a weight distance of a selected pair
    falls below ``MIN_NEIGHBOR_DISTANCE``.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise InvalidGraphError(f"points must be a 2-d array, got shape {points.shape}")
    n = points.shape[0]
    if n < 2:
        raise InvalidGraphError("need at least 2 points")
    if not (1 <= k <= n - 1):
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    if not np.all(np.isfinite(points)):
        raise InvalidGraphError("points must be finite")

    # Dense pairwise distances; fine at the few-hundred-node scale this
    # toolkit targets.
    dist = _pairwise_distances(points)
    np.fill_diagonal(dist, np.inf)

    if values is None:
        weight_dist = dist
    else:
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != n:
            raise ValueError("values must have one row per point")
        weight_dist = _pairwise_distances(values)

    # Stable argsort breaks distance ties toward the lower index.
    order = np.argsort(dist, axis=1, kind="stable")
    neighbors = order[:, :k]

    adjacency = np.zeros((n, n))
    for i in range(n):
        for j in neighbors[i]:
            d = weight_dist[i, j]
            if weighted and d < MIN_NEIGHBOR_DISTANCE:
                raise DegenerateDistanceError(
                    f"points {i} and {j} are closer than {MIN_NEIGHBOR_DISTANCE:g}"
                )
            w = 1.0 / d if weighted else 1.0
            adjacency[i, j] = w
            adjacency[j, i] = w
    return Graph(adjacency=adjacency)


def normalize_weights(graph: Graph) -> Graph:
    """Rescale all weights so the maximum edge weight is 1.

    Solutions of the quadratic smoothing problems are invariant to a common
    rescaling of the weights and the regularization strength, so normalizing
    here lets one parameter range serve graphs built at different spatial
    scales.
    """
    w_max = graph.adjacency.max()
    if w_max <= 0:
        raise NoEdgesError("graph has no edges to normalize")
    return Graph(adjacency=graph.adjacency / w_max)
