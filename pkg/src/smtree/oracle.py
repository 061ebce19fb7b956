"""Brute-force ground truth.

These deliberately share no traversal code with the tree: queries are linear
scans over the raw objects, the metric is re-stated inline as a max of
coordinate gaps, and the exact covering radius walks the raw pages directly.
They are meant for tests and desk-scale cross-checks, never the query path.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .metric import MetricConfig


def _scan_distances(objects, center: np.ndarray, n: int) -> np.ndarray:
    mat = np.stack([o.vector[:n] for o in objects])
    return np.abs(mat - center[:n]).max(axis=1)


def scan_range(objects, query, cfg: MetricConfig) -> set[int]:
    """Ids of all objects within the query radius, by linear scan."""
    if query.radius is None:
        raise ValueError("scan_range needs a range-form query")
    if not objects:
        return set()
    dist = _scan_distances(objects, query.center, cfg.active_dims)
    return {o.object_id for o, d in zip(objects, dist) if d <= query.radius}


def scan_knn(objects, query, cfg: MetricConfig) -> list[float]:
    """The k smallest distances to the query center, ascending, by full sort."""
    if query.k is None:
        raise ValueError("scan_knn needs a kNN-form query")
    if not objects:
        return []
    dist = _scan_distances(objects, query.center, cfg.active_dims)
    return np.sort(dist)[: query.k].tolist()


def exact_covering_radius(tree, entry) -> float:
    """True farthest leaf distance from a routing entry's router, by walking
    its whole subtree."""
    n = tree.metric_config.active_dims
    center = entry.routing_object[:n]
    farthest = 0.0
    queue = deque([entry.child])
    while queue:
        node = tree.store.read(queue.popleft())
        if node.is_leaf:
            if node.entries:
                mat = np.stack([e.vector[:n] for e in node.entries])
                farthest = max(farthest, float(np.abs(mat - center).max(axis=1).max()))
        else:
            queue.extend(e.child for e in node.entries)
    return farthest
