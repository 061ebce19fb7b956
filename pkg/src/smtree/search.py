"""Range and k-nearest-neighbour search with covering-radius pruning.

A subtree rooted on router ``o`` with covering radius ``r`` can only contain
answers for a query ball ``(q, s)`` if ``d(q, o) <= s + r``; branches failing
that are pruned.  Nearest-neighbour search runs with a dynamic radius: it
starts unbounded and contracts to the current k-th best distance, visiting
pending subtrees in ascending optimistic lower bound ``max(0, d - r)``.

Queries are read-only and count their own page IOs (distinct pages, cold
infinite buffer) and distance evaluations.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .metric import DistanceCounter, distance
from .pagestore import IoLedger


@dataclass(frozen=True)
class Query:
    """Either a range query (``radius`` set) or a kNN query (``k`` set)."""

    center: np.ndarray
    radius: float | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        if (self.radius is None) == (self.k is None):
            raise ValueError("set exactly one of radius (range) or k (nearest)")
        if self.radius is not None and self.radius < 0:
            raise ValueError("range radius must be non-negative")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")

    @classmethod
    def within(cls, center, radius: float) -> "Query":
        return cls(np.asarray(center, dtype=np.float64), radius=float(radius))

    @classmethod
    def nearest(cls, center, k: int) -> "Query":
        return cls(np.asarray(center, dtype=np.float64), k=int(k))


@dataclass
class QueryStats:
    page_ios: int = 0
    distance_evals: int = 0


def range_query(tree, query: Query):
    """All stored objects within ``query.radius`` of the center (inclusive),
    as ``(object_id, distance)`` sorted by distance then id."""
    if query.radius is None:
        raise ValueError("range_query needs a range-form query")
    ledger = IoLedger()
    counter = DistanceCounter()
    cfg, fn = tree.metric_config, tree.metric_fn
    center = query.center
    results = []
    stack = [tree.root]
    while stack:
        node = tree.store.read(stack.pop(), ledger)
        if node.is_leaf:
            for e in node.entries:
                d = distance(center, e.vector, cfg, counter, fn)
                if d <= query.radius:
                    results.append((e.object_id, d))
        else:
            for e in node.entries:
                d = distance(center, e.routing_object, cfg, counter, fn)
                if d <= query.radius + e.covering_radius:
                    stack.append(e.child)
    results.sort(key=lambda r: (r[1], r[0]))
    return results, QueryStats(ledger.end_query(), counter.count)


def knn_query(tree, query: Query):
    """The ``k`` closest stored objects (all of them when k exceeds the tree),
    as ``(object_id, distance)`` sorted by distance."""
    if query.k is None:
        raise ValueError("knn_query needs a kNN-form query")
    k = query.k
    ledger = IoLedger()
    counter = DistanceCounter()
    cfg, fn = tree.metric_config, tree.metric_fn
    center = query.center

    # best holds (-distance, -arrival, id): the heap root is the current
    # k-th candidate, and among ties the latest arrival is evicted first
    best: list[tuple[float, int, int]] = []
    search_radius = math.inf
    pending = [(0.0, 0, tree.root)]
    seq = 1
    arrival = 0
    while pending:
        bound, _, pid = heapq.heappop(pending)
        if bound > search_radius:
            continue  # radius contracted since this subtree was queued
        node = tree.store.read(pid, ledger)
        if node.is_leaf:
            for e in node.entries:
                d = distance(center, e.vector, cfg, counter, fn)
                if len(best) < k:
                    heapq.heappush(best, (-d, -arrival, e.object_id))
                    arrival += 1
                    if len(best) == k:
                        search_radius = -best[0][0]
                elif d < search_radius:
                    heapq.heapreplace(best, (-d, -arrival, e.object_id))
                    arrival += 1
                    search_radius = -best[0][0]
        else:
            for e in node.entries:
                d = distance(center, e.routing_object, cfg, counter, fn)
                bound = d - e.covering_radius
                if bound < 0.0:
                    bound = 0.0
                if bound <= search_radius:
                    heapq.heappush(pending, (bound, seq, e.child))
                    seq += 1
    ordered = sorted((-nd, -na, oid) for nd, na, oid in best)
    return [(oid, d) for d, _, oid in ordered], QueryStats(ledger.end_query(), counter.count)
