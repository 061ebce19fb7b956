"""Node and entry model shared by both tree variants, the covering-radius
formulas, and the MinMax node split."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .metric import DistanceCounter, MetricConfig, chebyshev, distance, pairwise_distances


class NodeKind(IntEnum):
    LEAF = 0
    INTERNAL = 1


@dataclass(eq=False)
class DataObject:
    """An identified point of the metric space."""

    object_id: int
    vector: np.ndarray


@dataclass(eq=False)
class LeafEntry:
    """A stored object plus its precomputed distance to the parent router."""

    object_id: int
    vector: np.ndarray
    parent_distance: float = 0.0


@dataclass(eq=False)
class RoutingEntry:
    """Internal-node entry: router object, covering radius, child page."""

    routing_object: np.ndarray
    covering_radius: float
    parent_distance: float
    child: int


@dataclass(eq=False)
class Node:
    """A page-sized node holding either leaf or routing entries."""

    kind: NodeKind
    level: int  # 0 = leaf
    entries: list = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.kind == NodeKind.LEAF


def entry_vector(entry) -> np.ndarray:
    return entry.vector if isinstance(entry, LeafEntry) else entry.routing_object


def entry_id(entry) -> int:
    # leaf entries are identified by their object, routing entries by their child page
    return entry.object_id if isinstance(entry, LeafEntry) else entry.child


def radius_over_leaf_entries(
    router: np.ndarray,
    entries,
    cfg: MetricConfig,
    counter: DistanceCounter | None = None,
    fn=chebyshev,
) -> float:
    """Covering radius of a router over leaf entries: the farthest member."""
    if not entries:
        raise ValueError("covering radius over an empty entry set is undefined")
    return max(distance(router, e.vector, cfg, counter, fn) for e in entries)


def radius_over_routing_entries(
    router: np.ndarray,
    entries,
    cfg: MetricConfig,
    counter: DistanceCounter | None = None,
    fn=chebyshev,
) -> float:
    """Covering radius over routing entries: farthest member plus that
    member's own covering radius (the triangle-inequality limiting case)."""
    if not entries:
        raise ValueError("covering radius over an empty entry set is undefined")
    return max(
        distance(router, e.routing_object, cfg, counter, fn) + e.covering_radius
        for e in entries
    )


@dataclass
class SplitSide:
    """One half of a split: promoted router (a copy of a member's vector),
    its covering radius, and the member entries with refreshed parent
    distances."""

    router: np.ndarray
    radius: float
    entries: list


@dataclass
class SplitResult:
    left: SplitSide
    right: SplitSide


def minmax_split(
    entries,
    kind: NodeKind,
    cfg: MetricConfig,
    min_fill: int,
    counter: DistanceCounter | None = None,
    fn=chebyshev,
) -> SplitResult:
    """Partition an overflowing entry set around the promoted pair that
    minimises the larger of the two covering radii.

    Every unordered pair of members is evaluated as a candidate promotion.
    Remaining entries go to the nearer promoted object (ties to the currently
    smaller side, then left); a side short of ``min_fill`` steals the
    smallest-margin entries from its sibling.  Ties on the objective break by
    smaller radius sum, then by the promoted pair's ids.
    """
    m = len(entries)
    if m < 2:
        raise ValueError("cannot split fewer than two entries")
    fill = max(1, min(min_fill, m // 2))
    vecs = np.stack([entry_vector(e) for e in entries]).astype(np.float64, copy=False)
    dmat = pairwise_distances(vecs, cfg, counter, fn).tolist()
    radii = None if kind == NodeKind.LEAF else [e.covering_radius for e in entries]

    best_key = None
    best = None
    for i in range(m):
        row_i = dmat[i]
        for j in range(i + 1, m):
            row_j = dmat[j]
            left = [i]
            right = [j]
            for k in range(m):
                if k == i or k == j:
                    continue
                di = row_i[k]
                dj = row_j[k]
                if di < dj or (di == dj and len(left) <= len(right)):
                    left.append(k)
                else:
                    right.append(k)
            if len(left) < fill:
                _steal(left, right, row_i, row_j, j, fill)
            elif len(right) < fill:
                _steal(right, left, row_j, row_i, i, fill)
            if radii is None:
                rl = max(row_i[k] for k in left)
                rr = max(row_j[k] for k in right)
            else:
                rl = max(row_i[k] + radii[k] for k in left)
                rr = max(row_j[k] + radii[k] for k in right)
            promoted_ids = tuple(sorted((entry_id(entries[i]), entry_id(entries[j]))))
            key = (max(rl, rr), rl + rr, promoted_ids)
            if best_key is None or key < best_key:
                best_key = key
                best = (i, j, sorted(left), sorted(right), rl, rr)

    i, j, left, right, rl, rr = best
    left_entries = [entries[k] for k in left]
    right_entries = [entries[k] for k in right]
    for k, e in zip(left, left_entries):
        e.parent_distance = dmat[i][k]
    for k, e in zip(right, right_entries):
        e.parent_distance = dmat[j][k]
    return SplitResult(
        left=SplitSide(vecs[i].copy(), rl, left_entries),
        right=SplitSide(vecs[j].copy(), rr, right_entries),
    )


def _steal(short, donor, row_short, row_donor, donor_promoted, fill):
    # move the donor's smallest-margin entries across; never its promoted object
    movable = sorted(
        (abs(row_short[k] - row_donor[k]), k) for k in donor if k != donor_promoted
    )
    for _, k in movable[: fill - len(short)]:
        donor.remove(k)
        short.append(k)
