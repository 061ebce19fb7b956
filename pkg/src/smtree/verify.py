"""Whole-tree invariant checking and structure statistics.

``verify_tree`` recomputes everything a correct tree must satisfy: stored
parent distances, the covering-radius recurrence over immediate children,
containment of every leaf object in every ancestor's covering region,
height balance, and page occupancy bounds.  Classic-variant trees are
expected to break the radius recurrence (their radii track passed objects,
not children), so :meth:`VerificationReport.blocking` filters those out for
that variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import LeafEntry, NodeKind, RoutingEntry
from .metric import chebyshev
from .pagestore import UnknownPageError

RADIUS_REL_TOL = 1e-9
CONTAINMENT_SLACK = 1e-9
PARENT_DISTANCE_REL_TOL = 1e-12


@dataclass
class Violation:
    kind: str
    page_id: int
    entry_index: int | None
    message: str
    path: tuple[int, ...]

    def __str__(self) -> str:
        where = "/".join(str(p) for p in self.path)
        at = "" if self.entry_index is None else f" entry {self.entry_index}"
        return f"[{self.kind}] page {self.page_id}{at} (path {where}): {self.message}"


@dataclass
class VerificationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def of_kind(self, *kinds: str) -> list[Violation]:
        return [v for v in self.violations if v.kind in kinds]

    def blocking(self, variant: str) -> list[Violation]:
        """Violations that mean the tree is broken for its variant."""
        if variant == "classic":
            return [v for v in self.violations if v.kind != "radius-exactness"]
        return list(self.violations)

    def summary(self, limit: int = 20) -> str:
        if self.ok:
            return "no violations"
        lines = [f"{len(self.violations)} violation(s):"]
        lines += [str(v) for v in self.violations[:limit]]
        if len(self.violations) > limit:
            lines.append(f"... and {len(self.violations) - limit} more")
        return "\n".join(lines)


def _isclose(a: float, b: float, rel: float) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)


def verify_tree(tree) -> VerificationReport:
    report = VerificationReport()
    store = tree.store
    cfg = store.config
    n = tree.metric_config.active_dims
    fn = tree.metric_fn

    def dists(router: np.ndarray, mat: np.ndarray) -> np.ndarray:
        if len(mat) == 0:
            return np.zeros(0)
        if fn is chebyshev:
            return np.abs(mat[:, :n] - router[:n]).max(axis=1)
        return np.array([fn(router, row, n) for row in mat])

    def flag(kind, page_id, entry_index, message, path):
        report.violations.append(Violation(kind, page_id, entry_index, message, path))

    def walk(pid: int, parent_router, expected_level: int, path) -> np.ndarray:
        """Check one node and return the leaf vectors of its subtree."""
        path = path + (pid,)
        try:
            node = store.read(pid)
        except UnknownPageError:
            flag("integrity", pid, None, "referenced page is not live", path)
            return np.zeros((0, cfg.dim))

        if node.level != expected_level:
            flag("balance", pid, None,
                 f"level {node.level}, expected {expected_level}", path)
        if node.is_leaf != (node.level == 0):
            flag("balance", pid, None,
                 f"kind {node.kind.name} at level {node.level}", path)

        count = len(node.entries)
        cap = cfg.capacity(node.kind)
        if count > cap:
            flag("capacity", pid, None, f"{count} entries > capacity {cap}", path)
        is_root = parent_router is None
        if not is_root and count < cfg.min_fill(node.kind):
            flag("occupancy", pid, None,
                 f"{count} entries < minimum fill {cfg.min_fill(node.kind)}", path)
        if is_root and not node.is_leaf and count < 2:
            flag("occupancy", pid, None,
                 f"internal root with {count} entries should have collapsed", path)

        want = LeafEntry if node.is_leaf else RoutingEntry
        for i, e in enumerate(node.entries):
            if not isinstance(e, want):
                flag("entry-kind", pid, i, f"{type(e).__name__} in a "
                     f"{node.kind.name.lower()} node", path)
                return np.zeros((0, cfg.dim))

        if count:
            mat = np.stack([
                e.vector if node.is_leaf else e.routing_object for e in node.entries
            ])
        else:
            mat = np.zeros((0, cfg.dim))

        if is_root:
            for i, e in enumerate(node.entries):
                if e.parent_distance != 0.0:
                    flag("parent-distance", pid, i,
                         f"root entry stores parent distance {e.parent_distance}", path)
        else:
            recomputed = dists(parent_router, mat)
            for i, e in enumerate(node.entries):
                if not _isclose(e.parent_distance, float(recomputed[i]),
                                PARENT_DISTANCE_REL_TOL):
                    flag("parent-distance", pid, i,
                         f"stored {e.parent_distance!r} != recomputed "
                         f"{float(recomputed[i])!r}", path)

        if node.is_leaf:
            return mat

        subtrees = []
        for i, e in enumerate(node.entries):
            if e.covering_radius < 0:
                flag("radius", pid, i, f"negative radius {e.covering_radius}", path)
            leaf_mat = walk(e.child, e.routing_object, node.level - 1, path)
            subtrees.append(leaf_mat)
            try:
                child = store.read(e.child)
            except UnknownPageError:
                continue
            if child.entries:
                child_mat = np.stack([
                    c.vector if child.is_leaf else c.routing_object
                    for c in child.entries
                ])
                dd = dists(e.routing_object, child_mat)
                if child.is_leaf:
                    recurrence = float(dd.max())
                else:
                    radii = np.array([c.covering_radius for c in child.entries])
                    recurrence = float((dd + radii).max())
                if not _isclose(e.covering_radius, recurrence, RADIUS_REL_TOL):
                    flag("radius-exactness", pid, i,
                         f"stored {e.covering_radius!r} != child recurrence "
                         f"{recurrence!r}", path)
            if len(leaf_mat):
                worst = float(dists(e.routing_object, leaf_mat).max())
                if worst > e.covering_radius + CONTAINMENT_SLACK:
                    flag("containment", pid, i,
                         f"leaf object at {worst!r} outside radius "
                         f"{e.covering_radius!r}", path)
        return np.concatenate(subtrees) if subtrees else np.zeros((0, cfg.dim))

    root_level = store.read(tree.root).level
    walk(tree.root, None, root_level, ())
    return report


@dataclass
class TreeStats:
    height: int
    node_count: int
    leaf_count: int
    object_count: int
    nodes_per_level: dict[int, int]
    mean_occupancy: float
    occupancy_histogram: list[int]  # ten 10%-wide buckets
    max_abs_radius_residual: float
    max_rel_radius_residual: float

    def report(self) -> str:
        levels = ", ".join(
            f"L{lvl}:{cnt}" for lvl, cnt in sorted(self.nodes_per_level.items(), reverse=True)
        )
        hist = " ".join(str(c) for c in self.occupancy_histogram)
        return "\n".join([
            f"height           {self.height}",
            f"nodes            {self.node_count} ({levels})",
            f"leaf pages       {self.leaf_count}",
            f"objects          {self.object_count}",
            f"mean occupancy   {self.mean_occupancy:.4f}",
            f"occupancy hist   [{hist}] (10% buckets)",
            f"radius residual  max abs {self.max_abs_radius_residual:.3e}, "
            f"max rel {self.max_rel_radius_residual:.3e}",
        ])


def structure_stats(tree) -> TreeStats:
    store = tree.store
    cfg = store.config
    n = tree.metric_config.active_dims
    fn = tree.metric_fn

    nodes_per_level: dict[int, int] = {}
    occupancies = []
    histogram = [0] * 10
    objects = 0
    max_abs = 0.0
    max_rel = 0.0

    stack = [tree.root]
    while stack:
        node = store.read(stack.pop())
        nodes_per_level[node.level] = nodes_per_level.get(node.level, 0) + 1
        occ = len(node.entries) / cfg.capacity(node.kind)
        occupancies.append(occ)
        histogram[min(9, int(occ * 10))] += 1
        if node.is_leaf:
            objects += len(node.entries)
            continue
        for e in node.entries:
            child = store.read(e.child)
            stack.append(e.child)
            if not child.entries:
                continue
            mat = np.stack([
                c.vector if child.is_leaf else c.routing_object for c in child.entries
            ])
            if fn is chebyshev:
                dd = np.abs(mat[:, :n] - e.routing_object[:n]).max(axis=1)
            else:
                dd = np.array([fn(e.routing_object, row, n) for row in mat])
            if child.is_leaf:
                recurrence = float(dd.max())
            else:
                recurrence = float(
                    (dd + np.array([c.covering_radius for c in child.entries])).max()
                )
            residual = abs(e.covering_radius - recurrence)
            max_abs = max(max_abs, residual)
            if recurrence > 0:
                max_rel = max(max_rel, residual / recurrence)
            elif residual > 0:
                max_rel = max(max_rel, math.inf)

    height = store.read(tree.root).level
    node_count = sum(nodes_per_level.values())
    return TreeStats(
        height=height,
        node_count=node_count,
        leaf_count=nodes_per_level.get(0, 0),
        object_count=objects,
        nodes_per_level=nodes_per_level,
        mean_occupancy=float(np.mean(occupancies)) if occupancies else 0.0,
        occupancy_histogram=histogram,
        max_abs_radius_residual=max_abs,
        max_rel_radius_residual=max_rel,
    )
