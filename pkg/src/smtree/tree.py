"""Paged, balanced metric tree over a page store.

Two maintenance variants share the node model and split policy:

* ``sm`` (symmetric): covering radii are returned upward by both insert and
  delete, so every routing entry's radius always equals the recurrence over
  its immediate children.  This is what makes deletion (with underflow
  merging) possible.
* ``classic``: the historical insert that expands radii on the way down;
  it supports no delete.

Both inserts pick pages, split on overflow and keep the tree height-balanced;
all mutations are O(height) node visits apart from delete's zero-radius
fan-out.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import classic
from .core import (
    DataObject,
    LeafEntry,
    Node,
    NodeKind,
    RoutingEntry,
    entry_vector,
    minmax_split,
)
from .metric import DimensionMismatchError, DistanceCounter, MetricConfig, chebyshev, distance
from .pagestore import PageConfig, PageStore, StoreMeta, load_store

VARIANTS = ("sm", "classic")


class Orphans(NamedTuple):
    """Entries of an underflown node, returned upward for merging."""

    entries: list


class Tree:
    """Root handle plus per-variant maintenance behaviour."""

    def __init__(
        self,
        store: PageStore,
        root_id: int,
        variant: str = "sm",
        active_dims: int | None = None,
        metric_fn=chebyshev,
    ) -> None:
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        self.store = store
        self.root = root_id
        self.variant = variant
        dims = store.config.dim if active_dims is None else active_dims
        if dims > store.config.dim:
            raise DimensionMismatchError(
                f"active_dims {dims} exceeds stored dimension {store.config.dim}"
            )
        self.metric_config = MetricConfig(dims)
        self.metric_fn = metric_fn
        self.counter = DistanceCounter()  # session-wide distance evaluations
        self.size = 0
        # mutation instrumentation: node pages touched per operation
        self._visits = 0
        self.insert_count = 0
        self.insert_visits = 0
        self.delete_count = 0
        self.delete_visits = 0
        self.last_visits = 0

    # ------------------------------------------------------------------
    # construction / persistence

    @classmethod
    def create(
        cls,
        config: PageConfig | None = None,
        variant: str = "sm",
        active_dims: int | None = None,
        metric_fn=chebyshev,
    ) -> "Tree":
        store = PageStore(config or PageConfig())
        root = store.allocate(NodeKind.LEAF, level=0)
        return cls(store, root, variant, active_dims, metric_fn)

    @classmethod
    def from_objects(
        cls,
        objects,
        config: PageConfig | None = None,
        variant: str = "sm",
        active_dims: int | None = None,
        metric_fn=chebyshev,
    ) -> "Tree":
        tree = cls.create(config, variant, active_dims, metric_fn)
        for obj in objects:
            tree.insert(obj)
        return tree

    def save(self, path) -> None:
        self.store.persist(
            path, StoreMeta(self.root, self.variant, self.metric_config.active_dims)
        )

    @classmethod
    def load(cls, path, metric_fn=chebyshev) -> "Tree":
        store, meta = load_store(path)
        store.read(meta.root_id)  # raises UnknownPageError on a bad root
        tree = cls(store, meta.root_id, meta.variant, meta.active_dims, metric_fn)
        tree.size = sum(len(n.entries) for n in store.pages.values() if n.is_leaf)
        return tree

    # ------------------------------------------------------------------
    # basics

    @property
    def height(self) -> int:
        return self.store.read(self.root).level

    def __len__(self) -> int:
        return self.size

    def objects(self):
        """Yield every stored object, leaf by leaf."""
        stack = [self.root]
        while stack:
            node = self.store.read(stack.pop())
            if node.is_leaf:
                for e in node.entries:
                    yield DataObject(e.object_id, e.vector)
            else:
                stack.extend(e.child for e in reversed(node.entries))

    def verify(self):
        from .verify import verify_tree

        return verify_tree(self)

    # ------------------------------------------------------------------
    # shared plumbing

    def _dist(self, x, y) -> float:
        return distance(x, y, self.metric_config, self.counter, self.metric_fn)

    def _node(self, pid: int) -> Node:
        self._visits += 1
        return self.store.read(pid)

    def _check_vector(self, vector) -> np.ndarray:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.shape != (self.store.config.dim,):
            raise DimensionMismatchError(
                f"object vector has shape {vec.shape}, tree stores "
                f"{self.store.config.dim}-dimensional vectors"
            )
        return vec

    def _upward_radius(self, node: Node) -> float:
        """Covering radius of this node as seen from its parent's router."""
        if node.is_leaf:
            return max((e.parent_distance for e in node.entries), default=0.0)
        return max(e.parent_distance + e.covering_radius for e in node.entries)

    def _leaf_add(self, pid: int, node: Node, parent_router, object_id: int, vec):
        pd = 0.0 if parent_router is None else self._dist(vec, parent_router)
        entry = LeafEntry(object_id, vec.copy(), pd)
        if len(node.entries) < self.store.config.leaf_capacity:
            node.entries.append(entry)
            self.store.write(pid, node)
            return max(e.parent_distance for e in node.entries)
        return self._split_node(pid, node, node.entries + [entry])

    def _split_node(self, pid: int, node: Node, entries) -> tuple[RoutingEntry, RoutingEntry]:
        """Split ``entries`` across the existing page and a fresh one; the
        callers place the returned routing entries and set their parent
        distances."""
        cfg = self.store.config
        result = minmax_split(
            entries, node.kind, self.metric_config, cfg.min_fill(node.kind),
            self.counter, self.metric_fn,
        )
        right_pid = self.store.allocate(node.kind, node.level)
        self._visits += 1
        self.store.write(pid, Node(node.kind, node.level, result.left.entries))
        self.store.write(right_pid, Node(node.kind, node.level, result.right.entries))
        return (
            RoutingEntry(result.left.router, result.left.radius, 0.0, pid),
            RoutingEntry(result.right.router, result.right.radius, 0.0, right_pid),
        )

    def _absorb_promotion(self, pid, node, at, promoted, parent_router):
        """Replace entry ``at`` with the two promoted entries, splitting this
        node too if they no longer fit."""
        node.entries.pop(at)
        for e in promoted:
            e.parent_distance = (
                0.0 if parent_router is None else self._dist(e.routing_object, parent_router)
            )
            node.entries.append(e)
        if len(node.entries) <= self.store.config.internal_capacity:
            self.store.write(pid, node)
            return self._upward_radius(node)
        return self._split_node(pid, node, node.entries)

    def _grow_root(self, promoted) -> None:
        level = self.store.read(self.root).level + 1
        pid = self.store.allocate(NodeKind.INTERNAL, level)
        self._visits += 1
        self.store.write(pid, Node(NodeKind.INTERNAL, level, list(promoted)))
        self.root = pid

    # ------------------------------------------------------------------
    # insert

    def insert(self, obj: DataObject) -> None:
        vec = self._check_vector(obj.vector)
        self._visits = 0
        if self.variant == "sm":
            result = self._sm_insert(self.root, None, obj.object_id, vec)
            promoted = result if isinstance(result, tuple) else None
        else:
            promoted = classic.descend_insert(self, self.root, None, obj.object_id, vec)
        if promoted is not None:
            self._grow_root(promoted)
        self.size += 1
        self.insert_count += 1
        self.insert_visits += self._visits
        self.last_visits = self._visits

    def _sm_insert(self, pid: int, parent_router, object_id: int, vec):
        """Returns the subtree's new covering radius, or the promoted pair
        when this node split."""
        node = self._node(pid)
        if node.is_leaf:
            return self._leaf_add(pid, node, parent_router, object_id, vec)
        # descend into the closest router; ties take the lowest entry index
        dists = [self._dist(e.routing_object, vec) for e in node.entries]
        at = min(range(len(dists)), key=dists.__getitem__)
        entry = node.entries[at]
        sub = self._sm_insert(entry.child, entry.routing_object, object_id, vec)
        if isinstance(sub, tuple):
            return self._absorb_promotion(pid, node, at, sub, parent_router)
        if sub > entry.covering_radius:
            entry.covering_radius = sub
        self.store.write(pid, node)
        return self._upward_radius(node)

    # ------------------------------------------------------------------
    # delete

    def delete(self, obj: DataObject) -> bool:
        """Remove one leaf entry matching the object's id and full vector.

        Returns whether a deletion happened; an absent object leaves the tree
        untouched.
        """
        if self.variant != "sm":
            raise ValueError("delete is only supported by the sm variant")
        vec = self._check_vector(obj.vector)
        self._visits = 0
        result = self._sm_delete(self.root, None, obj.object_id, vec)
        if result is None:
            return False
        # an internal root left with a single entry hands the root to its child
        while True:
            root = self.store.read(self.root)
            if root.is_leaf or len(root.entries) > 1:
                break
            child_pid = root.entries[0].child
            self.store.free(self.root)
            self.root = child_pid
            child = self.store.read(child_pid)
            for e in child.entries:
                e.parent_distance = 0.0
            self.store.write(child_pid, child)
        self.size -= 1
        self.delete_count += 1
        self.delete_visits += self._visits
        self.last_visits = self._visits
        return True

    def _sm_delete(self, pid: int, parent_router, object_id: int, vec):
        """Returns None when nothing was deleted below, the subtree's new
        covering radius, or the node's orphaned entries on underflow."""
        node = self._node(pid)
        min_fill = self.store.config.min_fill(node.kind)
        if node.is_leaf:
            at = next(
                (
                    i
                    for i, e in enumerate(node.entries)
                    if e.object_id == object_id and np.array_equal(e.vector, vec)
                ),
                None,
            )
            if at is None:
                return None
            node.entries.pop(at)
            if parent_router is not None and len(node.entries) < min_fill:
                return Orphans(node.entries)
            self.store.write(pid, node)
            return self._upward_radius(node)
        # zero-radius descent: only routers whose region can contain the object,
        # nearest first, stopping at the first hit
        candidates = sorted(
            (self._dist(vec, e.routing_object), i)
            for i, e in enumerate(node.entries)
            if self._covers(node.entries[i], vec)
        )
        for _, at in candidates:
            entry = node.entries[at]
            result = self._sm_delete(entry.child, entry.routing_object, object_id, vec)
            if result is None:
                continue
            if isinstance(result, Orphans):
                if len(node.entries) == 1:
                    # no sibling to repair against; only the root can get here
                    self.store.free(entry.child)
                    self._shrink_root(pid, node, result.entries)
                    return 0.0
                self._merge_orphans(node, at, result.entries, parent_router)
            else:
                entry.covering_radius = result  # exact, so it may contract
            self.store.write(pid, node)
            if parent_router is not None and len(node.entries) < min_fill:
                return Orphans(node.entries)
            return self._upward_radius(node)
        return None

    def _covers(self, entry: RoutingEntry, vec) -> bool:
        return self._dist(vec, entry.routing_object) <= entry.covering_radius

    def _merge_orphans(self, node, at, orphans, parent_router) -> None:
        """Repair an underflow against the nearest sibling routing entry.

        When the sibling's child can spare entries above its own fill floor,
        the underflown child borrows the ones closest to its router, so
        draining pages hover just above the floor instead of oscillating
        between consolidated-full and underflown.  A sibling with nothing to
        spare absorbs the orphans outright, and a combined set too large for
        one page is replaced by a fresh split of both siblings.
        """
        entry = node.entries[at]
        _, nn_at = min(
            (self._dist(entry.routing_object, e.routing_object), i)
            for i, e in enumerate(node.entries)
            if i != at
        )
        nn = node.entries[nn_at]
        child = self._node(nn.child)
        cfg = self.store.config
        total = len(child.entries) + len(orphans)
        min_fill = cfg.min_fill(child.kind)

        if total > cfg.capacity(child.kind):
            self.store.free(entry.child)
            merged = child.entries + orphans
            hi, lo = max(at, nn_at), min(at, nn_at)
            node.entries.pop(hi)
            node.entries.pop(lo)
            for e in self._split_node(nn.child, child, merged):
                e.parent_distance = (
                    0.0 if parent_router is None
                    else self._dist(e.routing_object, parent_router)
                )
                node.entries.append(e)
            return

        if total < 2 * min_fill:
            self.store.free(entry.child)
            node.entries.pop(at)
            for e in orphans:
                e.parent_distance = self._dist(entry_vector(e), nn.routing_object)
                child.entries.append(e)
            self.store.write(nn.child, child)
            nn.covering_radius = self._upward_radius(child)
            return

        # borrow: move the sibling entries closest to the underflown router
        scored = sorted(
            (self._dist(entry_vector(e), entry.routing_object), i)
            for i, e in enumerate(child.entries)
        )
        taken = scored[: min_fill - len(orphans)]
        taken_idx = {i for _, i in taken}
        refilled = list(orphans)
        for pd, i in taken:
            moved = child.entries[i]
            moved.parent_distance = pd
            refilled.append(moved)
        child.entries = [e for i, e in enumerate(child.entries) if i not in taken_idx]
        under = Node(child.kind, child.level, refilled)
        self.store.write(entry.child, under)
        self.store.write(nn.child, child)
        entry.covering_radius = self._upward_radius(under)
        nn.covering_radius = self._upward_radius(child)

    def _shrink_root(self, pid, node, orphans) -> None:
        # reinstall the orphans one level down and drop the old root page
        level = node.level - 1
        kind = NodeKind.LEAF if level == 0 else NodeKind.INTERNAL
        new_pid = self.store.allocate(kind, level)
        self._visits += 1
        for e in orphans:
            e.parent_distance = 0.0
        self.store.write(new_pid, Node(kind, level, list(orphans)))
        self.store.free(pid)
        self.root = new_pid
