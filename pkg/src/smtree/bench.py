"""Experiment drivers shared by the CLI and the acceptance suite.

The query protocol per tree: for each k in ``ks`` run the kNN queries, then
re-run each as a range query whose radius is that query's k-th neighbour
distance (which must return the same result set), plus zero-radius lookups
of stored objects and the sequential-scan floor (leaf page count).  All
figures are means over the query batch.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .datagen import GenSpec, query_vectors
from .pagestore import PageConfig
from .search import Query, knn_query, range_query
from .tree import Tree
from .verify import TreeStats, VerificationReport, structure_stats, verify_tree

CSV_FIELDS = ("variant", "dims", "querytype", "param", "mean_io", "mean_dist_evals")


@dataclass
class BenchRow:
    variant: str
    dims: int
    querytype: str
    param: str
    mean_io: float
    mean_dist_evals: float

    def as_csv(self) -> list[str]:
        return [
            self.variant,
            str(self.dims),
            self.querytype,
            self.param,
            f"{self.mean_io:.4f}",
            f"{self.mean_dist_evals:.4f}",
        ]


def write_csv(rows, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow(row.as_csv())


def leaf_page_count(tree: Tree) -> int:
    """Pages a sequential scan of the leaf level would read."""
    return sum(1 for node in tree.store.pages.values() if node.is_leaf)


def knn_suite(tree: Tree, centers, k: int):
    """Run one kNN query per center; returns mean IO, mean distance
    evaluations, and each query's k-th neighbour distance."""
    ios, evals, kth = [], [], []
    for center in centers:
        results, stats = knn_query(tree, Query.nearest(center, k))
        ios.append(stats.page_ios)
        evals.append(stats.distance_evals)
        kth.append(results[-1][1] if results else 0.0)
    return float(np.mean(ios)), float(np.mean(evals)), kth


def range_suite(tree: Tree, centers, radii):
    ios, evals = [], []
    for center, radius in zip(centers, radii):
        _, stats = range_query(tree, Query.within(center, radius))
        ios.append(stats.page_ios)
        evals.append(stats.distance_evals)
    return float(np.mean(ios)), float(np.mean(evals))


def stored_query_objects(objects, count: int, rng_seed: int):
    """Deterministic sample of stored objects for exact-match queries."""
    rng = np.random.default_rng(rng_seed)
    if count <= len(objects):
        picks = rng.choice(len(objects), size=count, replace=False)
    else:
        picks = rng.integers(0, len(objects), size=count)
    return [objects[i] for i in picks]


def run_benchmark(
    tree: Tree,
    objects,
    spec: GenSpec,
    ks=(1, 10, 50),
    queries: int = 100,
    rng_seed: int = 20_040_101,
) -> list[BenchRow]:
    centers = query_vectors(spec, queries, rng_seed)
    stored = stored_query_objects(objects, queries, rng_seed + 1)
    variant, dims = tree.variant, tree.metric_config.active_dims
    rows = []
    for k in ks:
        io, evals, kth = knn_suite(tree, centers, k)
        rows.append(BenchRow(variant, dims, "knn", str(k), io, evals))
        io, evals = range_suite(tree, centers, kth)
        rows.append(BenchRow(variant, dims, "range-matched", str(k), io, evals))
    io, evals = range_suite(tree, [o.vector for o in stored], [0.0] * len(stored))
    rows.append(BenchRow(variant, dims, "range-zero", "0", io, evals))
    rows.append(BenchRow(variant, dims, "leaf-scan", "", float(leaf_page_count(tree)),
                         float(len(tree))))
    return rows


@dataclass
class ChurnReport:
    inserted: int = 0
    deleted: int = 0
    delete_misses: int = 0
    verifications: int = 0
    violations: list = field(default_factory=list)
    stats: TreeStats | None = None

    @property
    def ok(self) -> bool:
        return not self.violations and self.delete_misses == 0


def churn_build(
    objects,
    keep: int | None = None,
    config: PageConfig | None = None,
    active_dims: int | None = None,
    delete_seed: int = 0,
    interleave: bool = False,
    verify_every: int | None = None,
    verify_sample: float = 0.0,
    sample_seed: int = 0,
) -> tuple[Tree, ChurnReport]:
    """Insert every object, then (or interleaved) delete all but the first
    ``keep`` of them, optionally verifying invariants along the way.

    The survivors are exactly ``objects[:keep]`` (default: the first half);
    deletions run in an order shuffled by ``delete_seed``.
    """
    keep = len(objects) // 2 if keep is None else keep
    victims = objects[keep:]
    order = np.random.default_rng(delete_seed).permutation(len(victims))
    tree = Tree.create(config, "sm", active_dims)
    report = ChurnReport()
    check_rng = np.random.default_rng(sample_seed)
    mutations = 0

    def bump():
        nonlocal mutations
        mutations += 1
        due = verify_every is not None and mutations % verify_every == 0
        if not due and verify_sample > 0.0:
            due = check_rng.random() < verify_sample
        if due:
            report.verifications += 1
            report.violations.extend(verify_tree(tree).violations)

    def remove(obj):
        if tree.delete(obj):
            report.deleted += 1
        else:
            report.delete_misses += 1
        bump()

    if not interleave:
        for obj in objects:
            tree.insert(obj)
            report.inserted += 1
            bump()
        for i in order:
            remove(victims[i])
    else:
        for obj in objects[:keep]:
            tree.insert(obj)
            report.inserted += 1
            bump()
        # alternate inserts and deletes over a warm pool of victims
        pool_target = max(1, min(2500, len(victims) // 4))
        inserted = np.zeros(len(victims), dtype=bool)
        cursor = 0
        pending = 0
        for i, obj in enumerate(victims):
            tree.insert(obj)
            report.inserted += 1
            inserted[i] = True
            pending += 1
            bump()
            while pending > pool_target and cursor < len(order) and inserted[order[cursor]]:
                remove(victims[order[cursor]])
                cursor += 1
                pending -= 1
        while cursor < len(order):
            remove(victims[order[cursor]])
            cursor += 1

    report.verifications += 1
    report.violations.extend(verify_tree(tree).violations)
    report.stats = structure_stats(tree)
    return tree, report
