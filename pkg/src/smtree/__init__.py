"""Paged metric-space index with symmetric insert/delete, exact search,
brute-force oracles, synthetic data generation, and IO benchmarks."""

from .core import (
    DataObject,
    LeafEntry,
    Node,
    NodeKind,
    RoutingEntry,
    SplitResult,
    SplitSide,
    minmax_split,
    radius_over_leaf_entries,
    radius_over_routing_entries,
)
from .datagen import GenSpec, export_csv, generate, load_dataset, query_vectors, save_dataset
from .metric import (
    DimensionMismatchError,
    DistanceCounter,
    MetricConfig,
    chebyshev,
    distance,
    distances_to_many,
    pairwise_distances,
)
from .oracle import exact_covering_radius, scan_knn, scan_range
from .pagestore import (
    IoLedger,
    PageConfig,
    PageOverflowError,
    PageStore,
    StoreFormatError,
    StoreMeta,
    UnknownPageError,
    load_store,
)
from .search import Query, QueryStats, knn_query, range_query
from .tree import Tree
from .verify import TreeStats, VerificationReport, Violation, structure_stats, verify_tree

__version__ = "0.1.0"

__all__ = [
    "DataObject",
    "DimensionMismatchError",
    "DistanceCounter",
    "GenSpec",
    "IoLedger",
    "LeafEntry",
    "MetricConfig",
    "Node",
    "NodeKind",
    "PageConfig",
    "PageOverflowError",
    "PageStore",
    "Query",
    "QueryStats",
    "RoutingEntry",
    "SplitResult",
    "SplitSide",
    "StoreFormatError",
    "StoreMeta",
    "Tree",
    "TreeStats",
    "UnknownPageError",
    "VerificationReport",
    "Violation",
    "chebyshev",
    "distance",
    "distances_to_many",
    "exact_covering_radius",
    "export_csv",
    "generate",
    "knn_query",
    "load_dataset",
    "load_store",
    "minmax_split",
    "pairwise_distances",
    "query_vectors",
    "radius_over_leaf_entries",
    "radius_over_routing_entries",
    "range_query",
    "save_dataset",
    "scan_knn",
    "scan_range",
    "structure_stats",
    "verify_tree",
]
