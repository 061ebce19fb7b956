"""Fixed-size page storage for tree nodes.

IO accounting follows a cold, infinite buffer pool: within one query each
distinct page costs exactly one IO no matter how often it is read.  The
on-disk format is little-endian throughout: a magic header, the page/metric
configuration, one record per live page keyed by its page id, and the root id.

Page byte budget (header 16 bytes, ``d`` = stored vector dimension):

* leaf entry: ``8d`` vector + 8 object id + 8 parent distance
* routing entry: ``8d`` vector + 8 child page id + 8 covering radius
  + 8 parent distance
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import LeafEntry, Node, NodeKind, RoutingEntry

PAGE_HEADER_BYTES = 16

_FILE_MAGIC = b"SMT1"
_FILE_VERSION = 1
# magic, version, variant, reserved, page_bytes, dim, active_dims,
# underflow_fraction, root_id, next_id, page_count
_FILE_HEADER = struct.Struct("<4sHBxIHHdQQQ")
# page_id, kind, level, entry count, reserved
_PAGE_HEADER = struct.Struct("<QBBH4x")
_VARIANTS = ("sm", "classic")


class PageOverflowError(ValueError):
    """A node was written with more entries than its page can hold."""


class UnknownPageError(KeyError):
    """A page id that is not live in the store."""


class StoreFormatError(ValueError):
    """A store file that cannot be parsed."""


@dataclass(frozen=True)
class PageConfig:
    """Page geometry; capacities and fill limits derive from the byte budget."""

    page_bytes: int = 4096
    dim: int = 20
    underflow_fraction: float = 0.4

    def __post_init__(self) -> None:
        if self.page_bytes <= 0:
            raise ValueError("page_bytes must be positive")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not 0.0 < self.underflow_fraction <= 0.5:
            raise ValueError("underflow_fraction must be in (0, 0.5]")
        if self.leaf_capacity < 4 or self.internal_capacity < 4:
            raise ValueError(
                f"page of {self.page_bytes} bytes holds only "
                f"{self.leaf_capacity} leaf / {self.internal_capacity} routing "
                f"entries at dim {self.dim}; both capacities must be at least 4"
            )

    @property
    def leaf_entry_bytes(self) -> int:
        return self.dim * 8 + 16

    @property
    def routing_entry_bytes(self) -> int:
        return self.dim * 8 + 24

    @property
    def leaf_capacity(self) -> int:
        return (self.page_bytes - PAGE_HEADER_BYTES) // self.leaf_entry_bytes

    @property
    def internal_capacity(self) -> int:
        return (self.page_bytes - PAGE_HEADER_BYTES) // self.routing_entry_bytes

    @property
    def min_leaf_fill(self) -> int:
        return _min_fill(self.underflow_fraction, self.leaf_capacity)

    @property
    def min_internal_fill(self) -> int:
        return _min_fill(self.underflow_fraction, self.internal_capacity)

    def capacity(self, kind: NodeKind) -> int:
        return self.leaf_capacity if kind == NodeKind.LEAF else self.internal_capacity

    def min_fill(self, kind: NodeKind) -> int:
        return self.min_leaf_fill if kind == NodeKind.LEAF else self.min_internal_fill


def _min_fill(fraction: float, capacity: int) -> int:
    # round before ceil so 0.4 * 25 == 10.000000000000002 does not become 11
    return int(math.ceil(round(fraction * capacity, 9)))


@dataclass(frozen=True)
class StoreMeta:
    """Tree-level metadata carried by the store file."""

    root_id: int
    variant: str
    active_dims: int


class IoLedger:
    """Distinct-page IO counter: a page costs at most one IO per query."""

    def __init__(self) -> None:
        self.touched: set[int] = set()
        self.total = 0

    def touch(self, page_id: int) -> None:
        self.touched.add(page_id)

    @property
    def query_ios(self) -> int:
        return len(self.touched)

    def end_query(self) -> int:
        """Fold the current query into the running total and reset."""
        ios = len(self.touched)
        self.total += ios
        self.touched.clear()
        return ios


class PageStore:
    """In-memory paged node store; single writer, many readers.

    Page ids come from a monotonically increasing counter that survives
    persistence, so a freed page's id is never handed out again.
    """

    def __init__(self, config: PageConfig | None = None) -> None:
        self.config = config or PageConfig()
        self.pages: dict[int, Node] = {}
        self.next_id = 0

    def __len__(self) -> int:
        return len(self.pages)

    def allocate(self, kind: NodeKind, level: int = 0) -> int:
        pid = self.next_id
        self.next_id += 1
        self.pages[pid] = Node(NodeKind(kind), level, [])
        return pid

    def read(self, page_id: int, ledger: IoLedger | None = None) -> Node:
        try:
            node = self.pages[page_id]
        except KeyError:
            raise UnknownPageError(page_id) from None
        if ledger is not None:
            ledger.touch(page_id)
        return node

    def write(self, page_id: int, node: Node) -> None:
        if page_id not in self.pages:
            raise UnknownPageError(page_id)
        cap = self.config.capacity(node.kind)
        if len(node.entries) > cap:
            raise PageOverflowError(
                f"{node.kind.name.lower()} node with {len(node.entries)} entries "
                f"exceeds capacity {cap}; split before writing"
            )
        self.pages[page_id] = node

    def free(self, page_id: int) -> None:
        if page_id not in self.pages:
            raise UnknownPageError(page_id)
        del self.pages[page_id]

    def persist(self, path, meta: StoreMeta) -> None:
        if meta.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {meta.variant!r}")
        cfg = self.config
        header = _FILE_HEADER.pack(
            _FILE_MAGIC,
            _FILE_VERSION,
            _VARIANTS.index(meta.variant),
            cfg.page_bytes,
            cfg.dim,
            meta.active_dims,
            cfg.underflow_fraction,
            meta.root_id,
            self.next_id,
            len(self.pages),
        )
        with open(path, "wb") as fh:
            fh.write(header)
            for pid in sorted(self.pages):
                fh.write(pack_node(pid, self.pages[pid], cfg))


def pack_node(page_id: int, node: Node, config: PageConfig) -> bytes:
    parts = [_PAGE_HEADER.pack(page_id, int(node.kind), node.level, len(node.entries))]
    if node.is_leaf:
        for e in node.entries:
            parts.append(struct.pack("<q", e.object_id))
            parts.append(np.ascontiguousarray(e.vector, dtype="<f8").tobytes())
            parts.append(struct.pack("<d", e.parent_distance))
    else:
        for e in node.entries:
            parts.append(np.ascontiguousarray(e.routing_object, dtype="<f8").tobytes())
            parts.append(struct.pack("<qdd", e.child, e.covering_radius, e.parent_distance))
    blob = b"".join(parts)
    if len(blob) > config.page_bytes:
        raise PageOverflowError(
            f"page {page_id} serializes to {len(blob)} bytes > {config.page_bytes}"
        )
    return blob


def _unpack_node(buf: bytes, offset: int, config: PageConfig):
    if offset + _PAGE_HEADER.size > len(buf):
        raise StoreFormatError(f"truncated page header at offset {offset}")
    page_id, kind, level, count = _PAGE_HEADER.unpack_from(buf, offset)
    offset += _PAGE_HEADER.size
    dim = config.dim
    entries = []
    try:
        if kind == NodeKind.LEAF:
            for _ in range(count):
                (object_id,) = struct.unpack_from("<q", buf, offset)
                offset += 8
                vector = np.frombuffer(buf, "<f8", dim, offset).copy()
                offset += dim * 8
                (pd,) = struct.unpack_from("<d", buf, offset)
                offset += 8
                entries.append(LeafEntry(object_id, vector, pd))
        elif kind == NodeKind.INTERNAL:
            for _ in range(count):
                vector = np.frombuffer(buf, "<f8", dim, offset).copy()
                offset += dim * 8
                child, radius, pd = struct.unpack_from("<qdd", buf, offset)
                offset += 24
                entries.append(RoutingEntry(vector, radius, pd, child))
        else:
            raise StoreFormatError(f"unknown node kind {kind} at offset {offset}")
    except (struct.error, ValueError) as exc:
        raise StoreFormatError(f"truncated page {page_id} near offset {offset}") from exc
    return page_id, Node(NodeKind(kind), level, entries), offset


def load_store(path) -> tuple[PageStore, StoreMeta]:
    data = Path(path).read_bytes()
    if len(data) < _FILE_HEADER.size:
        raise StoreFormatError(
            f"file is {len(data)} bytes, shorter than the {_FILE_HEADER.size}-byte header"
        )
    (
        magic,
        version,
        variant_code,
        page_bytes,
        dim,
        active_dims,
        underflow_fraction,
        root_id,
        next_id,
        page_count,
    ) = _FILE_HEADER.unpack_from(data, 0)
    if magic != _FILE_MAGIC:
        raise StoreFormatError(f"bad magic {magic!r} at offset 0")
    if version != _FILE_VERSION:
        raise StoreFormatError(f"unsupported format version {version} at offset 4")
    if variant_code >= len(_VARIANTS):
        raise StoreFormatError(f"unknown variant code {variant_code} at offset 6")
    store = PageStore(PageConfig(page_bytes, dim, underflow_fraction))
    store.next_id = next_id
    offset = _FILE_HEADER.size
    for _ in range(page_count):
        page_id, node, offset = _unpack_node(data, offset, store.config)
        if page_id in store.pages:
            raise StoreFormatError(f"duplicate page id {page_id} near offset {offset}")
        store.pages[page_id] = node
    if offset != len(data):
        raise StoreFormatError(f"{len(data) - offset} trailing bytes at offset {offset}")
    return store, StoreMeta(root_id, _VARIANTS[variant_code], active_dims)
