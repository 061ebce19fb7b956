"""Deterministic synthetic data sets in the unit hypercube.

Three distributions:

* ``clustered``: points scattered around uniformly drawn seed points with a
  trigonometric per-component offset whose density is highest at the seed
  and falls off monotonically; each component is drawn independently, which
  produces dense regions parallel to the coordinate axes.
* ``polynomial``: each component is ``u ** exponent`` for uniform ``u``,
  skewing mass toward zero.
* ``uniform``: plain uniform components.

Every draw comes from one PCG64 stream keyed by ``rng_seed``, so a spec
regenerates the identical data set.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .core import DataObject

KINDS = ("clustered", "polynomial", "uniform")

_DS_MAGIC = b"SMD1"
_DS_VERSION = 1
# magic, version, kind, reserved, dims, count, seed, seed_count, exponent, amplitude
_DS_HEADER = struct.Struct("<4sHBxHQqIId")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    count: int
    dims: int = 20
    seed_count: int = 50
    amplitude: float = 0.1
    exponent: int = 3
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.dims < 1:
            raise ValueError("dims must be at least 1")
        if self.seed_count < 1:
            raise ValueError("seed_count must be at least 1")
        if not 0.0 < self.amplitude <= 0.5:
            raise ValueError("amplitude must be in (0, 0.5]")
        if self.exponent < 1:
            raise ValueError("exponent must be at least 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")


def clustered_offsets(rng: np.random.Generator, shape, amplitude: float) -> np.ndarray:
    """Sign-symmetric offsets in [-amplitude, amplitude] whose density is
    highest at zero and strictly decreasing outward."""
    v = 2.0 * rng.random(shape) - 1.0
    return amplitude * np.sign(v) * (1.0 - np.cos(0.5 * np.pi * np.abs(v)))


def generate(spec: GenSpec) -> list[DataObject]:
    rng = np.random.default_rng(spec.rng_seed)
    shape = (spec.count, spec.dims)
    if spec.kind == "uniform":
        points = rng.random(shape)
    elif spec.kind == "polynomial":
        points = rng.random(shape) ** spec.exponent
    else:
        seeds = rng.random((spec.seed_count, spec.dims))
        assigned = rng.integers(0, spec.seed_count, spec.count)
        offsets = clustered_offsets(rng, shape, spec.amplitude)
        points = np.clip(seeds[assigned] + offsets, 0.0, 1.0)
    return [DataObject(i, points[i]) for i in range(spec.count)]


def query_vectors(spec: GenSpec, count: int, rng_seed: int) -> list[np.ndarray]:
    """Fresh draws from the same distribution family, for query workloads."""
    return [o.vector for o in generate(replace(spec, count=count, rng_seed=rng_seed))]


def save_dataset(path, objects, spec: GenSpec) -> None:
    row = struct.Struct(f"<q{spec.dims}d")
    header = _DS_HEADER.pack(
        _DS_MAGIC,
        _DS_VERSION,
        KINDS.index(spec.kind),
        spec.dims,
        spec.count,
        spec.rng_seed,
        spec.seed_count,
        spec.exponent,
        spec.amplitude,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for o in objects:
            fh.write(row.pack(o.object_id, *o.vector))


def load_dataset(path) -> tuple[list[DataObject], GenSpec]:
    data = Path(path).read_bytes()
    if len(data) < _DS_HEADER.size:
        raise ValueError(f"dataset file too short ({len(data)} bytes)")
    magic, version, kind_code, dims, count, seed, seed_count, exponent, amplitude = (
        _DS_HEADER.unpack_from(data, 0)
    )
    if magic != _DS_MAGIC:
        raise ValueError(f"bad dataset magic {magic!r}")
    if version != _DS_VERSION:
        raise ValueError(f"unsupported dataset version {version}")
    spec = GenSpec(KINDS[kind_code], count, dims, seed_count, amplitude, exponent, seed)
    row = struct.Struct(f"<q{dims}d")
    expected = _DS_HEADER.size + count * row.size
    if len(data) != expected:
        raise ValueError(f"dataset file is {len(data)} bytes, expected {expected}")
    objects = []
    offset = _DS_HEADER.size
    for _ in range(count):
        fields = row.unpack_from(data, offset)
        objects.append(DataObject(fields[0], np.array(fields[1:], dtype=np.float64)))
        offset += row.size
    return objects, spec


def export_csv(path, objects) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dims = len(objects[0].vector) if objects else 0
        writer.writerow(["id"] + [f"c{i}" for i in range(dims)])
        for o in objects:
            writer.writerow([o.object_id] + [repr(c) for c in o.vector])
