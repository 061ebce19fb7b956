"""Metric-space contract and the Chebyshev (max-coordinate) metric.

Vectors are fixed-length float64 arrays.  The index stores full vectors but
the metric can be restricted to the first ``active_dims`` components, so a
single stored data set supports experiments at several dimensionalities while
keeping object size constant.

The metric is pluggable: any callable ``fn(x, y, n) -> float`` satisfying the
metric axioms (non-negativity, identity, symmetry, triangle inequality) can
stand in for :func:`chebyshev`.  Only the Chebyshev metric ships with the
library and only it is exercised by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    """Two vectors, or a vector and its config, disagree on dimensionality."""


@dataclass(frozen=True)
class MetricConfig:
    """How many leading vector components the metric compares."""

    active_dims: int = 20

    def __post_init__(self) -> None:
        if self.active_dims < 1:
            raise ValueError(f"active_dims must be positive, got {self.active_dims}")


class DistanceCounter:
    """Tally of metric evaluations.

    Shard one counter per caller; instances are cheap and not thread-safe.
    """

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int = 1) -> None:
        self.count += n

    def reset(self) -> None:
        self.count = 0


def chebyshev(x: np.ndarray, y: np.ndarray, n: int) -> float:
    """Largest absolute coordinate difference over the first ``n`` components."""
    return float(np.abs(x[:n] - y[:n]).max())


def _check_pair(x: np.ndarray, y: np.ndarray, cfg: MetricConfig) -> None:
    if x.shape != y.shape:
        raise DimensionMismatchError(f"vector shapes differ: {x.shape} vs {y.shape}")
    if x.shape[-1] < cfg.active_dims:
        raise DimensionMismatchError(
            f"vectors have {x.shape[-1]} components but the metric needs "
            f"{cfg.active_dims}"
        )


def distance(
    x: np.ndarray,
    y: np.ndarray,
    cfg: MetricConfig,
    counter: DistanceCounter | None = None,
    fn=chebyshev,
) -> float:
    """Validated, counted metric evaluation between two stored vectors."""
    _check_pair(x, y, cfg)
    if counter is not None:
        counter.add()
    return fn(x, y, cfg.active_dims)


def distances_to_many(
    x: np.ndarray,
    vectors: np.ndarray,
    cfg: MetricConfig,
    counter: DistanceCounter | None = None,
    fn=chebyshev,
) -> np.ndarray:
    """Distances from ``x`` to every row of ``vectors`` (one evaluation each)."""
    m = len(vectors)
    if m == 0:
        return np.zeros(0)
    if counter is not None:
        counter.add(m)
    n = cfg.active_dims
    if fn is chebyshev:
        return np.abs(vectors[:, :n] - x[:n]).max(axis=1)
    return np.array([fn(x, row, n) for row in vectors])


def pairwise_distances(
    vectors: np.ndarray,
    cfg: MetricConfig,
    counter: DistanceCounter | None = None,
    fn=chebyshev,
) -> np.ndarray:
    """Full symmetric distance matrix over the rows of ``vectors``."""
    m = len(vectors)
    if counter is not None:
        counter.add(m * (m - 1) // 2)
    n = cfg.active_dims
    if fn is chebyshev:
        return np.abs(vectors[:, None, :n] - vectors[None, :, :n]).max(axis=2)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = out[j, i] = fn(vectors[i], vectors[j], n)
    return out
