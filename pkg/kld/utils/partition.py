"""
Regular axis-aligned partition of the input space

Two layouts are supported:
- "slab": p independent per-dimension histograms. A bin is one interval of
  one dimension, extended across all the others, so J = sum(bins_per_dim)
  and every point belongs to exactly p bins.
- "product": the full product grid, J = prod(bins_per_dim), one bin per point.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np

from kld.errors import GridError

logger = logging.getLogger(__name__)

SLAB = "slab"
PRODUCT = "product"
MODES = (SLAB, PRODUCT)

DEFAULT_BINS_PER_DIM = 5


@dataclass(frozen=True)
class Grid:
    """Immutable regular grid over a box"""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    bins_per_dim: Tuple[int, ...]
    mode: str = SLAB

    @property
    def p(self) -> int:
        return len(self.bins_per_dim)

    @property
    def n_bins(self) -> int:
        """Total bin count J"""
        if self.mode == SLAB:
            return int(sum(self.bins_per_dim))
        return int(np.prod(self.bins_per_dim))

    @property
    def memberships_per_point(self) -> int:
        return self.p if self.mode == SLAB else 1

    @property
    def widths(self) -> np.ndarray:
        return (np.asarray(self.upper) - np.asarray(self.lower)) / np.asarray(self.bins_per_dim)

    def edges(self, dim: int) -> np.ndarray:
        """Cell edges of one dimension (bins + 1 values)"""
        return np.linspace(self.lower[dim], self.upper[dim], self.bins_per_dim[dim] + 1)

    def cells(self, points: np.ndarray) -> np.ndarray:
        """Per-dimension cell coordinates of an (n, p) array of points.

        Coordinates outside the box are clamped to the edge cells.
        """
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[np.newaxis, :]
        if points.shape[1] != self.p:
            raise GridError(f"point dimensionality {points.shape[1]} does not match grid ({self.p})")
        if not np.all(np.isfinite(points)):
            raise GridError("cannot locate a point with non-finite coordinates")

        raw = np.floor((points - np.asarray(self.lower)) / self.widths)
        return np.clip(raw, 0, np.asarray(self.bins_per_dim) - 1).astype(np.int64)

    def assign(self, points: np.ndarray) -> np.ndarray:
        """Bin memberships of an (n, p) array of points.

        Returns an (n, m) integer array; m = p in slab mode, 1 in product mode.
        """
        cells = self.cells(points)
        if self.mode == SLAB:
            offsets = np.concatenate([[0], np.cumsum(self.bins_per_dim)[:-1]])
            return cells + offsets
        flat = np.ravel_multi_index(tuple(cells.T), self.bins_per_dim)
        return flat[:, np.newaxis]

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "bounds": [[lo, hi] for lo, hi in zip(self.lower, self.upper)],
            "bins_per_dim": list(self.bins_per_dim),
        }


def build_grid(
    bounds: np.ndarray,
    bins_per_dim: Union[int, Sequence[int]] = DEFAULT_BINS_PER_DIM,
    mode: str = SLAB,
) -> Grid:
    """
    Build a regular grid over per-dimension (min, max) bounds

    Args:
        bounds: (p, 2) array-like of (min, max) pairs
        bins_per_dim: one positive count for all dimensions, or one per dimension
        mode: "slab" or "product"

    Returns:
        Grid with uniform cell widths; degenerate dimensions (min == max, or a
        subnormal extent) are widened to center +/- max(0.5, |center| * 1e-9)
    """
    bounds = np.asarray(bounds, dtype=np.float64)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or bounds.shape[0] < 1:
        raise GridError(f"bounds must be a (p, 2) array, got shape {bounds.shape}")
    if not np.all(np.isfinite(bounds)):
        raise GridError("grid bounds must be finite")
    if mode not in MODES:
        raise GridError(f"unknown grid mode '{mode}' (expected one of {', '.join(MODES)})")

    p = bounds.shape[0]
    if np.isscalar(bins_per_dim):
        bins = (int(bins_per_dim),) * p
    else:
        bins = tuple(int(b) for b in bins_per_dim)
    if len(bins) != p:
        raise GridError(f"{len(bins)} bin counts given for {p} dimensions")
    if any(b < 1 for b in bins):
        raise GridError(f"bin counts must be positive, got {bins}")

    lower, upper = bounds[:, 0].copy(), bounds[:, 1].copy()
    if np.any(lower > upper):
        raise GridError("grid bounds must satisfy min <= max")

    # zero extent, or too narrow for normal cell widths
    degenerate = (upper - lower) < np.finfo(np.float64).tiny * np.asarray(bins)
    if np.any(degenerate):
        center = (lower[degenerate] + upper[degenerate]) / 2
        half = np.maximum(0.5, np.abs(center) * 1e-9)
        lower[degenerate] = center - half
        upper[degenerate] = center + half
        logger.debug(f"Widened {int(degenerate.sum())} degenerate dimension(s)")

    return Grid(
        lower=tuple(float(v) for v in lower),
        upper=tuple(float(v) for v in upper),
        bins_per_dim=bins,
        mode=mode,
    )


def locate(grid: Grid, point: Sequence[float]) -> int:
    """Flat row-major index of the product cell holding ``point``.

    In slab mode use ``slabs_of`` for the p bins a point belongs to.
    """
    cells = grid.cells(np.asarray(point, dtype=np.float64))[0]
    return int(np.ravel_multi_index(tuple(cells), grid.bins_per_dim))


def slabs_of(grid: Grid, point: Sequence[float]) -> Tuple[int, ...]:
    """Bin indices a single point belongs to under the grid's own mode"""
    return tuple(int(j) for j in grid.assign(np.asarray(point, dtype=np.float64))[0])
