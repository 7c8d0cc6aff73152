"""
Per-bin class-conditional probability mass functions and occupancy weights
"""

from dataclasses import dataclass

import numpy as np

from kld.errors import PmfError
from kld.models.stream import Chunk
from kld.utils.partition import Grid

DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class BinnedPmf:
    """Class-conditional pmfs of one chunk over a grid

    class_probs: (J, L) array, each row sums to 1; unoccupied rows hold the
        uniform placeholder 1/L
    gamma: (J,) occupancy weights, summing to 1 over all bin memberships
    occupied: (J,) boolean mask
    counts: (J, L) raw label counts per bin
    """
    grid: Grid
    class_probs: np.ndarray
    gamma: np.ndarray
    occupied: np.ndarray
    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return int(self.class_probs.shape[1])


def estimate(chunk: Chunk, grid: Grid, n_classes: int) -> BinnedPmf:
    """
    Estimate Pr(y = l | u in bin j) and the occupancy weights of a chunk

    Args:
        chunk: the chunk whose points are counted
        grid: partition shared by the chunks being compared
        n_classes: declared class count L (absent classes still get a slot)

    Returns:
        BinnedPmf
    """
    if n_classes < 1:
        raise PmfError(f"class count must be >= 1, got {n_classes}")
    chunk.check_labels(n_classes)

    memberships = grid.assign(chunk.inputs)
    labels = np.repeat(chunk.labels, memberships.shape[1])

    counts = np.zeros((grid.n_bins, n_classes), dtype=np.int64)
    np.add.at(counts, (memberships.ravel(), labels), 1)

    occupancy = counts.sum(axis=1)
    occupied = occupancy > 0
    gamma = occupancy / occupancy.sum()

    class_probs = np.full((grid.n_bins, n_classes), 1.0 / n_classes)
    class_probs[occupied] = counts[occupied] / occupancy[occupied, np.newaxis]

    for array in (class_probs, gamma, occupied, counts):
        array.setflags(write=False)

    return BinnedPmf(grid=grid, class_probs=class_probs, gamma=gamma, occupied=occupied, counts=counts)


def smooth_pmf(probs: np.ndarray, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Replace zero masses by epsilon and renormalize.

    Works on a single vector or row-wise on a 2-D array; the output is
    strictly positive and sums to 1.
    """
    if not epsilon > 0:
        raise PmfError(f"epsilon must be positive, got {epsilon}")
    probs = np.asarray(probs, dtype=np.float64)
    if np.any(probs < 0):
        raise PmfError("probabilities must be non-negative")

    smoothed = np.where(probs == 0, epsilon, probs)
    return smoothed / smoothed.sum(axis=-1, keepdims=True)
