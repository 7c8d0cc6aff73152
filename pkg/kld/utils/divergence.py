"""
KL divergence between class pmfs, per-bin divergences and the chunk-pair
similarity metric (unweighted mean or gamma-weighted sum)

Natural logarithm throughout. The earlier chunk is the reference p, the later
chunk q is smoothed before the comparison.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import rel_entr

from kld.errors import DivergenceError, NoOverlapError
from kld.models.report import ChunkDistance
from kld.utils.pmf import DEFAULT_EPSILON, BinnedPmf, smooth_pmf

WEIGHTED = "weighted"
UNWEIGHTED = "unweighted"

_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BinDivergences:
    """d_j for the bins occupied in both chunks"""
    bins: np.ndarray
    values: np.ndarray
    skipped: int

    def __iter__(self):
        return iter(zip(self.bins.tolist(), self.values.tolist()))

    def __len__(self) -> int:
        return int(len(self.bins))


def kl(p: np.ndarray, q: np.ndarray) -> float:
    """
    KL(p || q) = sum_l p_l ln(p_l / q_l), with 0 ln 0 := 0

    Args:
        p: reference probability vector (zeros allowed)
        q: compared probability vector, positive wherever p is

    Returns:
        non-negative divergence in nats
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise DivergenceError(f"length mismatch: {p.shape} vs {q.shape}")
    for name, vector in (("p", p), ("q", q)):
        if abs(vector.sum() - 1.0) > _SUM_TOLERANCE or np.any(vector < 0):
            raise DivergenceError(f"{name} is not a probability vector: {vector}")
    if np.any((q == 0) & (p > 0)):
        raise DivergenceError("q has zero mass where p does not; smooth q first")

    return max(float(rel_entr(p, q).sum()), 0.0)


def bin_divergences(a: BinnedPmf, b: BinnedPmf, epsilon: float = DEFAULT_EPSILON) -> BinDivergences:
    """
    Per-bin divergence d_j = KL(a_j || smooth(b_j)) for bins occupied in both

    Args:
        a: pmf of the reference (earlier) chunk
        b: pmf of the later chunk, estimated on the same grid
        epsilon: zero-mass replacement applied to b

    Returns:
        BinDivergences; bins empty in either chunk are skipped
    """
    if a.grid != b.grid:
        raise DivergenceError("pmfs were estimated on different grids")
    if a.n_classes != b.n_classes:
        raise DivergenceError(f"class counts differ: {a.n_classes} vs {b.n_classes}")

    both = a.occupied & b.occupied
    bins = np.flatnonzero(both)
    q = smooth_pmf(b.class_probs[both], epsilon)
    values = np.clip(rel_entr(a.class_probs[both], q).sum(axis=1), 0.0, None)

    return BinDivergences(bins=bins, values=values, skipped=int(a.grid.n_bins - len(bins)))


def aggregate(
    per_bin: BinDivergences,
    gamma: Optional[np.ndarray] = None,
    mode: str = WEIGHTED,
    jay_factor: bool = True,
) -> float:
    """
    Chunk-pair similarity from the per-bin divergences

    unweighted: (1/J') * sum d_j
    weighted:   (1/J') * sum g_j d_j, g the reference occupancies renormalized
                over the J' compared bins (the 1/J' factor is dropped when
                jay_factor is False)
    """
    if len(per_bin) == 0:
        raise NoOverlapError()
    values = per_bin.values
    n_compared = len(values)

    if mode == UNWEIGHTED:
        return float(values.sum() / n_compared)
    if mode != WEIGHTED:
        raise DivergenceError(f"unknown aggregation mode '{mode}'")
    if gamma is None:
        raise DivergenceError("weighted aggregation needs the reference occupancies")

    weights = np.asarray(gamma, dtype=np.float64)[per_bin.bins]
    weights = weights / weights.sum()
    total = float(np.dot(weights, values))
    return total / n_compared if jay_factor else total


def chunk_distance(
    a: BinnedPmf,
    b: BinnedPmf,
    pair: Tuple[int, int],
    epsilon: float = DEFAULT_EPSILON,
    jay_factor: bool = True,
) -> ChunkDistance:
    """Both similarity metrics for one chunk pair (raises NoOverlapError)"""
    per_bin = bin_divergences(a, b, epsilon)
    return ChunkDistance(
        pair=pair,
        bins=tuple(per_bin.bins.tolist()),
        per_bin=tuple(per_bin.values.tolist()),
        value_unweighted=aggregate(per_bin, mode=UNWEIGHTED),
        value_weighted=aggregate(per_bin, a.gamma, mode=WEIGHTED, jay_factor=jay_factor),
        skipped_bins=per_bin.skipped,
    )
