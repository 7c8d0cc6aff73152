"""
Scoring detections against ground truth and the alpha sensitivity sweep
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from kld.errors import ConfigError, EvaluationError
from kld.models.report import DriftReport, MatchingResult
from kld.models.stream import Chunk
from kld.utils.detector import DetectorConfig, batch_report, compute_series, with_alpha
from kld.utils.partition import Grid

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 30


def _check_sorted(values: Sequence[int], name: str) -> List[int]:
    values = [int(v) for v in values]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise EvaluationError(f"{name} must be strictly increasing: {values}")
    return values


def match(truth: Sequence[int], detections: Sequence[int], tolerance: int = DEFAULT_TOLERANCE) -> MatchingResult:
    """
    Greedy in-order matching of detections to ground-truth drift positions

    Args:
        truth: strictly increasing ground-truth chunk indices
        detections: strictly increasing detected chunk indices
        tolerance: largest |detection - truth| that still counts as a hit

    Returns:
        MatchingResult; each detection takes the earliest unmatched truth
        within the tolerance, leftovers are false positives / misses
    """
    if tolerance < 0:
        raise EvaluationError(f"tolerance must be >= 0, got {tolerance}")
    truth = _check_sorted(truth, "ground truth")
    detections = _check_sorted(detections, "detections")

    used = [False] * len(truth)
    pairs = []
    for detection in detections:
        for i, t in enumerate(truth):
            if not used[i] and abs(detection - t) <= tolerance:
                used[i] = True
                pairs.append((t, detection))
                break

    tp = len(pairs)
    delays = [d - t for t, d in pairs]
    return MatchingResult(
        tolerance=tolerance,
        pairs=tuple(pairs),
        tp=tp,
        fp=len(detections) - tp,
        fn=len(truth) - tp,
        mean_delay=float(np.mean(delays)) if delays else None,
    )


@dataclass
class SweepPoint:
    """Detector outcome for one alpha of a sweep"""
    alpha: float
    report: DriftReport
    flagged: int
    matching: Optional[MatchingResult] = None

    @property
    def detections(self) -> List[int]:
        return self.report.critical_points

    def to_row(self) -> Dict[str, Any]:
        matching = self.matching
        return {
            "alpha": self.alpha,
            "detections": len(self.detections),
            "tp": matching.tp if matching else None,
            "fp": matching.fp if matching else None,
            "fn": matching.fn if matching else None,
            "mean_delay": matching.mean_delay if matching else None,
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "flagged_rows": self.flagged,
            "critical_points": self.detections,
            "segments": [segment.to_dict() for segment in self.report.segments],
            "matching": self.matching.to_dict() if self.matching else None,
        }


def alpha_sweep(
    chunks: Iterable[Chunk],
    config: DetectorConfig,
    alphas: Sequence[float],
    n_classes: int = 2,
    truth: Optional[Sequence[int]] = None,
    tolerance: int = DEFAULT_TOLERANCE,
    grid: Optional[Grid] = None,
) -> List[SweepPoint]:
    """
    Run the decision rule for several alphas over one divergence series

    The series, its smoothing and the band statistics are computed once;
    only the comparison against the band re-runs per alpha.

    Returns:
        one SweepPoint per alpha, in the given order
    """
    if not alphas:
        raise ConfigError("alpha sweep needs at least one alpha")

    computation = compute_series(chunks, config, n_classes, grid)
    statistics = computation.statistics(config)

    points = []
    for alpha in alphas:
        report = batch_report(computation, with_alpha(config, float(alpha)), statistics)
        matching = match(truth, report.critical_points, tolerance) if truth is not None else None
        flagged = sum(1 for row in report.rows if row["critical"])
        points.append(SweepPoint(alpha=float(alpha), report=report, flagged=flagged, matching=matching))
        logger.info(f"alpha={alpha}: {len(report.critical_points)} critical point(s)")
    return points


def alpha_range(start: float, stop: float, step: float) -> List[float]:
    """Inclusive arithmetic range, values rounded to 10 decimals"""
    if not step > 0:
        raise ConfigError(f"alpha step must be positive, got {step}")
    if stop < start:
        raise ConfigError(f"alpha range {start}:{stop} is empty")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]
