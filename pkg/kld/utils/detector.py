"""
KLD concept drift detector

Per arriving chunk: build the grid, estimate the class pmfs of the previous
and the current chunk, compare them bin by bin, aggregate the divergences,
smooth the divergence sequence, differentiate it and test the newest gradient
point against the band mean +/- alpha * sigma of the gradient history.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from kld.errors import ConfigError, DataError, InvariantViolation, KLDError, NoOverlapError
from kld.models.report import ChunkDistance, CriticalSegment, DivergenceSeries, DriftReport
from kld.models.stream import Chunk
from kld.utils.divergence import UNWEIGHTED, WEIGHTED, chunk_distance
from kld.utils.ingest import chunk_bounds
from kld.utils.partition import DEFAULT_BINS_PER_DIM, MODES, SLAB, Grid, build_grid
from kld.utils.pmf import DEFAULT_EPSILON, BinnedPmf, estimate
from kld.utils.smoothing import (
    SmootherConfig,
    first_derivative,
    min_max_normalize,
    running_normalize,
    smooth,
    trailing_mean,
)

logger = logging.getLogger(__name__)

PER_PAIR = "per-pair"
GLOBAL = "global"

UPPER = "upper"
BOTH = "both"

HISTORY = "history"
FINAL = "final"

# band half-width used when every gradient in scope is identical
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class DetectorConfig:
    """Parameters of the KLD detector"""
    alpha: float = 1.5  # threshold multiplier of the decision band
    epsilon: float = DEFAULT_EPSILON  # zero-mass replacement for pmfs
    bins_mode: str = SLAB  # slab | product
    bins_per_dim: int = DEFAULT_BINS_PER_DIM
    smoother: SmootherConfig = field(default_factory=SmootherConfig)
    stats_window: Optional[int] = None  # None = full history
    grid_scope: str = PER_PAIR  # per-pair | global
    warmup: int = 10  # gradient points required before the rule is applied
    band_side: str = UPPER  # upper | both
    metric: str = WEIGHTED  # weighted | unweighted
    jay_factor: bool = True  # keep the 1/J' factor of the weighted metric
    stats_scope: str = HISTORY  # history | final (batch only)

    def __post_init__(self):
        if isinstance(self.smoother, str):
            object.__setattr__(self, "smoother", SmootherConfig.parse(self.smoother))
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.bins_mode not in MODES:
            raise ConfigError(f"bins_mode must be one of {', '.join(MODES)}, got '{self.bins_mode}'")
        if self.bins_per_dim < 1:
            raise ConfigError(f"bins_per_dim must be >= 1, got {self.bins_per_dim}")
        if self.stats_window is not None and self.stats_window < 2:
            raise ConfigError(f"stats_window must be >= 2, got {self.stats_window}")
        if self.grid_scope not in (PER_PAIR, GLOBAL):
            raise ConfigError(f"grid_scope must be per-pair or global, got '{self.grid_scope}'")
        if self.warmup < 2:
            raise ConfigError(f"warmup must be >= 2, got {self.warmup}")
        if self.band_side not in (UPPER, BOTH):
            raise ConfigError(f"band_side must be upper or both, got '{self.band_side}'")
        if self.metric not in (WEIGHTED, UNWEIGHTED):
            raise ConfigError(f"metric must be weighted or unweighted, got '{self.metric}'")
        if self.stats_scope not in (HISTORY, FINAL):
            raise ConfigError(f"stats_scope must be history or final, got '{self.stats_scope}'")

    @property
    def online_capable(self) -> bool:
        return self.smoother.causal and self.stats_scope == HISTORY

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "bins_mode": self.bins_mode,
            "bins_per_dim": self.bins_per_dim,
            "smoother": str(self.smoother),
            "stats_window": self.stats_window,
            "grid_scope": self.grid_scope,
            "warmup": self.warmup,
            "band_side": self.band_side,
            "metric": self.metric,
            "jay_factor": self.jay_factor,
            "stats_scope": self.stats_scope,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DetectorConfig":
        known = set(cls().to_dict())
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown detector option(s): {', '.join(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# decision rule


def window_stats(gradient: Sequence[float], g: int, stats_window: Optional[int] = None) -> Tuple[float, float]:
    """Mean and population standard deviation of gradient[..g] (or its last stats_window points)"""
    lo = 0 if stats_window is None else max(0, g - stats_window + 1)
    scope = np.asarray(gradient[lo: g + 1], dtype=np.float64)
    return float(np.mean(scope)), float(np.std(scope))


def band_limits(mean: float, std: float, alpha: float) -> Tuple[float, float]:
    half = max(alpha * std, SIGMA_FLOOR)
    return mean - half, mean + half


def is_outside(value: float, lower: float, upper: float, side: str = UPPER) -> bool:
    if value > upper:
        return True
    return side == BOTH and value < lower


def band_statistics(
    gradient: Sequence[float],
    stats_window: Optional[int] = None,
    scope: str = HISTORY,
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-index band mean and sigma for a whole gradient sequence"""
    gradient = np.asarray(gradient, dtype=np.float64)
    n = len(gradient)
    if scope == FINAL:
        return np.full(n, float(np.mean(gradient))), np.full(n, float(np.std(gradient)))
    stats = [window_stats(gradient, g, stats_window) for g in range(n)]
    return np.array([s[0] for s in stats]), np.array([s[1] for s in stats])


def decision_band(
    gradient: Sequence[float],
    alpha: float,
    stats_window: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lower and upper band mean -/+ alpha * sigma at every gradient index

    Args:
        gradient: the gradient sequence l
        alpha: threshold multiplier
        stats_window: trailing window of the statistics, None for the full history

    Returns:
        (lower, upper) arrays; the half-width never drops below SIGMA_FLOOR
    """
    means, stds = band_statistics(gradient, stats_window)
    limits = [band_limits(m, s, alpha) for m, s in zip(means, stds)]
    return np.array([lo for lo, _ in limits]), np.array([hi for _, hi in limits])


def critical_rows(
    gradient: Sequence[float],
    means: Sequence[float],
    stds: Sequence[float],
    alpha: float,
    warmup: int,
    side: str = UPPER,
) -> np.ndarray:
    """Critical flag per series row; row k carries gradient[k - 1], row 0 never flags"""
    flags = np.zeros(len(gradient) + 1, dtype=bool)
    for g, value in enumerate(gradient):
        k = g + 1
        if k < warmup:
            continue
        lower, upper = band_limits(means[g], stds[g], alpha)
        flags[k] = is_outside(value, lower, upper, side)
    return flags


def check_segments(segments: Sequence[CriticalSegment]) -> None:
    """Segments must alternate enter/exit and never overlap"""
    previous_exit = None
    for i, segment in enumerate(segments):
        if segment.exit is not None and segment.exit <= segment.enter:
            raise InvariantViolation(f"segment {segment} exits before it enters")
        if segment.exit is None and i != len(segments) - 1:
            raise InvariantViolation("only the last segment may stay open")
        if previous_exit is not None and segment.enter < previous_exit:
            raise InvariantViolation(f"segment {segment} overlaps its predecessor")
        previous_exit = segment.exit


def segments_from_flags(flags: Sequence[bool], chunk_ids: Sequence[int]) -> List[CriticalSegment]:
    """Open a segment where the flag rises, close it where it falls"""
    segments: List[CriticalSegment] = []
    enter: Optional[int] = None
    for flag, chunk_id in zip(flags, chunk_ids):
        if flag and enter is None:
            enter = int(chunk_id)
        elif not flag and enter is not None:
            segments.append(CriticalSegment(enter, int(chunk_id)))
            enter = None
    if enter is not None:
        segments.append(CriticalSegment(enter, None))
    return segments


# ---------------------------------------------------------------------------
# chunk comparison


def pair_grid(previous: Chunk, current: Chunk, config: DetectorConfig) -> Grid:
    return build_grid(chunk_bounds(previous, current), config.bins_per_dim, config.bins_mode)


def first_chunk_grid(first: Chunk, config: DetectorConfig) -> Grid:
    """Global grid of a run without a supplied one; online and batch both use it.

    Later points outside its box fall in the edge cells.
    """
    return build_grid(chunk_bounds(first), config.bins_per_dim, config.bins_mode)


def compare_pair(
    previous: Chunk,
    current: Chunk,
    config: DetectorConfig,
    n_classes: int,
    grid: Optional[Grid] = None,
    previous_pmf: Optional[BinnedPmf] = None,
) -> Tuple[ChunkDistance, BinnedPmf]:
    """Distance of two consecutive chunks; raises NoOverlapError when incomparable.

    Returns the distance and the pmf of ``current`` (reusable with a global grid).
    """
    if grid is None:
        grid = pair_grid(previous, current, config)
        previous_pmf = None
    if previous_pmf is None or previous_pmf.grid != grid:
        previous_pmf = estimate(previous, grid, n_classes)
    current_pmf = estimate(current, grid, n_classes)

    distance = chunk_distance(
        previous_pmf,
        current_pmf,
        pair=(previous.index, current.index),
        epsilon=config.epsilon,
        jay_factor=config.jay_factor,
    )
    return distance, current_pmf


def metric_value(distance: ChunkDistance, config: DetectorConfig) -> float:
    return distance.value_weighted if config.metric == WEIGHTED else distance.value_unweighted


def _row(k: int, chunk_id: int, value: float, distance: Optional[ChunkDistance]) -> Dict[str, Any]:
    return {
        "k": k,
        "chunk": chunk_id,
        "raw": value,
        "normalized": None,
        "smoothed": None,
        "gradient": None,
        "lower": None,
        "upper": None,
        "critical": False,
        "value_unweighted": distance.value_unweighted if distance else None,
        "value_weighted": distance.value_weighted if distance else None,
        "skipped_bins": distance.skipped_bins if distance else None,
    }


class _PairTracker:
    """Computes pair distances with the incomparable-pair carry rule"""

    def __init__(self, config: DetectorConfig, n_classes: int, grid: Optional[Grid]):
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.n_classes = n_classes
        self.grid = grid
        self.diagnostics: List[Dict[str, Any]] = []
        self._last_valid: Optional[float] = None
        self._previous_pmf: Optional[BinnedPmf] = None

    def compare(self, previous: Chunk, current: Chunk) -> Tuple[float, Optional[ChunkDistance]]:
        try:
            distance, current_pmf = compare_pair(
                previous, current, self.config, self.n_classes, self.grid, self._previous_pmf
            )
        except NoOverlapError as e:
            value = self._last_valid if self._last_valid is not None else 0.0
            self.diagnostics.append({
                "pair": [previous.index, current.index],
                "reason": str(e),
                "carried": value,
            })
            self.logger.warning(
                f"Chunks {previous.index} and {current.index} share no occupied bin; carrying D={value}"
            )
            self._previous_pmf = None
            return value, None

        self._previous_pmf = current_pmf if self.grid is not None else None
        value = metric_value(distance, self.config)
        self._last_valid = value
        return value, distance


# ---------------------------------------------------------------------------
# online detector


class KLDDetector:
    """Online KLD detector: a single-writer state machine fed one chunk at a time.

    Listeners registered with ``subscribe`` are called with the new
    CriticalSegment whenever one opens.
    """

    def __init__(self, config: DetectorConfig, n_classes: int = 2, grid: Optional[Grid] = None):
        if not config.online_capable:
            raise ConfigError(
                "online detection needs a causal smoother (ma) and history statistics; "
                "use detect_batch for lowess or final statistics"
            )
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.n_classes = n_classes
        self.grid = grid if config.grid_scope == GLOBAL else None
        self._tracker: Optional[_PairTracker] = None
        self._previous: Optional[Chunk] = None
        self._listeners: List[Callable[[CriticalSegment], None]] = []

        self.raw: List[float] = []
        self.smoothed: List[float] = []
        self.gradient: List[float] = []
        self.rows: List[Dict[str, Any]] = []
        self.segments: List[CriticalSegment] = []
        self._low = float("inf")
        self._high = float("-inf")

    def subscribe(self, callback: Callable[[CriticalSegment], None]) -> None:
        self._listeners.append(callback)

    @property
    def segment_open(self) -> bool:
        return bool(self.segments) and self.segments[-1].exit is None

    def update(self, chunk: Chunk) -> Optional[CriticalSegment]:
        """Consume the next chunk; returns the segment opened by it, if any"""
        if self._previous is None:
            if self.config.grid_scope == GLOBAL and self.grid is None:
                self.grid = first_chunk_grid(chunk, self.config)
                self.logger.info("Global grid built from the first chunk")
            self._tracker = _PairTracker(self.config, self.n_classes, self.grid)
            self._previous = chunk
            return None

        value, distance = self._tracker.compare(self._previous, chunk)
        self._previous = chunk
        return self._append(value, distance, chunk.index)

    def _append(self, value: float, distance: Optional[ChunkDistance], chunk_id: int) -> Optional[CriticalSegment]:
        config = self.config
        k = len(self.raw)
        self.raw.append(value)
        self._low = min(self._low, value)
        self._high = max(self._high, value)

        row = _row(k, chunk_id, value, distance)
        row["normalized"] = running_normalize(value, self._low, self._high)
        smoothed = trailing_mean(self.raw, k, config.smoother.window)
        self.smoothed.append(smoothed)
        row["smoothed"] = smoothed

        opened = None
        if k >= 1:
            gradient = smoothed - self.smoothed[k - 1]
            self.gradient.append(gradient)
            mean, std = window_stats(self.gradient, k - 1, config.stats_window)
            lower, upper = band_limits(mean, std, config.alpha)
            critical = k >= config.warmup and is_outside(gradient, lower, upper, config.band_side)
            row.update(gradient=gradient, lower=lower, upper=upper, critical=critical)

            if critical and not self.segment_open:
                opened = CriticalSegment(chunk_id)
                self.segments.append(opened)
                self.logger.info(f"Critical segment opened at chunk {chunk_id}")
                for listener in self._listeners:
                    listener(opened)
            elif not critical and self.segment_open:
                enter = self.segments[-1].enter
                self.segments[-1] = CriticalSegment(enter, chunk_id)
                self.logger.info(f"Critical segment {enter}-{chunk_id} closed")

        self.rows.append(row)
        return opened

    def report(self, dropped_records: int = 0) -> DriftReport:
        check_segments(self.segments)
        return DriftReport(
            config=self.config.to_dict(),
            rows=list(self.rows),
            segments=list(self.segments),
            diagnostics=list(self._tracker.diagnostics) if self._tracker else [],
            mode="online",
            grid=self.grid.to_dict() if self.grid is not None else None,
            dropped_records=dropped_records,
        )


def detect_online(
    chunks: Iterable[Chunk],
    config: DetectorConfig,
    n_classes: int = 2,
    grid: Optional[Grid] = None,
    on_segment_open: Optional[Callable[[CriticalSegment], None]] = None,
) -> DriftReport:
    """
    Run the online detector over a chunk feed

    Args:
        chunks: lazy chunk sequence (at least 2 chunks)
        config: detector parameters
        n_classes: declared class count L
        grid: grid reused for every pair when config.grid_scope is global
            (built from the first chunk when omitted)
        on_segment_open: callback fired whenever a critical segment opens

    Returns:
        DriftReport
    """
    detector = KLDDetector(config, n_classes, grid)
    if on_segment_open is not None:
        detector.subscribe(on_segment_open)

    count = 0
    try:
        for chunk in chunks:
            detector.update(chunk)
            count += 1
    except KLDError as e:
        logger.error(f"Online detection stopped after {count} chunk(s): {e}")
        raise
    if count < 2:
        raise DataError(f"detection needs at least 2 chunks, got {count}")

    return detector.report(dropped_records=getattr(chunks, "dropped", 0))


# ---------------------------------------------------------------------------
# batch detector


@dataclass
class SeriesComputation:
    """Divergence series of a finite stream, shared by batch runs and alpha sweeps"""
    series: DivergenceSeries
    distances: List[Optional[ChunkDistance]]
    chunk_ids: List[int]
    diagnostics: List[Dict[str, Any]]
    grid: Optional[Grid]
    dropped_records: int = 0

    def statistics(self, config: DetectorConfig) -> Tuple[np.ndarray, np.ndarray]:
        return band_statistics(self.series.gradient, config.stats_window, config.stats_scope)


def compute_series(
    chunks: Iterable[Chunk],
    config: DetectorConfig,
    n_classes: int = 2,
    grid: Optional[Grid] = None,
) -> SeriesComputation:
    """All pair distances of a finite stream, then normalization, smoothing and gradient.

    A global-scope run without ``grid`` uses the first chunk's grid, like the
    online detector.
    """
    source = chunks
    try:
        chunks = list(source)
    except KLDError as e:
        logger.error(f"Could not read the stream: {e}")
        raise
    dropped = getattr(source, "dropped", 0)
    if len(chunks) < 2:
        raise DataError(f"detection needs at least 2 chunks, got {len(chunks)}")

    if config.grid_scope == GLOBAL and grid is None:
        grid = first_chunk_grid(chunks[0], config)
        logger.info("Global grid built from the first chunk")
    elif config.grid_scope == PER_PAIR:
        grid = None

    tracker = _PairTracker(config, n_classes, grid)
    raw, distances, chunk_ids = [], [], []
    for previous, current in zip(chunks, chunks[1:]):
        value, distance = tracker.compare(previous, current)
        raw.append(value)
        distances.append(distance)
        chunk_ids.append(current.index)

    if len(raw) < 2:
        raise DataError("at least 3 chunks are needed to differentiate the divergence series")

    smoothed = smooth(raw, config.smoother)
    series = DivergenceSeries(
        raw=np.asarray(raw, dtype=np.float64),
        normalized=min_max_normalize(raw),
        smoothed=smoothed,
        gradient=first_derivative(smoothed),
    )
    return SeriesComputation(series, distances, chunk_ids, tracker.diagnostics, grid, dropped)


def classify(
    computation: SeriesComputation,
    config: DetectorConfig,
    statistics: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[np.ndarray, List[CriticalSegment]]:
    """Apply the decision rule to a computed series; returns row flags and segments"""
    means, stds = statistics if statistics is not None else computation.statistics(config)
    flags = critical_rows(computation.series.gradient, means, stds, config.alpha, config.warmup, config.band_side)
    return flags, segments_from_flags(flags, computation.chunk_ids)


def batch_report(
    computation: SeriesComputation,
    config: DetectorConfig,
    statistics: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> DriftReport:
    means, stds = statistics if statistics is not None else computation.statistics(config)
    flags, segments = classify(computation, config, (means, stds))
    series = computation.series

    rows = []
    for k, (value, distance, chunk_id) in enumerate(zip(series.raw, computation.distances, computation.chunk_ids)):
        row = _row(k, chunk_id, float(value), distance)
        row["normalized"] = float(series.normalized[k])
        row["smoothed"] = float(series.smoothed[k])
        if k >= 1:
            lower, upper = band_limits(means[k - 1], stds[k - 1], config.alpha)
            row.update(
                gradient=float(series.gradient[k - 1]),
                lower=float(lower),
                upper=float(upper),
                critical=bool(flags[k]),
            )
        rows.append(row)

    check_segments(segments)
    return DriftReport(
        config=config.to_dict(),
        rows=rows,
        segments=segments,
        diagnostics=list(computation.diagnostics),
        mode="batch",
        grid=computation.grid.to_dict() if computation.grid is not None else None,
        dropped_records=int(computation.dropped_records),
    )


def detect_batch(
    chunks: Iterable[Chunk],
    config: DetectorConfig,
    n_classes: int = 2,
    grid: Optional[Grid] = None,
) -> DriftReport:
    """Offline detection over a finite stream (any smoother, any statistics scope)"""
    return batch_report(compute_series(chunks, config, n_classes, grid), config)


def with_alpha(config: DetectorConfig, alpha: float) -> DetectorConfig:
    return replace(config, alpha=alpha)
