"""
Synthetic drifting streams

Each concept is a per-class Gaussian mixture. Drift centers are evenly spaced
over the stream; around every center the points are drawn from the old or the
new concept according to a logistic blend weight, and labels are flipped with
a small probability afterwards.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import expit

from kld.errors import ConfigError, GeneratorError
from kld.models.stream import RNG_ALGORITHM, Chunk, StreamMeta

BENCHMARK_SEEDS = (1410, 6543, 2345, 9876, 3946)

# rejection-sampling budget for well separated class means
_MAX_TRIES = 1000


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of a synthetic drifting stream"""
    seed: int = 1410
    n_features: int = 4
    n_classes: int = 2
    n_chunks: int = 100
    chunk_size: int = 250
    n_drifts: int = 0
    sigmoid_spacing: float = 99.0  # logistic steepness; 999 gives a sudden drift
    class_flip: float = 0.01  # label noise probability
    clusters_per_class: int = 1
    separation: float = 3.0  # minimum distance between any two cluster means
    scale: float = 1.0  # isotropic standard deviation of every cluster

    def __post_init__(self):
        if self.n_features < 1:
            raise ConfigError(f"n_features must be >= 1, got {self.n_features}")
        if self.n_classes < 2:
            raise ConfigError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.n_chunks < 1 or self.chunk_size < 1:
            raise ConfigError("n_chunks and chunk_size must be positive")
        if self.n_drifts < 0:
            raise ConfigError(f"n_drifts must be >= 0, got {self.n_drifts}")
        if self.n_drifts and self.n_drifts >= self.n_chunks:
            raise ConfigError(f"{self.n_drifts} drifts do not fit in {self.n_chunks} chunks")
        if not self.sigmoid_spacing > 0:
            raise ConfigError(f"sigmoid_spacing must be positive, got {self.sigmoid_spacing}")
        if not 0 <= self.class_flip < 1:
            raise ConfigError(f"class_flip must lie in [0, 1), got {self.class_flip}")
        if self.clusters_per_class < 1:
            raise ConfigError(f"clusters_per_class must be >= 1, got {self.clusters_per_class}")
        if not self.separation > 0 or not self.scale > 0:
            raise ConfigError("separation and scale must be positive")

    @classmethod
    def benchmark_preset(cls, seed: int = BENCHMARK_SEEDS[0], features: int = 4) -> "GeneratorConfig":
        """10000 chunks of 250 points, 20 incremental drifts, binary labels"""
        if features not in (4, 6):
            raise ConfigError(f"the preset is defined for 4 or 6 features, got {features}")
        return cls(
            seed=seed,
            n_features=features,
            n_classes=2,
            n_chunks=10000,
            chunk_size=250,
            n_drifts=20,
            sigmoid_spacing=99.0,
            class_flip=0.01,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneratorConfig":
        unknown = sorted(set(data) - set(cls().to_dict()))
        if unknown:
            raise ConfigError(f"Unknown generator option(s): {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Concept:
    """Class-conditional Gaussian mixture; means has shape (L, clusters, p)"""
    means: np.ndarray
    scale: float

    @property
    def n_classes(self) -> int:
        return int(self.means.shape[0])

    def min_separation(self) -> float:
        flat = self.means.reshape(-1, self.means.shape[-1])
        return float(pdist(flat).min()) if len(flat) > 1 else math.inf


def draw_concept(rng: np.random.Generator, config: GeneratorConfig) -> Concept:
    """Draw cluster means uniformly in a box until every pair is far enough apart"""
    n_means = config.n_classes * config.clusters_per_class
    p = config.n_features
    half_width = config.separation * max(1.0, n_means ** (1.0 / p))

    for _ in range(_MAX_TRIES):
        means = rng.uniform(-half_width, half_width, size=(n_means, p))
        if n_means == 1 or pdist(means).min() >= config.separation:
            return Concept(
                means=means.reshape(config.n_classes, config.clusters_per_class, p),
                scale=config.scale,
            )
    raise GeneratorError(
        f"could not place {n_means} means at separation {config.separation} in {p} dimension(s)"
    )


def drift_schedule(n_chunks: int, n_drifts: int) -> List[int]:
    """Evenly spaced drift centers, one in the middle of each of n_drifts periods"""
    if n_drifts < 0:
        raise GeneratorError(f"n_drifts must be >= 0, got {n_drifts}")
    if n_drifts == 0:
        return []
    if n_drifts >= n_chunks:
        raise GeneratorError(f"{n_drifts} drifts do not fit in {n_chunks} chunks")
    period = n_chunks / n_drifts
    return [int(math.floor((d + 0.5) * period + 0.5)) for d in range(n_drifts)]


def blend_weights(
    positions: np.ndarray,
    schedule: List[int],
    sigmoid_spacing: float,
    n_chunks: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Blend of every stream position; chunk i covers positions [i, i + 1).

    Drift d is centered on the middle of chunk schedule[d].
    """
    positions = np.asarray(positions, dtype=np.float64)
    n_drifts = len(schedule)
    if n_drifts == 0:
        return np.zeros(positions.shape, dtype=np.int64), np.zeros(positions.shape)

    period = n_chunks / n_drifts
    half_gap = period / 2.0
    concept = np.clip(np.floor(positions / period), 0, n_drifts - 1).astype(np.int64)
    centers = np.asarray(schedule, dtype=np.float64)[concept] + 0.5
    weights = expit(sigmoid_spacing * (positions - centers) / half_gap)
    return concept, weights


def concept_weight(
    chunk_index: float,
    schedule: List[int],
    sigmoid_spacing: float,
    n_chunks: int,
) -> Tuple[int, float]:
    """
    Concept blend at the middle of a chunk

    Args:
        chunk_index: chunk index i; the blend is evaluated at position i + 0.5
        schedule: drift centers from drift_schedule
        sigmoid_spacing: logistic steepness
        n_chunks: stream length in chunks

    Returns:
        (c, w): points come from concept c with probability 1 - w and from
        concept c + 1 with probability w
    """
    concept, weight = blend_weights(np.array([chunk_index + 0.5]), schedule, sigmoid_spacing, n_chunks)
    return int(concept[0]), float(weight[0])


def flip_labels(
    labels: np.ndarray,
    rng: np.random.Generator,
    rate: float,
    n_classes: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Replace each label by a different class with probability ``rate``.

    Returns the new labels and the boolean flip mask.
    """
    mask = rng.random(len(labels)) < rate
    if n_classes == 2:
        replacement = 1 - labels
    else:
        replacement = (labels + rng.integers(1, n_classes, size=len(labels))) % n_classes
    return np.where(mask, replacement, labels), mask


class StreamGenerator:
    """Re-iterable, deterministic chunk source for one GeneratorConfig"""

    def __init__(self, config: GeneratorConfig):
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.schedule = drift_schedule(config.n_chunks, config.n_drifts)
        self.meta = StreamMeta(
            p=config.n_features,
            n_classes=config.n_classes,
            chunk_size=config.chunk_size,
            n_chunks=config.n_chunks,
            ground_truth=tuple(self.schedule),
            rng=RNG_ALGORITHM,
        )

    def _rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.config.seed))

    def concepts(self, rng: Optional[np.random.Generator] = None) -> List[Concept]:
        rng = rng if rng is not None else self._rng()
        return [draw_concept(rng, self.config) for _ in range(self.config.n_drifts + 1)]

    def __iter__(self) -> Iterator[Chunk]:
        config = self.config
        rng = self._rng()
        try:
            concepts = self.concepts(rng)
        except GeneratorError as e:
            self.logger.error(f"Concept drawing failed: {e}")
            raise
        means = np.stack([concept.means for concept in concepts])  # (C, L, clusters, p)
        K, p = config.chunk_size, config.n_features
        offsets = (np.arange(K) + 0.5) / K

        self.logger.info(
            f"Generating {config.n_chunks} chunk(s) of {K} with {config.n_drifts} drift(s), seed {config.seed}"
        )
        for i in range(config.n_chunks):
            concept, weight = blend_weights(i + offsets, self.schedule, config.sigmoid_spacing, config.n_chunks)
            source = concept + (rng.random(K) < weight)
            labels = rng.integers(0, config.n_classes, size=K)
            clusters = rng.integers(0, config.clusters_per_class, size=K)
            noise = rng.normal(0.0, config.scale, size=(K, p))
            inputs = means[source, labels, clusters] + noise
            labels, _ = flip_labels(labels, rng, config.class_flip, config.n_classes)
            yield Chunk(index=i, inputs=inputs, labels=labels)


def generate(config: GeneratorConfig) -> Tuple[StreamMeta, StreamGenerator]:
    """Stream metadata (with the drift centers as ground truth) and the lazy chunk source"""
    generator = StreamGenerator(config)
    return generator.meta, generator
