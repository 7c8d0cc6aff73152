"""
Data model of a chunked, labeled data stream
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np

from kld.errors import DataError

RNG_ALGORITHM = "PCG64"


@dataclass(frozen=True)
class LabeledPoint:
    """An input vector paired with its class label"""
    input: Tuple[float, ...]
    label: int

    def validate(self, p: int, n_classes: int) -> None:
        if len(self.input) != p:
            raise DataError(f"expected {p} features, got {len(self.input)}")
        if not all(np.isfinite(self.input)):
            raise DataError(f"non-finite feature value in {self.input}")
        if not 0 <= self.label < n_classes:
            raise DataError(f"label {self.label} outside 0..{n_classes - 1}")


@dataclass(frozen=True)
class Chunk:
    """Fixed-size ordered batch of labeled points (the unit of processing).

    ``inputs`` is a read-only (K, p) float array, ``labels`` a read-only
    (K,) integer array.
    """
    index: int
    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=np.float64, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        if inputs.ndim != 2 or inputs.shape[0] < 1 or inputs.shape[1] < 1:
            raise DataError(f"chunk {self.index}: inputs must be a non-empty (K, p) array")
        if labels.shape != (inputs.shape[0],):
            raise DataError(f"chunk {self.index}: {inputs.shape[0]} inputs but {labels.shape} labels")
        if not np.all(np.isfinite(inputs)):
            raise DataError(f"chunk {self.index}: non-finite feature value")
        if self.index < 0:
            raise DataError(f"chunk index must be non-negative, got {self.index}")
        inputs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_points(cls, index: int, points: Sequence[LabeledPoint]) -> "Chunk":
        return cls(
            index=index,
            inputs=np.array([pt.input for pt in points], dtype=np.float64),
            labels=np.array([pt.label for pt in points], dtype=np.int64),
        )

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def p(self) -> int:
        return int(self.inputs.shape[1])

    def points(self) -> Iterator[LabeledPoint]:
        for row, label in zip(self.inputs, self.labels):
            yield LabeledPoint(tuple(float(v) for v in row), int(label))

    def check_labels(self, n_classes: int) -> None:
        if self.labels.min() < 0 or self.labels.max() >= n_classes:
            raise DataError(f"chunk {self.index}: labels outside 0..{n_classes - 1}")


@dataclass(frozen=True)
class StreamMeta:
    """Stream-level metadata carried alongside the chunks"""
    p: int
    n_classes: int
    chunk_size: int
    n_chunks: Optional[int] = None
    ground_truth: Tuple[int, ...] = field(default_factory=tuple)
    rng: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "ground_truth", tuple(int(t) for t in self.ground_truth))
        if self.p < 1:
            raise DataError(f"feature count p must be >= 1, got {self.p}")
        if self.n_classes < 1:
            raise DataError(f"class count L must be >= 1, got {self.n_classes}")
        if self.chunk_size < 1:
            raise DataError(f"chunk size K must be >= 1, got {self.chunk_size}")
        truth = self.ground_truth
        if any(b <= a for a, b in zip(truth, truth[1:])):
            raise DataError(f"ground truth indices must be strictly increasing: {truth}")
        if truth and truth[0] < 0:
            raise DataError("ground truth indices must be non-negative")
        if self.n_chunks is not None and truth and truth[-1] >= self.n_chunks:
            raise DataError(f"ground truth index {truth[-1]} beyond {self.n_chunks} chunks")

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "L": self.n_classes,
            "K": self.chunk_size,
            "n_chunks": self.n_chunks,
            "ground_truth": list(self.ground_truth),
            "rng": self.rng,
        }
