"""
Result records produced by the detector, the evaluation harness and the CLI
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ChunkDistance:
    """Similarity of two consecutive chunks S_i and S_{i+1}"""
    pair: Tuple[int, int]
    bins: Tuple[int, ...]  # compared bins
    per_bin: Tuple[float, ...]  # d_j for the compared bins
    value_unweighted: float
    value_weighted: float
    skipped_bins: int


@dataclass(frozen=True)
class DivergenceSeries:
    """The divergence sequence with its normalized, smoothed and gradient views.

    raw[k] is D(S_k, S_{k+1}); gradient has one element less than raw.
    """
    raw: np.ndarray
    normalized: np.ndarray
    smoothed: np.ndarray
    gradient: np.ndarray

    def __len__(self) -> int:
        return int(len(self.raw))


@dataclass(frozen=True)
class CriticalSegment:
    """Stretch of chunks where the gradient stays outside the decision band"""
    enter: int
    exit: Optional[int] = None

    def to_dict(self) -> Dict[str, Optional[int]]:
        return {"enter": self.enter, "exit": self.exit}


@dataclass
class DriftReport:
    """Outcome of one detector run"""
    config: Dict[str, Any]
    rows: List[Dict[str, Any]]
    segments: List[CriticalSegment]
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    mode: str = "online"
    grid: Optional[Dict[str, Any]] = None
    dropped_records: int = 0

    @property
    def critical_points(self) -> List[int]:
        return [segment.enter for segment in self.segments]

    @property
    def raw_series(self) -> List[float]:
        return [row["raw"] for row in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "mode": self.mode,
            "config": self.config,
            "grid": self.grid,
            "series": self.rows,
            "segments": [segment.to_dict() for segment in self.segments],
            "critical_points": self.critical_points,
            "diagnostics": self.diagnostics,
            "dropped_records": self.dropped_records,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DriftReport":
        return cls(
            config=data["config"],
            rows=data["series"],
            segments=[CriticalSegment(s["enter"], s["exit"]) for s in data["segments"]],
            diagnostics=data.get("diagnostics", []),
            mode=data.get("mode", "online"),
            grid=data.get("grid"),
            dropped_records=data.get("dropped_records", 0),
        )


@dataclass(frozen=True)
class MatchingResult:
    """Detections matched against ground truth within a tolerance"""
    tolerance: int
    pairs: Tuple[Tuple[int, int], ...]
    tp: int
    fp: int
    fn: int
    mean_delay: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pairs"] = [list(pair) for pair in self.pairs]
        return data


@dataclass
class RunManifest:
    """Everything needed to reproduce a command's outputs"""
    command: str
    config: Dict[str, Any]
    tool_version: str
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    seeds: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"schema_version": SCHEMA_VERSION, **asdict(self)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        return cls(
            command=data["command"],
            config=data["config"],
            tool_version=data.get("tool_version", ""),
            inputs=data.get("inputs", {}),
            outputs=data.get("outputs", {}),
            seeds=data.get("seeds", []),
        )
