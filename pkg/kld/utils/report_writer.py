"""
Result files: JSON reports, CSV tables and run manifests

JSON is written with sorted keys and a fixed indent, tables through pandas
with a fixed column order, so identical runs give identical bytes.
"""

import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd

from kld import __version__
from kld.errors import ConfigError
from kld.models.report import SCHEMA_VERSION, DriftReport, RunManifest

SERIES_COLUMNS = ["k", "chunk", "raw", "normalized", "smoothed", "gradient", "critical"]
DISTANCE_COLUMNS = ["i", "chunk", "value_unweighted", "value_weighted", "skipped_bins"]
PLOT_COLUMNS = ["k", "chunk", "raw", "normalized", "smoothed", "gradient", "lower", "upper", "critical"]
SWEEP_COLUMNS = ["alpha", "detections", "tp", "fp", "fn", "mean_delay"]
METRIC_COLUMNS = ["detector", "detections", "tp", "fp", "fn", "mean_delay"]

MANIFEST_NAME = "manifest.json"


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def file_digest(path: str) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            sha.update(block)
    return sha.hexdigest()


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read {path}: {e}") from e


def series_rows(report: DriftReport, columns: Sequence[str] = SERIES_COLUMNS) -> List[Dict[str, Any]]:
    return [{column: row.get(column) for column in columns} for row in report.rows]


def distance_rows(report: DriftReport) -> List[Dict[str, Any]]:
    return [
        {
            "i": row["k"],
            "chunk": row["chunk"],
            "value_unweighted": row["value_unweighted"],
            "value_weighted": row["value_weighted"],
            "skipped_bins": row["skipped_bins"],
        }
        for row in report.rows
    ]


class ReportWriter:
    """Writes the outputs of one command into a directory and keeps their digests"""

    def __init__(self, out_dir: str):
        self.logger = logging.getLogger(__name__)
        self.out_dir = out_dir
        self.outputs: Dict[str, str] = {}
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def record(self, name: str) -> str:
        path = self.path(name)
        self.outputs[name] = file_digest(path)
        self.logger.info(f"Wrote {path}")
        return path

    def write_json(self, name: str, data: Any) -> str:
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(canonical_json(data))
        return self.record(name)

    def write_table(self, name: str, rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
        frame = pd.DataFrame(list(rows), columns=list(columns))
        frame.to_csv(self.path(name), index=False, lineterminator="\n")
        return self.record(name)

    def write_report(self, report: DriftReport, plot_data: bool = False) -> None:
        self.write_json("report.json", report.to_dict())
        self.write_table("series.csv", series_rows(report), SERIES_COLUMNS)
        self.write_table("distances.csv", distance_rows(report), DISTANCE_COLUMNS)
        if plot_data:
            self.write_table("plot_data.csv", series_rows(report, PLOT_COLUMNS), PLOT_COLUMNS)

    def write_manifest(
        self,
        command: str,
        config: Dict[str, Any],
        inputs: Optional[Dict[str, str]] = None,
        seeds: Optional[List[int]] = None,
    ) -> RunManifest:
        manifest = RunManifest(
            command=command,
            config=config,
            tool_version=__version__,
            inputs={path: file_digest(path) for path in (inputs or {}).values()},
            outputs=dict(sorted(self.outputs.items())),
            seeds=list(seeds or []),
        )
        with open(self.path(MANIFEST_NAME), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(canonical_json(manifest.to_dict()))
        self.logger.info(f"Wrote {self.path(MANIFEST_NAME)}")
        return manifest


def load_manifest(path: str) -> RunManifest:
    data = read_json(path)
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported manifest schema_version {version!r}")
    return RunManifest.from_dict(data)


def check_inputs(manifest: RunManifest) -> List[str]:
    """Inputs whose current digest differs from the manifest (missing files included)"""
    logger = logging.getLogger(__name__)
    changed = []
    for path, digest in sorted(manifest.inputs.items()):
        if not os.path.isfile(path) or file_digest(path) != digest:
            logger.warning(f"Input {path} differs from the manifest digest")
            changed.append(path)
    return changed
