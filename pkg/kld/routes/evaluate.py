"""
evaluate: score a detection report (and optional baselines) against ground truth
"""

import logging
from typing import List, Optional

import click

from kld.errors import ConfigError
from kld.models.report import DriftReport
from kld.routes.common import parse_indices, resolve_command, run_options
from kld.utils.baselines import DEFAULT_WARMUP, BaselineConfig, run_baseline
from kld.utils.evaluation import DEFAULT_TOLERANCE, match
from kld.utils.ingest import read_header
from kld.utils.report_writer import METRIC_COLUMNS, ReportWriter, read_json

logger = logging.getLogger(__name__)

DEFAULTS = {
    "report": None,
    "truth": None,
    "stream": None,
    "tolerance": DEFAULT_TOLERANCE,
    "baseline": [],
    "baseline_warmup": DEFAULT_WARMUP,
    "baseline_restart": True,
    "out_dir": ".",
}


def ground_truth(truth: Optional[str], stream: Optional[str]) -> List[int]:
    if truth is not None:
        return parse_indices(truth)
    if stream:
        meta = read_header(stream)
        if meta is not None:
            return list(meta.ground_truth)
    raise ConfigError("no ground truth: pass --truth 250,750 or --stream with a 'drifts=' header")


@click.command("evaluate")
@click.option("--report", type=click.Path(exists=True, dir_okay=False), default=None,
              help="report.json written by detect.")
@click.option("--truth", default=None, help="Comma-separated ground-truth chunk indices.")
@click.option("--stream", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Stream file whose header lists the drift centers.")
@click.option("--tolerance", type=int, default=None, help="Largest |detection - truth| counted as a hit.")
@click.option("--baseline", multiple=True,
              help="cusum:<kappa>,<h> or ewma:<lam>,<c>, run on the raw divergence series "
                   "standardized by its warmup prefix. Repeatable.")
@click.option("--baseline-warmup", type=int, default=None)
@click.option("--baseline-restart/--baseline-fixed-reference", default=None,
              help="Take a fresh warmup reference after every baseline alarm (default) "
                   "or keep the initial one.")
@run_options
def evaluate_cmd(config_path, manifest_path, out_dir, baseline, **flags):
    """Match critical points to ground-truth drifts."""
    overrides = {**flags, "out_dir": out_dir, "baseline": list(baseline) or None}
    resolved = resolve_command("evaluate", DEFAULTS, config_path, manifest_path, overrides)
    if not resolved["report"]:
        raise ConfigError("no report: pass --report report.json")

    report = DriftReport.from_dict(read_json(resolved["report"]))
    truth = ground_truth(resolved["truth"], resolved["stream"])
    tolerance = resolved["tolerance"]

    results = [("kld", report.critical_points, match(truth, report.critical_points, tolerance))]
    chunk_of_row = [row["chunk"] for row in report.rows]
    for text in resolved["baseline"]:
        config = BaselineConfig.parse(
            text, warmup=resolved["baseline_warmup"], restart=resolved["baseline_restart"]
        )
        alarms = [chunk_of_row[k] for k in run_baseline(report.raw_series, config)]
        results.append((config.label, alarms, match(truth, alarms, tolerance)))

    writer = ReportWriter(resolved["out_dir"])
    writer.write_table(
        "metrics.csv",
        [
            {
                "detector": name,
                "detections": len(detections),
                "tp": matching.tp,
                "fp": matching.fp,
                "fn": matching.fn,
                "mean_delay": matching.mean_delay,
            }
            for name, detections, matching in results
        ],
        METRIC_COLUMNS,
    )
    writer.write_json("metrics.json", {
        "truth": truth,
        "tolerance": tolerance,
        "detectors": [
            {"detector": name, "detections": detections, "matching": matching.to_dict()}
            for name, detections, matching in results
        ],
    })
    inputs = {"report": resolved["report"]}
    if resolved["stream"]:
        inputs["stream"] = resolved["stream"]
    writer.write_manifest("evaluate", resolved, inputs=inputs)

    for name, _, matching in results:
        click.echo(f"{name}: tp={matching.tp} fp={matching.fp} fn={matching.fn} mean_delay={matching.mean_delay}")
