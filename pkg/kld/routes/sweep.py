"""
sweep: alpha sensitivity of the detector on one stream
"""

import logging

import click

from kld.routes.common import (
    STREAM_KEYS,
    detector_config,
    detector_options,
    open_stream,
    parse_alphas,
    parse_indices,
    resolve_command,
    run_options,
    stream_options,
)
from kld.utils.detector import DetectorConfig
from kld.utils.evaluation import DEFAULT_TOLERANCE, alpha_sweep
from kld.utils.report_writer import SWEEP_COLUMNS, ReportWriter

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = "0.8,1.0,1.2,1.5,1.75,2.0,2.5,3.0"

DEFAULTS = {
    **{key: value for key, value in DetectorConfig().to_dict().items() if key != "alpha"},
    **{key: None for key in STREAM_KEYS},
    "alphas": DEFAULT_ALPHAS,
    "truth": None,
    "tolerance": DEFAULT_TOLERANCE,
    "out_dir": ".",
}


@click.command("sweep")
@stream_options
@click.option("--alphas", default=None, help="start:stop:step (inclusive) or a comma-separated list.")
@click.option("--truth", default=None, help="Ground-truth chunk indices (default: the stream header).")
@click.option("--tolerance", type=int, default=None)
@detector_options
@run_options
def sweep_cmd(config_path, manifest_path, out_dir, **flags):
    """Run the decision rule for a list of alphas over one divergence series."""
    # one stream per invocation, alphas in sequence; each alpha only re-thresholds
    # the shared series, so multi-seed sweeps are separate runs
    resolved = resolve_command("sweep", DEFAULTS, config_path, manifest_path, {**flags, "out_dir": out_dir})
    alphas = parse_alphas(str(resolved["alphas"]))
    config = detector_config({**resolved, "alpha": alphas[0]})
    meta, chunks = open_stream(resolved)

    truth = parse_indices(resolved["truth"]) if resolved["truth"] is not None else list(meta.ground_truth)
    points = alpha_sweep(chunks, config, alphas, meta.n_classes, truth, resolved["tolerance"])

    writer = ReportWriter(resolved["out_dir"])
    writer.write_table("sweep.csv", [point.to_row() for point in points], SWEEP_COLUMNS)
    writer.write_json("sweep.json", {
        "config": {key: value for key, value in config.to_dict().items() if key != "alpha"},
        "truth": truth,
        "tolerance": resolved["tolerance"],
        "alphas": [point.to_dict() for point in points],
    })
    writer.write_manifest("sweep", resolved, inputs={"input": resolved["input"]})

    for point in points:
        click.echo(f"alpha={point.alpha}: {len(point.detections)} detection(s)")
