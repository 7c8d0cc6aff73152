"""
detect: run the KLD detector over a stream file
"""

import logging

import click

from kld.routes.common import (
    STREAM_KEYS,
    detector_config,
    detector_options,
    open_stream,
    resolve_command,
    run_options,
    stream_options,
)
from kld.utils.detector import DetectorConfig, detect_batch, detect_online
from kld.utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

MODES = ("online", "batch")

DEFAULTS = {
    **DetectorConfig().to_dict(),
    **{key: None for key in STREAM_KEYS},
    "mode": "online",
    "emit_plot_data": False,
    "out_dir": ".",
}


@click.command("detect")
@stream_options
@click.option("--alpha", type=float, default=None, help="Threshold multiplier of the decision band.")
@detector_options
@click.option("--mode", type=click.Choice(MODES), default=None,
              help="online (chunk by chunk) or batch (lowess and final statistics allowed).")
@click.option("--emit-plot-data/--no-plot-data", default=None,
              help="Also write plot_data.csv with the band columns.")
@run_options
def detect_cmd(config_path, manifest_path, out_dir, **flags):
    """Detect concept drift in a labeled stream."""
    resolved = resolve_command("detect", DEFAULTS, config_path, manifest_path, {**flags, "out_dir": out_dir})
    config = detector_config(resolved)
    meta, chunks = open_stream(resolved)

    def announce(segment):
        logger.info(f"Drift flagged at chunk {segment.enter}")

    if resolved["mode"] == "online":
        report = detect_online(chunks, config, meta.n_classes, on_segment_open=announce)
    else:
        report = detect_batch(chunks, config, meta.n_classes)

    writer = ReportWriter(resolved["out_dir"])
    writer.write_report(report, plot_data=bool(resolved["emit_plot_data"]))
    writer.write_manifest("detect", resolved, inputs={"input": resolved["input"]})

    points = ",".join(str(c) for c in report.critical_points) or "none"
    click.echo(f"{len(report.segments)} critical segment(s); critical points: {points}")
