"""
generate: write a synthetic drifting stream
"""

import logging

import click

from kld.routes.common import resolve_command, run_options
from kld.utils.generator import GeneratorConfig, generate
from kld.utils.ingest import write_stream
from kld.utils.report_writer import ReportWriter

logger = logging.getLogger(__name__)

STREAM_NAME = "stream.csv"
PRESETS = ("none", "benchmark")


def _defaults(base: GeneratorConfig) -> dict:
    return {**base.to_dict(), "preset": "none", "out_dir": "."}


@click.command("generate")
@click.option("--seed", type=int, default=None)
@click.option("--features", "n_features", type=int, default=None)
@click.option("--classes", "n_classes", type=int, default=None)
@click.option("--chunks", "n_chunks", type=int, default=None)
@click.option("--chunk-size", type=int, default=None)
@click.option("--drifts", "n_drifts", type=int, default=None)
@click.option("--sigmoid", "sigmoid_spacing", type=float, default=None,
              help="Concept sigmoid spacing (999 gives a sudden drift).")
@click.option("--flip", "class_flip", type=float, default=None, help="Label flip probability.")
@click.option("--clusters", "clusters_per_class", type=int, default=None)
@click.option("--separation", type=float, default=None, help="Minimum distance between cluster means.")
@click.option("--scale", type=float, default=None, help="Cluster standard deviation.")
@click.option("--preset", type=click.Choice(PRESETS), default=None,
              help="'benchmark': 10000 chunks x 250, 20 drifts, sigmoid 99, flip 0.01.")
@run_options
def generate_cmd(config_path, manifest_path, out_dir, **flags):
    """Generate a labeled stream with drifts at evenly spaced chunks."""
    overrides = {**flags, "out_dir": out_dir}
    resolved = resolve_command("generate", _defaults(GeneratorConfig()), config_path, manifest_path, overrides)

    if resolved["preset"] == "benchmark":
        preset = GeneratorConfig.benchmark_preset(resolved["seed"], resolved["n_features"])
        resolved = resolve_command("generate", {**_defaults(preset), "preset": "benchmark"},
                                   config_path, manifest_path, overrides)

    config = GeneratorConfig.from_dict({key: resolved[key] for key in GeneratorConfig().to_dict()})
    meta, chunks = generate(config)

    writer = ReportWriter(resolved["out_dir"])
    count = write_stream(writer.path(STREAM_NAME), meta, chunks)
    writer.record(STREAM_NAME)
    writer.write_manifest("generate", resolved, seeds=[config.seed])

    drifts = ",".join(str(t) for t in meta.ground_truth) or "none"
    click.echo(f"Wrote {count} chunk(s) to {writer.path(STREAM_NAME)} (drift centers: {drifts})")
