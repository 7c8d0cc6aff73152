"""
Options and helpers shared by the kld commands
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

import click

from kld.config import resolve
from kld.errors import ConfigError
from kld.models.stream import StreamMeta
from kld.utils.detector import DetectorConfig
from kld.utils.evaluation import alpha_range
from kld.utils.ingest import ChunkReader, read_stream
from kld.utils.report_writer import check_inputs, load_manifest

logger = logging.getLogger(__name__)

DETECTOR_KEYS = tuple(DetectorConfig().to_dict())
STREAM_KEYS = ("input", "features", "classes", "chunk_size")


def _apply(options: List[Callable]) -> Callable:
    def decorator(f):
        for option in reversed(options):
            f = option(f)
        return f
    return decorator


def run_options(f):
    """--config, --from-manifest and --out-dir"""
    return _apply([
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="JSON configuration file with one section per command."),
        click.option("--from-manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False),
                     help="Re-run with the resolved configuration of a previous run."),
        click.option("--out-dir", type=click.Path(file_okay=False), default=None,
                     help="Directory receiving the output files."),
    ])(f)


def stream_options(f):
    """Input stream and metadata for headerless files"""
    return _apply([
        click.option("--input", "-i", "input", type=click.Path(dir_okay=False), default=None,
                     help="Stream file (header + CSV records)."),
        click.option("--features", type=int, default=None, help="Feature count p for headerless input."),
        click.option("--classes", type=int, default=None, help="Class count L for headerless input."),
        click.option("--chunk-size", type=int, default=None, help="Chunk size K for headerless input."),
    ])(f)


def detector_options(f):
    """Flags mirroring DetectorConfig (alpha excluded, commands add their own)"""
    return _apply([
        click.option("--epsilon", type=float, default=None, help="Zero-mass replacement in pmfs."),
        click.option("--bins-mode", type=click.Choice(["slab", "product"]), default=None),
        click.option("--bins-per-dim", type=int, default=None),
        click.option("--smoother", default=None, help="ma:<window> or lowess:<frac>:<iters>."),
        click.option("--stats-window", type=int, default=None,
                     help="Trailing window of the band statistics (full history when omitted)."),
        click.option("--grid", "grid_scope", type=click.Choice(["per-pair", "global"]), default=None),
        click.option("--warmup", type=int, default=None, help="Gradient points before the rule applies."),
        click.option("--band-side", type=click.Choice(["upper", "both"]), default=None),
        click.option("--metric", type=click.Choice(["weighted", "unweighted"]), default=None),
        click.option("--jay-factor/--no-jay-factor", default=None,
                     help="Keep the 1/J' factor of the weighted metric."),
        click.option("--stats-scope", type=click.Choice(["history", "final"]), default=None,
                     help="'final' uses the whole gradient sequence (batch only)."),
    ])(f)


def resolve_command(
    command: str,
    defaults: Dict[str, Any],
    config_path: Optional[str],
    manifest_path: Optional[str],
    overrides: Dict[str, Any],
) -> Dict[str, Any]:
    """defaults < manifest config < configuration file < explicit flags"""
    if manifest_path:
        manifest = load_manifest(manifest_path)
        if manifest.command != command:
            raise ConfigError(f"{manifest_path} records a '{manifest.command}' run, not '{command}'")
        unknown = sorted(set(manifest.config) - set(defaults))
        if unknown:
            raise ConfigError(f"{manifest_path} holds unknown option(s): {', '.join(unknown)}")
        check_inputs(manifest)
        defaults = {**defaults, **manifest.config}
    return resolve(command, defaults, config_path, overrides)


def detector_config(resolved: Dict[str, Any]) -> DetectorConfig:
    return DetectorConfig.from_dict({key: resolved[key] for key in DETECTOR_KEYS})


def open_stream(resolved: Dict[str, Any]) -> Tuple[StreamMeta, ChunkReader]:
    path = resolved.get("input")
    if not path:
        raise ConfigError("no input stream: pass --input FILE")

    given = [resolved.get(key) for key in ("features", "classes", "chunk_size")]
    if any(value is not None for value in given):
        if any(value is None for value in given):
            raise ConfigError("--features, --classes and --chunk-size must be given together")
        meta = StreamMeta(p=given[0], n_classes=given[1], chunk_size=given[2])
        return read_stream(path, meta)
    return read_stream(path)


def parse_alphas(text: str) -> List[float]:
    """'1.0:3.0:0.25' (inclusive range) or '1.0,1.5,2.0'"""
    try:
        if ":" in text:
            parts = [float(part) for part in text.split(":")]
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            return alpha_range(*parts)
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"invalid alpha list '{text}': {e}") from e
    if not values:
        raise ConfigError("empty alpha list")
    return values


def parse_indices(text) -> List[int]:
    """'250,750', or a list when the value comes from a configuration file"""
    try:
        if isinstance(text, (list, tuple)):
            return [int(part) for part in text]
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"invalid index list '{text}': {e}") from e
