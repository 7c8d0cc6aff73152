"""
Stream ingestion: record validation, chunking and the stream file format

File format: a header line

    # p=<int> L=<int> K=<int> drifts=<comma-separated ints or empty> [n=<int>] [rng=<name>]

followed by one comma-separated record per line (p features, then the label).
Headerless CSV is accepted when the metadata is supplied by the caller.
"""

import csv
import logging
import math
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from kld.errors import DataError, StreamFormatError
from kld.models.stream import Chunk, StreamMeta

logger = logging.getLogger(__name__)

FEATURE_FORMAT = "%.10g"


class ChunkReader:
    """Lazily turns a record sequence into chunks of exactly K points.

    A trailing partial chunk is dropped and its size kept in ``dropped``;
    ``accepted`` counts the records that ended up in emitted chunks.
    """

    def __init__(self, records: Iterable[Sequence], meta: StreamMeta):
        self.logger = logging.getLogger(__name__)
        self.meta = meta
        self.dropped = 0
        self.accepted = 0
        self._records = records

    def __iter__(self) -> Iterator[Chunk]:
        K = self.meta.chunk_size
        features: List[List[float]] = []
        labels: List[int] = []
        index = 0

        for number, record in enumerate(self._records, start=1):
            row, label = parse_record(record, number, self.meta.p, self.meta.n_classes)
            features.append(row)
            labels.append(label)

            if len(labels) == K:
                yield Chunk(index=index, inputs=np.array(features), labels=np.array(labels))
                self.accepted += K
                index += 1
                features, labels = [], []

        if labels:
            self.dropped = len(labels)
            self.logger.warning(
                f"Dropped {self.dropped} trailing record(s) that do not fill a chunk of {K}"
            )
        self.logger.info(f"Ingested {index} chunk(s), {self.accepted} record(s)")


def ingest_records(records: Iterable[Sequence], meta: StreamMeta) -> ChunkReader:
    """
    Group records into chunks of K points, in source order

    Args:
        records: iterable of records; each holds p feature values followed by
            the integer label (strings or numbers)
        meta: stream metadata declaring p, L and K

    Returns:
        ChunkReader, a lazy iterable of Chunk with indices 0, 1, ...
    """
    return ChunkReader(records, meta)


def parse_record(record: Sequence, number: int, p: int, n_classes: int) -> Tuple[List[float], int]:
    """Validate a single record and split it into features and label"""
    if len(record) != p + 1:
        raise StreamFormatError(f"expected {p + 1} fields, got {len(record)}", number)

    try:
        row = [float(value) for value in record[:p]]
    except (TypeError, ValueError) as e:
        raise StreamFormatError(f"invalid feature value ({e})", number) from e

    if not all(math.isfinite(value) for value in row):
        raise StreamFormatError("non-finite feature value", number)

    raw_label = record[p]
    try:
        if isinstance(raw_label, str):
            label = int(raw_label.strip())
        else:
            label = int(raw_label)
            if label != raw_label:
                raise ValueError(f"{raw_label!r} is not an integer")
    except (TypeError, ValueError) as e:
        raise StreamFormatError(f"invalid label ({e})", number) from e

    if not 0 <= label < n_classes:
        raise StreamFormatError(f"unknown label {label} (L={n_classes})", number)

    return row, label


def chunk_bounds(*chunks: Chunk) -> np.ndarray:
    """Componentwise (min, max) over every point of the given chunks.

    Returns a (p, 2) array.
    """
    if not chunks:
        raise DataError("chunk_bounds needs at least one chunk")
    stacked = np.concatenate([chunk.inputs for chunk in chunks], axis=0)
    if stacked.shape[0] == 0:
        raise DataError("chunk_bounds needs at least one point")
    return np.column_stack([stacked.min(axis=0), stacked.max(axis=0)])


def parse_header(line: str) -> StreamMeta:
    """Parse the '# p=.. L=.. K=.. drifts=..' header line"""
    if not line.startswith("#"):
        raise StreamFormatError("missing '#' header line")

    fields = {}
    for token in line[1:].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise StreamFormatError(f"malformed header token '{token}'")
        fields[key] = value

    missing = [key for key in ("p", "L", "K") if key not in fields]
    if missing:
        raise StreamFormatError(f"header lacks {', '.join(missing)}")

    try:
        drifts = fields.get("drifts", "")
        return StreamMeta(
            p=int(fields["p"]),
            n_classes=int(fields["L"]),
            chunk_size=int(fields["K"]),
            n_chunks=int(fields["n"]) if "n" in fields else None,
            ground_truth=tuple(int(t) for t in drifts.split(",")) if drifts else (),
            rng=fields.get("rng"),
        )
    except ValueError as e:
        raise StreamFormatError(f"invalid header value ({e})") from e


def format_header(meta: StreamMeta) -> str:
    parts = [
        f"p={meta.p}",
        f"L={meta.n_classes}",
        f"K={meta.chunk_size}",
        "drifts=" + ",".join(str(t) for t in meta.ground_truth),
    ]
    if meta.n_chunks is not None:
        parts.append(f"n={meta.n_chunks}")
    if meta.rng:
        parts.append(f"rng={meta.rng}")
    return "# " + " ".join(parts)


def read_header(path: str) -> Optional[StreamMeta]:
    """Return the header metadata of a stream file, or None when headerless"""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("#"):
        return parse_header(first.strip())
    return None


def _file_records(path: str, skip_header: bool) -> Iterator[List[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        if skip_header:
            fh.readline()
        for row in csv.reader(fh):
            if row:
                yield row


def read_stream(path: str, meta: Optional[StreamMeta] = None) -> Tuple[StreamMeta, ChunkReader]:
    """
    Open a stream file lazily

    Args:
        path: stream file in the header + CSV format, or headerless CSV
        meta: metadata for headerless files; it takes precedence over a header

    Returns:
        (StreamMeta, ChunkReader)
    """
    header = read_header(path)
    if meta is None:
        if header is None:
            raise StreamFormatError(
                f"{path} has no header; supply --features, --classes and --chunk-size"
            )
        meta = header

    logger.info(f"Reading stream {path} (p={meta.p}, L={meta.n_classes}, K={meta.chunk_size})")
    return meta, ingest_records(_file_records(path, skip_header=header is not None), meta)


def write_stream(path: str, meta: StreamMeta, chunks: Iterable[Chunk]) -> int:
    """Write chunks in the stream file format and return the chunk count"""
    fmt = [FEATURE_FORMAT] * meta.p + ["%d"]
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_header(meta) + "\n")
        for chunk in chunks:
            block = np.column_stack([chunk.inputs, chunk.labels])
            np.savetxt(fh, block, fmt=fmt, delimiter=",", newline="\n")
            count += 1
    logger.info(f"Wrote {count} chunk(s) to {path}")
    return count
