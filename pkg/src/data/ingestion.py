"""
Dataset ingestion
Loads point datasets from CSV, scales them into the index domain and
generates synthetic uniform and clustered datasets.

CSV schema: one header row `id,lon,lat,timestamp`, comma separated, `.` as
the decimal point. Synthetic data is drawn from numpy's Generator with the
PCG64 bit generator, so a seed gives the same dataset on every platform.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import DomainError, IngestError
from src.index.models import IndexConfig, STObject

logger = logging.getLogger(__name__)

CSV_HEADER = ["id", "lon", "lat", "timestamp"]

DEFAULT_CLUSTERS = 10
DEFAULT_SIGMA = 200.0


@dataclass(frozen=True, slots=True)
class RawRecord:
    """One input row before scaling."""

    id: str
    lon: float
    lat: float
    timestamp: float


def _parse_float(raw: str, field: str, path: str, line: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise IngestError(f"field {field!r} is not numeric: {raw!r}", path, line) from None
    if not math.isfinite(value):
        raise IngestError(f"field {field!r} is not finite: {raw!r}", path, line)
    return value


def _rows(reader, path: str) -> Iterator[Tuple[int, List[str]]]:
    """(line, fields) of every row; bad bytes and CSV syntax errors become IngestError."""
    while True:
        try:
            row = next(reader)
        except StopIteration:
            return
        except csv.Error as e:
            raise IngestError(f"malformed CSV row: {e}", path, reader.line_num) from None
        try:
            "".join(row).encode("utf-8")
        except UnicodeEncodeError:
            raise IngestError("row is not valid UTF-8 text", path, reader.line_num) from None
        yield reader.line_num, row


def load_csv(path: Union[str, Path]) -> List[RawRecord]:
    """One RawRecord per data row, in file order."""
    path = str(path)
    try:
        # undecodable bytes survive as lone surrogates and are reported per row
        handle = open(path, newline="", encoding="utf-8", errors="surrogateescape")
    except OSError as e:
        raise IngestError(f"cannot open dataset: {e.strerror}", path) from e

    records: List[RawRecord] = []
    with handle:
        rows = _rows(csv.reader(handle), path)
        first = next(rows, None)
        if first is None:
            raise IngestError("file is empty, expected a header row", path, 1)
        header = first[1]
        if [h.strip() for h in header] != CSV_HEADER:
            raise IngestError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}", path, 1)
        for line, row in rows:
            if not row:
                continue
            if len(row) != 4:
                raise IngestError(f"expected 4 fields, got {len(row)}", path, line)
            records.append(
                RawRecord(
                    id=row[0],
                    lon=_parse_float(row[1], "lon", path, line),
                    lat=_parse_float(row[2], "lat", path, line),
                    timestamp=_parse_float(row[3], "timestamp", path, line),
                )
            )
    logger.info("loaded %d records from %s", len(records), path)
    return records


def write_csv(objects: Sequence[STObject], path: Union[str, Path]) -> None:
    """Write objects in the ingest schema; repr() keeps every double exact."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for o in objects:
                writer.writerow([o.id, repr(o.x), repr(o.y), repr(o.t)])
    except OSError as e:
        raise IngestError(f"cannot write dataset: {e.strerror}", str(path)) from e


def records_as_objects(records: Sequence[RawRecord]) -> List[STObject]:
    """Take the records' coordinates as they are, without scaling."""
    return [STObject(r.id, r.lon, r.lat, r.timestamp) for r in records]


def _scale_axis(values: np.ndarray, lo: float, hi: float, axis: str) -> np.ndarray:
    v_min, v_max = float(values.min()), float(values.max())
    if v_min == v_max:
        logger.warning("%s axis has zero extent, mapping every value to the midpoint", axis)
        return np.full(values.shape, lo + (hi - lo) / 2)
    scaled = lo + (values - v_min) / (v_max - v_min) * (hi - lo)
    # Extremes land exactly on the bounds.
    scaled = np.clip(scaled, lo, hi)
    scaled[values == v_min] = lo
    scaled[values == v_max] = hi
    return scaled


def scale_to_domain(records: Sequence[RawRecord], cfg: IndexConfig) -> List[STObject]:
    """Affine min-max scaling of every axis onto the config bounds.

    Timestamps are scaled globally over the whole dataset.
    """
    if not records:
        return []
    lon = np.fromiter((r.lon for r in records), dtype=np.float64, count=len(records))
    lat = np.fromiter((r.lat for r in records), dtype=np.float64, count=len(records))
    ts = np.fromiter((r.timestamp for r in records), dtype=np.float64, count=len(records))
    xs = _scale_axis(lon, cfg.x_lo, cfg.x_hi, "x")
    ys = _scale_axis(lat, cfg.y_lo, cfg.y_hi, "y")
    tt = _scale_axis(ts, cfg.t_lo, cfg.t_hi, "t")
    return [
        STObject(r.id, float(x), float(y), float(t))
        for r, x, y, t in zip(records, xs.tolist(), ys.tolist(), tt.tolist())
    ]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_uniform(n: int, seed: int, cfg: IndexConfig) -> List[STObject]:
    """n objects drawn i.i.d. uniform over the domain; ids are "0".."n-1"."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    rng = make_rng(seed)
    xs = rng.uniform(cfg.x_lo, cfg.x_hi, n)
    ys = rng.uniform(cfg.y_lo, cfg.y_hi, n)
    ts = rng.uniform(cfg.t_lo, cfg.t_hi, n)
    return [STObject(str(i), x, y, t) for i, (x, y, t) in enumerate(zip(xs.tolist(), ys.tolist(), ts.tolist()))]


def gen_clustered(
    n: int,
    clusters: int,
    sigma: float,
    seed: int,
    cfg: Optional[IndexConfig] = None,
) -> List[STObject]:
    """Gaussian blobs around `clusters` uniformly placed centres, clamped to the domain.

    `sigma` is the spatial standard deviation; along t it is scaled by the
    ratio of the time extent to the x extent.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if clusters < 1:
        raise DomainError(f"clusters must be >= 1, got {clusters}")
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma}")
    if cfg is None:
        cfg = IndexConfig()
    rng = make_rng(seed)
    centres = np.column_stack([
        rng.uniform(cfg.x_lo, cfg.x_hi, clusters),
        rng.uniform(cfg.y_lo, cfg.y_hi, clusters),
        rng.uniform(cfg.t_lo, cfg.t_hi, clusters),
    ])
    picks = rng.integers(0, clusters, n)
    t_sigma = sigma * (cfg.t_hi - cfg.t_lo) / (cfg.x_hi - cfg.x_lo)
    offsets = rng.normal(0.0, 1.0, (n, 3)) * np.array([sigma, sigma, t_sigma])
    points = centres[picks] + offsets
    points[:, 0] = np.clip(points[:, 0], cfg.x_lo, cfg.x_hi)
    points[:, 1] = np.clip(points[:, 1], cfg.y_lo, cfg.y_hi)
    points[:, 2] = np.clip(points[:, 2], cfg.t_lo, cfg.t_hi)
    return [STObject(str(i), x, y, t) for i, (x, y, t) in enumerate(points.tolist())]
