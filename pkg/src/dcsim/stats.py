"""Probe persistence and post-processing statistics.

Each run streams its probe records to one CSV file.  After a sweep, the
run files are merged by grid point and summarised: per metric, the
time-average within each replicate, then the across-replicate mean with a
Student-t 95% confidence-interval half-width.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import IO, Iterable, Iterator

from .config import grid_point_of_stem


@dataclass(frozen=True)
class ProbeRecord:
    time: float
    n_consistent: int
    n_inconsistent: int
    n_consistent_unfiltered: int
    n_inconsistent_unfiltered: int
    total_load: int
    mean_load_per_service: float
    max_load_blade: int
    max_load_chassis: int
    max_load_rack: int
    max_load_aisle: int
    max_load_root: int


CSV_HEADER = ",".join(f.name for f in fields(ProbeRecord))
METRICS = tuple(f.name for f in fields(ProbeRecord))[1:]  # everything but time

SUMMARY_HEADER = "grid_point,metric,replicates,mean,ci_halfwidth"


def format_record(record: ProbeRecord) -> str:
    parts = []
    for f in fields(ProbeRecord):
        value = getattr(record, f.name)
        parts.append(repr(value) if isinstance(value, float) else str(value))
    return ",".join(parts)


class CsvWriter:
    """Streaming probe writer; rows hit the file as they arrive."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._fh: IO[str] = open(self.path, "w", encoding="utf-8", newline="")
        self._fh.write(CSV_HEADER + "\n")
        self.rows = 0

    def write(self, record: ProbeRecord) -> None:
        self._fh.write(format_record(record) + "\n")
        self.rows += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "CsvWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_csv(records: Iterable[ProbeRecord], path: str | Path) -> int:
    """Write a full record stream; returns the number of data rows."""
    with CsvWriter(path) as writer:
        for record in records:
            writer.write(record)
        return writer.rows


class SchemaError(ValueError):
    """A run CSV whose header does not match the probe schema."""


def read_csv(path: str | Path) -> list[ProbeRecord]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise SchemaError(f"{path}: header does not match probe schema")
        records = []
        for line in fh:
            raw = line.rstrip("\n").split(",")
            records.append(ProbeRecord(
                time=float(raw[0]),
                n_consistent=int(raw[1]),
                n_inconsistent=int(raw[2]),
                n_consistent_unfiltered=int(raw[3]),
                n_inconsistent_unfiltered=int(raw[4]),
                total_load=int(raw[5]),
                mean_load_per_service=float(raw[6]),
                max_load_blade=int(raw[7]),
                max_load_chassis=int(raw[8]),
                max_load_rack=int(raw[9]),
                max_load_aisle=int(raw[10]),
                max_load_root=int(raw[11]),
            ))
    return records


# grid point -> replicate index -> records
MergedRuns = dict[str, dict[int, list[ProbeRecord]]]


def merge_runs(paths: Iterable[str | Path]) -> MergedRuns:
    """Group run CSVs by the grid point encoded in their file names."""
    merged: MergedRuns = {}
    for path in sorted(Path(p) for p in paths):
        if not path.exists():
            raise FileNotFoundError(f"run file missing: {path}")
        point, replicate = grid_point_of_stem(path.stem)
        merged.setdefault(point, {})[replicate] = read_csv(path)
    return merged


def merged_rows(merged: MergedRuns) -> Iterator[tuple[str, int, ProbeRecord]]:
    """Flat row view grouped by (grid point, time), replicate as tiebreak."""
    for point in sorted(merged):
        rows = [(record.time, replicate, record)
                for replicate, records in merged[point].items()
                for record in records]
        rows.sort(key=lambda item: (item[0], item[1]))
        for time, replicate, record in rows:
            yield point, replicate, record


@dataclass(frozen=True)
class RunSummary:
    grid_point: str
    metric: str
    replicates: int
    mean: float
    ci_halfwidth: float | None  # absent below two replicates


def _halfwidth(values: list[float]) -> float | None:
    from scipy import stats as scipy_stats  # deferred: simulation runs never need it

    r = len(values)
    if r < 2:
        return None
    mean = sum(values) / r
    variance = sum((v - mean) ** 2 for v in values) / (r - 1)
    t = float(scipy_stats.t.ppf(0.975, r - 1))
    return t * (variance ** 0.5) / (r ** 0.5)


def summarize(grid_point: str, replicates: dict[int, list[ProbeRecord]]) -> list[RunSummary]:
    """One summary row per metric over a grid point's replicates."""
    if not replicates:
        raise ValueError(f"grid point {grid_point!r} has no replicates")
    summaries = []
    for metric in METRICS:
        per_replicate = []
        for replicate in sorted(replicates):
            records = replicates[replicate]
            if not records:
                raise ValueError(f"{grid_point!r} replicate {replicate} has no probes")
            per_replicate.append(
                sum(float(getattr(r, metric)) for r in records) / len(records))
        mean = sum(per_replicate) / len(per_replicate)
        summaries.append(RunSummary(
            grid_point=grid_point,
            metric=metric,
            replicates=len(per_replicate),
            mean=mean,
            ci_halfwidth=_halfwidth(per_replicate),
        ))
    return summaries


def summarize_all(merged: MergedRuns) -> list[RunSummary]:
    out: list[RunSummary] = []
    for point in sorted(merged):
        out.extend(summarize(point, merged[point]))
    return out


def write_summary_csv(summaries: Iterable[RunSummary], path: str | Path) -> int:
    rows = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for s in summaries:
            half = repr(s.ci_halfwidth) if s.ci_halfwidth is not None else ""
            fh.write(f"{s.grid_point},{s.metric},{s.replicates},{repr(s.mean)},{half}\n")
            rows += 1
    return rows
