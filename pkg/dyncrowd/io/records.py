"""
Run records: event logs, label files, metric reports and plot data.

Every floating-point value written here uses 6 significant digits.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import yaml

from ..core.config import read_config, write_config
from ..core.events import EngineEvent
from ..core.exceptions import RunDirectoryError
from ..metrics import MetricsReport
from ..predictor import SubstitutionReport
from .mot import text_reader, text_writer

PathLike = Union[str, Path]

NO_CLUSTERS = "no clusters"

__all__ = [
    'NO_CLUSTERS',
    'format_float',
    'format_summary',
    'format_substitution',
    'read_config',
    'read_events',
    'read_yaml',
    'write_columns',
    'write_config',
    'write_events',
    'write_labels',
    'write_report',
    'write_yaml',
]


def format_float(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return format(float(value), ".6g")


def _rounded(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isnan(value) else float(format_float(value))
    return value


def write_events(events: Iterable[EngineEvent], target) -> None:
    """One JSON object per line, keys sorted."""
    with text_writer(target) as out:
        for event in events:
            out.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")


def read_events(source) -> List[EngineEvent]:
    events = []
    with text_reader(source, RunDirectoryError) as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                events.append(EngineEvent.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as e:
                raise RunDirectoryError(f"event log line {line_no}: {e}", original_error=e)
    return events


def write_labels(labels: Mapping[int, Mapping[int, int]], target) -> None:
    """``frame,id,label`` lines with 1-based frames."""
    with text_writer(target) as out:
        for frame in sorted(labels):
            for pid, label in sorted(labels[frame].items()):
                out.write(f"{frame + 1},{pid},{label}\n")


def write_yaml(data: Mapping[str, Any], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump({k: _rounded(v) for k, v in data.items()}, f, sort_keys=False)


def read_yaml(path: PathLike) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise RunDirectoryError(f"cannot read {path}: {e.strerror}", original_error=e)
    except yaml.YAMLError as e:
        raise RunDirectoryError(f"invalid YAML in {path}", original_error=e)
    return data or {}


def _cell(value: Any) -> str:
    if isinstance(value, (str, int)):
        return str(value)
    return format_float(value)


def write_columns(rows: Iterable[Sequence[Any]], target, header: Sequence[str]) -> None:
    """Whitespace separated columns under a ``#`` header line."""
    with text_writer(target) as out:
        out.write("# " + " ".join(header) + "\n")
        for row in rows:
            out.write(" ".join(_cell(v) for v in row) + "\n")


def format_summary(report: MetricsReport) -> str:
    """Human-readable summary of a metrics report."""
    if not report.has_clusters:
        return f"{NO_CLUSTERS}\npedestrians: {report.n_peds}\n"

    def pct(value: Optional[float]) -> str:
        return "n/a" if value is None else f"{format_float(100 * value)}%"

    lines = [
        "dynamic clustering report",
        "",
        f"clusters (single / multi member): {report.n_clusters_single} / {report.n_clusters_multi}",
        f"pedestrians: {report.n_peds}",
        f"CMDD location (px): {format_float(report.cmdd_location)}"
        f"  [clusters with >= {report.min_members} members]",
        f"CMDD direction (deg): {format_float(report.cmdd_direction)}",
        f"CTEO location: {pct(report.cteo_location)}  [T = {format_float(report.location_threshold)} px]",
        f"CTEO direction: {pct(report.cteo_direction)}  [T = {format_float(report.direction_threshold)} deg]",
        f"CTEL location (px): {format_float(report.ctel_location)}",
        f"CTEL direction (deg): {format_float(report.ctel_direction)}",
    ]
    if report.count_series:
        lag = sum(raw - clustered for _, clustered, raw in report.count_series) / len(report.count_series)
        lines.append(f"mean unclustered pedestrians per frame: {format_float(lag)}")
    if report.ade is not None:
        lines.append(f"ADE / FDE (px): {format_float(report.ade)} / {format_float(report.fde)}")
    return "\n".join(lines) + "\n"


def write_report(report: MetricsReport, directory: PathLike) -> None:
    """
    Write ``summary.txt``, ``metrics.yaml`` and ``counts.dat`` into
    ``directory``. A run without clusters still gets all three files, marked
    ``no clusters``.
    """
    directory = Path(directory)
    (directory / "summary.txt").write_text(format_summary(report), encoding="utf-8")
    summary = dict(report.summary())
    if not report.has_clusters:
        summary = {"status": NO_CLUSTERS, **summary}
    write_yaml(summary, directory / "metrics.yaml")
    write_columns(report.count_series, directory / "counts.dat", ("frame", "clustered", "raw"))


def format_substitution(report: SubstitutionReport) -> str:
    """Comparison table of every prediction source."""
    header = f"{'source':<10}{'ADE':>12}{'FDE':>12}{'nodes':>8}{'scored':>8}{'time (s)':>12}{'mem (MiB)':>12}"
    lines = [
        f"anchor frame {report.anchor_frame + 1}, history {report.history}, horizon {report.horizon}"
        + ("" if report.keep_fraction is None else f", keep fraction {format_float(report.keep_fraction)}"),
        header,
    ]
    for row in report.rows:
        ade = format_float(row.ade)
        fde = format_float(row.fde)
        if row.repeats > 1:
            ade += f"±{format_float(row.ade_2sigma)}"
            fde += f"±{format_float(row.fde_2sigma)}"
        lines.append(f"{row.source:<10}{ade:>12}{fde:>12}{row.n_nodes:>8}{row.n_scored:>8}"
                     f"{format_float(row.elapsed_seconds):>12}{format_float(row.peak_mib):>12}")
    return "\n".join(lines) + "\n"
