"""
MOT text format.

One record per line, comma separated::

    <frame>,<id>,<bb_left>,<bb_top>,<bb_width>,<bb_height>,<conf>,<x>,<y>,<z>

Frames are 1-based in files and 0-based in memory. A pedestrian's point is
the centre of its box; centroids are written as zero-size boxes.
"""

import csv
import io
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, TextIO, Tuple, Type, Union

from ..core.events import Memberships
from ..core.exceptions import DynCrowdError, MotFormatError
from ..core.logging import get_logger
from ..core.types import CentroidSample, CentroidTrack, ObservationStream, Point
from ..geometry import direction_angle

logger = get_logger(__name__)

Source = Union[str, Path, TextIO]

# share of malformed lines above which a file is rejected
MAX_MALFORMED_FRACTION = 0.1
MIN_FIELDS = 6


@dataclass(frozen=True)
class MotRecord:
    """One MOT line; ``frame`` is 1-based"""
    frame: int
    id: int
    bb_left: float
    bb_top: float
    bb_width: float
    bb_height: float
    conf: float = 1.0
    x: float = -1.0
    y: float = -1.0
    z: float = -1.0

    @property
    def center(self) -> Point:
        return (self.bb_left + self.bb_width / 2, self.bb_top + self.bb_height / 2)

    @classmethod
    def from_point(cls, frame: int, pid: int, point: Point, size: float = 0.0,
                   conf: float = 1.0) -> "MotRecord":
        """Record for 0-based ``frame`` with a ``size`` square box centred on ``point``."""
        return cls(frame + 1, pid, point[0] - size / 2, point[1] - size / 2, size, size, conf)

    def to_line(self) -> str:
        values = (self.bb_left, self.bb_top, self.bb_width, self.bb_height, self.conf, self.x, self.y, self.z)
        return ",".join([str(self.frame), str(self.id)] + [_number(v) for v in values])


@dataclass
class MotData:
    """Parsed MOT file: 0-based frame -> id -> box centre"""
    frames: Dict[int, Dict[int, Point]] = field(default_factory=dict)
    confidences: Dict[int, Dict[int, float]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    n_records: int = 0

    @property
    def first_frame(self) -> Optional[int]:
        return min(self.frames) if self.frames else None

    @property
    def last_frame(self) -> Optional[int]:
        return max(self.frames) if self.frames else None


def _number(value: float) -> str:
    return format(float(value), ".12g")


def _integer(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"'{text}' is not an integer")
    return int(value)


def parse_mot_line(line: str) -> MotRecord:
    """
    Parse one MOT line.

    Raises:
        ValueError: too few fields, non-numeric fields, frame < 1 or a
            negative box size
    """
    fields_ = [f.strip() for f in next(csv.reader([line]))]
    if len(fields_) < MIN_FIELDS:
        raise ValueError(f"expected at least {MIN_FIELDS} fields, got {len(fields_)}")
    frame, pid = _integer(fields_[0]), _integer(fields_[1])
    numbers = [float(f) for f in fields_[2:10]]
    if not all(math.isfinite(v) for v in numbers[:4]):
        raise ValueError("non-finite box")
    if frame < 1:
        raise ValueError(f"frame must be >= 1, got {frame}")
    if numbers[2] < 0 or numbers[3] < 0:
        raise ValueError("box width and height must not be negative")
    return MotRecord(frame, pid, *numbers)


@contextmanager
def text_reader(source: Source, error: Type[DynCrowdError] = MotFormatError) -> Iterator[TextIO]:
    if isinstance(source, (str, Path)):
        try:
            handle = open(source, "r", encoding="utf-8", newline="")
        except OSError as e:
            raise error(f"cannot read {source}: {e.strerror}", original_error=e)
        with handle:
            yield handle
    else:
        yield source


@contextmanager
def text_writer(target: Union[str, Path, TextIO]) -> Iterator[TextIO]:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="\n") as handle:
            yield handle
    else:
        yield target


def read_mot(source: Source) -> MotData:
    """
    Read a MOT file into per-frame observations.

    Blank lines and ``#`` comments are skipped. Malformed lines become
    warnings carrying their line number.

    Raises:
        MotFormatError: unreadable or empty input, a duplicate (frame, id), or
            more than 10% malformed lines
    """
    data = MotData()
    seen: Dict[Tuple[int, int], int] = {}
    n_lines = 0
    with text_reader(source) as handle:
        try:
            lines = list(handle)
        except (OSError, UnicodeDecodeError) as e:
            raise MotFormatError(f"cannot read input: {e}", original_error=e)

    for line_no, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        n_lines += 1
        try:
            record = parse_mot_line(text)
        except (ValueError, StopIteration) as e:
            message = f"line {line_no}: {e}"
            data.warnings.append(message)
            logger.warning("malformed_mot_line", line_no=line_no, error=str(e))
            continue
        key = (record.frame, record.id)
        if key in seen:
            raise MotFormatError(
                f"line {line_no}: duplicate frame {record.frame} id {record.id} (first on line {seen[key]})",
                line_no=line_no,
            )
        seen[key] = line_no
        frame = record.frame - 1
        data.frames.setdefault(frame, {})[record.id] = record.center
        data.confidences.setdefault(frame, {})[record.id] = record.conf
        data.n_records += 1

    if n_lines == 0:
        raise MotFormatError("empty input")
    if len(data.warnings) > MAX_MALFORMED_FRACTION * n_lines:
        raise MotFormatError(
            f"{len(data.warnings)} of {n_lines} lines are malformed; first: {data.warnings[0]}",
            details={"malformed": len(data.warnings), "lines": n_lines},
        )
    data.frames = {f: dict(sorted(obs.items())) for f, obs in sorted(data.frames.items())}
    return data


def write_mot_points(stream: ObservationStream, target, size: float = 0.0,
                     confidences: Optional[Mapping[int, Mapping[int, float]]] = None) -> None:
    """Write observations as ``size`` square boxes, ordered by frame then id."""
    with text_writer(target) as out:
        for frame in sorted(stream):
            for pid, point in sorted(stream[frame].items()):
                conf = 1.0 if confidences is None else confidences.get(frame, {}).get(pid, 1.0)
                out.write(MotRecord.from_point(frame, pid, point, size, conf).to_line() + "\n")


def write_centroids(tracks: Mapping[int, CentroidTrack], target,
                    memberships: Optional[Memberships] = None) -> None:
    """
    Write centroid tracks as zero-size boxes, one line per (frame, cluster).

    ``conf`` is the number of cluster members that frame (0 without
    ``memberships``).
    """
    rows = sorted(
        (sample.frame, cid, sample)
        for cid, track in tracks.items()
        for sample in track
    )
    with text_writer(target) as out:
        for frame, cid, sample in rows:
            members = 0 if memberships is None else len(memberships.get(frame, {}).get(cid, ()))
            out.write(MotRecord.from_point(frame, cid, sample.location, 0.0, members).to_line() + "\n")


def mot_text(stream: ObservationStream, size: float = 0.0) -> str:
    buffer = io.StringIO()
    write_mot_points(stream, buffer, size)
    return buffer.getvalue()


def tracks_from_points(frames: ObservationStream) -> Dict[int, CentroidTrack]:
    """
    Centroid tracks from a centroid MOT file.

    Headings come from consecutive positions; a track's first sample takes
    the heading of its first step.

    Raises:
        MotFormatError: a track skips a frame
    """
    paths: Dict[int, List[Tuple[int, Point]]] = {}
    for frame in sorted(frames):
        for cid, point in frames[frame].items():
            paths.setdefault(cid, []).append((frame, point))

    tracks: Dict[int, CentroidTrack] = {}
    for cid, points in sorted(paths.items()):
        samples: List[CentroidSample] = []
        theta = None
        for index, (frame, (X, Y)) in enumerate(points):
            if index:
                prev_frame, (pX, pY) = points[index - 1]
                if frame != prev_frame + 1:
                    raise MotFormatError(f"cluster {cid} skips from frame {prev_frame + 1} to {frame + 1}")
                step = direction_angle(X - pX, Y - pY)
                theta = theta if step is None else step
            samples.append(CentroidSample(frame, X, Y, theta))
        if len(samples) >= 2 and samples[0].theta is None:
            samples[0] = CentroidSample(samples[0].frame, samples[0].X, samples[0].Y, samples[1].theta)
        tracks[cid] = CentroidTrack(cid, tuple(samples))
    return tracks
