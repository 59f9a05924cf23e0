"""
Trajectory prediction with cluster centroids standing in for pedestrians.

A constant-velocity predictor and a random-subsample baseline, plus the
harness that feeds one predictor from several data sources and scores all of
them against the same ground-truth pedestrians:

- ``gt``: ground-truth tracks
- ``tracking``: the (noisy) tracker output
- ``cluster``: centroid tracks of the dynamic clustering of the tracker output
- ``random``: a random subset of the tracker tracks

A pedestrian scored from a source without its own node takes the prediction
of its cluster (``cluster``) or of the nearest node at the anchor frame.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar

import numpy as np
from scipy.spatial.distance import cdist

from .core.config import EngineConfig
from .core.exceptions import PredictionError
from .core.logging import get_logger
from .core.performance import ResourceMonitor, ResourceUsage
from .core.types import ObservationStream, Point
from .engine import DynamicClusteringEngine, RunResult
from .metrics import ade_fde

logger = get_logger(__name__)

T = TypeVar("T")
Predictor = Callable[[np.ndarray, int], np.ndarray]

# longest stretch of history the velocity estimate looks at
VELOCITY_WINDOW = 8

SOURCES = ("gt", "tracking", "cluster", "random")


@dataclass(frozen=True)
class Protocol:
    history: int
    horizon: int


PROTOCOLS: Dict[str, Protocol] = {
    "short": Protocol(history=8, horizon=12),
    "long": Protocol(history=25, horizon=50),
}


@dataclass(frozen=True)
class SourceResult:
    """
    Scores and cost of one data source. The 2-sigma fields are 0 unless
    repeated; ``repeats`` counts the random draws that were scored and is 0
    (with nan scores) when every draw came out empty.
    """
    source: str
    ade: float
    fde: float
    n_nodes: int
    n_scored: int
    elapsed_seconds: float
    peak_mib: float
    ade_2sigma: float = 0.0
    fde_2sigma: float = 0.0
    repeats: int = 1


@dataclass
class SubstitutionReport:
    """Side-by-side results of every source at one anchor frame"""
    anchor_frame: int
    history: int
    horizon: int
    keep_fraction: Optional[float]
    rows: List[SourceResult] = field(default_factory=list)

    def row(self, source: str) -> SourceResult:
        for row in self.rows:
            if row.source == source:
                return row
        raise KeyError(source)


def constant_velocity_predict(history: Sequence[Point], horizon: int) -> np.ndarray:
    """
    Extrapolate ``history`` for ``horizon`` steps.

    Velocity is the mean step over the last min(8, len - 1) steps.
    """
    points = np.asarray(history, dtype=float).reshape(-1, 2)
    if len(points) < 2:
        raise PredictionError(f"constant velocity needs at least 2 history points, got {len(points)}")
    if horizon < 1:
        raise PredictionError(f"horizon must be at least 1, got {horizon}")
    steps = min(VELOCITY_WINDOW, len(points) - 1)
    velocity = (points[-1] - points[-1 - steps]) / steps
    return points[-1] + velocity * np.arange(1, horizon + 1, dtype=float)[:, None]


def random_subsample(tracks: Mapping[int, T], keep_fraction: float, seed: int) -> Dict[int, T]:
    """Keep each pedestrian independently with probability ``keep_fraction``."""
    if not 0 < keep_fraction <= 1:
        raise PredictionError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    ids = sorted(tracks)
    keep = np.random.default_rng(seed).random(len(ids)) < keep_fraction
    return {pid: tracks[pid] for pid, kept in zip(ids, keep) if kept}


# ----------------------------------------------------------------------
# substitution harness

def _trailing_histories(stream: ObservationStream, anchor: int, history: int) -> Dict[int, np.ndarray]:
    """
    Contiguous history of every id observed at ``anchor``, at most ``history``
    points ending there. Ids with fewer than two points are left out.
    """
    paths: Dict[int, List[Point]] = {}
    for pid in sorted(stream.get(anchor, {})):
        points = []
        for frame in range(anchor, anchor - history, -1):
            point = stream.get(frame, {}).get(pid)
            if point is None:
                break
            points.append(point)
        if len(points) >= 2:
            paths[pid] = np.asarray(points[::-1], dtype=float)
    return paths


def _centroid_histories(run: RunResult, anchor: int, history: int) -> Dict[int, np.ndarray]:
    paths: Dict[int, np.ndarray] = {}
    for cid, track in sorted(run.tracks.items()):
        points = []
        for frame in range(anchor, anchor - history, -1):
            sample = track.at(frame)
            if sample is None:
                break
            points.append(sample.location)
        if len(points) >= 2:
            paths[cid] = np.asarray(points[::-1], dtype=float)
    return paths


def _predict_all(nodes: Mapping[int, np.ndarray], predictor: Predictor, horizon: int,
                 threads: int) -> Tuple[Dict[int, np.ndarray], ResourceUsage]:
    ids = sorted(nodes)
    with ResourceMonitor() as monitor:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                predicted = list(pool.map(lambda pid: predictor(nodes[pid], horizon), ids))
        else:
            predicted = [predictor(nodes[pid], horizon) for pid in ids]
    return dict(zip(ids, predicted)), monitor.usage


def _score(
    name: str,
    nodes: Mapping[int, np.ndarray],
    predictions: Mapping[int, np.ndarray],
    owners: Mapping[int, int],
    targets: Sequence[int],
    truth: ObservationStream,
    anchor: int,
    horizon: int,
) -> Tuple[float, float]:
    if not nodes:
        raise PredictionError(f"source '{name}' has no node with enough history")
    node_ids = sorted(nodes)
    node_xy = np.array([nodes[nid][-1] for nid in node_ids])
    ades, fdes = [], []
    for pid in targets:
        node = owners.get(pid)
        if node not in predictions:
            here = np.asarray(truth[anchor][pid], dtype=float)[None, :]
            node = node_ids[int(np.argmin(cdist(here, node_xy)[0]))]
        future = [truth[anchor + step][pid] for step in range(1, horizon + 1)]
        ade, fde = ade_fde(predictions[node], future)
        ades.append(ade)
        fdes.append(fde)
    return float(np.mean(ades)), float(np.mean(fdes))


def evaluate_substitution(
    truth: ObservationStream,
    cfg: Optional[EngineConfig] = None,
    horizon: int = 12,
    history: int = 8,
    observations: Optional[ObservationStream] = None,
    run: Optional[RunResult] = None,
    predictor: Predictor = constant_velocity_predict,
    sources: Sequence[str] = SOURCES,
    keep_fraction: Optional[float] = None,
    seed: int = 0,
    repeats: int = 1,
    threads: int = 1,
) -> SubstitutionReport:
    """
    Predict the last ``horizon`` frames of ``truth`` from every source.

    The anchor frame is ``horizon`` frames before the end of ``truth``. Every
    pedestrian observed in ``truth`` over the anchor frame and the whole
    horizon is scored exactly once per source. ``observations`` defaults to
    ``truth``; ``run`` defaults to clustering ``observations`` up to the
    anchor frame. ``keep_fraction`` defaults to the cluster compression ratio;
    the random source is repeated over ``repeats`` consecutive seeds.
    """
    cfg = cfg or EngineConfig()
    unknown = [s for s in sources if s not in SOURCES]
    if unknown:
        raise PredictionError(f"unknown source '{unknown[0]}'")
    if history < 2:
        raise PredictionError(f"history must be at least 2 frames, got {history}")
    if repeats < 1:
        raise PredictionError(f"repeats must be at least 1, got {repeats}")
    frames = sorted(f for f, obs in truth.items() if obs)
    if not frames:
        raise PredictionError("no ground truth to evaluate against")
    anchor = frames[-1] - horizon
    if horizon < 1 or anchor - frames[0] < 1:
        raise PredictionError(f"horizon {horizon} exceeds the available ground truth ({len(frames)} frames)")

    targets = [
        pid for pid in sorted(truth.get(anchor, {}))
        if all(pid in truth.get(anchor + step, {}) for step in range(1, horizon + 1))
    ]
    if not targets:
        raise PredictionError(f"no pedestrian is observed from frame {anchor} through the horizon")

    observations = truth if observations is None else observations
    tracking = _trailing_histories(observations, anchor, history)
    identity = {pid: pid for pid in targets}

    clusters: Dict[int, np.ndarray] = {}
    owners: Dict[int, int] = {}
    if "cluster" in sources or ("random" in sources and keep_fraction is None):
        if run is None:
            past = {f: obs for f, obs in observations.items() if f <= anchor}
            run = DynamicClusteringEngine(cfg).run(past)
        clusters = _centroid_histories(run, anchor, history)
        for cid, members in run.memberships.get(anchor, {}).items():
            for pid in members:
                owners[pid] = cid
    if keep_fraction is None:
        keep_fraction = min(1.0, len(clusters) / len(tracking)) if tracking and clusters else 1.0

    report = SubstitutionReport(anchor_frame=anchor, history=history, horizon=horizon,
                                keep_fraction=keep_fraction if "random" in sources else None)

    def single(name: str, nodes: Mapping[int, np.ndarray], node_owner: Mapping[int, int]) -> SourceResult:
        predictions, usage = _predict_all(nodes, predictor, horizon, threads)
        ade, fde = _score(name, nodes, predictions, node_owner, targets, truth, anchor, horizon)
        return SourceResult(name, ade, fde, len(nodes), len(targets), usage.elapsed_seconds, usage.peak_mib)

    for name in sources:
        if name == "gt":
            report.rows.append(single(name, _trailing_histories(truth, anchor, history), identity))
        elif name == "tracking":
            report.rows.append(single(name, tracking, identity))
        elif name == "cluster":
            report.rows.append(single(name, clusters, owners))
        else:
            runs = []
            for r in range(repeats):
                subset = random_subsample(tracking, keep_fraction, seed + r)
                if not subset:
                    logger.warning("random_subset_empty", seed=seed + r, keep_fraction=keep_fraction)
                    continue
                runs.append(single(name, subset, identity))
            if not runs:
                report.rows.append(SourceResult(name, math.nan, math.nan, 0, 0, 0.0, 0.0, repeats=0))
                logger.warning("source_unscored", source=name, repeats=repeats)
                continue
            ades = np.array([r.ade for r in runs])
            fdes = np.array([r.fde for r in runs])
            report.rows.append(SourceResult(
                source=name,
                ade=float(ades.mean()),
                fde=float(fdes.mean()),
                n_nodes=int(round(np.mean([r.n_nodes for r in runs]))),
                n_scored=len(targets),
                elapsed_seconds=float(np.mean([r.elapsed_seconds for r in runs])),
                peak_mib=max(r.peak_mib for r in runs),
                ade_2sigma=float(2 * ades.std()),
                fde_2sigma=float(2 * fdes.std()),
                repeats=len(runs),
            ))
        row = report.rows[-1]
        logger.info("source_scored", source=name, ade=row.ade, fde=row.fde, n_nodes=row.n_nodes)
    return report
