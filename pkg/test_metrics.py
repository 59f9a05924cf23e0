"""
Trajectory error, deviation, count and prediction metrics.
"""

import math

import numpy as np
import pytest

from dyncrowd.core.config import EngineConfig
from dyncrowd.core.exceptions import MetricsError
from dyncrowd.core.types import CentroidSample, CentroidTrack
from dyncrowd.engine import DynamicClusteringEngine
from dyncrowd.metrics import (
    DIRECTION,
    ClusterFrame,
    ade_fde,
    build_report,
    cluster_census,
    cluster_frames,
    cmdd,
    cmdd_samples,
    count_series,
    ctel,
    cteo,
    displacement_series,
    membership_agreement,
    mean_position_tracks,
    pedestrian_headings,
    step_distances,
)
from dyncrowd.synth import SceneSpec, generate


def track_from_steps(cid, steps, theta=None):
    """Track along +x whose consecutive samples are ``steps`` apart."""
    xs = np.concatenate([[0.0], np.cumsum(steps)])
    return CentroidTrack(cid, tuple(CentroidSample(f, float(x), 0.0, theta) for f, x in enumerate(xs)))


def heading_track(cid, headings):
    return CentroidTrack(cid, tuple(CentroidSample(f, float(f), 0.0, h) for f, h in enumerate(headings)))


def cluster_frame(points, centroid=(0.0, 0.0), headings=None, theta=None, frame=0, cid=1):
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    return ClusterFrame(
        frame=frame,
        cluster_id=cid,
        centroid=CentroidSample(frame, centroid[0], centroid[1], theta),
        member_ids=tuple(range(len(points))),
        locations=points,
        headings=tuple(headings) if headings is not None else (None,) * len(points),
    )


# ----------------------------------------------------------------------
# CTEO / CTEL

def test_constant_velocity_has_no_exceedance():
    track = track_from_steps(1, [2.0] * 50)
    assert cteo([track], T=5.0) == 0.0
    assert ctel([track], T=5.0) == 0.0


def test_one_jump_in_a_hundred_steps():
    steps = [1.0] * 100
    steps[40] = 100.0
    assert cteo([track_from_steps(1, steps)], T=50.0) == pytest.approx(0.01)


def test_ctel_single_term():
    steps = [1.0] * 20
    steps[3] = 7.0
    assert ctel([track_from_steps(1, steps)], T=5.0) == pytest.approx(7.0)


def test_ctel_is_mean_over_clusters():
    jumpy = [1.0] * 10
    jumpy[5] = 10.0
    calm = [1.0] * 10
    assert ctel([track_from_steps(1, jumpy), track_from_steps(2, calm)], T=5.0) == pytest.approx(5.0)


def test_short_tracks_are_skipped():
    short = CentroidTrack(9, (CentroidSample(0, 0.0, 0.0),))
    steps = [1.0] * 4 + [10.0]
    assert cteo([short, track_from_steps(1, steps)], T=5.0) == pytest.approx(0.2)


def test_no_measurable_track_is_an_error():
    with pytest.raises(MetricsError):
        cteo([CentroidTrack(1, (CentroidSample(0, 0.0, 0.0),))], T=1.0)
    with pytest.raises(MetricsError):
        ctel([], T=1.0)


@pytest.mark.parametrize("T", [0.0, -2.0])
def test_threshold_must_be_positive(T):
    with pytest.raises(MetricsError):
        cteo([track_from_steps(1, [1.0])], T=T)


def test_monotone_in_threshold():
    rng = np.random.default_rng(6)
    tracks = [track_from_steps(cid, rng.exponential(5.0, size=40)) for cid in range(5)]
    thresholds = np.linspace(0.5, 30.0, 25)
    occurrences = [cteo(tracks, T) for T in thresholds]
    lengths = [ctel(tracks, T) for T in thresholds]
    assert all(a >= b for a, b in zip(occurrences, occurrences[1:]))
    assert all(a >= b for a, b in zip(lengths, lengths[1:]))
    assert all(0.0 <= value <= 1.0 for value in occurrences)


def test_direction_steps_wrap():
    track = heading_track(1, [350.0, 10.0, 10.0, None, 200.0])
    np.testing.assert_allclose(step_distances(track, DIRECTION), [20.0, 0.0, 0.0, 0.0])
    assert cteo([track], T=15.0, mode=DIRECTION) == pytest.approx(0.25)
    assert ctel([track], T=15.0, mode=DIRECTION) == pytest.approx(20.0)


def test_unknown_mode_rejected():
    with pytest.raises(MetricsError):
        step_distances([], "speed")


# ----------------------------------------------------------------------
# CMDD

def test_members_on_centroid():
    location, _ = cmdd([cluster_frame([(3.0, 4.0)] * 3, centroid=(3.0, 4.0))])
    assert location == 0.0


def test_symmetric_pair():
    location, _ = cmdd([cluster_frame([(-6.0, 0.0), (6.0, 0.0)])])
    assert location == pytest.approx(6.0)


def test_fixed_radius_cluster():
    angles = np.linspace(0.0, 2 * math.pi, 7, endpoint=False)
    frames = [
        cluster_frame(np.column_stack([8 * np.cos(angles + f), 8 * np.sin(angles + f)]) + [f, -f],
                      centroid=(float(f), float(-f)), frame=f)
        for f in range(30)
    ]
    location, _ = cmdd(frames)
    assert location == pytest.approx(8.0, abs=1e-6)


def test_cmdd_matches_double_loop():
    rng = np.random.default_rng(21)
    frames = []
    for f in range(20):
        points = rng.normal(scale=10.0, size=(5, 2))
        centroid = tuple(rng.normal(size=2))
        headings = rng.uniform(0, 360, size=5)
        frames.append(cluster_frame(points, centroid, headings, theta=float(rng.uniform(0, 360)), frame=f))
    location, direction = cmdd(frames)

    loc_total = dir_total = 0.0
    for cf in frames:
        loc = ang = 0.0
        for (x, y), h in zip(cf.locations, cf.headings):
            loc += math.hypot(x - cf.centroid.X, y - cf.centroid.Y)
            ang += abs(((h - cf.centroid.theta + 180.0) % 360.0) - 180.0)
        loc_total += loc / cf.size
        dir_total += ang / cf.size
    assert location == pytest.approx(loc_total / len(frames), abs=1e-12)
    assert direction == pytest.approx(dir_total / len(frames), abs=1e-12)


def test_min_members_filters_pairs():
    frames = [cluster_frame([(1.0, 0.0)], cid=1), cluster_frame([(2.0, 0.0), (-2.0, 0.0)], cid=2)]
    location, _ = cmdd_samples(frames, min_members=2)
    assert location == [(0, 2, 2.0)]
    with pytest.raises(MetricsError):
        cmdd(frames, min_members=3)


def test_direction_is_nan_without_headings():
    location, direction = cmdd([cluster_frame([(1.0, 0.0), (-1.0, 0.0)])])
    assert location == 1.0
    assert math.isnan(direction)


# ----------------------------------------------------------------------
# ADE / FDE

def test_identical_trajectories():
    points = [(1.0, 2.0), (3.0, 4.0)]
    assert ade_fde(points, points) == (0.0, 0.0)


def test_constant_offset():
    truth = [(float(t), 0.0) for t in range(12)]
    predicted = [(x + 3.0, y + 4.0) for x, y in truth]
    assert ade_fde(predicted, truth) == pytest.approx((5.0, 5.0))


def test_linearly_growing_error():
    truth = [(0.0, 0.0)] * 12
    predicted = [(float(e), 0.0) for e in range(1, 13)]
    assert ade_fde(predicted, truth) == pytest.approx((6.5, 12.0))


def test_length_mismatch_rejected():
    with pytest.raises(MetricsError):
        ade_fde([(0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)])


def test_ade_and_fde_bounded_by_worst_error():
    rng = np.random.default_rng(2)
    for _ in range(50):
        predicted = rng.normal(size=(12, 2))
        truth = rng.normal(size=(12, 2))
        worst = np.hypot(*(predicted - truth).T).max()
        ade, fde = ade_fde(predicted, truth)
        assert ade <= worst + 1e-12 and fde <= worst + 1e-12


# ----------------------------------------------------------------------
# counts and census

def test_count_series_with_temporary_members():
    observations = {0: {pid: (float(pid), 0.0) for pid in range(1, 6)}}
    memberships = {0: {1: frozenset({1, 2, 3})}}
    assert count_series(memberships, observations) == [(0, 3, 5)]


def test_count_series_ignores_absent_members():
    observations = {0: {1: (0.0, 0.0)}, 1: {1: (1.0, 0.0), 2: (5.0, 0.0)}}
    memberships = {0: {1: frozenset({1, 2})}, 1: {1: frozenset({1, 2})}}
    assert count_series(memberships, observations) == [(0, 1, 1), (1, 2, 2)]


def test_census_uses_peak_membership():
    memberships = {
        0: {1: frozenset({1}), 2: frozenset({2, 3})},
        1: {1: frozenset({1, 4}), 2: frozenset({2}), 3: frozenset({5})},
    }
    assert cluster_census(memberships) == (1, 2)


def test_membership_agreement():
    labels = {0: {1: 0, 2: 0, 3: 1, 4: 1}, 1: {1: 0, 2: 0, 3: 1, 4: 1}}
    memberships = {
        0: {10: frozenset({1, 2}), 11: frozenset({3, 4})},
        # one cluster holding both groups matches only one of them
        1: {10: frozenset({1, 2, 3})},
    }
    assert membership_agreement(memberships, labels) == [(0, 1.0), (1, 0.5)]


def test_pedestrian_headings():
    observations = {0: {1: (0.0, 0.0)}, 1: {1: (0.0, 2.0)}, 2: {1: (0.0, 2.0), 2: (5.0, 5.0)}}
    headings = pedestrian_headings(observations)
    assert headings[0] == {1: None}
    assert headings[1][1] == pytest.approx(90.0)
    assert headings[2][1] == pytest.approx(90.0)
    assert headings[2][2] is None


def test_displacement_series_length():
    track = track_from_steps(1, [1.5] * 9)
    series = displacement_series(track)
    assert len(series) == len(track) - 1
    assert series[0] == (1, pytest.approx(1.5))


def test_mean_position_tracks_skip_empty_frames():
    frames = [cluster_frame([(0.0, 0.0), (2.0, 2.0)], frame=0), cluster_frame([], frame=1)]
    tracks = mean_position_tracks(frames)
    assert tracks == {1: [CentroidSample(0, 1.0, 1.0)]}


# ----------------------------------------------------------------------
# whole runs

def test_report_on_noise_free_run():
    cfg = EngineConfig()
    scene = generate(SceneSpec(n_groups=3, members_per_group=(4, 5), speed=(3.0, 3.0), n_frames=80, seed=5))
    result = DynamicClusteringEngine(cfg).run(scene.observations)
    report = build_report(result.tracks, result.memberships, scene.observations, cfg)
    assert report.has_clusters
    assert report.n_clusters_multi == 3
    assert report.n_peds == scene.n_pedestrians
    assert report.cteo_location == 0.0
    assert report.ctel_location == 0.0
    assert 0.0 <= report.cmdd_location <= cfg.d_th
    assert all(clustered == raw for _, clustered, raw in report.count_series)


def test_report_without_clusters():
    report = build_report({}, {}, {0: {1: (0.0, 0.0)}}, EngineConfig())
    assert not report.has_clusters
    assert report.cmdd_location is None
    assert report.cteo_location is None
    assert report.n_peds == 1


def test_cluster_frames_leave_out_absent_members():
    tracks = {1: CentroidTrack(1, (CentroidSample(0, 0.0, 0.0), CentroidSample(1, 1.0, 0.0)))}
    memberships = {0: {1: frozenset({1, 2})}, 1: {1: frozenset({1, 2})}}
    observations = {0: {1: (0.0, 0.0), 2: (1.0, 0.0)}, 1: {2: (2.0, 0.0)}}
    frames = cluster_frames(tracks, memberships, observations)
    assert [(cf.frame, cf.member_ids) for cf in frames] == [(0, (1, 2)), (1, (2,))]
