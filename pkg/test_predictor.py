"""
Constant-velocity prediction, random subsampling and the source
substitution harness.
"""

import math

import numpy as np
import pytest

from dyncrowd.core.config import EngineConfig
from dyncrowd.core.exceptions import PredictionError
from dyncrowd.metrics import ade_fde
from dyncrowd.predictor import (
    PROTOCOLS,
    SOURCES,
    VELOCITY_WINDOW,
    constant_velocity_predict,
    evaluate_substitution,
    random_subsample,
)
from dyncrowd.synth import SceneSpec, generate


# ----------------------------------------------------------------------
# constant velocity

def test_linear_history():
    history = [(float(x), 0.0) for x in range(10)]
    predicted = constant_velocity_predict(history, 12)
    np.testing.assert_allclose(predicted, [(9.0 + k, 0.0) for k in range(1, 13)])


def test_stationary_history():
    predicted = constant_velocity_predict([(4.0, 2.0)] * 5, 6)
    np.testing.assert_allclose(predicted, [(4.0, 2.0)] * 6)


def test_velocity_uses_recent_window_only():
    # an early detour outside the window does not bend the prediction
    history = [(100.0, 100.0)] + [(float(x), 0.0) for x in range(VELOCITY_WINDOW + 1)]
    predicted = constant_velocity_predict(history, 2)
    np.testing.assert_allclose(predicted, [(9.0, 0.0), (10.0, 0.0)])


def test_circular_arc_extrapolates_along_the_chord():
    R, omega, n, horizon = 50.0, math.radians(3.0), 12, 12
    angles = omega * np.arange(n)
    history = np.column_stack([R * np.cos(angles), R * np.sin(angles)])
    predicted = constant_velocity_predict(history, horizon)

    last = angles[-1]
    # mean step over the window is the chord of 8 steps divided by 8
    speed = 2 * R * math.sin(VELOCITY_WINDOW * omega / 2) / VELOCITY_WINDOW
    tangent = last - VELOCITY_WINDOW * omega / 2 + math.pi / 2
    expected = [
        (R * math.cos(last) + k * speed * math.cos(tangent), R * math.sin(last) + k * speed * math.sin(tangent))
        for k in range(1, horizon + 1)
    ]
    np.testing.assert_allclose(predicted, expected, atol=1e-9)

    future = [(R * math.cos(last + k * omega), R * math.sin(last + k * omega)) for k in range(1, horizon + 1)]
    errors = [math.dist(p, t) for p, t in zip(expected, future)]
    ade, fde = ade_fde(predicted, future)
    assert ade == pytest.approx(np.mean(errors), abs=1e-9)
    assert fde == pytest.approx(errors[-1], abs=1e-9)


@pytest.mark.parametrize("history, horizon", [([(0.0, 0.0)], 5), ([], 5), ([(0.0, 0.0), (1.0, 0.0)], 0)])
def test_bad_prediction_input_rejected(history, horizon):
    with pytest.raises(PredictionError):
        constant_velocity_predict(history, horizon)


def test_protocols():
    assert (PROTOCOLS["short"].history, PROTOCOLS["short"].horizon) == (8, 12)
    assert (PROTOCOLS["long"].history, PROTOCOLS["long"].horizon) == (25, 50)


# ----------------------------------------------------------------------
# random subsample

def test_keep_everything():
    tracks = {pid: pid * 10 for pid in range(50)}
    assert random_subsample(tracks, 1.0, seed=3) == tracks


def test_keep_half_is_binomial():
    tracks = {pid: None for pid in range(1000)}
    assert 450 <= len(random_subsample(tracks, 0.5, seed=11)) <= 550


def test_same_seed_same_subset():
    tracks = {pid: None for pid in range(200)}
    assert random_subsample(tracks, 0.3, seed=4) == random_subsample(tracks, 0.3, seed=4)
    assert random_subsample(tracks, 0.3, seed=4) != random_subsample(tracks, 0.3, seed=5)


@pytest.mark.parametrize("keep", [0.0, -0.1, 1.5])
def test_keep_fraction_range(keep):
    with pytest.raises(PredictionError):
        random_subsample({1: None}, keep, seed=0)


# ----------------------------------------------------------------------
# substitution harness

PARALLEL = SceneSpec(n_groups=4, members_per_group=(4, 6), layout="grid", speed=(3.0, 3.0),
                     n_frames=60, seed=9)


def test_every_source_scores_the_same_pedestrians():
    scene = generate(PARALLEL)
    report = evaluate_substitution(scene.truth, horizon=12, history=8)
    assert [row.source for row in report.rows] == list(SOURCES)
    assert report.anchor_frame == PARALLEL.n_frames - 1 - 12
    assert {row.n_scored for row in report.rows} == {scene.n_pedestrians}


def test_noise_free_cluster_source_tracks_members():
    scene = generate(PARALLEL)
    report = evaluate_substitution(scene.truth, horizon=12, history=8)
    assert report.row("gt").ade == pytest.approx(0.0, abs=1e-9)
    assert report.row("tracking").ade == pytest.approx(0.0, abs=1e-9)
    assert report.row("cluster").ade <= report.row("tracking").ade + 2 * PARALLEL.spread
    assert report.row("cluster").n_nodes < report.row("tracking").n_nodes


def test_keep_fraction_defaults_to_compression_ratio():
    scene = generate(PARALLEL)
    report = evaluate_substitution(scene.truth, horizon=12, history=8)
    assert report.keep_fraction == pytest.approx(report.row("cluster").n_nodes / report.row("tracking").n_nodes)


def test_random_source_repeats_report_spread():
    scene = generate(PARALLEL)
    report = evaluate_substitution(scene.truth, horizon=12, history=8, sources=("random",),
                                   keep_fraction=0.5, repeats=4, seed=2)
    row = report.row("random")
    assert row.repeats == 4
    assert row.ade_2sigma >= 0.0
    assert report.keep_fraction == 0.5


SMALL = SceneSpec(n_groups=1, members_per_group=(3, 3), n_frames=40, seed=0)


def _empty_draw_seed(n_tracks, keep_fraction):
    tracks = {pid: None for pid in range(n_tracks)}
    return next(s for s in range(100) if not random_subsample(tracks, keep_fraction, s))


def test_empty_random_draw_is_skipped():
    scene = generate(SMALL)
    seed = _empty_draw_seed(scene.n_pedestrians, 0.2)
    report = evaluate_substitution(scene.truth, horizon=12, history=8, sources=("random",),
                                   keep_fraction=0.2, seed=seed)
    row = report.row("random")
    assert math.isnan(row.ade) and math.isnan(row.fde)
    assert (row.repeats, row.n_nodes) == (0, 0)


def test_repeats_count_only_scored_draws():
    scene = generate(SMALL)
    seed = _empty_draw_seed(scene.n_pedestrians, 0.2)
    tracks = {pid: None for pid in range(scene.n_pedestrians)}
    drawn = sum(1 for r in range(5) if random_subsample(tracks, 0.2, seed + r))
    report = evaluate_substitution(scene.truth, horizon=12, history=8, sources=("random",),
                                   keep_fraction=0.2, seed=seed, repeats=5)
    row = report.row("random")
    assert row.repeats == drawn
    if drawn:
        assert not math.isnan(row.ade)
        assert row.n_scored == scene.n_pedestrians


def test_substitution_is_deterministic():
    scene = generate(SceneSpec(n_frames=60, jitter=1.0, dropout=0.05, seed=13))
    first = evaluate_substitution(scene.truth, observations=scene.observations, horizon=12, seed=1)
    second = evaluate_substitution(scene.truth, observations=scene.observations, horizon=12, seed=1,
                                   threads=4)
    assert [(r.ade, r.fde, r.n_nodes) for r in first.rows] == [(r.ade, r.fde, r.n_nodes) for r in second.rows]


def test_horizon_beyond_truth_rejected():
    scene = generate(SceneSpec(n_frames=20, seed=1))
    with pytest.raises(PredictionError):
        evaluate_substitution(scene.truth, horizon=50)


def test_unknown_source_rejected():
    scene = generate(PARALLEL)
    with pytest.raises(PredictionError):
        evaluate_substitution(scene.truth, sources=("oracle",))


@pytest.mark.slow
def test_dense_scene_compresses_and_predicts_faster():
    scene = generate(SceneSpec(n_groups=50, members_per_group=(10, 12), layout="grid", speed=(3.0, 3.0),
                               separation=400.0, n_frames=100, jitter=0.5, seed=50))
    assert scene.n_pedestrians >= 500
    protocol = PROTOCOLS["long"]
    timings = {"tracking": [], "cluster": []}
    for _ in range(3):
        report = evaluate_substitution(scene.truth, observations=scene.observations,
                                       horizon=protocol.horizon, history=protocol.history,
                                       sources=("tracking", "cluster"))
        for name in timings:
            timings[name].append(report.row(name).elapsed_seconds)
    assert report.row("cluster").n_nodes <= 0.6 * report.row("tracking").n_nodes
    assert min(timings["cluster"]) <= 0.7 * min(timings["tracking"])


@pytest.mark.slow
def test_clusters_beat_random_subsample():
    cluster_ade, random_ade = [], []
    protocol = PROTOCOLS["long"]
    for seed in range(20):
        scene = generate(SceneSpec(n_groups=5, members_per_group=(4, 8), n_frames=100, jitter=1.0,
                                   dropout=0.05, seed=100 + seed))
        report = evaluate_substitution(scene.truth, EngineConfig(), observations=scene.observations,
                                       horizon=protocol.horizon, history=protocol.history,
                                       sources=("cluster", "random"), repeats=5, seed=seed)
        cluster_ade.append(report.row("cluster").ade)
        random_ade.append(report.row("random").ade)
    difference = np.array(random_ade) - np.array(cluster_ade)
    effect = difference.mean() / (difference.std(ddof=1) or 1.0)
    print(f"mean ADE cluster {np.mean(cluster_ade):.2f}, random {np.mean(random_ade):.2f}, effect size {effect:.2f}")
    assert np.mean(cluster_ade) < np.mean(random_ade)
