"""
Synthetic scene generation and tracker-noise injection.
"""

import math
from collections import Counter

import pytest

from dyncrowd.core.exceptions import SceneSpecError
from dyncrowd.synth import LeaveEvent, SceneSpec, generate


def test_zero_noise_observations_equal_truth():
    scene = generate(SceneSpec(n_frames=30, seed=2))
    assert scene.observations == scene.truth
    assert all(ids == {pid: pid for pid in ids} for ids in scene.identities.values())


def test_ids_and_frames_start_where_documented():
    scene = generate(SceneSpec(n_groups=2, members_per_group=(3, 3), n_frames=5, seed=0))
    assert sorted(scene.truth) == [0, 1, 2, 3, 4]
    assert sorted(scene.truth[0]) == [1, 2, 3, 4, 5, 6]
    assert scene.n_pedestrians == 6


def test_dropout_rate_is_binomial():
    spec = SceneSpec(n_groups=4, members_per_group=(5, 5), n_frames=500, dropout=0.1, seed=8)
    scene = generate(spec)
    total = spec.n_frames * scene.n_pedestrians
    missing = total - sum(len(obs) for obs in scene.observations.values())
    sigma = math.sqrt(total * 0.1 * 0.9)
    assert abs(missing - 0.1 * total) <= 3 * sigma


def test_leave_event_changes_label_at_its_frame():
    scene = generate(SceneSpec(n_frames=100, leave_events=(LeaveEvent(50, 2, 180.0),), seed=4))
    before = scene.labels[49][2]
    assert scene.labels[50][2] != before
    assert scene.labels[50][2] not in {label for pid, label in scene.labels[50].items() if pid != 2}
    # the others keep their groups
    assert all(scene.labels[50][pid] == scene.labels[49][pid] for pid in scene.labels[50] if pid != 2)


def test_leave_event_turns_the_pedestrian():
    scene = generate(SceneSpec(n_frames=60, leave_events=(LeaveEvent(20, 1, 90.0),), seed=4))
    (x0, y0), (x1, y1) = scene.truth[30][1], scene.truth[31][1]
    assert math.degrees(math.atan2(y1 - y0, x1 - x0)) == pytest.approx(90.0)


def test_id_switches_relabel_without_adding():
    spec = SceneSpec(n_frames=300, id_switch=0.5, seed=6)
    scene = generate(spec)
    assert all(len(scene.observations[f]) == len(scene.truth[f]) for f in scene.truth)
    switched = sum(1 for ids in scene.identities.values() if any(o != t for o, t in ids.items()))
    assert switched > 0
    for frame, ids in scene.identities.items():
        assert sorted(ids.values()) == sorted(scene.truth[frame])
        for observed, true in ids.items():
            assert scene.observations[frame][observed] == scene.truth[frame][true]


def test_id_switch_swaps_neighbours():
    spec = SceneSpec(n_groups=3, members_per_group=(4, 4), n_frames=200, id_switch=0.3, seed=12)
    scene = generate(spec)
    group = {pid: label for pid, label in scene.labels[0].items()}
    for ids in scene.identities.values():
        for observed, true in ids.items():
            # groups are far apart, so a swapped id never leaves its group
            assert group[observed] == group[true]


def test_same_spec_same_scene():
    spec = SceneSpec(n_frames=80, dropout=0.1, id_switch=0.05, jitter=2.0, seed=17)
    first, second = generate(spec), generate(spec)
    assert first.observations == second.observations
    assert first.truth == second.truth
    assert first.labels == second.labels


def test_radial_groups_walk_outwards():
    scene = generate(SceneSpec(n_groups=4, members_per_group=(1, 1), spread=0.0, n_frames=2, seed=0))
    for pid in scene.truth[0]:
        (x0, y0), (x1, y1) = scene.truth[0][pid], scene.truth[1][pid]
        assert math.hypot(x1, y1) > math.hypot(x0, y0)


def test_observed_labels_follow_identities():
    scene = generate(SceneSpec(n_frames=100, id_switch=0.2, seed=3))
    observed = scene.observed_labels()
    for frame, ids in scene.identities.items():
        assert observed[frame] == {oid: scene.labels[frame][tid] for oid, tid in ids.items()}


@pytest.mark.parametrize("changes", [
    {"n_groups": 0},
    {"n_frames": 0},
    {"members_per_group": (3, 2)},
    {"dropout": 1.5},
    {"separation": 0.0},
    {"layout": "spiral"},
    {"headings": (0.0,)},
    {"leave_events": (LeaveEvent(500, 1, 0.0),)},
])
def test_degenerate_spec_rejected(changes):
    with pytest.raises(SceneSpecError):
        generate(SceneSpec(**changes))


def test_leave_event_for_unknown_pedestrian_rejected():
    with pytest.raises(SceneSpecError):
        generate(SceneSpec(members_per_group=(2, 2), leave_events=(LeaveEvent(5, 99, 0.0),)))


def test_from_dict():
    spec = SceneSpec.from_dict({"n_groups": 2, "speed": [1, 2], "leave_events": [[10, 1, 45.0]]})
    assert spec.speed == (1, 2)
    assert spec.leave_events == (LeaveEvent(10, 1, 45.0),)
    with pytest.raises(SceneSpecError):
        SceneSpec.from_dict({"groups": 2})


def test_group_sizes_within_range():
    scene = generate(SceneSpec(n_groups=6, members_per_group=(2, 4), n_frames=1, seed=5))
    sizes = Counter(scene.labels[0].values())
    assert all(2 <= size <= 4 for size in sizes.values())
    assert len(sizes) == 6
