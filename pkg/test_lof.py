"""
LOF scoring checked against a direct implementation of the textbook
definition, plus outlier flagging on cluster members.
"""

import math
import time

import numpy as np
import pytest

from conftest import ped
from dyncrowd.core.config import EngineConfig
from dyncrowd.core.exceptions import InsufficientMembersError
from dyncrowd.core.types import CentroidSample, ClusterState
from dyncrowd.lof import evaluate_cluster, flag_outliers, lof_features, lof_scores


def oracle_lof(points, k):
    points = [np.asarray(p, dtype=float) for p in points]
    n = len(points)

    def d(i, j):
        return float(np.sqrt(((points[i] - points[j]) ** 2).sum()))

    k_dist = [sorted(d(i, j) for j in range(n) if j != i)[k - 1] for i in range(n)]
    hood = [[j for j in range(n) if j != i and d(i, j) <= k_dist[i]] for i in range(n)]
    lrd = []
    for i in range(n):
        reach = [max(k_dist[j], d(i, j)) for j in hood[i]]
        lrd.append(len(reach) / sum(reach))
    return np.array([sum(lrd[j] for j in hood[i]) / len(hood[i]) / lrd[i] for i in range(n)])


def cluster_of(members, theta=0.0):
    xs = [m.x for m in members]
    ys = [m.y for m in members]
    return ClusterState(
        cluster_id=0,
        members=frozenset(m.id for m in members),
        centroid=CentroidSample(frame=0, X=float(np.mean(xs)), Y=float(np.mean(ys)), theta=theta),
        created_frame=0,
    )


def test_unit_square_is_uniform():
    scores = lof_scores([(0, 0), (0, 1), (1, 0), (1, 1)], k=2)
    np.testing.assert_allclose(scores, 1.0, atol=1e-9)


def test_far_point_scores_highest():
    scores = lof_scores([(0, 0), (0, 1), (1, 0), (1, 1), (10, 10)], k=2)
    assert int(np.argmax(scores)) == 4
    assert all(scores[4] > s for s in scores[:4])


def test_matches_oracle_on_random_instances():
    rng = np.random.default_rng(31)
    start = time.perf_counter()
    for trial in range(200):
        n = int(rng.integers(2, 21))
        k = int(rng.integers(1, n))
        dims = int(rng.integers(1, 5))
        points = rng.normal(size=(n, dims)) * rng.uniform(0.1, 10)
        np.testing.assert_allclose(lof_scores(points, k), oracle_lof(points, k), rtol=0, atol=1e-9,
                                   err_msg=f"trial {trial}")
    assert time.perf_counter() - start < 5.0


def test_scale_invariance():
    rng = np.random.default_rng(4)
    points = rng.uniform(size=(15, 4))
    base = lof_scores(points, 5)
    for c in (1e-3, 0.5, 7.0, 1e4):
        np.testing.assert_allclose(lof_scores(points * c, 5), base, rtol=1e-9, atol=1e-9)


def test_duplicates_score_one_among_themselves():
    scores = lof_scores([(0, 0)] * 4 + [(5, 5)], k=3)
    np.testing.assert_allclose(scores[:4], 1.0)
    assert scores[4] > 1.0
    assert np.isfinite(scores).all()


@pytest.mark.parametrize("features, k", [([(0, 0)], 1), ([(0, 0), (1, 1)], 2), ([(0, 0), (1, 1)], 0)])
def test_invalid_neighbourhood_rejected(features, k):
    with pytest.raises(InsufficientMembersError):
        lof_scores(features, k)


def test_flag_count_bound():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(1, 30))
        contamination = float(rng.uniform(0.01, 0.5))
        scores = rng.uniform(0.5, 3.0, size=n)
        flagged = flag_outliers(scores, contamination)
        assert len(flagged) <= math.ceil(contamination * n)
        assert all(scores[i] > 1.0 for i in flagged)


def test_flag_takes_highest_scores():
    assert flag_outliers([1.5, 4.0, 0.9, 3.0, 1.0], contamination=0.4) == frozenset({1, 3})


def test_nothing_flagged_at_or_below_gate():
    assert flag_outliers([1.0, 1.0 + 1e-12, 0.7], contamination=0.5) == frozenset()


def test_features_scale_location_and_embed_heading():
    cfg = EngineConfig(d_th=100.0, lof_heading_weight=2.0)
    rows = lof_features([ped(1, 50, -100, 90.0), ped(2, 0, 0, None)], cfg, fallback_theta=180.0)
    np.testing.assert_allclose(rows[0], [0.5, -1.0, 0.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(rows[1], [0.0, 0.0, -2.0, 0.0], atol=1e-12)


def test_colocated_comoving_cluster_flags_nobody():
    members = [ped(i, 100, 100, 30.0) for i in range(1, 6)]
    assert evaluate_cluster(cluster_of(members, 30.0), members, EngineConfig()) == set()


def test_heading_deviant_is_flagged():
    # five walkers together, one standing among them but heading elsewhere
    members = [ped(i, 200, 300, 10.0) for i in range(1, 6)] + [ped(99, 205, 300, 160.0)]
    assert evaluate_cluster(cluster_of(members, 10.0), members, EngineConfig()) == {99}


def test_displaced_member_is_flagged():
    cfg = EngineConfig()
    rng = np.random.default_rng(3)
    members = [ped(i, *rng.uniform(-cfg.d_th / 4, cfg.d_th / 4, size=2), 45.0) for i in range(9)]
    members.append(ped(42, 3 * cfg.d_th, 0, 45.0))
    flagged = evaluate_cluster(cluster_of(members, 45.0), members, cfg)
    assert 42 in flagged
    assert len(flagged) <= math.ceil(cfg.lof_contamination * len(members))


def test_small_clusters_skipped():
    members = [ped(1, 0, 0, 0.0), ped(2, 1000, 0, 180.0)]
    assert evaluate_cluster(cluster_of(members), members, EngineConfig()) == set()


LATTICE = [(0, 0), (10, 0), (20, 0), (0, 10), (10, 10)]


def test_rigid_lattice_stays_below_default_gate():
    members = [ped(i, x, y, 0.0) for i, (x, y) in enumerate(LATTICE, start=1)]
    cfg = EngineConfig()
    assert lof_scores(lof_features(members, cfg), len(members) - 1).max() < cfg.lof_score_gate
    assert evaluate_cluster(cluster_of(members), members, cfg) == set()


def test_lattice_scores_cross_a_unit_gate():
    # the two middle walkers sit just above 1
    members = [ped(i, x, y, 0.0) for i, (x, y) in enumerate(LATTICE, start=1)]
    cfg = EngineConfig(lof_score_gate=1.0, lof_contamination=0.4)
    assert evaluate_cluster(cluster_of(members), members, cfg) == {2, 5}
