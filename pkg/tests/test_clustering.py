from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oracles import hdbscan_oracle
from trendmap.clustering import (
    ClusterParams,
    build_mst,
    condense_and_extract,
    core_distances,
    hdbscan,
    mutual_reachability,
    single_linkage,
)
from trendmap.synth import adjusted_rand_index


def _pts(values):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


# --------------------------------------------------------------------------
# core distances


def test_core_distances_k1():
    assert_allclose(core_distances(_pts([0, 1, 3]), 1), [1, 1, 2])


def test_core_distances_identical_points():
    assert_allclose(core_distances(_pts([2, 2, 2]), 1), [0, 0, 0])


def test_core_distances_farthest():
    assert_allclose(core_distances(_pts([0, 1, 3]), 2), [3, 2, 3])


def test_core_distances_k_too_large():
    with pytest.raises(ValueError, match="exceeds"):
        core_distances(_pts([0, 1, 3]), 3)


# --------------------------------------------------------------------------
# mutual reachability


def test_mutual_reachability_distance_dominates():
    pts = _pts([0, 5])
    core = np.array([1.0, 1.0])
    assert mutual_reachability(0, 1, core, pts) == 5.0


def test_mutual_reachability_core_dominates():
    pts = _pts([0, 2])
    core = np.array([4.0, 1.0])
    assert mutual_reachability(0, 1, core, pts) == 4.0
    assert mutual_reachability(1, 0, core, pts) == 4.0


def test_mutual_reachability_self():
    pts = _pts([0, 2])
    core = np.array([4.0, 1.0])
    assert mutual_reachability(0, 0, core, pts) == 4.0


# --------------------------------------------------------------------------
# MST


def test_build_mst_collinear():
    pts = _pts([0, 1, 2])
    core = core_distances(pts, 1)
    edges = build_mst(pts, core)
    pairs = {tuple(sorted((a, b))) for a, b, _ in edges}
    assert pairs == {(0, 1), (1, 2)}
    weights = {tuple(sorted((a, b))): w for a, b, w in edges}
    assert weights[(0, 1)] == mutual_reachability(0, 1, core, pts)
    assert weights[(1, 2)] == mutual_reachability(1, 2, core, pts)


def test_build_mst_single_bridge():
    pts = _pts([0, 1, 100, 101])
    core = core_distances(pts, 1)
    edges = build_mst(pts, core)
    bridges = [e for e in edges if {e[0], e[1]} & {0, 1} and {e[0], e[1]} & {2, 3}]
    assert len(bridges) == 1
    assert len(edges) == 3


def test_build_mst_two_points():
    pts = _pts([0, 7])
    core = core_distances(pts, 1)
    edges = build_mst(pts, core)
    assert len(edges) == 1
    assert edges[0][2] == 7.0


def test_single_linkage_distances_non_decreasing():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(12, 2))
    core = core_distances(pts, 2)
    dendrogram = single_linkage(build_mst(pts, core), 12)
    dists = [m[2] for m in dendrogram.merges]
    assert dists == sorted(dists)
    assert dendrogram.merges[-1][3] == 12


# --------------------------------------------------------------------------
# condense and extract


def _run(points, mcs, ms):
    pts = _pts(points)
    params = ClusterParams(mcs, ms)
    cores = core_distances(pts, params.min_samples)
    dendrogram = single_linkage(build_mst(pts, cores), len(pts))
    return condense_and_extract(dendrogram, params)


def test_condense_two_groups_fixture():
    labeling = _run([0, 0.5, 1, 10, 10.5, 11], 2, 1)
    assert labeling.labels == (0, 0, 0, 1, 1, 1)
    assert -1 not in labeling.labels


def test_condense_min_cluster_size_unreachable():
    labeling = _run([0, 1, 2], 4, 1)
    assert labeling.labels == (-1, -1, -1)
    assert labeling.probabilities == (0.0, 0.0, 0.0)


def test_condense_outlier_point():
    labeling = _run([0, 0.1, 0.2, 50], 2, 1)
    assert labeling.labels == (0, 0, 0, -1)
    assert labeling.probabilities[3] == 0.0


# --------------------------------------------------------------------------
# hdbscan end to end


def test_hdbscan_two_blobs_ari():
    rng = np.random.default_rng(11)
    blob_a = rng.normal(loc=(0.0, 0.0), scale=0.5, size=(50, 2))
    blob_b = rng.normal(loc=(20.0, 20.0), scale=0.5, size=(50, 2))
    points = np.vstack([blob_a, blob_b])
    labeling = hdbscan(points, ClusterParams(5, 5))
    assert labeling.n_clusters == 2
    truth = [0] * 50 + [1] * 50
    assert adjusted_rand_index(labeling.labels, truth) == 1.0


def test_hdbscan_sparse_points_all_noise():
    rng = np.random.default_rng(2)
    points = rng.uniform(0.0, 1e6, size=(10, 1))
    labeling = hdbscan(points, ClusterParams(5))
    assert set(labeling.labels) == {-1}


def test_hdbscan_duplicates_no_singletons():
    rng = np.random.default_rng(4)
    base = rng.uniform(0, 10, size=(10, 2))
    points = np.repeat(base, 2, axis=0)
    labeling = hdbscan(points, ClusterParams(2))
    sizes = Counter(l for l in labeling.labels if l != -1)
    assert sizes and min(sizes.values()) >= 2


def test_hdbscan_too_few_points():
    with pytest.raises(ValueError, match="min_cluster_size"):
        hdbscan(_pts([0, 1]), ClusterParams(3, 1))


def test_hdbscan_cluster_sizes_and_noise_probability():
    rng = np.random.default_rng(8)
    points = rng.normal(size=(60, 3))
    labeling = hdbscan(points, ClusterParams(5, 3))
    sizes = Counter(l for l in labeling.labels if l != -1)
    for size in sizes.values():
        assert size >= 5
    for label, prob in zip(labeling.labels, labeling.probabilities):
        assert 0.0 <= prob <= 1.0
        if label == -1:
            assert prob == 0.0


def _canonical(labels):
    clusters = {}
    for i, l in enumerate(labels):
        if l != -1:
            clusters.setdefault(l, set()).add(i)
    return {frozenset(v) for v in clusters.values()}, {i for i, l in enumerate(labels) if l == -1}


def test_hdbscan_permutation_equivariance():
    rng = np.random.default_rng(31)
    points = np.vstack(
        [
            rng.normal(loc=(0, 0), scale=0.4, size=(20, 2)),
            rng.normal(loc=(8, 8), scale=0.4, size=(20, 2)),
            rng.uniform(-20, 20, size=(6, 2)),
        ]
    )
    base = hdbscan(points, ClusterParams(5, 3))
    perm = rng.permutation(len(points))
    permuted = hdbscan(points[perm], ClusterParams(5, 3))
    # Partition over original indices must match after undoing the permutation.
    undone = [-1] * len(points)
    for new_pos, old_pos in enumerate(perm):
        undone[old_pos] = permuted.labels[new_pos]
    assert _canonical(base.labels)[0] == _canonical(undone)[0]
    assert _canonical(base.labels)[1] == _canonical(undone)[1]


def test_hdbscan_scale_invariance():
    rng = np.random.default_rng(37)
    points = np.vstack(
        [
            rng.normal(loc=(0, 0), scale=0.5, size=(15, 2)),
            rng.normal(loc=(10, 0), scale=0.5, size=(15, 2)),
            rng.uniform(-30, 30, size=(5, 2)),
        ]
    )
    base = hdbscan(points, ClusterParams(4, 2))
    for c in (0.5, 2.0, 10.0):
        scaled = hdbscan(points * c, ClusterParams(4, 2))
        assert scaled.labels == base.labels


def test_hdbscan_oracle_equivalence_seeded_suite():
    rng = np.random.default_rng(1234)
    params = ClusterParams(2, 1)
    for case in range(200):
        n = int(rng.integers(3, 9))
        dim = int(rng.integers(1, 3))
        points = rng.uniform(-5, 5, size=(n, dim))
        got = hdbscan(points, params)
        want_labels, want_probs = hdbscan_oracle(points, 2, 1)
        assert list(got.labels) == want_labels, f"case {case}: {points!r}"
        assert_allclose(got.probabilities, want_probs, atol=1e-12, err_msg=f"case {case}")