"""Density-based clustering from scratch: mutual-reachability distances, a
Prim's-built minimum spanning tree, single-linkage condensation, and
excess-of-mass cluster extraction with an explicit noise label (-1).

The pipeline is deterministic for a fixed input order: k-NN and MST ties are
broken toward the lower point index, and stability ties (within 1e-12) prefer
the finer clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ClusterParams",
    "Dendrogram",
    "Labeling",
    "core_distances",
    "mutual_reachability",
    "build_mst",
    "single_linkage",
    "condense_and_extract",
    "hdbscan",
]

STABILITY_TIE_TOL = 1e-12


@dataclass(frozen=True)
class ClusterParams:
    """min_cluster_size bounds admissible clusters; min_samples is the k used
    for core distances (defaults to min_cluster_size)."""

    min_cluster_size: int = 12
    min_samples: int | None = None

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValueError(f"min_cluster_size must be >= 2, got {self.min_cluster_size}")
        if self.min_samples is None:
            object.__setattr__(self, "min_samples", self.min_cluster_size)
        if self.min_samples < 1:
            raise ValueError(f"min_samples must be >= 1, got {self.min_samples}")


@dataclass(frozen=True)
class Dendrogram:
    """Single-linkage tree over mutual-reachability distances.

    merges[i] joins nodes `left` and `right` at `distance` into node
    n_points + i covering `size` points; leaves are nodes 0..n_points-1.
    """

    n_points: int
    merges: tuple[tuple[int, int, float, int], ...]


@dataclass(frozen=True)
class Labeling:
    """Per-point cluster ids (-1 is noise) and membership strengths in [0, 1]."""

    labels: tuple[int, ...]
    probabilities: tuple[float, ...]

    @property
    def n_clusters(self) -> int:
        return len(set(self.labels) - {-1})


def core_distances(points: np.ndarray, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest neighbour, self excluded."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if k > n - 1:
        raise ValueError(f"k={k} exceeds the {n - 1} available neighbours")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    cores = np.empty(n)
    for i in range(n):
        dist = np.linalg.norm(pts - pts[i], axis=1)
        dist[i] = np.inf
        cores[i] = np.partition(dist, k - 1)[k - 1]
    return cores


def mutual_reachability(i: int, j: int, core: np.ndarray, points: np.ndarray) -> float:
    """max(core_i, core_j, d(i, j)); symmetric, and core_i on the diagonal."""
    dist = float(np.linalg.norm(np.asarray(points, dtype=float)[i] - np.asarray(points, dtype=float)[j]))
    return max(float(core[i]), float(core[j]), dist)


def build_mst(points: np.ndarray, core: np.ndarray) -> list[tuple[int, int, float]]:
    """Minimum spanning tree of the complete mutual-reachability graph.

    Prim's algorithm over the implicit graph: O(n^2) distance evaluations and
    O(n) memory. Ties pick the lowest-index candidate.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        raise ValueError("build_mst requires at least 2 points")
    in_tree = np.zeros(n, dtype=bool)
    best_dist = np.full(n, np.inf)
    best_parent = np.full(n, -1, dtype=int)

    current = 0
    in_tree[0] = True
    edges: list[tuple[int, int, float]] = []
    for _ in range(n - 1):
        dist = np.linalg.norm(pts - pts[current], axis=1)
        reach = np.maximum(np.maximum(core[current], core), dist)
        better = (~in_tree) & (reach < best_dist)
        best_dist[better] = reach[better]
        best_parent[better] = current
        candidates = np.where(in_tree, np.inf, best_dist)
        nxt = int(np.argmin(candidates))
        edges.append((int(best_parent[nxt]), nxt, float(best_dist[nxt])))
        in_tree[nxt] = True
        current = nxt
    return edges


def single_linkage(edges: list[tuple[int, int, float]], n_points: int) -> Dendrogram:
    """Union-find agglomeration of MST edges sorted by (weight, endpoints)."""
    ordered = sorted(edges, key=lambda e: (e[2], min(e[0], e[1]), max(e[0], e[1])))
    parent = list(range(2 * n_points - 1))
    node_of = list(range(n_points))
    size = [1] * n_points

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merges = []
    next_node = n_points
    for a, b, w in ordered:
        ra, rb = find(a), find(b)
        left, right = sorted((node_of[ra], node_of[rb]))
        merged = size[ra] + size[rb]
        merges.append((left, right, w, merged))
        parent[ra] = rb
        node_of[rb] = next_node
        size[rb] = merged
        next_node += 1
    return Dendrogram(n_points=n_points, merges=tuple(merges))


class _Cluster:
    __slots__ = ("parent", "birth", "stability", "children", "fallouts")

    def __init__(self, parent: int | None, birth: float):
        self.parent = parent
        self.birth = birth
        self.stability = 0.0
        self.children: list[int] = []
        self.fallouts: list[tuple[int, float]] = []


def _lambda(distance: float) -> float:
    return math.inf if distance == 0.0 else 1.0 / distance


def _persistence(lam: float, birth: float, count: int) -> float:
    if math.isinf(lam) and math.isinf(birth):
        return 0.0
    return (lam - birth) * count


def condense_and_extract(dendrogram: Dendrogram, params: ClusterParams) -> Labeling:
    """Condense the single-linkage tree and extract flat clusters.

    Top-down, a cluster fractures at each distance level into the components
    present just below it. Components of >= min_cluster_size points survive;
    the rest fall out of the cluster at that level. Two or more survivors is a
    true split (each survivor becomes a child cluster); a single survivor
    starts a new child cluster when at least min_samples points fell out with
    it, and otherwise continues the running cluster; no survivor dissolves the
    cluster. Clusters are then selected bottom-up by excess-of-mass stability
    (sum over points of lambda_leave - lambda_birth, lambda = 1/distance): a
    cluster wins only when its stability exceeds its selected descendants' sum
    by more than 1e-12, and the root is never selected. A point belongs to the
    selected cluster it fell out of (directly or via descendants) with
    probability lambda_point / lambda_max of that cluster; points under no
    selected cluster are noise with probability 0.
    """
    n = dendrogram.n_points
    mcs = params.min_cluster_size
    ms = params.min_samples
    if not dendrogram.merges:
        raise ValueError("dendrogram has no merges")

    children: dict[int, tuple[int, int, float]] = {}
    sizes = [1] * n + [0] * len(dendrogram.merges)
    for i, (left, right, dist, size) in enumerate(dendrogram.merges):
        node = n + i
        children[node] = (left, right, dist)
        sizes[node] = size
    root_node = n + len(dendrogram.merges) - 1

    def leaves(node: int) -> list[int]:
        out, stack = [], [node]
        while stack:
            x = stack.pop()
            if x < n:
                out.append(x)
            else:
                l, r, _ = children[x]
                stack.extend((l, r))
        return out

    def components_below(node: int, dist: float) -> list[int]:
        """Maximal subnodes whose merge distance is strictly below `dist`.

        Groups all merges tied at `dist` into one fracture event, which keeps
        the result independent of how ties were associated into binary merges.
        """
        comps, stack = [], [node]
        while stack:
            x = stack.pop()
            if x < n or children[x][2] < dist:
                comps.append(x)
            else:
                l, r, _ = children[x]
                stack.extend((l, r))
        return comps

    clusters: list[_Cluster] = [_Cluster(parent=None, birth=0.0)]
    # Each work item walks one cluster downwards from a linkage node.
    work: list[tuple[int, int]] = [(root_node, 0)]
    while work:
        node, cid = work.pop()
        cluster = clusters[cid]
        while True:
            if node < n:
                # A cluster can only run into a leaf if mcs were 1; guarded by
                # ClusterParams, but dissolve defensively.
                cluster.fallouts.append((node, math.inf))
                break
            dist = children[node][2]
            lam = _lambda(dist)
            comps = components_below(node, dist)
            big = [c for c in comps if sizes[c] >= mcs]
            small = [c for c in comps if sizes[c] < mcs]
            for comp in small:
                for point in leaves(comp):
                    cluster.fallouts.append((point, lam))
                cluster.stability += _persistence(lam, cluster.birth, sizes[comp])
            if len(big) >= 2 or (len(big) == 1 and any(sizes[c] >= ms for c in small)):
                for comp in big:
                    cluster.stability += _persistence(lam, cluster.birth, sizes[comp])
                    child = _Cluster(parent=cid, birth=lam)
                    clusters.append(child)
                    cluster.children.append(len(clusters) - 1)
                    work.append((comp, len(clusters) - 1))
                break
            if len(big) == 1:
                node = big[0]
                continue
            break  # dissolved: everything fell out above

    selected = _select_clusters(clusters)
    return _label_points(n, clusters, selected, mcs)


def _select_clusters(clusters: list[_Cluster]) -> set[int]:
    selected: set[int] = set()
    propagated = [0.0] * len(clusters)
    for cid in range(len(clusters) - 1, 0, -1):
        cluster = clusters[cid]
        child_sum = sum(propagated[c] for c in cluster.children)
        if cluster.stability - child_sum > STABILITY_TIE_TOL:
            for child in cluster.children:
                _deselect_subtree(clusters, child, selected)
            selected.add(cid)
            propagated[cid] = cluster.stability
        else:
            propagated[cid] = child_sum
    return selected


def _deselect_subtree(clusters: list[_Cluster], cid: int, selected: set[int]) -> None:
    stack = [cid]
    while stack:
        x = stack.pop()
        selected.discard(x)
        stack.extend(clusters[x].children)


def _label_points(n: int, clusters: list[_Cluster], selected: set[int], mcs: int) -> Labeling:
    owner_of_cluster: list[int | None] = [None] * len(clusters)
    for cid in range(len(clusters)):
        if cid in selected:
            owner_of_cluster[cid] = cid
        elif clusters[cid].parent is not None:
            owner_of_cluster[cid] = owner_of_cluster[clusters[cid].parent]

    members: dict[int, list[tuple[int, float]]] = {}
    for cid, cluster in enumerate(clusters):
        owner = owner_of_cluster[cid]
        if owner is None:
            continue
        members.setdefault(owner, []).extend(cluster.fallouts)

    # Final ids: descending member count, then smallest member index.
    order = sorted(members, key=lambda c: (-len(members[c]), min(p for p, _ in members[c])))
    labels = [-1] * n
    probabilities = [0.0] * n
    for label, cid in enumerate(order):
        lam_max = max(lam for _, lam in members[cid])
        for point, lam in members[cid]:
            labels[point] = label
            if math.isinf(lam):
                probabilities[point] = 1.0
            elif math.isinf(lam_max) or lam_max == 0.0:
                probabilities[point] = 0.0 if not math.isinf(lam) else 1.0
            else:
                probabilities[point] = min(1.0, lam / lam_max)
    return Labeling(labels=tuple(labels), probabilities=tuple(probabilities))


def hdbscan(points: np.ndarray, params: ClusterParams) -> Labeling:
    """Full density clustering: cores, mutual-reachability MST, single-linkage
    condensation, stability extraction."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n < params.min_cluster_size:
        raise ValueError(f"need at least min_cluster_size={params.min_cluster_size} points, got {n}")
    cores = core_distances(pts, params.min_samples)
    edges = build_mst(pts, cores)
    dendrogram = single_linkage(edges, n)
    return condense_and_extract(dendrogram, params)