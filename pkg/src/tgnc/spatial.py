"""Spatial view: modal user locations, great-circle distances, and the
z-score closeness graph feeding a node embedding + decision tree.

Closeness between two users is their pairwise distance z-score divided
by the most negative z-score, for pairs closer than average; pairs at or
beyond the average distance are simply absent from the graph. Emitted
weights therefore always lie in (0, 1], with the closest pair at exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Post
from .embedding import EmbeddingMatrix, GraphView, SkipGramConfig, WalkConfig, node2vec
from .errors import DegenerateDistances, EmptyPostList, TooFewUsers
from .forest import ConfidentPrediction, DecisionTree, fit_tree

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float


def modal_location(posts: list[Post]) -> GeoPoint:
    """Most frequent exact (lat, lon) pair among the posts.

    Ties go to the pair whose earliest occurrence has the smallest
    timestamp; a residual tie (same count, same first timestamp) falls
    back to coordinate order so the result never depends on input order.
    """
    if not posts:
        raise EmptyPostList("cannot take the modal location of zero posts")
    counts: dict[tuple[float, float], int] = {}
    first_seen: dict[tuple[float, float], int] = {}
    for post in posts:
        key = (post.lat, post.lon)
        counts[key] = counts.get(key, 0) + 1
        if key not in first_seen or post.timestamp < first_seen[key]:
            first_seen[key] = post.timestamp
    best = min(counts, key=lambda k: (-counts[k], first_seen[k], k))
    return GeoPoint(lat=best[0], lon=best[1])


def haversine(u1: GeoPoint, u2: GeoPoint) -> float:
    """Great-circle distance in km (atan2 form, stable near antipodes)."""
    phi1, phi2 = np.radians(u1.lat), np.radians(u2.lat)
    dphi = phi2 - phi1
    dlam = np.radians(u2.lon) - np.radians(u1.lon)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    a = min(max(float(a), 0.0), 1.0)
    return 2.0 * EARTH_RADIUS_KM * float(np.arctan2(np.sqrt(a), np.sqrt(1.0 - a)))


def pairwise_haversine(lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    """Full symmetric distance matrix in km for coordinate arrays (degrees)."""
    phi = np.radians(np.asarray(lats, dtype=np.float64))[:, None]
    lam = np.radians(np.asarray(lons, dtype=np.float64))[:, None]
    a = (
        np.sin((phi.T - phi) / 2.0) ** 2
        + np.cos(phi) * np.cos(phi.T) * np.sin((lam.T - lam) / 2.0) ** 2
    )
    np.clip(a, 0.0, 1.0, out=a)
    return 2.0 * EARTH_RADIUS_KM * np.arctan2(np.sqrt(a), np.sqrt(1.0 - a))


class ClosenessGraph:
    """Symmetric sparse closeness weights in (0, 1]; absent pair = 0."""

    def __init__(self, node_ids: list[str], weights: dict[tuple[str, str], float]):
        self.node_ids = node_ids
        self._weights = weights  # keyed by (min(u,v), max(u,v))

    def weight(self, u: str, v: str) -> float:
        if u == v:
            return 0.0
        return self._weights.get((u, v) if u < v else (v, u), 0.0)

    def pairs(self):
        return self._weights.items()

    def __len__(self):
        return len(self._weights)

    def dump_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("u,v,closeness\n")
            for (u, v), w in sorted(self._weights.items()):
                fh.write(f"{u},{v},{w!r}\n")


def build_closeness(locations: dict[str, GeoPoint]) -> ClosenessGraph:
    """All-pairs closeness from modal locations.

    z(u,v) = (d(u,v) - mean) / population std over all pairs; closeness =
    z / min_z for z < 0 (min_z is the most negative z-score) and 0
    otherwise. Requires >= 2 users and non-identical distances.
    """
    ids = sorted(locations)
    n = len(ids)
    if n < 2:
        raise TooFewUsers(f"closeness needs at least 2 users, got {n}")
    lats = np.array([locations[u].lat for u in ids])
    lons = np.array([locations[u].lon for u in ids])
    dist = pairwise_haversine(lats, lons)
    iu, ju = np.triu_indices(n, k=1)
    condensed = dist[iu, ju]
    mu = float(condensed.mean())
    sigma = float(condensed.std())  # population std
    if sigma == 0.0:
        raise DegenerateDistances("all pairwise distances identical; closeness undefined")
    z = (condensed - mu) / sigma
    min_z = float(z.min())
    weights: dict[tuple[str, str], float] = {}
    for k in range(condensed.shape[0]):
        zk = float(z[k])
        if zk < 0.0:
            weights[(ids[iu[k]], ids[ju[k]])] = zk / min_z
    return ClosenessGraph(node_ids=ids, weights=weights)


def closeness_graph_view(closeness: ClosenessGraph) -> GraphView | None:
    """Undirected weighted GraphView over users with >= 1 closeness edge.

    Users whose every pair is at or beyond the average distance have no
    edges, hence no node and later no embedding row: the spatial view
    skips them for this snapshot. Returns None when no edges exist.
    """
    if len(closeness) == 0:
        return None
    connected = sorted({u for pair in closeness._weights for u in pair})
    pairs = [(u, v, w) for (u, v), w in closeness.pairs()]
    return GraphView.from_edges(connected, pairs, directed=False)


@dataclass
class SpatialViewResult:
    embedding: EmbeddingMatrix
    tree: DecisionTree
    predictions: dict[str, ConfidentPrediction]


def spatial_view(
    snapshot,
    labels: dict[str, int],
    walk_cfg: WalkConfig,
    sg_cfg: SkipGramConfig,
    max_depth: int = 5,
    tree_seed: int = 0,
) -> SpatialViewResult:
    """Closeness graph -> node embedding -> depth-limited decision tree.

    ``labels`` maps labeled users to 0/1. Predictions are returned for
    every embedded user; users without an embedding row are absent.
    """
    closeness = build_closeness(snapshot.locations)
    view = closeness_graph_view(closeness)
    if view is None:
        raise TooFewUsers("closeness graph has no edges; spatial view is empty")
    embedding = node2vec(view, walk_cfg, sg_cfg)
    train_ids = [u for u in embedding.ids if u in labels]
    if not train_ids:
        raise TooFewUsers("no labeled users with a spatial embedding row")
    X = np.stack([embedding.row(u) for u in train_ids])
    y = np.array([labels[u] for u in train_ids], dtype=np.int64)
    tree = fit_tree(X, y, max_depth=max_depth, seed=tree_seed)
    predictions = {u: tree.predict_confident(embedding.row(u)) for u in embedding.ids}
    return SpatialViewResult(embedding=embedding, tree=tree, predictions=predictions)
