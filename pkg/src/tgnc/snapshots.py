"""Split the post timeline into partially overlapping windows and
materialize per-window network snapshots.

Windows are computed in post-index space over the timestamp-sorted
posts so every window holds a similar number of posts regardless of how
unevenly activity is distributed in time. With M posts, T windows and
overlap fraction f, the window width is W = M / (1 + (T-1)(1-f)) sorted
posts and the stride is S = W(1-f); window i covers sorted indices
[floor((i-1)S), floor((i-1)S + W)). Start/end are the timestamps at the
covered indices and membership is by inclusive timestamp interval, so
window contents never depend on input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .data import Dataset, Post
from .errors import ConfigError, DegenerateTimestamps, TooFewPosts
from .spatial import GeoPoint, modal_location


@dataclass(frozen=True)
class TimeWindow:
    index: int  # 1-based
    start: int  # Unix seconds, inclusive
    end: int    # Unix seconds, inclusive

    def contains(self, timestamp: int) -> bool:
        return self.start <= timestamp <= self.end

    def to_dict(self) -> dict:
        return {"index": self.index, "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, d: dict) -> "TimeWindow":
        return cls(index=int(d["index"]), start=int(d["start"]), end=int(d["end"]))


@dataclass
class Snapshot:
    """One time window's sub-network.

    nodes are the users with at least one post in the window; docs hold
    each node's in-window post texts in timestamp order; edges are the
    in-window relationship pairs restricted to nodes; locations are the
    per-node modal coordinates.
    """

    window: TimeWindow
    nodes: list[str] = field(default_factory=list)
    docs: dict[str, list[str]] = field(default_factory=dict)
    edges: list[tuple[str, str]] = field(default_factory=list)
    locations: dict[str, GeoPoint] = field(default_factory=dict)

    def __contains__(self, user_id: str) -> bool:
        return user_id in self.docs


def split_windows(posts: list[Post], T: int, overlap_fraction: float) -> list[TimeWindow]:
    """Compute T consecutive, partially overlapping windows.

    Raises TooFewPosts when M < T and DegenerateTimestamps when every
    post carries the same timestamp.
    """
    if T < 2:
        raise ConfigError(f"need at least 2 windows, got {T}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ConfigError(f"overlap fraction must be in [0, 1), got {overlap_fraction}")
    M = len(posts)
    if M < T:
        raise TooFewPosts(f"{M} posts cannot fill {T} windows")
    ts = sorted(p.timestamp for p in posts)
    if ts[0] == ts[-1]:
        raise DegenerateTimestamps("all posts share one timestamp; windows would coincide")

    W = M / (1.0 + (T - 1) * (1.0 - overlap_fraction))
    S = W * (1.0 - overlap_fraction)
    windows = []
    for i in range(1, T + 1):
        lo = math.floor((i - 1) * S)
        # (T-1)*S + W == M algebraically; pin it so float rounding cannot
        # drop the last post from the final window
        hi = M if i == T else min(math.floor((i - 1) * S + W), M)
        windows.append(TimeWindow(index=i, start=ts[lo], end=ts[hi - 1]))
    return windows


def window_post_indices(posts_sorted_ts: list[int], T: int, overlap_fraction: float) -> list[tuple[int, int]]:
    """Index ranges [lo, hi) backing each window; test/debug helper."""
    M = len(posts_sorted_ts)
    W = M / (1.0 + (T - 1) * (1.0 - overlap_fraction))
    S = W * (1.0 - overlap_fraction)
    return [
        (math.floor((i - 1) * S),
         M if i == T else min(math.floor((i - 1) * S + W), M))
        for i in range(1, T + 1)
    ]


def materialize_snapshot(dataset: Dataset, window: TimeWindow) -> Snapshot:
    """Build the sub-network active inside ``window``.

    An empty snapshot is legal and returned empty. Edge membership
    follows the optional-timestamp rule: a timestamped edge belongs to
    every window containing its timestamp, an untimestamped edge to all.
    """
    per_user: dict[str, list[Post]] = {}
    for post in dataset.posts:
        if window.contains(post.timestamp):
            per_user.setdefault(post.author, []).append(post)

    nodes = sorted(per_user)
    docs: dict[str, list[str]] = {}
    locations: dict[str, GeoPoint] = {}
    for user in nodes:
        ordered = sorted(per_user[user], key=lambda p: p.timestamp)
        docs[user] = [p.text for p in ordered]
        locations[user] = modal_location(ordered)

    node_set = set(nodes)
    edge_set = {
        (e.src, e.dst)
        for e in dataset.edges
        if (e.timestamp is None or window.contains(e.timestamp))
        and e.src in node_set
        and e.dst in node_set
    }
    return Snapshot(
        window=window,
        nodes=nodes,
        docs=docs,
        edges=sorted(edge_set),
        locations=locations,
    )
