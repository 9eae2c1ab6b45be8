"""Synthetic dataset generator with class signal planted in all three
views: class-biased token distributions, homophilous edges, and
separated geographic clusters. A configurable fraction of users drifts
safe -> risky at a seeded mid-timeline point, switching token, edge and
location behavior from then on.

Drifted users are always emitted unlabeled (they are the interesting
prediction targets); their ground-truth label is their final state,
risky. Ground truth for every user plus the drift schedule goes to
truth.json next to the CSVs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .data import Dataset, Label, Post, SocialEdge, save_dataset
from .errors import InvalidSpec
from .seeding import child_seed


@dataclass
class SynthSpec:
    n_users: int = 600
    risky_fraction: float = 0.4
    n_posts: int = 18000
    span_start: int = 1_500_000_000
    span_length: int = 10_000_000
    homophily: float = 0.9
    vocab_size: int = 400
    token_bias: float = 0.85
    tokens_per_post: int = 8
    risky_center_lat: float = 34.0
    risky_center_lon: float = 12.0
    safe_center_lat: float = 52.0
    safe_center_lon: float = 40.0
    cluster_spread_deg: float = 1.0
    drift_fraction: float = 0.0
    drift_earliest: float = 0.25  # drift times drawn uniformly in
    drift_latest: float = 0.50    # [earliest, latest] * span_length
    unlabeled_fraction: float = 0.25
    edges_per_user: int = 4
    seed: int = 7

    def validate(self) -> None:
        for name in ("risky_fraction", "homophily", "token_bias",
                     "drift_fraction", "unlabeled_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidSpec(f"{name} must be in [0, 1], got {value}")
        if self.n_users < 4 or self.n_posts < self.n_users:
            raise InvalidSpec("need >= 4 users and >= 1 post per user")
        if self.span_length <= 0 or self.span_start < 0:
            raise InvalidSpec("span must be positive and start at a non-negative time")
        if self.vocab_size < 2 or self.tokens_per_post < 1 or self.edges_per_user < 1:
            raise InvalidSpec("vocab_size, tokens_per_post and edges_per_user must be positive")
        if not 0.0 < self.drift_earliest <= self.drift_latest < 1.0:
            raise InvalidSpec("drift band must satisfy 0 < earliest <= latest < 1")
        for lat in (self.risky_center_lat, self.safe_center_lat):
            if not -90.0 <= lat <= 90.0:
                raise InvalidSpec(f"cluster latitude {lat} outside [-90, 90]")
        for lon in (self.risky_center_lon, self.safe_center_lon):
            if not -180.0 < lon <= 180.0:
                raise InvalidSpec(f"cluster longitude {lon} outside (-180, 180]")
        risky_n = int(self.n_users * self.risky_fraction)
        if risky_n < 1 or self.n_users - risky_n < 1:
            raise InvalidSpec("both classes need at least one user")


def _token(index: int) -> str:
    return f"term{index:04d}"


def generate(spec: SynthSpec) -> tuple[Dataset, dict]:
    """Build the dataset plus the ground-truth payload (not yet on disk)."""
    spec.validate()
    n = spec.n_users
    users = [f"u{i:05d}" for i in range(n)]

    rng_cls = np.random.default_rng(child_seed(spec.seed, "classes"))
    risky_n = int(n * spec.risky_fraction)
    order = rng_cls.permutation(n)
    initial_risky = np.zeros(n, dtype=bool)
    initial_risky[order[:risky_n]] = True

    # drifting users start safe and flip to risky mid-timeline
    rng_drift = np.random.default_rng(child_seed(spec.seed, "drift"))
    safe_pool = np.nonzero(~initial_risky)[0]
    n_drift = int(n * spec.drift_fraction)
    if n_drift > safe_pool.shape[0]:
        raise InvalidSpec("drift_fraction exceeds the safe-user pool")
    drift_idx = np.sort(rng_drift.choice(safe_pool, size=n_drift, replace=False))
    drift_time = np.full(n, -1, dtype=np.int64)
    for idx in drift_idx:
        frac = rng_drift.uniform(spec.drift_earliest, spec.drift_latest)
        drift_time[idx] = spec.span_start + int(frac * spec.span_length)
    final_risky = initial_risky.copy()
    final_risky[drift_idx] = True

    # unlabeled (prediction-target) users: all drifted plus random others
    rng_unl = np.random.default_rng(child_seed(spec.seed, "unlabeled"))
    target = int(n * spec.unlabeled_fraction)
    unlabeled = set(int(i) for i in drift_idx)
    remaining = [i for i in range(n) if i not in unlabeled]
    extra = max(0, target - len(unlabeled))
    if extra:
        unlabeled |= {int(i) for i in rng_unl.choice(remaining, size=extra, replace=False)}

    def risky_at(user_idx: int, ts: int) -> bool:
        if drift_time[user_idx] >= 0 and ts >= drift_time[user_idx]:
            return True
        return bool(initial_risky[user_idx])

    # posts: near-equal counts per user, timestamps uniform over the span
    rng_posts = np.random.default_rng(child_seed(spec.seed, "posts"))
    counts = np.full(n, spec.n_posts // n, dtype=np.int64)
    counts[rng_posts.permutation(n)[: spec.n_posts % n]] += 1
    half = spec.vocab_size // 2  # risky tokens [0, half), safe tokens [half, V)
    posts: list[Post] = []
    for idx in range(n):
        for _ in range(int(counts[idx])):
            ts = spec.span_start + int(rng_posts.integers(0, spec.span_length + 1))
            risky_now = risky_at(idx, ts)
            own_lo, own_hi = (0, half) if risky_now else (half, spec.vocab_size)
            other_lo, other_hi = (half, spec.vocab_size) if risky_now else (0, half)
            words = []
            for _ in range(spec.tokens_per_post):
                if rng_posts.random() < spec.token_bias:
                    words.append(_token(int(rng_posts.integers(own_lo, own_hi))))
                else:
                    words.append(_token(int(rng_posts.integers(other_lo, other_hi))))
            center_lat = spec.risky_center_lat if risky_now else spec.safe_center_lat
            center_lon = spec.risky_center_lon if risky_now else spec.safe_center_lon
            lat = float(np.clip(center_lat + rng_posts.normal(0, spec.cluster_spread_deg), -90.0, 90.0))
            lon = float(center_lon + rng_posts.normal(0, spec.cluster_spread_deg))
            if not -180.0 < lon <= 180.0:
                lon = ((lon + 180.0) % 360.0) - 180.0
                if lon == -180.0:
                    lon = 180.0
            posts.append(Post(author=users[idx], text=" ".join(words),
                              timestamp=ts, lat=lat, lon=lon))
    posts.sort(key=lambda p: (p.timestamp, p.author, p.text))

    # homophilous timestamped edges; target pool uses classes at the edge time
    rng_edges = np.random.default_rng(child_seed(spec.seed, "edges"))
    drift_vec = drift_time  # -1 for non-drifting
    edge_set: set[tuple[str, str, int]] = set()
    for idx in range(n):
        for _ in range(spec.edges_per_user):
            ts = spec.span_start + int(rng_edges.integers(0, spec.span_length + 1))
            classes_now = initial_risky | ((drift_vec >= 0) & (drift_vec <= ts))
            src_risky = classes_now[idx]
            want_risky = src_risky if rng_edges.random() < spec.homophily else not src_risky
            pool = np.nonzero(classes_now == want_risky)[0]
            pool = pool[pool != idx]
            if pool.shape[0] == 0:
                continue
            dst = int(pool[int(rng_edges.integers(0, pool.shape[0]))])
            edge_set.add((users[idx], users[dst], ts))
    edges = [SocialEdge(src=s, dst=d, timestamp=t)
             for s, d, t in sorted(edge_set)]

    user_labels: dict[str, Label] = {}
    for idx, user in enumerate(users):
        if idx in unlabeled:
            user_labels[user] = Label.UNLABELED
        else:
            user_labels[user] = Label.RISKY if final_risky[idx] else Label.SAFE

    truth = {
        "labels": {users[i]: ("risky" if final_risky[i] else "safe") for i in range(n)},
        "drifted": {users[int(i)]: int(drift_time[int(i)]) for i in drift_idx},
    }
    return Dataset(users=user_labels, posts=posts, edges=edges), truth


def write_dataset(spec: SynthSpec, out_dir: str) -> dict[str, str]:
    """Generate and write users/posts/edges CSVs plus truth.json.

    Byte-identical output for identical specs.
    """
    dataset, truth = generate(spec)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "users": os.path.join(out_dir, "users.csv"),
        "posts": os.path.join(out_dir, "posts.csv"),
        "edges": os.path.join(out_dir, "edges.csv"),
        "truth": os.path.join(out_dir, "truth.json"),
    }
    save_dataset(dataset, paths["users"], paths["posts"], paths["edges"])
    with open(paths["truth"], "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
