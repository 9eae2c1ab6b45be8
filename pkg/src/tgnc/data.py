"""Domain types, dataset file IO, and structural validation.

A dataset is three CSV files: users.csv (user_id,label), posts.csv
(user_id,timestamp,lat,lon,text) and edges.csv (src,dst,timestamp with
an optional timestamp). Loading validates every row and reports
violations with 1-based file line numbers (header is line 1).
"""

from __future__ import annotations

import csv
import enum
import os
from dataclasses import dataclass, field

from .errors import (
    EmptyWindows,
    MissingFile,
    SchemaViolation,
    UnknownUserReference,
)


class Label(enum.Enum):
    """Binary target classes plus the unlabeled pool.

    The numeric encoding safe=0 / risky=1 is fixed: it is the encoding
    the semantic classifier and the fusion features rely on.
    """

    SAFE = 0
    RISKY = 1
    UNLABELED = -1

    @classmethod
    def from_text(cls, text: str) -> "Label":
        try:
            return _LABEL_FROM_TEXT[text]
        except KeyError:
            raise ValueError(f"unknown label {text!r}") from None

    def to_text(self) -> str:
        return _LABEL_TO_TEXT[self]


_LABEL_FROM_TEXT = {"safe": Label.SAFE, "risky": Label.RISKY, "unlabeled": Label.UNLABELED}
_LABEL_TO_TEXT = {v: k for k, v in _LABEL_FROM_TEXT.items()}


@dataclass(frozen=True)
class Post:
    author: str
    text: str
    timestamp: int  # Unix seconds, UTC
    lat: float      # degrees in [-90, 90]
    lon: float      # degrees in (-180, 180]


@dataclass(frozen=True)
class SocialEdge:
    src: str
    dst: str
    timestamp: int | None = None


@dataclass
class Dataset:
    """An immutable-after-load social network: users, posts, edges."""

    users: dict[str, Label] = field(default_factory=dict)
    posts: list[Post] = field(default_factory=list)
    edges: list[SocialEdge] = field(default_factory=list)

    def labeled(self) -> dict[str, Label]:
        return {u: l for u, l in self.users.items() if l is not Label.UNLABELED}

    def unlabeled_users(self) -> list[str]:
        return [u for u, l in self.users.items() if l is Label.UNLABELED]


USERS_HEADER = ["user_id", "label"]
POSTS_HEADER = ["user_id", "timestamp", "lat", "lon", "text"]
EDGES_HEADER = ["src", "dst", "timestamp"]


def _open_csv(path: str):
    if not os.path.exists(path):
        raise MissingFile(path)
    return open(path, "r", encoding="utf-8", newline="")


def _check_header(row: list[str] | None, expected: list[str], path: str) -> None:
    if row != expected:
        raise SchemaViolation(1, ",".join(expected), f"{path}: bad or missing header {row!r}")


def _parse_int(value: str, line: int, column: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise SchemaViolation(line, column, f"not an integer: {value!r}") from None


def _parse_float(value: str, line: int, column: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise SchemaViolation(line, column, f"not a number: {value!r}") from None
    if out != out:  # NaN
        raise SchemaViolation(line, column, "NaN is not a valid coordinate")
    return out


def load_dataset(users_path: str, posts_path: str, edges_path: str) -> Dataset:
    """Load and validate the three CSV files into a Dataset.

    Raises MissingFile, SchemaViolation (with line numbers) or
    UnknownUserReference on the first violation encountered.
    """
    users: dict[str, Label] = {}
    with _open_csv(users_path) as fh:
        reader = csv.reader(fh)
        try:
            _check_header(next(reader, None), USERS_HEADER, users_path)
            for line, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise SchemaViolation(line, "user_id,label", f"expected 2 fields, got {len(row)}")
                user_id, label_text = row
                if not user_id:
                    raise SchemaViolation(line, "user_id", "empty user id")
                if user_id in users:
                    raise SchemaViolation(line, "user_id", f"duplicate user id {user_id!r}")
                try:
                    users[user_id] = Label.from_text(label_text)
                except ValueError:
                    raise SchemaViolation(
                        line, "label", f"label must be safe/risky/unlabeled, got {label_text!r}"
                    ) from None
        except UnicodeDecodeError as exc:
            raise SchemaViolation(None, "encoding", f"{users_path}: invalid UTF-8 ({exc})") from None

    posts: list[Post] = []
    with _open_csv(posts_path) as fh:
        reader = csv.reader(fh)
        try:
            _check_header(next(reader, None), POSTS_HEADER, posts_path)
            for line, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 5:
                    raise SchemaViolation(line, ",".join(POSTS_HEADER), f"expected 5 fields, got {len(row)}")
                user_id, ts_text, lat_text, lon_text, text = row
                if user_id not in users:
                    raise UnknownUserReference(line, user_id)
                ts = _parse_int(ts_text, line, "timestamp")
                if ts < 0:
                    raise SchemaViolation(line, "timestamp", f"negative timestamp {ts}")
                lat = _parse_float(lat_text, line, "lat")
                if not -90.0 <= lat <= 90.0:
                    raise SchemaViolation(line, "lat", f"latitude {lat} outside [-90, 90]")
                lon = _parse_float(lon_text, line, "lon")
                if not -180.0 < lon <= 180.0:
                    raise SchemaViolation(line, "lon", f"longitude {lon} outside (-180, 180]")
                posts.append(Post(author=user_id, text=text, timestamp=ts, lat=lat, lon=lon))
        except UnicodeDecodeError as exc:
            raise SchemaViolation(None, "text", f"{posts_path}: invalid UTF-8 ({exc})") from None

    edges: list[SocialEdge] = []
    with _open_csv(edges_path) as fh:
        reader = csv.reader(fh)
        try:
            _check_header(next(reader, None), EDGES_HEADER, edges_path)
            for line, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise SchemaViolation(line, ",".join(EDGES_HEADER), f"expected 3 fields, got {len(row)}")
                src, dst, ts_text = row
                if src not in users:
                    raise UnknownUserReference(line, src)
                if dst not in users:
                    raise UnknownUserReference(line, dst)
                if src == dst:
                    raise SchemaViolation(line, "dst", f"self-loop on user {src!r}")
                ts = _parse_int(ts_text, line, "timestamp") if ts_text != "" else None
                edges.append(SocialEdge(src=src, dst=dst, timestamp=ts))
        except UnicodeDecodeError as exc:
            raise SchemaViolation(None, "encoding", f"{edges_path}: invalid UTF-8 ({exc})") from None

    n_safe = sum(1 for l in users.values() if l is Label.SAFE)
    n_risky = sum(1 for l in users.values() if l is Label.RISKY)
    if n_safe == 0 or n_risky == 0:
        raise SchemaViolation(
            None, "label",
            f"{users_path}: dataset needs at least one labeled safe and one labeled risky user "
            f"(got {n_safe} safe, {n_risky} risky)",
        )
    return Dataset(users=users, posts=posts, edges=edges)


def save_dataset(dataset: Dataset, users_path: str, posts_path: str, edges_path: str) -> None:
    """Round-trip counterpart of load_dataset (bit-stable via repr floats)."""
    with open(users_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(USERS_HEADER)
        for user_id, label in dataset.users.items():
            writer.writerow([user_id, label.to_text()])
    with open(posts_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(POSTS_HEADER)
        for post in dataset.posts:
            writer.writerow([post.author, post.timestamp, repr(post.lat), repr(post.lon), post.text])
    with open(edges_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EDGES_HEADER)
        for edge in dataset.edges:
            ts = "" if edge.timestamp is None else edge.timestamp
            writer.writerow([edge.src, edge.dst, ts])


def active_users(dataset: Dataset, window) -> set[str]:
    """Users with at least one post inside the window (inclusive bounds)."""
    out: set[str] = set()
    for post in dataset.posts:
        if window.start <= post.timestamp <= window.end:
            out.add(post.author)
    return out


def validate_within_network(dataset: Dataset, windows) -> list[str]:
    """Unlabeled users active only in the last window.

    The last window is the test window; every unlabeled user there must
    have appeared in at least one earlier window, otherwise no trained
    snapshot model can vote on it. Returns the violators, sorted.
    """
    if not windows:
        raise EmptyWindows("no time windows given")
    earlier: set[str] = set()
    for window in windows[:-1]:
        earlier |= active_users(dataset, window)
    last = active_users(dataset, windows[-1])
    violations = [
        u for u in sorted(last - earlier) if dataset.users.get(u) is Label.UNLABELED
    ]
    return violations
