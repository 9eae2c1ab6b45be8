import csv

import pytest

from tgnc.data import load_dataset


def write_csvs(tmp_path, users, posts, edges):
    """users: [(id, label)], posts: [(user, ts, lat, lon, text)],
    edges: [(src, dst, ts-or-'')]. Returns the three paths."""
    users_path = tmp_path / "users.csv"
    posts_path = tmp_path / "posts.csv"
    edges_path = tmp_path / "edges.csv"
    with open(users_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "label"])
        w.writerows(users)
    with open(posts_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user_id", "timestamp", "lat", "lon", "text"])
        w.writerows(posts)
    with open(edges_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["src", "dst", "timestamp"])
        w.writerows(edges)
    return str(users_path), str(posts_path), str(edges_path)


@pytest.fixture
def tiny_dataset(tmp_path):
    paths = write_csvs(
        tmp_path,
        users=[("u1", "risky"), ("u2", "safe"), ("u3", "unlabeled")],
        posts=[
            ("u1", 100, 10.0, 20.0, "alpha beta"),
            ("u2", 200, 11.0, 21.0, "gamma delta"),
            ("u3", 300, 12.0, 22.0, "epsilon zeta"),
        ],
        edges=[("u1", "u2", 150), ("u2", "u3", "")],
    )
    return load_dataset(*paths)
