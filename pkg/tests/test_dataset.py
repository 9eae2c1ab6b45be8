import numpy as np
import pytest

from tgnc.data import (
    Dataset,
    Label,
    Post,
    active_users,
    load_dataset,
    save_dataset,
    validate_within_network,
)
from tgnc.errors import (
    EmptyWindows,
    MissingFile,
    SchemaViolation,
    UnknownUserReference,
)
from tgnc.snapshots import TimeWindow

from conftest import write_csvs


class TestLoad:
    def test_roundtrip_fixture(self, tiny_dataset):
        assert len(tiny_dataset.users) == 3
        assert tiny_dataset.users["u1"] is Label.RISKY
        assert tiny_dataset.users["u3"] is Label.UNLABELED
        assert len(tiny_dataset.posts) == 3
        assert tiny_dataset.edges[1].timestamp is None

    def test_missing_file(self, tmp_path):
        users, posts, edges = write_csvs(tmp_path, [("u1", "risky"), ("u2", "safe")], [], [])
        with pytest.raises(MissingFile):
            load_dataset(str(tmp_path / "nope.csv"), posts, edges)

    def test_lat_out_of_range(self, tmp_path):
        paths = write_csvs(
            tmp_path,
            [("u1", "risky"), ("u2", "safe")],
            [("u1", 1, 95.0, 0.0, "x")],
            [],
        )
        with pytest.raises(SchemaViolation) as exc:
            load_dataset(*paths)
        assert exc.value.column == "lat"
        assert exc.value.row == 2

    def test_unknown_edge_user(self, tmp_path):
        paths = write_csvs(
            tmp_path,
            [("u1", "risky"), ("u2", "safe")],
            [("u1", 1, 0.0, 0.0, "x")],
            [("u1", "u9", "")],
        )
        with pytest.raises(UnknownUserReference) as exc:
            load_dataset(*paths)
        assert exc.value.user_id == "u9"

    def test_unknown_post_author(self, tmp_path):
        paths = write_csvs(
            tmp_path, [("u1", "risky"), ("u2", "safe")], [("ghost", 1, 0.0, 0.0, "x")], [])
        with pytest.raises(UnknownUserReference):
            load_dataset(*paths)

    @pytest.mark.parametrize("bad_row, column", [
        (("u1", "u1", ""), "dst"),          # self loop
    ])
    def test_self_loop(self, tmp_path, bad_row, column):
        paths = write_csvs(
            tmp_path, [("u1", "risky"), ("u2", "safe")], [], [bad_row])
        with pytest.raises(SchemaViolation) as exc:
            load_dataset(*paths)
        assert exc.value.column == column

    def test_bad_label(self, tmp_path):
        paths = write_csvs(tmp_path, [("u1", "sus"), ("u2", "safe")], [], [])
        with pytest.raises(SchemaViolation) as exc:
            load_dataset(*paths)
        assert exc.value.column == "label"

    def test_duplicate_user(self, tmp_path):
        paths = write_csvs(
            tmp_path, [("u1", "risky"), ("u1", "safe")], [], [])
        with pytest.raises(SchemaViolation):
            load_dataset(*paths)

    def test_negative_timestamp(self, tmp_path):
        paths = write_csvs(
            tmp_path, [("u1", "risky"), ("u2", "safe")], [("u1", -5, 0.0, 0.0, "x")], [])
        with pytest.raises(SchemaViolation) as exc:
            load_dataset(*paths)
        assert exc.value.column == "timestamp"

    def test_single_class_dataset_rejected(self, tmp_path):
        paths = write_csvs(tmp_path, [("u1", "risky"), ("u2", "risky")], [], [])
        with pytest.raises(SchemaViolation) as exc:
            load_dataset(*paths)
        assert "safe" in str(exc.value)

    def test_invalid_utf8(self, tmp_path):
        paths = write_csvs(tmp_path, [("u1", "risky"), ("u2", "safe")], [], [])
        with open(tmp_path / "posts.csv", "wb") as fh:
            fh.write(b"user_id,timestamp,lat,lon,text\nu1,1,0.0,0.0,\xff\xfe broken\n")
        with pytest.raises(SchemaViolation):
            load_dataset(*paths)

    def test_quoted_text_with_commas(self, tmp_path):
        paths = write_csvs(
            tmp_path,
            [("u1", "risky"), ("u2", "safe")],
            [("u1", 1, 0.0, 0.0, 'hello, "world"\nnewline')],
            [],
        )
        dataset = load_dataset(*paths)
        assert dataset.posts[0].text == 'hello, "world"\nnewline'


class TestRoundTrip:
    def test_save_load_identical(self, tmp_path, tiny_dataset):
        out = tmp_path / "out"
        out.mkdir()
        paths = (str(out / "users.csv"), str(out / "posts.csv"), str(out / "edges.csv"))
        save_dataset(tiny_dataset, *paths)
        again = load_dataset(*paths)
        assert again == tiny_dataset
        # second generation is bit-stable
        out2 = tmp_path / "out2"
        out2.mkdir()
        paths2 = (str(out2 / "users.csv"), str(out2 / "posts.csv"), str(out2 / "edges.csv"))
        save_dataset(again, *paths2)
        for a, b in zip(paths, paths2):
            assert open(a, "rb").read() == open(b, "rb").read()

    def test_awkward_floats_roundtrip(self, tmp_path):
        lat = 0.1 + 0.2  # 0.30000000000000004
        dataset = Dataset(
            users={"u1": Label.RISKY, "u2": Label.SAFE},
            posts=[Post(author="u1", text="x", timestamp=5, lat=lat, lon=-179.99999999999997)],
            edges=[],
        )
        paths = (str(tmp_path / "u.csv"), str(tmp_path / "p.csv"), str(tmp_path / "e.csv"))
        save_dataset(dataset, *paths)
        again = load_dataset(*paths)
        assert again.posts[0].lat == lat


class TestWithinNetwork:
    def _windows(self):
        return [TimeWindow(1, 0, 99), TimeWindow(2, 100, 199), TimeWindow(3, 200, 299)]

    def _dataset(self, post_times: dict):
        users = {"r": Label.RISKY, "s": Label.SAFE, "u": Label.UNLABELED}
        posts = []
        for user, times in post_times.items():
            for t in times:
                posts.append(Post(author=user, text="w", timestamp=t, lat=0.0, lon=0.0))
        return Dataset(users=users, posts=posts, edges=[])

    def test_unlabeled_only_in_last_window(self):
        dataset = self._dataset({"r": [10], "s": [110], "u": [250]})
        assert validate_within_network(dataset, self._windows()) == ["u"]

    def test_unlabeled_in_earlier_window_passes(self):
        dataset = self._dataset({"r": [10], "s": [110], "u": [150, 250]})
        assert validate_within_network(dataset, self._windows()) == []

    def test_all_labeled_passes(self):
        dataset = self._dataset({"r": [250], "s": [250]})
        assert validate_within_network(dataset, self._windows()) == []

    def test_empty_windows(self):
        with pytest.raises(EmptyWindows):
            validate_within_network(self._dataset({"r": [1], "s": [2]}), [])

    def test_matches_brute_force_set_arithmetic(self):
        rng = np.random.default_rng(42)
        windows = self._windows()
        for _ in range(50):
            users = {}
            post_times = {}
            for i in range(12):
                name = f"x{i}"
                users[name] = rng.choice([Label.RISKY, Label.SAFE, Label.UNLABELED])
                post_times[name] = list(rng.integers(0, 300, size=rng.integers(1, 4)))
            users["r0"], users["s0"] = Label.RISKY, Label.SAFE
            post_times["r0"], post_times["s0"] = [10], [20]
            dataset = Dataset(
                users=users,
                posts=[Post(author=u, text="w", timestamp=int(t), lat=0.0, lon=0.0)
                       for u, ts in post_times.items() for t in ts],
                edges=[],
            )
            got = validate_within_network(dataset, windows)
            last = active_users(dataset, windows[-1])
            earlier = active_users(dataset, windows[0]) | active_users(dataset, windows[1])
            expected = sorted(
                u for u in (last - earlier) if users[u] is Label.UNLABELED)
            assert got == expected
