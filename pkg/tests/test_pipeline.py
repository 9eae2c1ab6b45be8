import itertools

import numpy as np
import pytest

from tgnc.config import RunConfig
from tgnc.data import Dataset, Label, Post, SocialEdge
from tgnc.embedding import EmbeddingMatrix
from tgnc.errors import EmptyLedger, KeyMismatch, UserNeverEmbedded
from tgnc.neural import DenseNet
from tgnc.pipeline import (
    FEATURE_ORDER,
    NeutralFill,
    ViewOutputs,
    assemble_features,
    evaluate,
    fuse,
    scheme_weight,
    smooth_embeddings,
    smoothed_matrix,
    train_snapshot_model,
    vote,
)
from tgnc.snapshots import TimeWindow, materialize_snapshot


class TestFuse:
    def test_zero_net_threshold_goes_risky(self):
        mlp = DenseNet([7, 4, 1], ["relu", "sigmoid"], seed=0)
        for W in mlp.weights:
            W[:] = 0.0
        # sigmoid(0) = 0.5, and the 0.5 boundary maps to risky
        assert fuse(np.zeros(7), mlp) == 1

    def test_feature_order_is_fixed_contract(self):
        assert FEATURE_ORDER == ("r_s", "r_r", "l_sem", "l_rel", "c_rel", "l_spat", "c_spat")

    def test_assemble_full_views(self):
        out = ViewOutputs(r_s=0.1, r_r=0.9, l_sem=1, l_rel=0, c_rel=0.7, l_spat=1, c_spat=0.6)
        vec = assemble_features(out, NeutralFill(0.3, 0.4))
        np.testing.assert_allclose(vec, [0.1, 0.9, 1, 0, 0.7, 1, 0.6])

    def test_assemble_neutral_substitution(self):
        out = ViewOutputs(r_s=0.1, r_r=0.9, l_sem=1)  # rel and spat views absent
        vec = assemble_features(out, NeutralFill(0.3, 0.4))
        np.testing.assert_allclose(vec, [0.1, 0.9, 1, 0.5, 0.0, 0.5, 0.0])
        sem_missing = ViewOutputs(l_rel=1, c_rel=0.8)
        vec = assemble_features(sem_missing, NeutralFill(0.3, 0.4))
        np.testing.assert_allclose(vec, [0.3, 0.4, 0.5, 1, 0.8, 0.5, 0.0])


class TestSmoothing:
    def _matrix(self, ids, seed):
        rng = np.random.default_rng(seed)
        return EmbeddingMatrix(ids, rng.standard_normal((len(ids), 4)))

    def test_singleton_history_is_current_row(self):
        m = self._matrix(["u"], 0)
        np.testing.assert_array_equal(smooth_embeddings([m], "u"), m.row("u"))

    def test_sum_skips_absent_snapshots(self):
        m1 = self._matrix(["u", "v"], 1)
        m2 = self._matrix(["v"], 2)
        m3 = self._matrix(["u"], 3)
        np.testing.assert_allclose(
            smooth_embeddings([m1, m2, m3], "u"), m1.row("u") + m3.row("u"))

    def test_never_embedded_raises(self):
        with pytest.raises(UserNeverEmbedded):
            smooth_embeddings([self._matrix(["v"], 1)], "u")

    def test_linearity_over_disjoint_histories(self):
        rng = np.random.default_rng(5)
        a = [self._matrix(["u", "w"], 10), self._matrix(["u"], 11)]
        b = [self._matrix(["u", "z"], 12)]
        lhs = smooth_embeddings(a + b, "u")
        rhs = smooth_embeddings(a, "u") + smooth_embeddings(b, "u")
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_smoothed_matrix_include_current(self):
        m1 = self._matrix(["u", "v"], 1)
        m2 = self._matrix(["u", "x"], 2)
        sm = smoothed_matrix([m1], m2, include_current=True)
        np.testing.assert_allclose(sm.row("u"), m1.row("u") + m2.row("u"))
        np.testing.assert_allclose(sm.row("x"), m2.row("x"))  # new user

    def test_smoothed_matrix_strict_previous_mode(self):
        m1 = self._matrix(["u", "v"], 1)
        m2 = self._matrix(["u", "x"], 2)
        sm = smoothed_matrix([m1], m2, include_current=False)
        np.testing.assert_allclose(sm.row("u"), m1.row("u"))
        # no history -> falls back to the raw current row
        np.testing.assert_allclose(sm.row("x"), m2.row("x"))


def _brute_force_vote(entries, scheme, scale=1.0):
    weights = {"uniform": lambda i: 1, "linear": lambda i: i, "quadratic": lambda i: i * i}
    score_r = sum(scale * weights[scheme](i) for i, lab in entries if lab == 1)
    score_s = sum(scale * weights[scheme](i) for i, lab in entries if lab == 0)
    return 1 if score_r >= score_s else 0


class TestVote:
    def test_worked_quadratic_example(self):
        entries = [(1, 1), (2, 0), (3, 0), (4, 1)]  # risky, safe, safe, risky
        result = vote(entries, "quadratic")
        assert result.score_risky == 17
        assert result.score_safe == 13
        assert result.label == 1

    def test_uniform_tie_goes_risky(self):
        entries = [(1, 1), (2, 0), (3, 0), (4, 1)]
        result = vote(entries, "uniform")
        assert (result.score_risky, result.score_safe) == (2, 2)
        assert result.label == 1

    def test_single_snapshot_any_scheme(self):
        for scheme in ("uniform", "linear", "quadratic"):
            assert vote([(3, 0)], scheme).label == 0
            assert vote([(3, 1)], scheme).label == 1

    def test_empty_ledger(self):
        with pytest.raises(EmptyLedger):
            vote([], "uniform")

    def test_exhaustive_equivalence_with_brute_force(self):
        # all label/presence sequences of length <= 6 under all schemes
        for length in range(1, 7):
            for pattern in itertools.product((0, 1, None), repeat=length):
                entries = [(i + 1, lab) for i, lab in enumerate(pattern) if lab is not None]
                if not entries:
                    continue
                for scheme in ("uniform", "linear", "quadratic"):
                    assert vote(entries, scheme).label == _brute_force_vote(entries, scheme)

    def test_weight_scale_invariance(self):
        # scales kept exactly representable so float addition cannot
        # split mathematical ties
        rng = np.random.default_rng(3)
        scales = (0.25, 0.5, 2.0, 3.0, 17.0, 128.0)
        for _ in range(200):
            length = int(rng.integers(1, 7))
            entries = [(i + 1, int(rng.integers(0, 2))) for i in range(length)
                       if rng.random() > 0.3]
            if not entries:
                continue
            scale = scales[int(rng.integers(0, len(scales)))]
            for scheme in ("uniform", "linear", "quadratic"):
                assert vote(entries, scheme).label == _brute_force_vote(entries, scheme, scale)

    def test_uniform_equals_majority_with_risky_tiebreak(self):
        for length in range(1, 7):
            for seq in itertools.product((0, 1), repeat=length):
                entries = list(enumerate(seq, start=1))
                majority = 1 if sum(seq) * 2 >= length else 0
                assert vote(entries, "uniform").label == majority

    def test_monotonic_in_risky_flips(self):
        for length in range(1, 6):
            for seq in itertools.product((0, 1), repeat=length):
                entries = list(enumerate(seq, start=1))
                for scheme in ("uniform", "linear", "quadratic"):
                    base = vote(entries, scheme).label
                    for flip in range(length):
                        if seq[flip] == 0:
                            flipped = list(entries)
                            flipped[flip] = (flip + 1, 1)
                            assert vote(flipped, scheme).label >= base

    def test_scheme_weights(self):
        assert [scheme_weight("uniform", i) for i in (1, 3, 5)] == [1, 1, 1]
        assert [scheme_weight("linear", i) for i in (1, 3, 5)] == [1, 3, 5]
        assert [scheme_weight("quadratic", i) for i in (1, 3, 5)] == [1, 9, 25]


class TestEvaluate:
    def test_perfect_predictions(self):
        truth = {"a": 0, "b": 1, "c": 0, "d": 1}
        report = evaluate(dict(truth), truth)
        d = report.to_dict()
        for block in ("safe", "risky"):
            assert d[block] == {"precision": 1.0, "recall": 1.0, "f1": 1.0}
        assert d["all_users"]["accuracy"] == 1.0
        assert d["zero_division_flags"] == []

    def test_all_safe_predictor_signature(self):
        # 40 risky / 60 safe, everyone predicted safe
        truth = {f"r{i}": 1 for i in range(40)} | {f"s{i}": 0 for i in range(60)}
        predicted = {u: 0 for u in truth}
        report = evaluate(predicted, truth)
        d = report.to_dict()
        assert d["all_users"]["accuracy"] == pytest.approx(0.6)
        assert d["risky"]["recall"] == 0.0
        assert d["safe"]["recall"] == 1.0
        assert d["safe"]["precision"] == pytest.approx(0.6)
        assert "risky.precision.zero_division" in d["zero_division_flags"]

    def test_macro_average(self):
        truth = {"a": 0, "b": 1, "c": 1, "d": 1}
        predicted = {"a": 0, "b": 1, "c": 0, "d": 1}
        d = evaluate(predicted, truth).to_dict()
        assert d["all_users"]["precision"] == pytest.approx(
            (d["safe"]["precision"] + d["risky"]["precision"]) / 2)
        assert d["all_users"]["recall"] == pytest.approx(
            (d["safe"]["recall"] + d["risky"]["recall"]) / 2)

    def test_key_mismatch(self):
        with pytest.raises(KeyMismatch):
            evaluate({"a": 0}, {"a": 0, "b": 1})


def _toy_training_setup(n_per_class=10, with_edges=True, seed=0):
    """Small dataset with signal in all three views."""
    rng = np.random.default_rng(seed)
    users = {}
    posts = []
    edges = []
    names = []
    for i in range(n_per_class):
        for cls, prefix in ((1, "r"), (0, "s")):
            name = f"{prefix}{i}"
            names.append((name, cls))
            users[name] = Label.RISKY if cls else Label.SAFE
            vocab = "danger" if cls else "garden"
            lat0, lon0 = (10.0, 10.0) if cls else (40.0, 60.0)
            for k in range(3):
                posts.append(Post(
                    name, f"{vocab}{rng.integers(0, 5)} {vocab}{rng.integers(0, 5)}",
                    timestamp=int(rng.integers(0, 1000)),
                    lat=lat0 + float(rng.normal(0, 0.2)),
                    lon=lon0 + float(rng.normal(0, 0.2))))
    if with_edges:
        for i in range(n_per_class):
            edges.append(SocialEdge(f"r{i}", f"r{(i + 1) % n_per_class}", None))
            edges.append(SocialEdge(f"s{i}", f"s{(i + 1) % n_per_class}", None))
    dataset = Dataset(users=users, posts=posts, edges=edges)
    snap = materialize_snapshot(dataset, TimeWindow(1, 0, 2000))
    labels = {u: l.value for u, l in dataset.labeled().items()}
    return snap, labels


def _small_cfg(**overrides):
    cfg = RunConfig(
        k_r=16, k_s=16, word_dim=32, walks_per_node=4, walk_length=15,
        sg_window=4, sg_epochs=2, ae_hidden=8, ae_epochs=30,
        mlp_epochs=150, forest_estimators=20, seed=9,
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return cfg


class TestTrainSnapshotModel:
    def test_fusion_beats_or_matches_individual_views(self):
        snap, labels = _toy_training_setup()
        model = train_snapshot_model(snap, labels, _small_cfg(), master_seed=9)
        users = [u for u in snap.nodes if u in labels]
        outputs = {u: model.view_outputs(u) for u in users}
        fused_acc = np.mean([model.fused_label(u) == labels[u] for u in users])
        sem_acc = np.mean([outputs[u].l_sem == labels[u] for u in users])
        rel = [(u, outputs[u].l_rel) for u in users if outputs[u].has_relational]
        rel_acc = np.mean([lab == labels[u] for u, lab in rel]) if rel else 0.0
        spat = [(u, outputs[u].l_spat) for u in users if outputs[u].has_spatial]
        spat_acc = np.mean([lab == labels[u] for u, lab in spat]) if spat else 0.0
        assert fused_acc >= max(sem_acc, rel_acc, spat_acc) - 0.05
        # a user every view calls risky fuses to risky
        unanimous = [u for u in users if labels[u] == 1
                     and outputs[u].l_sem == 1
                     and outputs[u].l_rel == 1 and outputs[u].l_spat == 1]
        assert unanimous
        assert all(model.fused_label(u) == 1 for u in unanimous)

    def test_no_edges_relational_absent_fusion_still_trains(self):
        snap, labels = _toy_training_setup(with_edges=False)
        model = train_snapshot_model(snap, labels, _small_cfg(), master_seed=9)
        assert model.rel_forest is None
        for u in snap.nodes:
            out = model.view_outputs(u)
            assert not out.has_relational
        # neutral substitution keeps fusion usable
        fused_acc = np.mean([model.fused_label(u) == labels[u]
                             for u in snap.nodes if u in labels])
        assert fused_acc >= 0.8

    def test_deterministic_outputs_for_same_seed(self):
        snap, labels = _toy_training_setup()
        cfg = _small_cfg()
        m1 = train_snapshot_model(snap, labels, cfg, master_seed=5)
        m2 = train_snapshot_model(snap, labels, cfg, master_seed=5)
        probe = snap.nodes[0]
        assert m1.view_outputs(probe) == m2.view_outputs(probe)
        assert m1.fused_label(probe) == m2.fused_label(probe)

    def test_stacking_holdout_splits_meta_training(self):
        snap, labels = _toy_training_setup(n_per_class=12)
        model = train_snapshot_model(
            snap, labels, _small_cfg(stacking_holdout=0.25), master_seed=4)
        # model still predicts sensibly on training users
        acc = np.mean([model.fused_label(u) == labels[u]
                       for u in snap.nodes if u in labels])
        assert acc >= 0.7

    def test_word_vectors_from_file(self, tmp_path):
        from tgnc.semantic import preprocess

        snap, labels = _toy_training_setup(n_per_class=6)
        vocab = sorted({t for u in snap.nodes for t in preprocess(snap.docs[u])})
        rng = np.random.default_rng(2)
        lines = [f"{len(vocab)} 24"]
        for word in vocab:
            vals = " ".join(repr(float(x)) for x in rng.standard_normal(24))
            lines.append(f"{word} {vals}")
        path = tmp_path / "vectors.txt"
        path.write_text("\n".join(lines) + "\n")
        cfg = _small_cfg(word_provider="file", word_dim=24)
        cfg.word_vectors_path = str(path)
        model = train_snapshot_model(snap, labels, cfg, master_seed=3)
        assert model.provider.dim == 24
        assert model.fused_label(snap.nodes[0]) in (0, 1)

    def test_corpus_word_provider(self):
        snap, labels = _toy_training_setup(n_per_class=5)
        cfg = _small_cfg(word_provider="corpus", word_dim=16, sg_epochs=2)
        model = train_snapshot_model(snap, labels, cfg, master_seed=6)
        assert model.provider.dim == 16
        acc = np.mean([model.fused_label(u) == labels[u]
                       for u in snap.nodes if u in labels])
        assert acc >= 0.7
