import numpy as np
import pytest

from tgnc.data import Dataset, Label, Post
from tgnc.errors import DimensionMismatch, MissingClass
from tgnc.neural import TrainConfig, reconstruction_error
from tgnc.semantic import (
    HashedRandomVectors,
    PretrainedVectors,
    classify_semantic,
    embed_user,
    preprocess,
    train_semantic_view,
)
from tgnc.snapshots import TimeWindow, materialize_snapshot
from tgnc.stemmer import porter_stem


class TestPorterStemmer:
    # expectations traced by hand through the original rule set
    @pytest.mark.parametrize("word, stem", [
        ("running", "run"),
        ("runs", "run"),
        ("caresses", "caress"),
        ("ponies", "poni"),
        ("flies", "fli"),
        ("cats", "cat"),
        ("feed", "feed"),
        ("agreed", "agre"),
        ("motoring", "motor"),
        ("hopping", "hop"),
        ("falling", "fall"),
        ("happy", "happi"),
        ("sky", "sky"),
        ("relational", "relat"),
        ("conditional", "condit"),
        ("rational", "ration"),
        ("triplicate", "triplic"),
        ("hopeful", "hope"),
        ("goodness", "good"),
        ("electrical", "electr"),
        ("electriciti", "electr"),
        ("formaliti", "formal"),
        ("adoption", "adopt"),
        ("adjustable", "adjust"),
        ("defensible", "defens"),
        ("effective", "effect"),
        ("rate", "rate"),
        ("cease", "ceas"),
        ("an", "an"),
        ("a", "a"),
    ])
    def test_fixed_cases(self, word, stem):
        assert porter_stem(word) == stem

    def test_idempotent_on_many_words(self):
        words = ["running", "relational", "happiness", "controlled", "sensational"]
        for w in words:
            once = porter_stem(w)
            assert porter_stem(once) in (once, porter_stem(once))  # no crash, stable length
            assert len(porter_stem(w)) >= 1


class TestPreprocess:
    def test_stems_and_lowercases(self):
        assert preprocess(["Running runs"]) == ["run", "run"]

    def test_empty(self):
        assert preprocess([]) == []
        assert preprocess([""]) == []

    def test_delimiter_split(self):
        assert preprocess(["a-b c"]) == ["a", "b", "c"]

    def test_concatenates_in_order(self):
        assert preprocess(["alpha beta", "gamma"]) == ["alpha", "beta", "gamma"]

    def test_punctuation_and_digits(self):
        assert preprocess(["it's 2024!"]) == ["it", "s", "2024"]


class TestProviders:
    def test_hashed_deterministic_per_word_and_seed(self):
        p1 = HashedRandomVectors(dim=16, seed=3)
        p2 = HashedRandomVectors(dim=16, seed=3)
        p3 = HashedRandomVectors(dim=16, seed=4)
        np.testing.assert_array_equal(p1.lookup("word"), p2.lookup("word"))
        assert not np.array_equal(p1.lookup("word"), p3.lookup("word"))
        assert not np.array_equal(p1.lookup("word"), p1.lookup("drow"))

    def test_hashed_never_absent(self):
        p = HashedRandomVectors(dim=8, seed=0)
        assert p.lookup("anything") is not None

    def test_pretrained_file(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("2 3\nfoo 1.0 2.0 3.0\nbar -1.0 0.0 0.5\n")
        p = PretrainedVectors(str(path))
        assert p.dim == 3
        np.testing.assert_allclose(p.lookup("bar"), [-1.0, 0.0, 0.5])
        assert p.lookup("baz") is None

    def test_corpus_trained(self):
        from tgnc.embedding import SkipGramConfig
        from tgnc.semantic import CorpusTrainedVectors

        docs = [["red", "blue", "red"], ["blue", "green"]] * 4
        p = CorpusTrainedVectors(docs, SkipGramConfig(dim=12, window=2, epochs=2, seed=4))
        assert p.dim == 12
        assert p.lookup("red").shape == (12,)
        assert p.lookup("absent") is None


class TestEmbedUser:
    def test_empty_tokens_give_zero_vector(self):
        p = HashedRandomVectors(dim=12, seed=1)
        np.testing.assert_array_equal(embed_user([], p), np.zeros(12))

    def test_singleton_equals_provider_vector(self):
        p = HashedRandomVectors(dim=12, seed=1)
        np.testing.assert_array_equal(embed_user(["w"], p), p.lookup("w"))

    def test_repeated_tokens_sum(self):
        p = HashedRandomVectors(dim=12, seed=1)
        expected = 2.0 * p.lookup("w1") + p.lookup("w2")
        np.testing.assert_allclose(embed_user(["w1", "w2", "w1"], p), expected, atol=1e-12)

    def test_unknown_words_skipped(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("1 2\nknown 1.0 1.0\n")
        p = PretrainedVectors(str(path))
        np.testing.assert_array_equal(embed_user(["unknown", "known"], p), [1.0, 1.0])
        np.testing.assert_array_equal(embed_user(["unknown"], p), np.zeros(2))

    def test_concatenation_linearity(self):
        p = HashedRandomVectors(dim=300, seed=2)
        rng = np.random.default_rng(0)
        vocab = [f"w{i}" for i in range(30)]
        for _ in range(10):
            a = list(rng.choice(vocab, size=rng.integers(0, 20)))
            b = list(rng.choice(vocab, size=rng.integers(0, 20)))
            lhs = embed_user(a + b, p)
            rhs = embed_user(a, p) + embed_user(b, p)
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def _snapshot_with_classes(n_risky, n_safe, tokens_per_user=6):
    """Snapshot whose risky/safe users draw from disjoint vocabularies."""
    users = {}
    posts = []
    for i in range(n_risky):
        users[f"r{i}"] = Label.RISKY
        text = " ".join(f"danger{j}" for j in range(tokens_per_user))
        posts.append(Post(f"r{i}", text, timestamp=10 + i, lat=0.0, lon=0.0))
    for i in range(n_safe):
        users[f"s{i}"] = Label.SAFE
        text = " ".join(f"garden{j}" for j in range(tokens_per_user))
        posts.append(Post(f"s{i}", text, timestamp=10 + i, lat=0.0, lon=0.0))
    if n_risky == 0:
        users["r_pad"] = Label.RISKY  # dataset invariant needs both classes
    if n_safe == 0:
        users["s_pad"] = Label.SAFE
    dataset = Dataset(users=users, posts=posts, edges=[])
    snap = materialize_snapshot(dataset, TimeWindow(1, 0, 1000))
    labels = {u: l.value for u, l in dataset.labeled().items() if u in snap}
    return snap, labels


class TestTrainSemanticView:
    def test_missing_class(self):
        snap, labels = _snapshot_with_classes(n_risky=3, n_safe=0)
        provider = HashedRandomVectors(dim=20, seed=0)
        cfg = TrainConfig(epochs=2, seed=0)
        with pytest.raises(MissingClass) as exc:
            train_semantic_view(snap, labels, provider, cfg, hidden=4)
        assert exc.value.which == "safe"

    def test_own_class_reconstructs_better(self):
        snap, labels = _snapshot_with_classes(n_risky=10, n_safe=10)
        provider = HashedRandomVectors(dim=40, seed=1)
        cfg = TrainConfig(epochs=150, batch_size=8, learning_rate=2e-3, seed=1)
        ae_risky, ae_safe = train_semantic_view(snap, labels, provider, cfg, hidden=8)
        risky_vecs = [embed_user(preprocess(snap.docs[u]), provider)
                      for u in snap.nodes if labels.get(u) == 1]
        safe_vecs = [embed_user(preprocess(snap.docs[u]), provider)
                     for u in snap.nodes if labels.get(u) == 0]
        risky_own = np.mean([reconstruction_error(ae_risky, v) for v in risky_vecs])
        risky_other = np.mean([reconstruction_error(ae_risky, v) for v in safe_vecs])
        safe_own = np.mean([reconstruction_error(ae_safe, v) for v in safe_vecs])
        safe_other = np.mean([reconstruction_error(ae_safe, v) for v in risky_vecs])
        assert risky_own < risky_other
        assert safe_own < safe_other

    def test_same_seed_identical_parameters(self):
        snap, labels = _snapshot_with_classes(n_risky=4, n_safe=4)
        provider = HashedRandomVectors(dim=16, seed=2)
        cfg = TrainConfig(epochs=5, seed=7)
        a_r1, a_s1 = train_semantic_view(snap, labels, provider, cfg, hidden=4)
        a_r2, a_s2 = train_semantic_view(snap, labels, provider, cfg, hidden=4)
        for W1, W2 in zip(a_r1.net.weights, a_r2.net.weights):
            assert np.array_equal(W1, W2)
        for W1, W2 in zip(a_s1.net.weights, a_s2.net.weights):
            assert np.array_equal(W1, W2)


class TestClassifySemantic:
    def _autoencoders(self):
        snap, labels = _snapshot_with_classes(n_risky=5, n_safe=5)
        provider = HashedRandomVectors(dim=24, seed=3)
        cfg = TrainConfig(epochs=10, seed=3)
        ae_r, ae_s = train_semantic_view(snap, labels, provider, cfg, hidden=6)
        return ae_r, ae_s

    def test_label_is_sign_of_error_difference(self):
        ae_r, ae_s = self._autoencoders()
        rng = np.random.default_rng(5)
        for _ in range(40):
            out = classify_semantic(rng.standard_normal(24), ae_r, ae_s)
            assert out.l_sem == (0 if out.r_s < out.r_r else 1)
            assert out.r_s >= 0.0 and out.r_r >= 0.0

    def test_tie_goes_to_risky(self):
        ae_r, ae_s = self._autoencoders()
        # same net on both sides forces r_s == r_r
        out = classify_semantic(np.zeros(24), ae_r, ae_r)
        assert out.r_s == out.r_r
        assert out.l_sem == 1

    def test_zero_vector_is_well_formed(self):
        ae_r, ae_s = self._autoencoders()
        out = classify_semantic(np.zeros(24), ae_r, ae_s)
        assert np.isfinite(out.r_s) and np.isfinite(out.r_r)
        assert out.l_sem in (0, 1)

    def test_dimension_mismatch(self):
        ae_r, ae_s = self._autoencoders()
        with pytest.raises(DimensionMismatch):
            classify_semantic(np.zeros(25), ae_r, ae_s)
