import numpy as np
import pytest

from tgnc.sampling import alias_exact_probabilities, build_alias, sample_alias


class TestAliasTable:
    def test_encodes_exact_distribution(self):
        rng = np.random.default_rng(0)
        for k in (1, 2, 3, 7, 10):
            w = rng.uniform(0.1, 5.0, size=k)
            prob, alias = build_alias(w)
            np.testing.assert_allclose(
                alias_exact_probabilities(prob, alias), w / w.sum(), atol=1e-12)

    def test_uniform_weights_are_degenerate(self):
        prob, alias = build_alias([2.0, 2.0, 2.0, 2.0])
        np.testing.assert_allclose(prob, 1.0)

    def test_empirical_frequencies_within_3_sigma(self):
        # binomial check over 1e5 draws for several hand-picked shapes
        n = 100_000
        cases = [
            [1.0],
            [1.0, 1.0],
            [1.0, 3.0],
            [1.0, 2.0, 3.0, 4.0],
            [0.05, 0.05, 0.9],
            list(np.random.default_rng(1).uniform(0.2, 4.0, size=10)),
        ]
        for seed, w in enumerate(cases):
            w = np.asarray(w, dtype=np.float64)
            p = w / w.sum()
            prob, alias = build_alias(w)
            draws = sample_alias(prob, alias, seed=seed + 100, n=n)
            counts = np.bincount(draws, minlength=len(w))
            sigma = np.sqrt(n * p * (1.0 - p))
            assert np.all(np.abs(counts - n * p) <= 3.0 * np.maximum(sigma, 1.0)), (
                f"case {w}: counts {counts} expected {n * p}")

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            build_alias([])
        with pytest.raises(ValueError):
            build_alias([1.0, 0.0])
        with pytest.raises(ValueError):
            build_alias([1.0, -2.0])

    def test_draws_are_seeded(self):
        prob, alias = build_alias([1.0, 2.0, 3.0])
        a = sample_alias(prob, alias, seed=9, n=1000)
        b = sample_alias(prob, alias, seed=9, n=1000)
        c = sample_alias(prob, alias, seed=10, n=1000)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
