"""Alias-method categorical sampling (public wrapper over the kernels)."""

from __future__ import annotations

import numpy as np

from ._kernels import _alias_fill, _alias_sample_many


def build_alias(weights) -> tuple[np.ndarray, np.ndarray]:
    """Alias table for an unnormalized positive weight vector.

    Returns (prob, alias) arrays of the same length as ``weights``.
    Sampling: pick slot i uniformly, accept i with probability prob[i],
    otherwise return alias[i].
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D vector")
    if not np.all(w > 0.0):
        raise ValueError("weights must all be positive")
    K = w.shape[0]
    prob = np.empty(K, dtype=np.float64)
    alias = np.empty(K, dtype=np.int32)
    _alias_fill(w, prob, alias,
                np.empty(K, dtype=np.float64),
                np.empty(K, dtype=np.int64),
                np.empty(K, dtype=np.int64))
    return prob, alias


def sample_alias(prob: np.ndarray, alias: np.ndarray, seed: int, n: int) -> np.ndarray:
    """n seeded draws (int32 outcome indices) from an alias table."""
    return _alias_sample_many(prob, alias, np.uint64(seed & (2**64 - 1)), n)


def alias_exact_probabilities(prob: np.ndarray, alias: np.ndarray) -> np.ndarray:
    """Reconstruct the exact categorical distribution a table encodes."""
    K = prob.shape[0]
    out = np.zeros(K, dtype=np.float64)
    for i in range(K):
        out[i] += prob[i] / K
        out[alias[i]] += (1.0 - prob[i]) / K
    return out
