"""Semantic view: text preprocessing, additive word-vector composition,
dual one-class autoencoders, reconstruction-error classification.

A user's vector is the sum of word vectors over the user's stemmed
tokens. Two autoencoders, one per class, are trained only on that
class's users; a user is labeled safe iff the safe autoencoder
reconstructs its vector with a smaller error than the risky one does
(ties go to risky).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingMatrix, SkipGramConfig, train_skipgram
from .errors import DimensionMismatch, MissingClass
from .neural import Autoencoder, TrainConfig, reconstruction_error
from .seeding import child_seed
from .stemmer import porter_stem

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def preprocess(texts: list[str]) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, Porter-stem, and
    concatenate across the given texts in order. No stop-word removal."""
    tokens: list[str] = []
    for text in texts:
        for tok in _TOKEN_RE.findall(text.lower()):
            tokens.append(porter_stem(tok))
    return tokens


class WordVectorProvider:
    """Lookup interface: dim plus per-word vector-or-None."""

    dim: int

    def lookup(self, word: str):
        raise NotImplementedError


class HashedRandomVectors(WordVectorProvider):
    """Deterministic per-(word, seed) pseudo-random vectors.

    Stateless stand-in for pretrained vectors: the same word under the
    same seed yields an identical vector in any process. Entries are
    normal with scale 1/sqrt(dim) so token sums stay O(sqrt(n_tokens)).
    """

    def __init__(self, dim: int = 300, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def lookup(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            rng = np.random.default_rng(child_seed(self.seed, "word", word))
            vec = rng.standard_normal(self.dim) / np.sqrt(self.dim)
            self._cache[word] = vec
        return vec


class PretrainedVectors(WordVectorProvider):
    """Vectors from a word2vec-style text file ('count dim' header)."""

    def __init__(self, path: str):
        self._matrix = EmbeddingMatrix.load_text(path)
        self.dim = self._matrix.dim

    def lookup(self, word: str):
        return self._matrix.get(word)


class CorpusTrainedVectors(WordVectorProvider):
    """Skip-gram vectors trained on the snapshot's own documents."""

    def __init__(self, documents: list[list[str]], cfg: SkipGramConfig):
        self._matrix = train_skipgram(documents, cfg)
        self.dim = self._matrix.dim

    def lookup(self, word: str):
        return self._matrix.get(word)


def embed_user(tokens: list[str], provider: WordVectorProvider) -> np.ndarray:
    """Sum of provider vectors over tokens; unknown words are skipped;
    an empty or all-unknown token list gives the zero vector."""
    total = np.zeros(provider.dim, dtype=np.float64)
    for tok in tokens:
        vec = provider.lookup(tok)
        if vec is not None:
            total += vec
    return total


@dataclass(frozen=True)
class SemanticOutput:
    r_s: float   # safe autoencoder reconstruction error
    r_r: float   # risky autoencoder reconstruction error
    l_sem: int   # 0 safe iff r_s < r_r, else 1 risky


def train_semantic_view(
    snapshot,
    labels: dict[str, int],
    provider: WordVectorProvider,
    train_cfg: TrainConfig,
    hidden: int = 64,
) -> tuple[Autoencoder, Autoencoder]:
    """(risky, safe) one-class autoencoders for the snapshot.

    Each trains only on its own class's user vectors. Raises
    MissingClass when the snapshot lacks labeled users of either class.
    """
    risky_vecs = []
    safe_vecs = []
    for user in snapshot.nodes:
        label = labels.get(user)
        if label is None:
            continue
        vec = embed_user(preprocess(snapshot.docs[user]), provider)
        (risky_vecs if label == 1 else safe_vecs).append(vec)
    if not risky_vecs:
        raise MissingClass("risky")
    if not safe_vecs:
        raise MissingClass("safe")

    ae_risky = Autoencoder(provider.dim, hidden=hidden,
                           seed=child_seed(train_cfg.seed, "ae-risky"))
    ae_risky.fit(np.stack(risky_vecs), train_cfg)
    ae_safe = Autoencoder(provider.dim, hidden=hidden,
                          seed=child_seed(train_cfg.seed, "ae-safe"))
    ae_safe.fit(np.stack(safe_vecs), train_cfg)
    return ae_risky, ae_safe


def classify_semantic(user_vec: np.ndarray, ae_risky: Autoencoder,
                      ae_safe: Autoencoder) -> SemanticOutput:
    user_vec = np.asarray(user_vec, dtype=np.float64)
    if user_vec.shape[0] != ae_risky.input_dim:
        raise DimensionMismatch(
            f"vector length {user_vec.shape[0]} != {ae_risky.input_dim}")
    r_r = reconstruction_error(ae_risky, user_vec)
    r_s = reconstruction_error(ae_safe, user_vec)
    return SemanticOutput(r_s=r_s, r_r=r_r, l_sem=0 if r_s < r_r else 1)
