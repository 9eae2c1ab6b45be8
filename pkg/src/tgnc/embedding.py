"""Graph embeddings: second-order biased random walks plus skip-gram
with negative sampling, composed into node2vec. The skip-gram trainer
doubles as the trainable word-vector backend.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._kernels import _edge_tables, _node_tables, _sgns_kernel, _walk_kernel
from .errors import DimensionMismatch, EmptyCorpus, EmptyGraph, NumericError
from .sampling import build_alias
from .seeding import child_seed

_MAGIC = b"TGEM"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 80
    return_param: float = 1.0  # p: likelihood of immediately revisiting
    inout_param: float = 1.0   # q: depth-first vs breadth-first bias
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1 or self.walk_length < 1:
            raise ValueError("walks_per_node and walk_length must be >= 1")
        if self.return_param <= 0 or self.inout_param <= 0:
            raise ValueError("return_param and inout_param must be > 0")


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 128
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("dim, window, negatives and epochs must be >= 1")


class GraphView:
    """Adjacency in CSR form over an ordered node-id list.

    Out-neighbor lists are kept sorted by neighbor index (binary search
    during walk biasing, and a canonical order for determinism).
    Weights must be positive; self-loops are rejected.
    """

    def __init__(self, node_ids: list[str], adjacency: list[list[tuple[int, float]]]):
        if len(adjacency) != len(node_ids):
            raise ValueError("adjacency length must match node_ids")
        self.node_ids = list(node_ids)
        self.index = {u: i for i, u in enumerate(self.node_ids)}
        if len(self.index) != len(self.node_ids):
            raise ValueError("duplicate node ids")
        indptr = np.zeros(len(node_ids) + 1, dtype=np.int64)
        flat_idx: list[int] = []
        flat_wgt: list[float] = []
        for v, nbrs in enumerate(adjacency):
            seen = set()
            for x, w in sorted(nbrs):
                if x == v:
                    raise ValueError(f"self-loop on node {node_ids[v]!r}")
                if w <= 0.0 or not np.isfinite(w):
                    raise ValueError(f"non-positive weight {w} on edge {node_ids[v]!r}->{node_ids[x]!r}")
                if x in seen:
                    raise ValueError(f"duplicate edge {node_ids[v]!r}->{node_ids[x]!r}")
                seen.add(x)
                flat_idx.append(x)
                flat_wgt.append(w)
            indptr[v + 1] = len(flat_idx)
        self.indptr = indptr
        self.indices = np.asarray(flat_idx, dtype=np.int32)
        self.weights = np.asarray(flat_wgt, dtype=np.float64)

    @classmethod
    def from_edges(cls, node_ids: list[str], edges, directed: bool = True) -> "GraphView":
        """Build from (u, v) or (u, v, weight) tuples over string ids.

        Undirected graphs insert both directions, giving a symmetric
        adjacency.
        """
        index = {u: i for i, u in enumerate(node_ids)}
        adjacency: list[list[tuple[int, float]]] = [[] for _ in node_ids]
        for edge in edges:
            u, v = edge[0], edge[1]
            w = float(edge[2]) if len(edge) > 2 else 1.0
            adjacency[index[u]].append((index[v], w))
            if not directed:
                adjacency[index[v]].append((index[u], w))
        return cls(node_ids, adjacency)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.indices.shape[0])

    def out_degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])


class EmbeddingMatrix:
    """Fixed-dimension real vectors indexed by node/word id."""

    def __init__(self, ids: list[str], vectors: np.ndarray):
        if vectors.ndim != 2 or vectors.shape[0] != len(ids):
            raise ValueError("vectors must be (len(ids), dim)")
        self.ids = list(ids)
        self.index = {u: i for i, u in enumerate(self.ids)}
        self.vectors = np.ascontiguousarray(vectors, dtype=np.float64)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __contains__(self, key: str) -> bool:
        return key in self.index

    def __len__(self) -> int:
        return len(self.ids)

    def row(self, key: str) -> np.ndarray:
        return self.vectors[self.index[key]]

    def get(self, key: str):
        i = self.index.get(key)
        return None if i is None else self.vectors[i]

    def save_binary(self, path: str) -> None:
        """magic, version, dim, rows; then per row: id length, id bytes,
        dim little-endian float32s."""
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<III", _FORMAT_VERSION, self.dim, len(self.ids)))
            for i, key in enumerate(self.ids):
                raw = key.encode("utf-8")
                fh.write(struct.pack("<I", len(raw)))
                fh.write(raw)
                fh.write(self.vectors[i].astype("<f4").tobytes())

    @classmethod
    def load_binary(cls, path: str) -> "EmbeddingMatrix":
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise ValueError(f"{path}: not an embedding file")
            version, dim, rows = struct.unpack("<III", fh.read(12))
            if version != _FORMAT_VERSION:
                raise ValueError(f"{path}: unsupported version {version}")
            ids = []
            vectors = np.empty((rows, dim), dtype=np.float64)
            for i in range(rows):
                (id_len,) = struct.unpack("<I", fh.read(4))
                ids.append(fh.read(id_len).decode("utf-8"))
                vectors[i] = np.frombuffer(fh.read(4 * dim), dtype="<f4")
        return cls(ids, vectors)

    def save_text(self, path: str) -> None:
        """word2vec-style text format: 'count dim' header then rows."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self.ids)} {self.dim}\n")
            for i, key in enumerate(self.ids):
                vals = " ".join(repr(float(x)) for x in self.vectors[i])
                fh.write(f"{key} {vals}\n")

    @classmethod
    def load_text(cls, path: str) -> "EmbeddingMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            rows, dim = int(header[0]), int(header[1])
            ids = []
            vectors = np.empty((rows, dim), dtype=np.float64)
            for i in range(rows):
                parts = fh.readline().rstrip("\n").split(" ")
                ids.append(parts[0])
                vectors[i] = [float(x) for x in parts[1:dim + 1]]
        return cls(ids, vectors)


def _precompute_tables(graph: GraphView, cfg: WalkConfig):
    indptr, indices, weights = graph.indptr, graph.indices, graph.weights
    m = graph.n_edges
    max_deg = int(np.max(np.diff(indptr))) if graph.n_nodes else 0
    nprob = np.empty(m, dtype=np.float64)
    nalias = np.empty(m, dtype=np.int32)
    if m:
        _node_tables(indptr, weights, nprob, nalias, max(max_deg, 1))
    # One second-order table per directed edge (t -> v), sized outdeg(v).
    # For p == q == 1 it degenerates to v's first-order table, so skip the
    # O(sum_e outdeg) materialization entirely (dense graphs would blow up).
    use_second = not (cfg.return_param == 1.0 and cfg.inout_param == 1.0)
    edge_off = np.zeros(m + 1, dtype=np.int64)
    if m and use_second:
        tgt = indices.astype(np.int64)
        np.cumsum(indptr[tgt + 1] - indptr[tgt], out=edge_off[1:])
    eprob = np.empty(int(edge_off[-1]), dtype=np.float64)
    ealias = np.empty(int(edge_off[-1]), dtype=np.int32)
    if m and use_second:
        _edge_tables(indptr, indices, weights,
                     1.0 / cfg.return_param, 1.0 / cfg.inout_param,
                     edge_off, eprob, ealias, max(max_deg, 1))
    return nprob, nalias, eprob, ealias, edge_off, use_second


def generate_walks(graph: GraphView, cfg: WalkConfig) -> list[list[str]]:
    """Exactly walks_per_node walks from every node, each of length
    <= walk_length (shorter only from a dead end).

    The next hop from v, having arrived from t, is proportional to
    weight(v, x) scaled by 1/p when x == t, by 1 when t -> x exists and
    by 1/q otherwise. Per-node seed streams make the output independent
    of scheduling.
    """
    matrix = generate_walk_matrix(graph, cfg)
    walks: list[list[str]] = []
    ids = graph.node_ids
    for row in matrix:
        walks.append([ids[i] for i in row if i >= 0])
    return walks


def generate_walk_matrix(graph: GraphView, cfg: WalkConfig) -> np.ndarray:
    """Index-space walks: int32 (n_nodes * walks_per_node, walk_length),
    padded with -1 after a dead end."""
    if graph.n_nodes == 0:
        raise EmptyGraph("cannot walk an empty graph")
    nprob, nalias, eprob, ealias, edge_off, use_second = _precompute_tables(graph, cfg)
    seeds = np.empty(graph.n_nodes, dtype=np.uint64)
    for i, node_id in enumerate(graph.node_ids):
        seeds[i] = child_seed(cfg.seed, "walk", node_id)
    return _walk_kernel(
        graph.indptr, graph.indices, nprob, nalias, eprob, ealias, edge_off,
        seeds, cfg.walks_per_node, cfg.walk_length, use_second,
    )


def _train_encoded(sequences_tok: np.ndarray, offsets: np.ndarray, vocab_size: int,
                   counts: np.ndarray, cfg: SkipGramConfig) -> np.ndarray:
    rng = np.random.default_rng(child_seed(cfg.seed, "sgns-init"))
    W = (rng.random((vocab_size, cfg.dim)) - 0.5) / cfg.dim
    C = np.zeros((vocab_size, cfg.dim), dtype=np.float64)
    neg_prob, neg_alias = build_alias(counts.astype(np.float64) ** 0.75)
    lr_min = cfg.learning_rate * 1e-4
    _sgns_kernel(
        W, C, sequences_tok, offsets, cfg.window, cfg.negatives,
        neg_prob, neg_alias, cfg.learning_rate, lr_min, cfg.epochs,
        np.uint64(child_seed(cfg.seed, "sgns-neg")),
    )
    if not np.all(np.isfinite(W)):
        raise NumericError("skip-gram training produced non-finite vectors")
    return W


def train_skipgram(sequences: list[list[str]], cfg: SkipGramConfig) -> EmbeddingMatrix:
    """Skip-gram with negative sampling over token sequences.

    Vocabulary order is first occurrence; training is single-threaded
    and fully determined by the seed.
    """
    vocab: dict[str, int] = {}
    toks: list[int] = []
    offsets = [0]
    counts: list[int] = []
    for seq in sequences:
        for token in seq:
            idx = vocab.get(token)
            if idx is None:
                idx = len(vocab)
                vocab[token] = idx
                counts.append(0)
            counts[idx] += 1
            toks.append(idx)
        offsets.append(len(toks))
    if not vocab:
        raise EmptyCorpus("no tokens to train on")
    W = _train_encoded(
        np.asarray(toks, dtype=np.int32),
        np.asarray(offsets, dtype=np.int64),
        len(vocab),
        np.asarray(counts, dtype=np.int64),
        cfg,
    )
    return EmbeddingMatrix(list(vocab), W)


def node2vec(graph: GraphView, walk_cfg: WalkConfig, sg_cfg: SkipGramConfig) -> EmbeddingMatrix:
    """Walks then skip-gram; one row per graph node, in node order."""
    matrix = generate_walk_matrix(graph, walk_cfg)
    flat = matrix.ravel()
    keep = flat >= 0
    toks = flat[keep].astype(np.int32)
    lengths = (matrix >= 0).sum(axis=1)
    offsets = np.zeros(matrix.shape[0] + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    counts = np.bincount(toks, minlength=graph.n_nodes).astype(np.int64)
    W = _train_encoded(toks, offsets, graph.n_nodes, counts, sg_cfg)
    return EmbeddingMatrix(graph.node_ids, W)


def sgns_loss_and_grad(W: np.ndarray, C: np.ndarray, center: int,
                       positive: int, negatives: list[int]):
    """Negative-sampling loss and analytic gradients for one group.

    L = -log sigma(w.c_pos) - sum_neg log sigma(-w.c_neg). Returns
    (loss, grad_W_center, {target: grad_C_target}). Used by tests to
    compare against finite differences.
    """
    if W.shape[1] != C.shape[1]:
        raise DimensionMismatch("W and C dims differ")
    w = W[center]
    eps = 1e-12
    sig = lambda f: 1.0 / (1.0 + np.exp(-f))
    loss = -np.log(max(sig(float(w @ C[positive])), eps))
    grad_w = (sig(float(w @ C[positive])) - 1.0) * C[positive]
    grads_c = {positive: (sig(float(w @ C[positive])) - 1.0) * w}
    for t in negatives:
        f = float(w @ C[t])
        loss -= np.log(max(sig(-f), eps))
        grad_w = grad_w + sig(f) * C[t]
        grads_c[t] = grads_c.get(t, 0.0) + sig(f) * w
    return float(loss), grad_w, grads_c
