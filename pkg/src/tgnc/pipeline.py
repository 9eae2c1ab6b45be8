"""Per-snapshot orchestration: three views plus a fusion meta-learner,
optional embedding smoothing across snapshots, weighted temporal voting
over per-snapshot labels, and evaluation metrics.

Snapshot models are fully independent of each other; smoothing is the
only cross-snapshot dependency and is expressed as a staged fold over
already-computed raw embeddings, never as shared mutable state.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, active_users, validate_within_network
from .embedding import EmbeddingMatrix, GraphView, SkipGramConfig, WalkConfig, node2vec
from .errors import (
    ConfigError,
    DataError,
    DegenerateDistances,
    EmptyLedger,
    EmptySnapshot,
    KeyMismatch,
    TooFewUsers,
)
from .forest import ConfidentPrediction, DecisionTree, ForestConfig, fit_forest, fit_tree
from .neural import DenseNet, TrainConfig, train
from .seeding import child_seed
from .semantic import (
    CorpusTrainedVectors,
    HashedRandomVectors,
    PretrainedVectors,
    WordVectorProvider,
    classify_semantic,
    embed_user,
    preprocess,
    train_semantic_view,
)
from .snapshots import Snapshot, TimeWindow, materialize_snapshot, split_windows
from .spatial import build_closeness, closeness_graph_view

VOTING_SCHEMES = ("uniform", "linear", "quadratic")

# fixed fusion input order; part of every fusion checkpoint header
FEATURE_ORDER = ("r_s", "r_r", "l_sem", "l_rel", "c_rel", "l_spat", "c_spat")

# neutral stand-ins for a missing view: labels 0.5, confidences 0;
# reconstruction errors fall back to the snapshot's training means
NEUTRAL_LABEL = 0.5
NEUTRAL_CONFIDENCE = 0.0


@dataclass
class ViewOutputs:
    """Per-user outputs of the three views inside one snapshot.

    None marks an absent view (no edges / no closeness row for the
    user); the semantic view is always present for snapshot members.
    """

    r_s: float | None = None
    r_r: float | None = None
    l_sem: int | None = None
    l_rel: int | None = None
    c_rel: float | None = None
    l_spat: int | None = None
    c_spat: float | None = None

    @property
    def has_semantic(self) -> bool:
        return self.l_sem is not None

    @property
    def has_relational(self) -> bool:
        return self.l_rel is not None

    @property
    def has_spatial(self) -> bool:
        return self.l_spat is not None


@dataclass
class NeutralFill:
    mean_r_s: float
    mean_r_r: float


def assemble_features(outputs: ViewOutputs, fill: NeutralFill) -> np.ndarray:
    """The 7-vector (r_s, r_r, l_sem, l_rel, c_rel, l_spat, c_spat) with
    neutral substitution for absent views; arity is always 7."""
    return np.array([
        outputs.r_s if outputs.has_semantic else fill.mean_r_s,
        outputs.r_r if outputs.has_semantic else fill.mean_r_r,
        outputs.l_sem if outputs.has_semantic else NEUTRAL_LABEL,
        outputs.l_rel if outputs.has_relational else NEUTRAL_LABEL,
        outputs.c_rel if outputs.has_relational else NEUTRAL_CONFIDENCE,
        outputs.l_spat if outputs.has_spatial else NEUTRAL_LABEL,
        outputs.c_spat if outputs.has_spatial else NEUTRAL_CONFIDENCE,
    ], dtype=np.float64)


def fuse(features: np.ndarray, mlp: DenseNet) -> int:
    """Sigmoid output thresholded at 0.5; the boundary goes to risky."""
    p = float(mlp.forward(features)[0])
    return 1 if p >= 0.5 else 0


@dataclass
class SnapshotModel:
    """Everything trained on one snapshot. No parameters are shared
    with any other snapshot's model."""

    index: int
    snapshot: Snapshot
    provider: WordVectorProvider
    ae_risky: object
    ae_safe: object
    fill: NeutralFill
    rel_embedding: EmbeddingMatrix | None
    rel_forest: object | None
    spat_embedding: EmbeddingMatrix | None
    spat_tree: DecisionTree | None
    fusion: DenseNet
    _sem_cache: dict = field(default_factory=dict, repr=False)

    def semantic_vector(self, user: str) -> np.ndarray:
        vec = self._sem_cache.get(user)
        if vec is None:
            vec = embed_user(preprocess(self.snapshot.docs[user]), self.provider)
            self._sem_cache[user] = vec
        return vec

    def view_outputs(self, user: str) -> ViewOutputs | None:
        """None when the user is not a member of this snapshot."""
        if user not in self.snapshot:
            return None
        out = ViewOutputs()
        sem = classify_semantic(self.semantic_vector(user), self.ae_risky, self.ae_safe)
        out.r_s, out.r_r, out.l_sem = sem.r_s, sem.r_r, sem.l_sem
        if self.rel_forest is not None and self.rel_embedding is not None and user in self.rel_embedding:
            pred: ConfidentPrediction = self.rel_forest.predict_confident(self.rel_embedding.row(user))
            out.l_rel, out.c_rel = pred.label, pred.confidence
        if self.spat_tree is not None and self.spat_embedding is not None and user in self.spat_embedding:
            pred = self.spat_tree.predict_confident(self.spat_embedding.row(user))
            out.l_spat, out.c_spat = pred.label, pred.confidence
        return out

    def fused_label(self, user: str) -> int | None:
        outputs = self.view_outputs(user)
        if outputs is None:
            return None
        return fuse(assemble_features(outputs, self.fill), self.fusion)


# --- smoothing --------------------------------------------------------------


def smooth_embeddings(history: list[EmbeddingMatrix], user: str) -> np.ndarray:
    """Component-wise sum of the user's rows over the given matrices,
    skipping snapshots where the user is absent."""
    from .errors import UserNeverEmbedded

    total = None
    for matrix in history:
        row = matrix.get(user)
        if row is None:
            continue
        total = row.copy() if total is None else total + row
    if total is None:
        raise UserNeverEmbedded(f"user {user!r} has no row in any snapshot")
    return total


def smoothed_matrix(history: list[EmbeddingMatrix], current: EmbeddingMatrix,
                    include_current: bool) -> EmbeddingMatrix:
    """Smoothed rows for every user of the current snapshot's matrix.

    With include_current False (strict previous-snapshots mode) a user
    with no history keeps its current raw row; a zero vector would
    poison the downstream classifiers.
    """
    matrices = list(history) + [current] if include_current else list(history)
    vectors = np.empty_like(current.vectors)
    for i, user in enumerate(current.ids):
        total = None
        for matrix in matrices:
            row = matrix.get(user)
            if row is None:
                continue
            total = row.copy() if total is None else total + row
        vectors[i] = current.vectors[i] if total is None else total
    return EmbeddingMatrix(current.ids, vectors)


# --- voting -----------------------------------------------------------------


def scheme_weight(scheme: str, index: int) -> int:
    if scheme == "uniform":
        return 1
    if scheme == "linear":
        return index
    if scheme == "quadratic":
        return index * index
    raise ConfigError(f"unknown voting scheme {scheme!r}")


@dataclass(frozen=True)
class VoteResult:
    label: int
    score_risky: int
    score_safe: int


def vote(entries: list[tuple[int, int]], scheme: str) -> VoteResult:
    """Weighted vote over (snapshot index, fused label) entries; absent
    snapshots simply contribute no term. Ties go to risky."""
    if not entries:
        raise EmptyLedger("user has no per-snapshot predictions")
    score_risky = 0
    score_safe = 0
    for index, label in entries:
        w = scheme_weight(scheme, index)
        if label == 1:
            score_risky += w
        else:
            score_safe += w
    return VoteResult(
        label=1 if score_risky >= score_safe else 0,
        score_risky=score_risky,
        score_safe=score_safe,
    )


# --- evaluation -------------------------------------------------------------


@dataclass
class MetricsReport:
    all_users: dict
    safe: dict
    risky: dict
    flags: list[str]

    def to_dict(self) -> dict:
        return {
            "all_users": self.all_users,
            "safe": self.safe,
            "risky": self.risky,
            "zero_division_flags": self.flags,
        }


def evaluate(predicted: dict[str, int], truth: dict[str, int]) -> MetricsReport:
    """Per-class precision/recall/F1 (each class as positive), macro
    averages plus accuracy for the all-users block. Zero-denominator
    metrics are reported as 0 and flagged."""
    if set(predicted) != set(truth):
        only_p = sorted(set(predicted) - set(truth))[:3]
        only_t = sorted(set(truth) - set(predicted))[:3]
        raise KeyMismatch(
            f"prediction/truth key sets differ (predicted-only {only_p}, truth-only {only_t})")
    flags: list[str] = []

    def one_class(cls_value: int, name: str) -> dict:
        tp = sum(1 for u in truth if predicted[u] == cls_value and truth[u] == cls_value)
        fp = sum(1 for u in truth if predicted[u] == cls_value and truth[u] != cls_value)
        fn = sum(1 for u in truth if predicted[u] != cls_value and truth[u] == cls_value)
        if tp + fp == 0:
            flags.append(f"{name}.precision.zero_division")
            precision = 0.0
        else:
            precision = tp / (tp + fp)
        if tp + fn == 0:
            flags.append(f"{name}.recall.zero_division")
            recall = 0.0
        else:
            recall = tp / (tp + fn)
        if precision + recall == 0.0:
            flags.append(f"{name}.f1.zero_division")
            f1 = 0.0
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        return {"precision": precision, "recall": recall, "f1": f1}

    safe = one_class(0, "safe")
    risky = one_class(1, "risky")
    n = len(truth)
    accuracy = sum(1 for u in truth if predicted[u] == truth[u]) / n if n else 0.0
    all_users = {
        "precision": (safe["precision"] + risky["precision"]) / 2.0,
        "recall": (safe["recall"] + risky["recall"]) / 2.0,
        "f1": (safe["f1"] + risky["f1"]) / 2.0,
        "accuracy": accuracy,
    }
    return MetricsReport(all_users=all_users, safe=safe, risky=risky, flags=flags)


# --- training one snapshot ---------------------------------------------------


def _make_provider(cfg, snapshot: Snapshot, master_seed: int) -> WordVectorProvider:
    if cfg.word_provider == "hashed":
        return HashedRandomVectors(dim=cfg.word_dim, seed=child_seed(master_seed, "wordvec"))
    if cfg.word_provider == "file":
        return PretrainedVectors(cfg.word_vectors_path)
    if cfg.word_provider == "corpus":
        docs = [preprocess(snapshot.docs[u]) for u in snapshot.nodes]
        sg = SkipGramConfig(
            dim=cfg.word_dim, window=cfg.sg_window, negatives=cfg.sg_negatives,
            epochs=cfg.sg_epochs, learning_rate=cfg.sg_learning_rate,
            seed=child_seed(master_seed, "wordvec", snapshot.window.index),
        )
        return CorpusTrainedVectors(docs, sg)
    raise ConfigError(f"unknown word provider {cfg.word_provider!r}")


def relational_graph_view(snapshot: Snapshot) -> GraphView | None:
    """Directed view over snapshot users incident to >= 1 edge."""
    if not snapshot.edges:
        return None
    nodes = sorted({u for edge in snapshot.edges for u in edge})
    return GraphView.from_edges(nodes, snapshot.edges, directed=True)


def raw_view_embeddings(snapshot: Snapshot, cfg, master_seed: int,
                        warn=None) -> tuple[EmbeddingMatrix | None, EmbeddingMatrix | None]:
    """Stage-one raw relational and spatial embeddings for a snapshot."""
    i = snapshot.window.index
    rel = None
    view = relational_graph_view(snapshot)
    if view is not None:
        rel = node2vec(
            view,
            WalkConfig(cfg.walks_per_node, cfg.walk_length, cfg.return_param,
                       cfg.inout_param, seed=child_seed(master_seed, "rel-walks", i)),
            SkipGramConfig(cfg.k_r, cfg.sg_window, cfg.sg_negatives, cfg.sg_epochs,
                           cfg.sg_learning_rate, seed=child_seed(master_seed, "rel-sgns", i)),
        )
    elif warn:
        warn(f"snapshot {i}: no in-window edges; relational view absent")
    spat = None
    try:
        closeness = build_closeness(snapshot.locations)
        cview = closeness_graph_view(closeness)
    except (TooFewUsers, DegenerateDistances) as exc:
        cview = None
        if warn:
            warn(f"snapshot {i}: spatial view absent ({exc})")
    if cview is not None:
        spat = node2vec(
            cview,
            WalkConfig(cfg.walks_per_node, cfg.walk_length, cfg.return_param,
                       cfg.inout_param, seed=child_seed(master_seed, "spat-walks", i)),
            SkipGramConfig(cfg.k_s, cfg.sg_window, cfg.sg_negatives, cfg.sg_epochs,
                           cfg.sg_learning_rate, seed=child_seed(master_seed, "spat-sgns", i)),
        )
    return rel, spat


_UNSET = object()


def train_snapshot_model(snapshot: Snapshot, labels: dict[str, int], cfg,
                         master_seed: int,
                         rel_embedding=_UNSET,
                         spat_embedding=_UNSET,
                         warn=None) -> SnapshotModel:
    """Train the three views and the fusion meta-learner on one snapshot.

    ``labels`` maps labeled users to 0/1. Embedding matrices may be
    injected (possibly smoothed); otherwise raw ones are computed here.
    The meta-learner trains on view outputs for labeled users; with
    cfg.stacking_holdout > 0 the views train on a (1-h) base share and
    the meta-learner on the held-out share's outputs instead.
    """
    i = snapshot.window.index
    if not snapshot.nodes:
        raise EmptySnapshot(f"snapshot {i} has no active users")
    if rel_embedding is _UNSET or spat_embedding is _UNSET:
        rel_embedding, spat_embedding = raw_view_embeddings(snapshot, cfg, master_seed, warn)

    labeled_here = [u for u in snapshot.nodes if u in labels]
    holdout = getattr(cfg, "stacking_holdout", 0.0)
    if holdout > 0.0 and len(labeled_here) >= 10:
        rng = np.random.default_rng(child_seed(master_seed, "stacking", i))
        order = rng.permutation(len(labeled_here))
        n_meta = max(1, int(round(holdout * len(labeled_here))))
        meta_users = [labeled_here[k] for k in sorted(order[:n_meta])]
        base_users = [labeled_here[k] for k in sorted(order[n_meta:])]
        if not any(labels[u] == 1 for u in base_users) or not any(labels[u] == 0 for u in base_users):
            base_users, meta_users = labeled_here, labeled_here  # too small to split
    else:
        base_users, meta_users = labeled_here, labeled_here
    base_labels = {u: labels[u] for u in base_users}

    provider = _make_provider(cfg, snapshot, master_seed)
    ae_cfg = TrainConfig(
        epochs=cfg.ae_epochs, batch_size=cfg.ae_batch_size,
        learning_rate=cfg.ae_learning_rate,
        seed=child_seed(master_seed, "semantic", i),
    )
    ae_risky, ae_safe = train_semantic_view(
        _restricted_view(snapshot, base_users), base_labels, provider, ae_cfg,
        hidden=cfg.ae_hidden)

    rel_forest = None
    if rel_embedding is not None:
        train_ids = [u for u in base_users if u in rel_embedding]
        if any(labels[u] == 1 for u in train_ids) and any(labels[u] == 0 for u in train_ids):
            X = np.stack([rel_embedding.row(u) for u in train_ids])
            y = np.array([labels[u] for u in train_ids], dtype=np.int64)
            rel_forest = fit_forest(X, y, ForestConfig(
                n_estimators=cfg.forest_estimators, max_depth=cfg.forest_max_depth,
                seed=child_seed(master_seed, "forest", i)))
        elif warn:
            warn(f"snapshot {i}: relational classifier skipped (single-class embedded users)")

    spat_tree = None
    if spat_embedding is not None:
        train_ids = [u for u in base_users if u in spat_embedding]
        if any(labels[u] == 1 for u in train_ids) and any(labels[u] == 0 for u in train_ids):
            X = np.stack([spat_embedding.row(u) for u in train_ids])
            y = np.array([labels[u] for u in train_ids], dtype=np.int64)
            spat_tree = fit_tree(X, y, max_depth=cfg.forest_max_depth,
                                 seed=child_seed(master_seed, "tree", i))
        elif warn:
            warn(f"snapshot {i}: spatial classifier skipped (single-class embedded users)")

    model = SnapshotModel(
        index=i, snapshot=snapshot, provider=provider,
        ae_risky=ae_risky, ae_safe=ae_safe,
        fill=NeutralFill(0.0, 0.0),
        rel_embedding=rel_embedding, rel_forest=rel_forest,
        spat_embedding=spat_embedding, spat_tree=spat_tree,
        fusion=DenseNet([7, cfg.mlp_hidden, 1], ["relu", "sigmoid"],
                        seed=child_seed(master_seed, "fusion", i)),
    )

    # neutral fills from the training users' own reconstruction errors
    sem_outputs = [classify_semantic(model.semantic_vector(u), ae_risky, ae_safe)
                   for u in base_users]
    model.fill = NeutralFill(
        mean_r_s=float(np.mean([s.r_s for s in sem_outputs])),
        mean_r_r=float(np.mean([s.r_r for s in sem_outputs])),
    )

    features = np.stack([
        assemble_features(model.view_outputs(u), model.fill) for u in meta_users
    ])
    targets = np.array([[labels[u]] for u in meta_users], dtype=np.float64)
    train(model.fusion, features, targets, "bce", TrainConfig(
        epochs=cfg.mlp_epochs, batch_size=cfg.mlp_batch_size,
        learning_rate=cfg.mlp_learning_rate,
        seed=child_seed(master_seed, "fusion-train", i)))
    return model


def _restricted_view(snapshot: Snapshot, users: list[str]) -> Snapshot:
    """Snapshot restricted to the given users (stacking-holdout base)."""
    if len(users) == len(snapshot.nodes):
        return snapshot
    keep = set(users)
    return Snapshot(
        window=snapshot.window,
        nodes=[u for u in snapshot.nodes if u in keep],
        docs={u: snapshot.docs[u] for u in snapshot.nodes if u in keep},
        edges=[e for e in snapshot.edges if e[0] in keep and e[1] in keep],
        locations={u: snapshot.locations[u] for u in snapshot.nodes if u in keep},
    )


# --- full run ----------------------------------------------------------------


@dataclass
class RunResult:
    windows: list[TimeWindow]
    test_users: list[str]
    dropped: list[str]
    ledgers: dict[str, list[tuple[int, int]]]
    finals: dict[str, VoteResult]
    metrics: MetricsReport | None


def _stderr_warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def run_pipeline(dataset: Dataset, cfg, truth: dict[str, int] | None = None,
                 windows: list[TimeWindow] | None = None,
                 warn=_stderr_warn) -> RunResult:
    """Split -> materialize -> train snapshots 1..T-1 -> predict test
    users per snapshot -> vote -> (optionally) evaluate.

    Test users are the unlabeled users active in the last window;
    within-network violators are dropped from the test set with a
    warning. Snapshot training parallelizes over `cfg.jobs` workers
    without affecting results.
    """
    if windows is None:
        windows = split_windows(dataset.posts, cfg.snapshots, cfg.overlap)
    violations = validate_within_network(dataset, windows)
    for user in violations:
        warn(f"user {user} appears only in the test window; dropped from the test set")

    labels = {u: l.value for u, l in dataset.labeled().items()}
    snapshots = [materialize_snapshot(dataset, w) for w in windows]
    test_window_users = active_users(dataset, windows[-1])
    test_users = sorted(
        u for u in dataset.unlabeled_users()
        if u in test_window_users and u not in set(violations)
    )

    master = cfg.seed
    if cfg.baseline == "merged":
        merged_window = TimeWindow(index=1, start=windows[0].start, end=windows[-2].end)
        merged = materialize_snapshot(dataset, merged_window)
        models = [train_snapshot_model(merged, labels, cfg, master, warn=warn)]
    else:
        training = snapshots[:-1]
        jobs = max(1, int(getattr(cfg, "jobs", 1)))
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(
                lambda s: raw_view_embeddings(s, cfg, master, warn), training))
        rel_hist: list[EmbeddingMatrix] = []
        spat_hist: list[EmbeddingMatrix] = []
        rel_mats: list[EmbeddingMatrix | None] = []
        spat_mats: list[EmbeddingMatrix | None] = []
        for rel, spat in raw:
            if cfg.smoothing and rel is not None:
                rel_mats.append(smoothed_matrix(rel_hist, rel, cfg.smoothing_include_current))
            else:
                rel_mats.append(rel)
            if cfg.smoothing and spat is not None:
                spat_mats.append(smoothed_matrix(spat_hist, spat, cfg.smoothing_include_current))
            else:
                spat_mats.append(spat)
            if rel is not None:
                rel_hist.append(rel)
            if spat is not None:
                spat_hist.append(spat)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            models = list(pool.map(
                lambda args: train_snapshot_model(
                    args[0], labels, cfg, master,
                    rel_embedding=args[1], spat_embedding=args[2], warn=warn),
                zip(training, rel_mats, spat_mats)))

    ledgers: dict[str, list[tuple[int, int]]] = {}
    for user in test_users:
        entries = []
        for model in models:
            label = model.fused_label(user)
            if label is not None:
                entries.append((model.index, label))
        if entries:
            ledgers[user] = entries
        else:
            warn(f"user {user} absent from every training snapshot; no prediction")

    finals = {u: vote(entries, cfg.voting) for u, entries in ledgers.items()}

    metrics = None
    if truth is not None:
        predicted = {u: r.label for u, r in finals.items()}
        missing = sorted(set(predicted) - set(truth))
        if missing:
            raise DataError(f"truth labels missing for test users: {missing[:5]}")
        metrics = evaluate(predicted, {u: truth[u] for u in predicted})
    return RunResult(
        windows=windows,
        test_users=sorted(ledgers),
        dropped=violations,
        ledgers=ledgers,
        finals=finals,
        metrics=metrics,
    )
