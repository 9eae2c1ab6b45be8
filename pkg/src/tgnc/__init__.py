"""Temporal multi-view node classification for social networks.

Splits a timestamped network into partially overlapping snapshots,
trains independent semantic/topological/spatial views per snapshot,
fuses them with a stacked meta-learner, and aggregates per-snapshot
labels through weighted temporal voting.
"""

from ._kernels import NUMBA_ENABLED
from .config import RunConfig, build_config
from .data import Dataset, Label, Post, SocialEdge, load_dataset, save_dataset
from .embedding import (
    EmbeddingMatrix,
    GraphView,
    SkipGramConfig,
    WalkConfig,
    generate_walks,
    node2vec,
    train_skipgram,
)
from .forest import ConfidentPrediction, DecisionTree, ForestConfig, RandomForest, fit_forest, fit_tree
from .neural import Autoencoder, DenseNet, TrainConfig, reconstruction_error, train
from .pipeline import (
    MetricsReport,
    RunResult,
    SnapshotModel,
    evaluate,
    run_pipeline,
    smooth_embeddings,
    train_snapshot_model,
    vote,
)
from .semantic import (
    HashedRandomVectors,
    PretrainedVectors,
    SemanticOutput,
    classify_semantic,
    embed_user,
    preprocess,
    train_semantic_view,
)
from .snapshots import Snapshot, TimeWindow, materialize_snapshot, split_windows
from .spatial import ClosenessGraph, GeoPoint, build_closeness, haversine, modal_location
from .synth import SynthSpec, write_dataset

__version__ = "0.1.0"
