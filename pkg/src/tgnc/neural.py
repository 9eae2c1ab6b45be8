"""Minimal dense neural-network core: feed-forward layers, backprop,
seeded mini-batch training. Powers the one-class autoencoders and the
fusion meta-learner; everything is float64 numpy, no GPU.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteLoss
from .seeding import child_seed

ACTIVATIONS = ("relu", "sigmoid", "identity")
LOSSES = ("mse", "bce")

_MAGIC = b"TGNN"


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    return z


def _act_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    optimizer: str = "adam"  # "sgd" | "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate < 0:
            raise ValueError("epochs and batch_size must be positive, learning_rate non-negative")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class DenseNet:
    """Fully connected net with per-layer relu/sigmoid/identity.

    Weights init seeded uniform in +-sqrt(6 / (fan_in + fan_out)),
    biases zero; the same seed reproduces bit-identical parameters.
    """

    def __init__(self, layer_sizes: list[int], activations: list[str], seed: int = 0):
        if len(layer_sizes) < 2:
            raise ValueError("need at least input and output layer sizes")
        if len(activations) != len(layer_sizes) - 1:
            raise ValueError("one activation per weight layer")
        for name in activations:
            if name not in ACTIVATIONS:
                raise ValueError(f"unknown activation {name!r}")
        self.layer_sizes = list(layer_sizes)
        self.activations = list(activations)
        self.seed = seed
        rng = np.random.default_rng(child_seed(seed, "net-init"))
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out, dtype=np.float64))

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    def _forward_full(self, X: np.ndarray):
        """All pre-activations and activations, batch-first."""
        zs, acts = [], [X]
        a = X
        for W, b, name in zip(self.weights, self.biases, self.activations):
            z = a @ W + b
            a = _act(name, z)
            zs.append(z)
            acts.append(a)
        return zs, acts

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        X = x[None, :] if single else x
        if X.shape[1] != self.input_dim:
            raise DimensionMismatch(
                f"input width {X.shape[1]} != expected {self.input_dim}")
        _, acts = self._forward_full(X)
        return acts[-1][0] if single else acts[-1]

    def loss_and_grads(self, X: np.ndarray, Y: np.ndarray, loss: str):
        """Mean loss over all elements plus gradients per parameter.

        bce requires a sigmoid output layer; its gradient is taken
        through the combined sigmoid+bce path for stability.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatch("row counts of inputs and targets differ")
        if X.shape[1] != self.input_dim or Y.shape[1] != self.output_dim:
            raise DimensionMismatch("input/target widths do not match the net")
        if loss not in LOSSES:
            raise ValueError(f"unknown loss {loss!r}")
        if loss == "bce" and self.activations[-1] != "sigmoid":
            raise ValueError("bce loss requires a sigmoid output layer")

        zs, acts = self._forward_full(X)
        out = acts[-1]
        size = out.size
        if loss == "mse":
            diff = out - Y
            loss_value = float(np.mean(diff * diff))
            delta = (2.0 * diff / size) * _act_grad(self.activations[-1], zs[-1], out)
        else:
            p = np.clip(out, 1e-12, 1.0 - 1e-12)
            loss_value = float(np.mean(-(Y * np.log(p) + (1.0 - Y) * np.log(1.0 - p))))
            delta = (out - Y) / size  # combined sigmoid+bce gradient

        grads_w = [np.empty(0)] * len(self.weights)
        grads_b = [np.empty(0)] * len(self.biases)
        for layer in range(len(self.weights) - 1, -1, -1):
            grads_w[layer] = acts[layer].T @ delta
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * _act_grad(
                    self.activations[layer - 1], zs[layer - 1], acts[layer])
        return loss_value, grads_w, grads_b

    def copy(self) -> "DenseNet":
        dup = DenseNet(self.layer_sizes, self.activations, self.seed)
        dup.weights = [W.copy() for W in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    # --- checkpointing ------------------------------------------------

    def save(self, path: str, metadata: dict | None = None) -> None:
        """JSON header (shapes, activations, seed, caller metadata such
        as the training config or fusion feature order) followed by the
        little-endian float32 parameter blob."""
        header = json.dumps({
            "layer_sizes": self.layer_sizes,
            "activations": self.activations,
            "seed": self.seed,
            "metadata": metadata or {},
        }).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            for W, b in zip(self.weights, self.biases):
                fh.write(W.astype("<f4").tobytes())
                fh.write(b.astype("<f4").tobytes())

    @classmethod
    def load(cls, path: str) -> tuple["DenseNet", dict]:
        """Inference-oriented load: parameters come back as float32
        values; returns (net, metadata)."""
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise ValueError(f"{path}: not a model checkpoint")
            (hlen,) = struct.unpack("<I", fh.read(4))
            header = json.loads(fh.read(hlen).decode("utf-8"))
            net = cls(header["layer_sizes"], header["activations"], header["seed"])
            for i, (fan_in, fan_out) in enumerate(zip(net.layer_sizes[:-1], net.layer_sizes[1:])):
                W = np.frombuffer(fh.read(4 * fan_in * fan_out), dtype="<f4")
                net.weights[i] = W.reshape(fan_in, fan_out).astype(np.float64)
                b = np.frombuffer(fh.read(4 * fan_out), dtype="<f4")
                net.biases[i] = b.astype(np.float64)
        return net, header.get("metadata", {})


def train(net: DenseNet, inputs: np.ndarray, targets: np.ndarray,
          loss: str, cfg: TrainConfig) -> list[float]:
    """Seeded mini-batch training in place; returns the per-epoch mean
    loss trace. Aborts with NonFiniteLoss on any non-finite batch loss
    rather than clamping.
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch("row counts of inputs and targets differ")
    n = X.shape[0]
    rng = np.random.default_rng(child_seed(cfg.seed, "batch-shuffle"))
    use_adam = cfg.optimizer == "adam"
    if use_adam:
        m_w = [np.zeros_like(W) for W in net.weights]
        v_w = [np.zeros_like(W) for W in net.weights]
        m_b = [np.zeros_like(b) for b in net.biases]
        v_b = [np.zeros_like(b) for b in net.biases]
        t = 0
    trace: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, cfg.batch_size):
            batch = order[lo:lo + cfg.batch_size]
            loss_value, grads_w, grads_b = net.loss_and_grads(X[batch], Y[batch], loss)
            if not np.isfinite(loss_value):
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}, batch offset {lo}: {loss_value}")
            epoch_loss += loss_value * len(batch)
            if use_adam:
                t += 1
                corr1 = 1.0 - cfg.beta1 ** t
                corr2 = 1.0 - cfg.beta2 ** t
                for i in range(len(net.weights)):
                    m_w[i] = cfg.beta1 * m_w[i] + (1 - cfg.beta1) * grads_w[i]
                    v_w[i] = cfg.beta2 * v_w[i] + (1 - cfg.beta2) * grads_w[i] ** 2
                    net.weights[i] -= cfg.learning_rate * (m_w[i] / corr1) / (np.sqrt(v_w[i] / corr2) + cfg.eps)
                    m_b[i] = cfg.beta1 * m_b[i] + (1 - cfg.beta1) * grads_b[i]
                    v_b[i] = cfg.beta2 * v_b[i] + (1 - cfg.beta2) * grads_b[i] ** 2
                    net.biases[i] -= cfg.learning_rate * (m_b[i] / corr1) / (np.sqrt(v_b[i] / corr2) + cfg.eps)
            else:
                for i in range(len(net.weights)):
                    net.weights[i] -= cfg.learning_rate * grads_w[i]
                    net.biases[i] -= cfg.learning_rate * grads_b[i]
        trace.append(epoch_loss / n)
    return trace


class Autoencoder:
    """Symmetric bottleneck net scoring inputs by reconstruction error."""

    def __init__(self, input_dim: int = 300, hidden: int = 64, seed: int = 0):
        if hidden >= input_dim:
            raise ValueError("bottleneck must be strictly smaller than the input")
        self.net = DenseNet([input_dim, hidden, input_dim],
                            ["relu", "identity"], seed=seed)

    @property
    def input_dim(self) -> int:
        return self.net.input_dim

    def fit(self, X: np.ndarray, cfg: TrainConfig) -> list[float]:
        return train(self.net, X, X, "mse", cfg)


def reconstruction_error(ae: Autoencoder, x: np.ndarray) -> float:
    """Mean over components of the squared reconstruction difference."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != ae.input_dim:
        raise DimensionMismatch(
            f"expected a vector of length {ae.input_dim}, got shape {x.shape}")
    diff = ae.net.forward(x) - x
    return float(np.mean(diff * diff))
