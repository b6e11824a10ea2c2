"""A small dense network, trained online to imitate the evader's escape policy.

The network maps the stacked evader-to-pursuer relative positions to a planar
direction vector; the estimated evasion heading is the atan2 of that output.
Training is plain full-window gradient descent on the mean squared residual,
re-run in batches over a sliding window of observations gathered during the
pursuit. Learning the policy as a direction vector rather than an angle avoids
wrap-around discontinuities in the regression targets.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, TrainingError

# Backtracking halvings allowed per gradient step before giving up on descent.
MAX_HALVINGS = 40


@dataclass
class TrainingConfig:
    eta: float = 0.01  # learning rate
    epochs_per_update: int = 50  # full-window gradient steps per retraining call
    seed: int = 0  # weight initialization seed
    window: float = 5.0  # observation window T_l [s]
    sample_interval: float = 0.1  # spacing of buffered observations [s]
    retrain_interval: float = 0.5  # sim time between retraining calls [s]
    hidden_sizes: tuple = (16, 16, 16)  # three hidden layers by default

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.epochs_per_update < 1:
            raise ConfigError("epochs_per_update must be >= 1")
        for name in ("window", "sample_interval", "retrain_interval"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if any(h < 1 for h in self.hidden_sizes):
            raise ConfigError("hidden layer sizes must be >= 1")

    @property
    def buffer_capacity(self) -> int:
        return max(1, int(round(self.window / self.sample_interval)))


@dataclass
class MlpNetwork:
    """Feed-forward network with tanh hidden layers and a linear output.

    Each weight matrix has shape (n_in + 1, n_out); the extra final row is the
    bias, applied to an input vector augmented with a trailing 1.
    """

    layer_sizes: list[int]
    weights: list[np.ndarray]

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ConfigError("need at least input and output layers")
        if len(self.weights) != len(self.layer_sizes) - 1:
            raise ConfigError("weight count must be layer count - 1")
        for i, w in enumerate(self.weights):
            expect = (self.layer_sizes[i] + 1, self.layer_sizes[i + 1])
            if w.shape != expect:
                raise ConfigError(
                    f"layer {i} weights have shape {w.shape}, expected {expect}"
                )
            if not np.all(np.isfinite(w)):
                raise ConfigError(f"layer {i} weights contain non-finite values")

    def copy_weights(self) -> list[np.ndarray]:
        return [w.copy() for w in self.weights]


def init_network(layer_sizes: Sequence[int], seed: int = 0) -> MlpNetwork:
    """Create a network with weights uniform in +/- 1/sqrt(fan_in), seeded."""
    sizes = [int(s) for s in layer_sizes]
    rng = np.random.default_rng(seed)
    weights = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_in + 1, n_out)))
    return MlpNetwork(layer_sizes=sizes, weights=weights)


def _forward_batch(net: MlpNetwork, x: np.ndarray) -> list[np.ndarray]:
    """Return the list of layer activations, input first, output last."""
    acts = [x]
    last = len(net.weights) - 1
    for i, w in enumerate(net.weights):
        aug = np.concatenate([acts[-1], np.ones((acts[-1].shape[0], 1))], axis=1)
        z = aug @ w
        acts.append(z if i == last else np.tanh(z))
    return acts


def mlp_forward(net: MlpNetwork, chi: np.ndarray) -> np.ndarray:
    """Evaluate the network on a single input vector."""
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (net.layer_sizes[0],):
        raise ConfigError(
            f"input has shape {chi.shape}, network expects ({net.layer_sizes[0]},)"
        )
    return _forward_batch(net, chi[None, :])[-1][0]


def window_loss(net: MlpNetwork, x: np.ndarray, y: np.ndarray) -> float:
    """Mean over samples of the squared residual norm."""
    out = _forward_batch(net, x)[-1]
    r = out - y
    return float(np.mean(np.einsum("ij,ij->i", r, r)))


def loss_and_gradients(
    net: MlpNetwork, x: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Backpropagate the mean squared residual over a batch.

    Returns the loss and one gradient array per weight matrix.
    """
    acts = _forward_batch(net, x)
    out = acts[-1]
    r = out - y
    loss = float(np.mean(np.einsum("ij,ij->i", r, r)))
    n = x.shape[0]
    grads: list[np.ndarray] = [np.empty(0)] * len(net.weights)
    delta = 2.0 * r / n
    for i in range(len(net.weights) - 1, -1, -1):
        a_prev = acts[i]
        aug = np.concatenate([a_prev, np.ones((n, 1))], axis=1)
        grads[i] = aug.T @ delta
        if i > 0:
            # tanh'(z) = 1 - tanh(z)^2, and acts[i] already holds tanh(z).
            delta = (delta @ net.weights[i][:-1].T) * (1.0 - a_prev * a_prev)
    return loss, grads


@dataclass
class TrainingBuffer:
    """FIFO window of (relative positions, unit velocity direction) samples."""

    capacity: int
    entries: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.capacity < 1:
            raise ConfigError(f"capacity must be >= 1, got {self.capacity}")

    def __len__(self) -> int:
        return len(self.entries)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.array([e[0] for e in self.entries])
        y = np.array([e[1] for e in self.entries])
        return x, y


def ingest_observation(
    buffer: TrainingBuffer, chi: np.ndarray, observed_velocity: np.ndarray
) -> bool:
    """Append one observation, normalizing the velocity to a unit direction.

    Zero-velocity samples carry no direction information and are skipped.
    Returns True if the sample was stored.
    """
    vel = np.asarray(observed_velocity, dtype=float)
    norm = float(np.hypot(vel[0], vel[1]))
    if norm == 0.0:
        return False
    chi = np.asarray(chi, dtype=float).copy()
    buffer.entries.append((chi, vel / norm))
    while len(buffer.entries) > buffer.capacity:
        buffer.entries.popleft()
    return True


def backprop_update(net: MlpNetwork, buffer: TrainingBuffer, cfg: TrainingConfig) -> float:
    """Run full-window gradient descent on the buffered samples.

    Performs ``epochs_per_update`` steps of w <- w - eta * d(mean r^T r)/dw.
    If a step raises the windowed loss, the step size is halved and the step
    retried from the pre-step weights, so the loss never increases. Returns
    the post-update loss.

    Raises:
        TrainingError: if the loss turns non-finite; the network is restored
            to its pre-call weights first so the caller can carry on.
    """
    if len(buffer) == 0:
        raise ConfigError("training buffer is empty")
    x, y = buffer.as_arrays()
    checkpoint = net.copy_weights()
    loss = window_loss(net, x, y)
    if not math.isfinite(loss):
        net.weights = checkpoint
        raise TrainingError(f"non-finite loss {loss} before update")
    for _ in range(cfg.epochs_per_update):
        prev_loss, grads = loss_and_gradients(net, x, y)
        base = net.copy_weights()
        step = cfg.eta
        accepted = False
        for _ in range(MAX_HALVINGS):
            net.weights = [w - step * g for w, g in zip(base, grads)]
            loss = window_loss(net, x, y)
            if not math.isfinite(loss):
                net.weights = checkpoint
                raise TrainingError(f"non-finite loss {loss} during update")
            if loss <= prev_loss:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # No descent at any tried step size; keep the pre-step weights.
            net.weights = base
            loss = prev_loss
            break
    return loss


def predict_evader_heading(net: MlpNetwork, chi: np.ndarray, fallback: float) -> float:
    """Estimated evasion heading from the network output direction.

    Outputs with negligible magnitude carry no direction; the caller's
    previous estimate is returned instead.
    """
    out = mlp_forward(net, chi)
    if float(np.hypot(out[0], out[1])) < 1e-8:
        return fallback
    return math.atan2(out[1], out[0])


def save_weights(net: MlpNetwork, path) -> None:
    """Write layer sizes and row-major weights to a plain-text file."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(" ".join(str(s) for s in net.layer_sizes) + "\n")
        for w in net.weights:
            for value in w.ravel(order="C"):
                fh.write(repr(float(value)) + "\n")


def load_weights(path) -> MlpNetwork:
    """Rebuild a network from a file written by save_weights."""
    with open(path, "r", encoding="ascii") as fh:
        sizes = [int(tok) for tok in fh.readline().split()]
        values = [float(line) for line in fh if line.strip()]
    weights = []
    offset = 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        count = (n_in + 1) * n_out
        block = np.array(values[offset : offset + count]).reshape(n_in + 1, n_out)
        weights.append(block)
        offset += count
    if offset != len(values):
        raise ConfigError(f"weight file has {len(values)} values, expected {offset}")
    return MlpNetwork(layer_sizes=sizes, weights=weights)
