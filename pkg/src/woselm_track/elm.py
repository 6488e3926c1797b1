"""Batch extreme learning machine.

Hidden parameters are random and frozen; only the output weights ``beta`` are
solved for. Regularisation is written as ``I / C``, so a *larger* ``C`` means a
*weaker* ridge penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

NEGATIVE = 0
POSITIVE = 1
ACTIVATIONS = ("sigmoid", "rbf")


@dataclass
class HiddenLayer:
    input_weights: np.ndarray   # (n_hidden, d)
    biases: np.ndarray          # (n_hidden,)
    activation: str = "sigmoid"

    @property
    def n_hidden(self) -> int:
        return self.input_weights.shape[0]

    @property
    def d(self) -> int:
        return self.input_weights.shape[1]


def init_hidden(seed: int, d: int, n_hidden: int, activation: str = "sigmoid") -> HiddenLayer:
    """Random hidden layer: weights ``U[-1, 1] / sqrt(d)``, biases ``U[-1, 1]``."""
    if d < 1 or n_hidden < 1:
        raise ValueError("d and n_hidden must be >= 1")
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(n_hidden, d)) / np.sqrt(d)
    b = rng.uniform(-1.0, 1.0, size=n_hidden)
    return HiddenLayer(a, b, activation)


def standardize_inputs(layer: HiddenLayer, mean, scale) -> HiddenLayer:
    """Fold an input standardisation ``(x - mean) / scale`` into the layer.

    For sigmoid layers the returned layer maps raw inputs exactly as ``layer``
    maps standardised ones, so callers keep feeding raw features. The rbf stub
    only moves its centres and rescales widths by the mean scale.
    """
    mean = np.asarray(mean, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    if np.any(scale <= 0):
        raise ValueError("scale must be positive")
    a = layer.input_weights / scale
    if layer.activation == "rbf":
        return HiddenLayer(layer.input_weights * scale + mean, layer.biases / scale.mean() ** 2,
                           layer.activation)
    return HiddenLayer(a, layer.biases - a @ mean, layer.activation)


def sigmoid(z):
    with np.errstate(over="ignore", under="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def hidden_map(layer: HiddenLayer, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != layer.d:
        raise ValueError(f"input has {X.shape[1]} columns, hidden layer expects {layer.d}")
    if layer.activation == "sigmoid":
        return sigmoid(X @ layer.input_weights.T + layer.biases)
    # rbf stub: centres a_j, widths |b_j|
    d2 = ((X[:, None, :] - layer.input_weights[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-np.abs(layer.biases) * d2)


def encode_labels(labels, m: int = 2) -> np.ndarray:
    """Signed one-hot targets: +1 in the true column, -1 elsewhere."""
    labels = np.asarray(labels, dtype=np.int64)
    T = -np.ones((labels.size, m))
    T[np.arange(labels.size), labels] = 1.0
    return T


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite input")


def _spd_solve(M, R):
    return cho_solve(cho_factor(M, lower=True), R)


def train_batch(H, T, C: float) -> np.ndarray:
    """Ridge solution ``beta = H^T (I/C + H H^T)^-1 T``.

    Uses the ``(I/C + H^T H)^-1 H^T T`` form when there are at least as many
    samples as hidden nodes; the two are algebraically identical.
    """
    H = np.asarray(H, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if C <= 0:
        raise ValueError("C must be positive")
    if H.shape[0] != T.shape[0]:
        raise ValueError("H and T row counts differ")
    _check_finite(H, T)
    n, L = H.shape
    if n >= L:
        return _spd_solve(np.eye(L) / C + H.T @ H, H.T @ T)
    return H.T @ _spd_solve(np.eye(n) / C + H @ H.T, T)


def train_batch_weighted(H, T, W, C: float) -> np.ndarray:
    """``beta = (I/C + H^T W H)^-1 H^T W T`` for a diagonal ``W`` given as a vector."""
    H = np.asarray(H, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64).ravel()
    if C <= 0:
        raise ValueError("C must be positive")
    if not (H.shape[0] == T.shape[0] == W.size):
        raise ValueError("H, T and W sizes differ")
    _check_finite(H, T, W)
    if np.any(W <= 0):
        raise ValueError("sample weights must be positive")
    HW = H.T * W
    return _spd_solve(np.eye(H.shape[1]) / C + HW @ H, HW @ T)


def predict(layer: HiddenLayer, beta, X) -> tuple[np.ndarray, np.ndarray]:
    """Scores ``h(X) beta`` and row-argmax labels (ties go to the lower index)."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != layer.n_hidden:
        raise ValueError("beta rows do not match hidden layer size")
    scores = hidden_map(layer, X) @ beta
    return scores, np.argmax(scores, axis=1)
