"""Fusion models: unify per-type edge vectors into a link probability.

Two heads over the same per-type feature bundle:

* LogRegModel - logistic regression on the concatenation of all per-type
  edge vectors (a linear combination of their dimensions).
* MultiTowerNet - one ReLU tower per edge type (edge vector -> hidden),
  concatenation, a ReLU fusion layer producing the unified edge embedding,
  and a sigmoid output head.

Both train by minibatch SGD on binary cross-entropy; logits are clamped to
+-30 before the sigmoid so probabilities stay inside (0, 1). Training is
single-threaded and deterministic given the seed; inference is pure.
"""

import copy
from dataclasses import dataclass

import numpy as np

from .edgeops import HeteroEdgeFeatures
from .evaluation import auc
from .mathutil import LOGIT_CLAMP, sigmoid, softplus

MODEL_MAGIC = "HETEDGE-MODEL v1"


class FusionDivergenceError(RuntimeError):
    """Raised when a training loss becomes non-finite."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 256
    epochs: int = 10
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _as_matrices(features):
    if isinstance(features, HeteroEdgeFeatures):
        return [np.asarray(v, dtype=np.float64).reshape(1, -1) for v in features.vectors]
    return [np.asarray(m, dtype=np.float64) for m in features]


def _bce(z, y):
    """Mean binary cross-entropy at clamped logits z."""
    return float(np.mean(y * softplus(-z) + (1.0 - y) * softplus(z)))


def _check_labels(y):
    y = np.asarray(y, dtype=np.float64)
    classes = np.unique(y)
    if not np.all(np.isin(classes, (0.0, 1.0))):
        raise ValueError("labels must be binary (0/1)")
    if len(classes) < 2:
        raise ValueError("training labels contain a single class; AUC downstream "
                         "would be undefined")
    return y


# -- logistic regression ---------------------------------------------------------

class LogRegModel:
    """Linear weights over the concatenated per-type edge vectors, plus bias."""

    def __init__(self, weights, bias=0.0):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)

    def logits(self, features):
        x = np.hstack(_as_matrices(features))
        if x.shape[1] != self.weights.shape[0]:
            raise ValueError(f"feature width {x.shape[1]} does not match "
                             f"weight length {self.weights.shape[0]}")
        return x @ self.weights + self.bias

    def predict_proba(self, features):
        return sigmoid(self.logits(features))

    def loss_and_grads(self, x, y):
        z = x @ self.weights + self.bias
        loss = _bce(z, y)
        p = sigmoid(z)
        dz = (p - y) * (np.abs(z) < LOGIT_CLAMP) / len(y)
        return loss, (x.T @ dz, float(dz.sum()))


def train_logreg(features, labels, cfg: TrainConfig):
    """Minibatch-SGD logistic regression on the concatenated edge vectors."""
    y = _check_labels(labels)
    x = np.hstack(_as_matrices(features))
    model = LogRegModel(np.zeros(x.shape[1]), 0.0)
    rng = np.random.default_rng(cfg.seed)
    n = len(y)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo:lo + cfg.batch_size]
            loss, (gw, gb) = model.loss_and_grads(x[idx], y[idx])
            if not np.isfinite(loss):
                raise FusionDivergenceError(f"logreg loss non-finite at epoch {epoch}")
            model.weights -= cfg.learning_rate * gw
            model.bias -= cfg.learning_rate * gb
        if not (np.isfinite(model.weights).all() and np.isfinite(model.bias)):
            raise FusionDivergenceError(
                f"logreg weights non-finite after epoch {epoch}; lower the learning rate")
    return model


# -- multi-tower network ---------------------------------------------------------

def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class MultiTowerNet:
    """One dense+ReLU tower per edge type, ReLU fusion layer, sigmoid head.

    The fusion activation is the unified edge embedding (length `embed`,
    256 by default).
    """

    def __init__(self, d_edge, n_types, hidden=256, embed=256, seed=0):
        rng = np.random.default_rng(seed)
        self.d_edge = d_edge
        self.n_types = n_types
        self.hidden = hidden
        self.embed = embed
        self.tower_w = [_glorot(rng, d_edge, hidden) for _ in range(n_types)]
        self.tower_b = [np.zeros(hidden) for _ in range(n_types)]
        self.fusion_w = _glorot(rng, n_types * hidden, embed)
        self.fusion_b = np.zeros(embed)
        self.out_w = _glorot(rng, embed, 1).ravel()
        self.out_b = 0.0

    def _check_shapes(self, mats):
        if len(mats) != self.n_types:
            raise ValueError(f"expected {self.n_types} feature blocks, got {len(mats)}")
        for i, m in enumerate(mats):
            if m.shape[1] != self.d_edge:
                raise ValueError(f"tower {i} expects width {self.d_edge}, got {m.shape[1]}")

    def _forward(self, mats):
        tower_pre = [m @ w + b for m, w, b in zip(mats, self.tower_w, self.tower_b)]
        tower_act = [np.maximum(p, 0.0) for p in tower_pre]
        h = np.hstack(tower_act)
        fusion_pre = h @ self.fusion_w + self.fusion_b
        embedding = np.maximum(fusion_pre, 0.0)
        z = embedding @ self.out_w + self.out_b
        return tower_pre, h, fusion_pre, embedding, z

    def forward_batch(self, features):
        """(probabilities, unified embeddings) for a batch of feature blocks."""
        mats = _as_matrices(features)
        self._check_shapes(mats)
        _, _, _, embedding, z = self._forward(mats)
        return sigmoid(z), embedding

    def predict_proba(self, features):
        return self.forward_batch(features)[0]

    def loss_and_grads(self, mats, y):
        """Mean BCE and its gradients for every parameter, via backprop."""
        self._check_shapes(mats)
        tower_pre, h, fusion_pre, embedding, z = self._forward(mats)
        loss = _bce(z, y)
        p = sigmoid(z)
        dz = (p - y) * (np.abs(z) < LOGIT_CLAMP) / len(y)

        g_out_w = embedding.T @ dz
        g_out_b = float(dz.sum())
        d_emb = np.outer(dz, self.out_w) * (fusion_pre > 0)
        g_fusion_w = h.T @ d_emb
        g_fusion_b = d_emb.sum(axis=0)
        dh = d_emb @ self.fusion_w.T
        g_tower_w, g_tower_b = [], []
        for i, m in enumerate(mats):
            dt = dh[:, i * self.hidden:(i + 1) * self.hidden] * (tower_pre[i] > 0)
            g_tower_w.append(m.T @ dt)
            g_tower_b.append(dt.sum(axis=0))
        grads = {"tower_w": g_tower_w, "tower_b": g_tower_b,
                 "fusion_w": g_fusion_w, "fusion_b": g_fusion_b,
                 "out_w": g_out_w, "out_b": g_out_b}
        return loss, grads

    def apply_gradients(self, grads, lr):
        for w, g in zip(self.tower_w, grads["tower_w"]):
            w -= lr * g
        for b, g in zip(self.tower_b, grads["tower_b"]):
            b -= lr * g
        self.fusion_w -= lr * grads["fusion_w"]
        self.fusion_b -= lr * grads["fusion_b"]
        self.out_w -= lr * grads["out_w"]
        self.out_b -= lr * grads["out_b"]

    def parameters(self):
        """Named parameter arrays (live references)."""
        out = {}
        for i in range(self.n_types):
            out[f"tower_w:{i}"] = self.tower_w[i]
            out[f"tower_b:{i}"] = self.tower_b[i]
        out["fusion_w"] = self.fusion_w
        out["fusion_b"] = self.fusion_b
        out["out_w"] = self.out_w
        return out

    def snapshot(self):
        return copy.deepcopy({"tower_w": self.tower_w, "tower_b": self.tower_b,
                              "fusion_w": self.fusion_w, "fusion_b": self.fusion_b,
                              "out_w": self.out_w, "out_b": self.out_b})

    def restore(self, snap):
        self.tower_w = copy.deepcopy(snap["tower_w"])
        self.tower_b = copy.deepcopy(snap["tower_b"])
        self.fusion_w = snap["fusion_w"].copy()
        self.fusion_b = snap["fusion_b"].copy()
        self.out_w = snap["out_w"].copy()
        self.out_b = snap["out_b"]


def forward_mtn(net: MultiTowerNet, features: HeteroEdgeFeatures):
    """(link probability, unified edge embedding) for one node pair."""
    probs, emb = net.forward_batch(features)
    return float(probs[0]), emb[0]


def train_mtn(features, labels, cfg: TrainConfig, hidden=256, embed=256):
    """Train a MultiTowerNet; returns the best-validation-AUC epoch's parameters.

    With val_fraction=0 (or a degenerate single-class validation split) the
    final epoch's parameters are returned. Training history is attached as
    `net.history`: one (train_loss, val_auc) per epoch.
    """
    y = _check_labels(labels)
    mats = _as_matrices(features)
    n = len(y)
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    n_val = int(round(cfg.val_fraction * n))
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    if n_val and len(np.unique(y[val_idx])) < 2:
        val_idx = val_idx[:0]
    net = MultiTowerNet(mats[0].shape[1], len(mats), hidden=hidden, embed=embed,
                        seed=cfg.seed)
    best = (-np.inf, None)
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_idx))
        epoch_loss = 0.0
        batches = 0
        for lo in range(0, len(train_idx), cfg.batch_size):
            idx = train_idx[order[lo:lo + cfg.batch_size]]
            batch = [m[idx] for m in mats]
            loss, grads = net.loss_and_grads(batch, y[idx])
            if not np.isfinite(loss):
                raise FusionDivergenceError(f"multi-tower loss non-finite at epoch {epoch}")
            net.apply_gradients(grads, cfg.learning_rate)
            epoch_loss += loss
            batches += 1
        if not all(np.isfinite(p).all() for p in net.parameters().values()):
            raise FusionDivergenceError(
                f"multi-tower parameters non-finite after epoch {epoch}; "
                "lower the learning rate")
        val_auc = None
        if len(val_idx):
            scores = net.predict_proba([m[val_idx] for m in mats])
            val_auc = auc(scores, y[val_idx].astype(int))
            if val_auc > best[0]:
                best = (val_auc, net.snapshot())
        history.append((epoch_loss / max(batches, 1), val_auc))
    if best[1] is not None:
        net.restore(best[1])
    net.history = history
    return net


def predict(model, features):
    """Link probability from either model kind; scalar for a single pair."""
    probs = model.predict_proba(features)
    if isinstance(features, HeteroEdgeFeatures):
        return float(probs[0])
    return probs


# -- model files ------------------------------------------------------------------

def _write_matrix(f, name, mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    f.write(f"param {name} {mat.shape[0]} {mat.shape[1]}\n")
    for row in mat:
        f.write(" ".join(repr(float(x)) for x in row) + "\n")


def _read_matrix(f, expected_name):
    head = f.readline().split()
    if len(head) != 4 or head[0] != "param" or head[1] != expected_name:
        raise ValueError(f"model file: expected 'param {expected_name} r c', got {head}")
    rows, cols = int(head[2]), int(head[3])
    mat = np.empty((rows, cols))
    for i in range(rows):
        mat[i] = [float(x) for x in f.readline().split()]
    return mat


def save_model(model, path, types, combiner):
    """Versioned text container recording architecture then parameters."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(MODEL_MAGIC + "\n")
        f.write(f"types {' '.join(types)}\n")
        f.write(f"combiner {combiner}\n")
        if isinstance(model, LogRegModel):
            f.write("kind logreg\n")
            _write_matrix(f, "weights", model.weights)
            _write_matrix(f, "bias", np.array([[model.bias]]))
        else:
            f.write("kind mtn\n")
            f.write(f"arch {model.d_edge} {model.n_types} {model.hidden} {model.embed}\n")
            for i in range(model.n_types):
                _write_matrix(f, f"tower_w:{i}", model.tower_w[i])
                _write_matrix(f, f"tower_b:{i}", model.tower_b[i])
            _write_matrix(f, "fusion_w", model.fusion_w)
            _write_matrix(f, "fusion_b", model.fusion_b)
            _write_matrix(f, "out_w", model.out_w)
            _write_matrix(f, "out_b", np.array([[model.out_b]]))


def load_model(path):
    """Returns (model, meta) where meta records types and combiner."""
    with open(path, encoding="utf-8") as f:
        if f.readline().strip() != MODEL_MAGIC:
            raise ValueError(f"bad model header in {path}: expected {MODEL_MAGIC!r}")
        types = tuple(f.readline().split()[1:])
        combiner = f.readline().split()[1]
        kind = f.readline().split()[1]
        meta = {"types": types, "combiner": combiner, "kind": kind}
        if kind == "logreg":
            w = _read_matrix(f, "weights").ravel()
            b = float(_read_matrix(f, "bias")[0, 0])
            return LogRegModel(w, b), meta
        d_edge, n_types, hidden, embed = map(int, f.readline().split()[1:])
        net = MultiTowerNet(d_edge, n_types, hidden=hidden, embed=embed)
        for i in range(n_types):
            net.tower_w[i] = _read_matrix(f, f"tower_w:{i}")
            net.tower_b[i] = _read_matrix(f, f"tower_b:{i}").ravel()
        net.fusion_w = _read_matrix(f, "fusion_w")
        net.fusion_b = _read_matrix(f, "fusion_b").ravel()
        net.out_w = _read_matrix(f, "out_w").ravel()
        net.out_b = float(_read_matrix(f, "out_b")[0, 0])
        return net, meta
