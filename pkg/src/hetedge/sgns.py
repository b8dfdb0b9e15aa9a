"""Skip-gram with negative sampling over walk corpora.

One embedding table is trained per homogeneous subgraph. For every
center-context pair within the window the trainer takes one SGD step on

    -log sigmoid(u_c . v_o) - sum_k log sigmoid(-u_c . v_nk)

with negatives drawn from a count^0.75 noise distribution (alias-table
sampling). Context rows are updated immediately with the pre-step center
vector; the center row accumulates its gradient over the positive and all
negatives and is updated once per pair. A drawn negative equal to the
positive context is skipped rather than resampled.

The inner loop is numba-compiled. threads=1 is bitwise deterministic;
threads>1 trains chunks of walks concurrently with unsynchronized row
updates (last write wins) and is not reproducible run to run.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import config as _numba_config
from numba import njit, prange

from .mathutil import LOGIT_CLAMP, sigmoid, softplus
from .walks import WalkCorpus

_numba_config.THREADING_LAYER = "workqueue"

NOISE_POWER = 0.75
LOSS_BLOCKS = 10
EMBEDDING_MAGIC = "hetedge-embedding v1"


class SgnsDivergenceError(RuntimeError):
    """Raised when training produces non-finite parameters."""


@dataclass
class SgnsConfig:
    dim: int = 128
    window: int = 10
    negatives: int = 5
    learning_rate: float = 0.01
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1:
            raise ValueError("dim, window and negatives must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class EmbeddingTable:
    """Node vectors for one edge type: published input matrix + context matrix.

    `active` marks rows that took part in training (nodes with at least one
    walk co-occurrence); None means all rows are usable. `block_losses` is
    the per-epoch mean pair loss over LOSS_BLOCKS consecutive corpus blocks.
    """

    vectors: np.ndarray
    context: np.ndarray | None = None
    edge_type: str = ""
    active: np.ndarray | None = None
    block_losses: np.ndarray | None = None

    @property
    def num_nodes(self):
        return self.vectors.shape[0]

    @property
    def dim(self):
        return self.vectors.shape[1]


# -- noise distribution ------------------------------------------------------

def _build_alias(probs):
    """Vose alias table; probs must sum to 1."""
    m = len(probs)
    prob = np.zeros(m)
    alias = np.zeros(m, dtype=np.int64)
    scaled = probs * m
    small = [i for i in range(m) if scaled[i] < 1.0]
    large = [i for i in range(m) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        (small if scaled[l] < 1.0 else large).append(l)
    for i in large + small:
        prob[i] = 1.0
    return prob, alias


@dataclass
class NoiseDistribution:
    """count^0.75 unigram distribution with O(1) alias sampling."""

    node_ids: np.ndarray
    probs: np.ndarray
    alias_prob: np.ndarray = field(repr=False, default=None)
    alias_idx: np.ndarray = field(repr=False, default=None)

    def probability(self, node):
        i = np.searchsorted(self.node_ids, node)
        if i < len(self.node_ids) and self.node_ids[i] == node:
            return float(self.probs[i])
        return 0.0

    def sample(self, count, seed=0):
        """count draws through the same sampler the trainer uses."""
        out = np.empty(count, dtype=np.int64)
        _sample_kernel(self.alias_prob, self.alias_idx, self.node_ids,
                       np.uint64(_seed_state(seed, 0)), out)
        return out


def build_noise_distribution(corpus: WalkCorpus):
    if not corpus.walks:
        raise ValueError("cannot build a noise distribution from an empty corpus")
    counts = np.zeros(corpus.num_nodes, dtype=np.int64)
    for walk in corpus.walks:
        np.add.at(counts, walk, 1)
    ids = np.flatnonzero(counts)
    weights = counts[ids].astype(np.float64) ** NOISE_POWER
    probs = weights / weights.sum()
    alias_prob, alias_idx = _build_alias(probs)
    return NoiseDistribution(node_ids=ids, probs=probs,
                             alias_prob=alias_prob, alias_idx=alias_idx)


# -- pair loss (reference form, used by gradient checks) ---------------------

def pair_loss(center_vec, context_vec, negative_vecs):
    """Loss of one center-context pair with explicit negatives."""
    loss = softplus(-np.dot(center_vec, context_vec))
    for nv in negative_vecs:
        loss += softplus(np.dot(center_vec, nv))
    return float(loss)


def pair_gradients(center_vec, context_vec, negative_vecs):
    """Analytic gradients of pair_loss: (g_center, g_context, [g_negative...])."""
    s = sigmoid(np.dot(center_vec, context_vec))
    g_center = (s - 1.0) * context_vec
    g_context = (s - 1.0) * center_vec
    g_negs = []
    for nv in negative_vecs:
        sn = sigmoid(np.dot(center_vec, nv))
        g_center = g_center + sn * nv
        g_negs.append(sn * center_vec)
    return g_center, g_context, g_negs


# -- numba kernels ------------------------------------------------------------

@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _seed_state(seed, stream):
    s = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15)
    s = s ^ (np.uint64(stream) * np.uint64(0xD1B54A32D192ED03))
    return _mix64(s ^ np.uint64(0x2545F4914F6CDD1D))


@njit(cache=True, inline="always")
def _next_unit(state):
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = _mix64(state)
    return state, (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _draw_noise(state, prob, alias, ids):
    state, r1 = _next_unit(state)
    state, r2 = _next_unit(state)
    j = int(r1 * prob.shape[0])
    if j >= prob.shape[0]:
        j = prob.shape[0] - 1
    if r2 >= prob[j]:
        j = alias[j]
    return state, ids[j]


@njit(cache=True)
def _sample_kernel(prob, alias, ids, state, out):
    for i in range(out.shape[0]):
        state, out[i] = _draw_noise(state, prob, alias, ids)


@njit(cache=True, inline="always")
def _sig(x):
    if x > 30.0:
        x = 30.0
    elif x < -30.0:
        x = -30.0
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True, inline="always")
def _softplus(x):
    if x > 30.0:
        x = 30.0
    elif x < -30.0:
        x = -30.0
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(cache=True)
def _train_walk(tokens, lo, hi, syn0, syn1, window, k_neg, lr,
                prob, alias, ids, state, grad):
    """All pair updates of one walk; returns (state, loss_sum, pair_count)."""
    d = syn0.shape[1]
    loss_sum = 0.0
    pairs = 0
    for i in range(lo, hi):
        c = tokens[i]
        jlo = i - window
        if jlo < lo:
            jlo = lo
        jhi = i + window
        if jhi > hi - 1:
            jhi = hi - 1
        for j in range(jlo, jhi + 1):
            if j == i:
                continue
            o = tokens[j]
            x = 0.0
            for t in range(d):
                x += syn0[c, t] * syn1[o, t]
            s = _sig(x)
            loss = _softplus(-x)
            g = s - 1.0
            for t in range(d):
                grad[t] = g * syn1[o, t]
            for t in range(d):
                syn1[o, t] -= lr * g * syn0[c, t]
            for k in range(k_neg):
                state, n = _draw_noise(state, prob, alias, ids)
                if n == o:
                    continue
                xn = 0.0
                for t in range(d):
                    xn += syn0[c, t] * syn1[n, t]
                sn = _sig(xn)
                loss += _softplus(xn)
                for t in range(d):
                    grad[t] += sn * syn1[n, t]
                for t in range(d):
                    syn1[n, t] -= lr * sn * syn0[c, t]
            for t in range(d):
                syn0[c, t] -= lr * grad[t]
            loss_sum += loss
            pairs += 1
    return state, loss_sum, pairs


@njit(cache=True)
def _epoch_sequential(tokens, offsets, syn0, syn1, window, k_neg, lr,
                      prob, alias, ids, state, block_loss, block_pairs):
    nwalks = offsets.shape[0] - 1
    nblocks = block_loss.shape[0]
    grad = np.empty(syn0.shape[1])
    for w in range(nwalks):
        state, wloss, wpairs = _train_walk(
            tokens, offsets[w], offsets[w + 1], syn0, syn1, window, k_neg,
            lr, prob, alias, ids, state, grad)
        b = w * nblocks // nwalks
        block_loss[b] += wloss
        block_pairs[b] += wpairs
    return state


@njit(cache=True, parallel=True)
def _epoch_parallel(tokens, offsets, syn0, syn1, window, k_neg, lr,
                    prob, alias, ids, chunk_bounds, states):
    for ci in prange(chunk_bounds.shape[0] - 1):
        state = states[ci]
        grad = np.empty(syn0.shape[1])
        for w in range(chunk_bounds[ci], chunk_bounds[ci + 1]):
            state, _, _ = _train_walk(
                tokens, offsets[w], offsets[w + 1], syn0, syn1, window,
                k_neg, lr, prob, alias, ids, state, grad)


# -- training -----------------------------------------------------------------

def train_sgns(corpus: WalkCorpus, cfg: SgnsConfig, threads=1, edge_type=""):
    """Train an embedding table from a walk corpus.

    Input rows start uniform in [-0.5/dim, 0.5/dim]; context rows start at
    zero. Walks are visited in corpus order each epoch (no shuffling), with
    a constant learning rate.
    """
    if not corpus.walks:
        raise ValueError("cannot train on an empty corpus")
    n = corpus.num_nodes
    tokens = np.concatenate(corpus.walks).astype(np.int64)
    if tokens.min() < 0 or tokens.max() >= n:
        raise ValueError("corpus references node ids outside the graph node space")
    offsets = np.zeros(len(corpus.walks) + 1, dtype=np.int64)
    np.cumsum([len(w) for w in corpus.walks], out=offsets[1:])

    rng = np.random.default_rng(cfg.seed)
    syn0 = (rng.random((n, cfg.dim)) - 0.5) / cfg.dim
    syn1 = np.zeros((n, cfg.dim))

    noise = build_noise_distribution(corpus)
    block_losses = np.zeros((cfg.epochs, LOSS_BLOCKS))
    for epoch in range(cfg.epochs):
        if threads <= 1:
            block_loss = np.zeros(LOSS_BLOCKS)
            block_pairs = np.zeros(LOSS_BLOCKS, dtype=np.int64)
            _epoch_sequential(tokens, offsets, syn0, syn1, cfg.window,
                              cfg.negatives, cfg.learning_rate,
                              noise.alias_prob, noise.alias_idx, noise.node_ids,
                              np.uint64(_seed_state(cfg.seed, epoch)),
                              block_loss, block_pairs)
            with np.errstate(invalid="ignore"):
                block_losses[epoch] = np.where(block_pairs > 0,
                                               block_loss / np.maximum(block_pairs, 1),
                                               np.nan)
        else:
            nwalks = len(corpus.walks)
            bounds = np.linspace(0, nwalks, threads + 1).astype(np.int64)
            states = np.array([_seed_state(cfg.seed, epoch * 8192 + ci + 1)
                               for ci in range(threads)], dtype=np.uint64)
            _epoch_parallel(tokens, offsets, syn0, syn1, cfg.window,
                            cfg.negatives, cfg.learning_rate,
                            noise.alias_prob, noise.alias_idx, noise.node_ids,
                            bounds, states)
            block_losses[epoch] = np.nan
        if not (np.isfinite(syn0).all() and np.isfinite(syn1).all()):
            raise SgnsDivergenceError(
                f"non-finite parameters after epoch {epoch}; lower the learning rate")

    active = np.zeros(n, dtype=bool)
    for walk in corpus.walks:
        if len(walk) >= 2:
            active[walk] = True
    return EmbeddingTable(vectors=syn0, context=syn1, edge_type=edge_type,
                          active=active, block_losses=block_losses)


# -- similarity / files --------------------------------------------------------

def cosine(table: EmbeddingTable, a, b):
    """Cosine similarity of rows a, b; zero rows compare as 0 with a warning."""
    u, v = table.vectors[a], table.vectors[b]
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        warnings.warn(f"cosine of zero vector (nodes {a}, {b}) defined as 0.0")
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def save_embedding(table: EmbeddingTable, labels, path):
    """Word-vector text format: 'N d' header then 'label v1 .. vd' per node."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{table.num_nodes} {table.dim}\n")
        for i in range(table.num_nodes):
            row = " ".join(repr(float(x)) for x in table.vectors[i])
            f.write(f"{labels[i]} {row}\n")


def load_embedding(path):
    """Returns (labels, matrix) from the text format written by save_embedding."""
    with open(path, encoding="utf-8") as f:
        first = f.readline().split()
        if len(first) != 2:
            raise ValueError(f"bad embedding header in {path}: expected 'N d'")
        n, d = int(first[0]), int(first[1])
        labels = []
        mat = np.empty((n, d))
        for i in range(n):
            parts = f.readline().split()
            if len(parts) != d + 1:
                raise ValueError(f"bad embedding row {i} in {path}")
            labels.append(parts[0])
            mat[i] = [float(x) for x in parts[1:]]
    return labels, mat
