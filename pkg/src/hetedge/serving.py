"""Recommendation serving: nearest-neighbour retrieval, dedup, re-ranking.

The retrieval index is exact cosine similarity over an embedding matrix
(brute-force matmul; row count here is far below the scale where an
approximate index earns its error bars). Already-shown candidates are
suppressed with per-user Bloom filters, and the surviving pool is re-ranked
by a fusion model's link probability.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .edgeops import batch_assemble
from .fusion import predict

BLOOM_MAGIC = b"HETEDGE-BLOOM v1"

_MASK64 = (1 << 64) - 1


# -- exact nearest neighbours ----------------------------------------------------

class NnIndex:
    """Exact top-k cosine similarity over a fixed embedding matrix.

    Rows are L2-normalized once at build time; zero rows keep similarity 0
    with everything. Ties break toward the smaller node id and the query
    itself is never returned.
    """

    def __init__(self, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("embedding matrix must be 2-d")
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        self._unit = matrix / np.where(norms == 0.0, 1.0, norms)
        self.num_nodes = matrix.shape[0]

    def query(self, node, k):
        """[(node_id, cosine)] of the k most similar rows, best first."""
        if not 0 <= node < self.num_nodes:
            raise KeyError(f"unknown node id {node}")
        if k < 0:
            raise ValueError("k must be non-negative")
        sims = self._unit @ self._unit[node]
        order = np.lexsort((np.arange(self.num_nodes), -sims))
        order = order[order != node][:k]
        return [(int(i), float(sims[i])) for i in order]


# -- bloom filter -----------------------------------------------------------------

def _mix64(z):
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _hash64(data: bytes, seed: int) -> int:
    h = _mix64(seed & _MASK64)
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return _mix64(h)


def bloom_params(n_items, bits_per_item=10):
    """(m, k) sized for n expected items at the given bit budget."""
    if n_items < 1:
        raise ValueError("n_items must be >= 1")
    m = max(8, int(n_items * bits_per_item))
    k = max(1, int(round(m / n_items * np.log(2.0))))
    return m, k


def bloom_fp_rate(m, k, n):
    """Analytic false-positive rate (1 - e^{-kn/m})^k after n insertions."""
    return float((1.0 - np.exp(-k * n / m)) ** k)


class BloomFilter:
    """m-bit Bloom filter with k double-hashed probes.

    Probe i lands at (h1 + i*h2) mod m, where h1 and h2 are 64-bit hashes of
    the item under two seeds derived from `seed` by splitmix64 mixing.
    Membership queries never report a stored item as absent.
    """

    def __init__(self, m_bits, k_hashes, seed=0):
        if m_bits < 1 or k_hashes < 1:
            raise ValueError("m_bits and k_hashes must be >= 1")
        self.m = int(m_bits)
        self.k = int(k_hashes)
        self.seed = int(seed)
        self._seed1 = _mix64(self.seed)
        self._seed2 = _mix64(self._seed1 ^ 0xA5A5A5A5A5A5A5A5)
        self.bits = np.zeros(self.m, dtype=bool)
        self.count = 0

    def _probes(self, item):
        data = item.encode("utf-8") if isinstance(item, str) else bytes(item)
        h1 = _hash64(data, self._seed1)
        h2 = _hash64(data, self._seed2) | 1
        return [(h1 + i * h2) % self.m for i in range(self.k)]

    def add(self, item):
        self.bits[self._probes(item)] = True
        self.count += 1

    def __contains__(self, item):
        return bool(self.bits[self._probes(item)].all())

    def expected_fp_rate(self):
        return bloom_fp_rate(self.m, self.k, self.count)


def save_blooms(blooms, path):
    """Binary snapshot of a {user_id: BloomFilter} map."""
    with open(path, "wb") as f:
        f.write(BLOOM_MAGIC + b"\n")
        f.write(struct.pack("<q", len(blooms)))
        for user in sorted(blooms):
            filt = blooms[user]
            packed = np.packbits(filt.bits)
            f.write(struct.pack("<qqqqq", user, filt.m, filt.k, filt.seed, filt.count))
            f.write(struct.pack("<q", len(packed)))
            f.write(packed.tobytes())


def load_blooms(path):
    with open(path, "rb") as f:
        head = f.readline().rstrip(b"\n")
        if head != BLOOM_MAGIC:
            raise ValueError(f"bad bloom header in {path}: {head!r}")
        (n_users,) = struct.unpack("<q", f.read(8))
        blooms = {}
        for _ in range(n_users):
            user, m, k, seed, count = struct.unpack("<qqqqq", f.read(40))
            (nbytes,) = struct.unpack("<q", f.read(8))
            packed = np.frombuffer(f.read(nbytes), dtype=np.uint8)
            filt = BloomFilter(m, k, seed)
            filt.bits = np.unpackbits(packed)[:m].astype(bool)
            filt.count = count
            blooms[user] = filt
    return blooms


# -- recommendation flow -----------------------------------------------------------

DEFAULT_POOL_SIZE = 100
BLOOM_CAPACITY = 1000


@dataclass
class ServingState:
    """Everything recommend() needs: retrieval index, graph, features, model."""

    index: NnIndex
    graph: object                      # MultiGraph; used for friend-edge dedup
    tables: list                       # per-type EmbeddingTable, fusion input
    model: object                      # LogRegModel or MultiTowerNet
    combiner: str
    blooms: dict = field(default_factory=dict)
    bloom_seed: int = 0

    def bloom_for(self, user):
        if user not in self.blooms:
            m, k = bloom_params(BLOOM_CAPACITY)
            self.blooms[user] = BloomFilter(m, k, seed=self.bloom_seed)
        return self.blooms[user]


def recommend(state: ServingState, user, k=5, pool_size=DEFAULT_POOL_SIZE,
              friend_type="friend"):
    """Top-k friend recommendations for `user`, best first.

    Retrieves a pool_size candidate pool from the embedding index, drops
    existing friends and Bloom-positive (previously recommended) candidates,
    re-ranks the rest by the fusion model's link probability, and records
    the winners in the user's Bloom filter.

    Returns [(node_id, probability)]; fewer than k entries when the filters
    exhaust the pool.
    """
    pool = state.index.query(user, pool_size)
    seen = state.bloom_for(user)
    cands = [c for c, _ in pool
             if not state.graph.has_edge(user, c, friend_type)
             and str(c) not in seen]
    if not cands:
        return []
    pairs = np.array([(user, c) for c in cands], dtype=np.int64)
    mats = batch_assemble(state.tables, pairs, state.combiner)
    probs = np.asarray(predict(state.model, mats), dtype=np.float64)
    order = np.lexsort((pairs[:, 1], -probs))[:k]
    picks = [(int(pairs[i, 1]), float(probs[i])) for i in order]
    for node, _ in picks:
        seen.add(str(node))
    return picks
