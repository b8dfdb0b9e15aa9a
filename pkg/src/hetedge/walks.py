"""Random-walk corpora under four strategies.

Strategies: uniform neighbor choice on a homogeneous graph, second-order
(p, q)-biased walks, equal-probability-per-edge walks on the multi-graph
(a neighbor connected by m types is m times as likely), and two-step
type-then-edge walks (each edge type present at the current node gets
equal weight).

Walks truncate at dead ends; no restarts. One independent RNG stream per
(node, walk-index) is derived from the master seed, so generation is
reproducible and thread-count independent.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .multigraph import HomogeneousGraph, MultiGraph

STRATEGIES = ("uniform", "node2vec", "hetero", "uniformbias")
CORPUS_MAGIC = "hetedge-corpus v1"

HOMOGENEOUS_STRATEGIES = ("uniform", "node2vec")
MULTIGRAPH_STRATEGIES = ("hetero", "uniformbias")


@dataclass
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 30
    strategy: str = "uniform"
    p: float = 1.0
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.walk_length < 1:
            raise ValueError("walk_length must be >= 1")
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be >= 1")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r} (one of {STRATEGIES})")


@dataclass
class WalkCorpus:
    walks: list
    num_nodes: int
    strategy: str
    seed: int
    graph_hash: str = ""


def _weighted_choice(weights, rng):
    c = np.cumsum(weights)
    r = rng.random() * c[-1]
    return int(np.searchsorted(c, r, side="right"))


# -- one-step transition laws ----------------------------------------------

def uniform_step(g: HomogeneousGraph, cur, rng):
    """Uniform neighbor, or None at a dead end."""
    nbrs = g.neighbors(cur)
    if len(nbrs) == 0:
        return None
    return int(nbrs[rng.integers(len(nbrs))])


def node2vec_step(g: HomogeneousGraph, prev, cur, p, q, rng):
    """Second-order step from cur having arrived from prev.

    Candidate x gets weight 1/p if x == prev, 1 if x is adjacent to prev,
    1/q otherwise, then the weights are normalized.
    """
    nbrs = g.neighbors(cur)
    if len(nbrs) == 0:
        return None
    w = np.full(len(nbrs), 1.0 / q)
    w[np.isin(nbrs, g.neighbors(prev), assume_unique=True)] = 1.0
    w[nbrs == prev] = 1.0 / p
    return int(nbrs[_weighted_choice(w, rng)])


def hetero_step(g: MultiGraph, cur, rng):
    """Uniform choice among all incident multi-edges (weight = type multiplicity)."""
    indptr, indices = g.flat_adjacency()
    lo, hi = int(indptr[cur]), int(indptr[cur + 1])
    if hi == lo:
        return None
    return int(indices[lo + rng.integers(hi - lo)])


def uniformbias_step(g: MultiGraph, cur, rng):
    """Uniform edge type among types present at cur, then uniform edge of that type."""
    degs = g.type_degrees(cur)
    present = np.flatnonzero(degs > 0)
    if len(present) == 0:
        return None
    t = g.types[present[rng.integers(len(present))]]
    nbrs = g.neighbors(cur, t)
    return int(nbrs[rng.integers(len(nbrs))])


# -- full walks --------------------------------------------------------------

def uniform_walk(g: HomogeneousGraph, start, length, rng):
    walk = [start]
    while len(walk) < length:
        nxt = uniform_step(g, walk[-1], rng)
        if nxt is None:
            break
        walk.append(nxt)
    return walk


def node2vec_walk(g: HomogeneousGraph, start, length, p, q, rng):
    """First step uniform, then second-order (p, q)-biased."""
    walk = [start]
    if length > 1:
        nxt = uniform_step(g, start, rng)
        if nxt is not None:
            walk.append(nxt)
            while len(walk) < length:
                nxt = node2vec_step(g, walk[-2], walk[-1], p, q, rng)
                if nxt is None:
                    break
                walk.append(nxt)
    return walk


def hetero_walk(g: MultiGraph, start, length, rng):
    walk = [start]
    while len(walk) < length:
        nxt = hetero_step(g, walk[-1], rng)
        if nxt is None:
            break
        walk.append(nxt)
    return walk


def uniformbias_walk(g: MultiGraph, start, length, rng):
    walk = [start]
    while len(walk) < length:
        nxt = uniformbias_step(g, walk[-1], rng)
        if nxt is None:
            break
        walk.append(nxt)
    return walk


def _single_walk(g, cfg: WalkConfig, node, rng):
    if cfg.strategy == "uniform":
        return uniform_walk(g, node, cfg.walk_length, rng)
    if cfg.strategy == "node2vec":
        return node2vec_walk(g, node, cfg.walk_length, cfg.p, cfg.q, rng)
    if cfg.strategy == "hetero":
        return hetero_walk(g, node, cfg.walk_length, rng)
    return uniformbias_walk(g, node, cfg.walk_length, rng)


def generate_corpus(g, cfg: WalkConfig, threads=1, graph_hash=""):
    """walks_per_node walks from every node, ordered by (node, walk-index).

    The RNG stream for walk k from node v is seeded by (seed, v, k), so the
    corpus is identical for any thread count.
    """
    if cfg.strategy in HOMOGENEOUS_STRATEGIES and not isinstance(g, HomogeneousGraph):
        raise TypeError(f"strategy {cfg.strategy!r} requires a homogeneous graph")
    if cfg.strategy in MULTIGRAPH_STRATEGIES and not isinstance(g, MultiGraph):
        raise TypeError(f"strategy {cfg.strategy!r} requires a multi-graph")
    n = g.num_nodes
    if cfg.strategy == "hetero":
        g.flat_adjacency()  # build once before any worker touches it

    def walks_for(node):
        out = []
        for k in range(cfg.walks_per_node):
            rng = np.random.default_rng((cfg.seed, node, k))
            out.append(np.array(_single_walk(g, cfg, node, rng), dtype=np.int64))
        return out

    walks = []
    if threads <= 1:
        for node in range(n):
            walks.extend(walks_for(node))
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for chunk in ex.map(walks_for, range(n)):
                walks.extend(chunk)
    return WalkCorpus(walks=walks, num_nodes=n, strategy=cfg.strategy,
                      seed=cfg.seed, graph_hash=graph_hash)


# -- corpus files ------------------------------------------------------------

def save_corpus(corpus: WalkCorpus, labels, path):
    """One walk per line as space-separated node labels, with a provenance header."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# {CORPUS_MAGIC}\n")
        f.write(f"# strategy={corpus.strategy} seed={corpus.seed} "
                f"graph={corpus.graph_hash} nodes={corpus.num_nodes}\n")
        for walk in corpus.walks:
            f.write(" ".join(labels[v] for v in walk) + "\n")


def load_corpus(path, label_to_id):
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != f"# {CORPUS_MAGIC}":
            raise ValueError(f"bad corpus header in {path}: expected '# {CORPUS_MAGIC}'")
        meta = dict(kv.split("=", 1) for kv in f.readline().strip("# \n").split())
        walks = []
        for line in f:
            toks = line.split()
            if toks:
                walks.append(np.array([label_to_id[x] for x in toks], dtype=np.int64))
    return WalkCorpus(walks=walks, num_nodes=int(meta["nodes"]),
                      strategy=meta["strategy"], seed=int(meta["seed"]),
                      graph_hash=meta["graph"])
