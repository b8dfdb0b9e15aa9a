"""Synthetic friendship benchmark with cross-type signal.

Generates a two-community contact/friend/chat multi-graph in which part of
the future-friendship signal lives only in the chat layer: chat groups are
small dense clusters nested inside communities, most held-out positives are
in-group pairs, and a slice of nodes has no friend edges at all. A model
that only sees the friend subnetwork can separate communities but not chat
groups, so multi-type variants have measurable headroom over it.

`run_variant` trains one full pipeline variant in memory (walks ->
embeddings -> edge features -> fusion) and reports held-out AUC.
"""

import time
from dataclasses import dataclass, replace

import numpy as np

from .config import derive_seed
from .edgeops import batch_assemble
from .evaluation import TemporalSplit, auc, temporal_split
from .fusion import TrainConfig, predict, train_logreg, train_mtn
from .multigraph import MultiGraph, from_edges
from .sgns import SgnsConfig, train_sgns
from .walks import HOMOGENEOUS_STRATEGIES, WalkConfig, generate_corpus


@dataclass
class SynthConfig:
    nodes: int = 2000
    communities: int = 2
    group_size: int = 20
    contact_degree: float = 8.0     # mean contact edges per node, within community
    contact_noise: float = 0.05     # fraction of contact edges rewired across communities
    friend_degree: float = 3.0      # mean friend edges per friend-active node
    friendless_fraction: float = 0.10
    chat_pair_prob: float = 0.35    # P(chat edge) for each in-group pair
    positives: int = 1500
    in_group_fraction: float = 0.70  # positives drawn from inside chat groups
    neg_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.nodes < self.communities * self.group_size:
            raise ValueError("nodes too few for the requested communities/groups")
        if not 0.0 <= self.in_group_fraction <= 1.0:
            raise ValueError("in_group_fraction must be in [0, 1]")


def _sample_pairs(rng, members, count, taken):
    """`count` distinct unordered pairs from `members`, avoiding `taken`."""
    out = []
    members = np.asarray(members)
    guard = 0
    while len(out) < count:
        u, v = rng.choice(members, size=2, replace=False)
        a, b = (int(u), int(v)) if u < v else (int(v), int(u))
        if (a, b) in taken:
            guard += 1
            if guard > 50 * count + 1000:
                raise RuntimeError("pair sampling saturated; lower the edge budget")
            continue
        taken.add((a, b))
        out.append((a, b))
    return out


def make_benchmark(cfg: SynthConfig):
    """(multi-graph, held-out split) for the synthetic benchmark."""
    rng = np.random.default_rng(cfg.seed)
    per_comm = cfg.nodes // cfg.communities
    communities = [np.arange(c * per_comm, (c + 1) * per_comm)
                   for c in range(cfg.communities)]
    groups = []
    for comm in communities:
        for lo in range(0, len(comm) - cfg.group_size + 1, cfg.group_size):
            groups.append(comm[lo:lo + cfg.group_size])

    edges = []
    contact_seen = set()
    for comm in communities:
        n_edges = int(round(len(comm) * cfg.contact_degree / 2))
        for a, b in _sample_pairs(rng, comm, n_edges, contact_seen):
            edges.append((a, b, "contact"))
    n_cross = int(round(len(contact_seen) * cfg.contact_noise))
    guard = 0
    while n_cross > 0:
        u = int(rng.integers(cfg.nodes))
        v = int(rng.integers(cfg.nodes))
        if u == v or u // per_comm == v // per_comm:
            continue
        a, b = min(u, v), max(u, v)
        if (a, b) in contact_seen:
            guard += 1
            if guard > 10000:
                break
            continue
        contact_seen.add((a, b))
        edges.append((a, b, "contact"))
        n_cross -= 1

    friend_seen = set()
    for comm in communities:
        n_active = int(round(len(comm) * (1.0 - cfg.friendless_fraction)))
        active = rng.choice(comm, size=n_active, replace=False)
        n_edges = int(round(n_active * cfg.friend_degree / 2))
        for a, b in _sample_pairs(rng, active, n_edges, friend_seen):
            edges.append((a, b, "friend"))

    for grp in groups:
        for i in range(len(grp)):
            for j in range(i + 1, len(grp)):
                if rng.random() < cfg.chat_pair_prob:
                    edges.append((int(grp[i]), int(grp[j]), "chat"))

    labels = [f"u{i}" for i in range(cfg.nodes)]
    graph = from_edges([(labels[a], labels[b], t) for a, b, t in edges],
                       types=("contact", "friend", "chat"), nodes=labels)

    taken = set(friend_seen)
    n_in_group = int(round(cfg.positives * cfg.in_group_fraction))
    positives = []
    group_pick = rng.integers(len(groups), size=50 * n_in_group + 100)
    gi = 0
    while len(positives) < n_in_group:
        grp = groups[group_pick[gi % len(group_pick)]]
        gi += 1
        u, v = rng.choice(grp, size=2, replace=False)
        a, b = (int(u), int(v)) if u < v else (int(v), int(u))
        if (a, b) in taken:
            continue
        taken.add((a, b))
        positives.append((a, b))
    for comm in communities:
        share = (cfg.positives - n_in_group) // cfg.communities
        positives.extend(_sample_pairs(rng, comm, share, taken))

    split = temporal_split(graph, np.array(positives, dtype=np.int64),
                           int(round(cfg.neg_ratio * len(positives))), rng)
    return graph, split


# -- variant runner ----------------------------------------------------------------

BENCH_WALKS = {"walks_per_node": 4, "walk_length": 20}
BENCH_SGNS = SgnsConfig(dim=32, window=5, negatives=5, learning_rate=0.025, epochs=3)
BENCH_TRAIN = TrainConfig(learning_rate=0.05, batch_size=64, epochs=30, val_fraction=0.1)
BENCH_MTN_WIDTH = 64


def build_tables(graph: MultiGraph, strategy, types, walk_args, sgns_cfg, seed,
                 threads=1):
    """Per-type embedding tables (homogeneous strategies) or one multi-graph table."""
    tables = []
    if strategy in HOMOGENEOUS_STRATEGIES:
        for t in types:
            sub = graph.split(t)
            wc = WalkConfig(strategy=strategy, seed=derive_seed(seed, f"walk:{t}"),
                            **walk_args)
            corpus = generate_corpus(sub, wc, threads=threads,
                                     graph_hash=graph.content_hash())
            sc = replace(sgns_cfg, seed=derive_seed(seed, f"sgns:{t}"))
            tables.append(train_sgns(corpus, sc, threads=threads, edge_type=t))
    else:
        wc = WalkConfig(strategy=strategy, seed=derive_seed(seed, "walk:multi"),
                        **walk_args)
        corpus = generate_corpus(graph, wc, threads=threads,
                                 graph_hash=graph.content_hash())
        sc = replace(sgns_cfg, seed=derive_seed(seed, "sgns:multi"))
        tables.append(train_sgns(corpus, sc, threads=threads, edge_type="multi"))
    return tables


def split_pairs(split: TemporalSplit, seed, test_fraction=0.3):
    """Shuffled train/test partition of the labeled pairs.

    Returns (train_pairs, train_labels, test_pairs, test_labels).
    """
    pairs = np.vstack([split.positives, split.negatives])
    labels = np.concatenate([np.ones(len(split.positives), dtype=np.int64),
                             np.zeros(len(split.negatives), dtype=np.int64)])
    rng = np.random.default_rng(derive_seed(seed, "labelsplit"))
    order = rng.permutation(len(labels))
    n_test = int(round(test_fraction * len(labels)))
    test, train = order[:n_test], order[n_test:]
    return pairs[train], labels[train], pairs[test], labels[test]


def run_variant(graph, split, *, strategy, combiner, model, types=None, seed=0,
                walk_args=None, sgns_cfg=None, train_cfg=None, mtn_width=BENCH_MTN_WIDTH,
                threads=1, test_fraction=0.3):
    """Train one pipeline variant end to end in memory; report held-out AUC.

    `types` narrows which subnetworks the variant may see (e.g. ("friend",)
    for a friend-only baseline); None means all declared types.
    """
    t0 = time.perf_counter()
    types = tuple(types) if types is not None else graph.types
    walk_args = dict(BENCH_WALKS if walk_args is None else walk_args)
    sgns_cfg = sgns_cfg if sgns_cfg is not None else BENCH_SGNS
    train_cfg = train_cfg if train_cfg is not None else BENCH_TRAIN

    tables = build_tables(graph, strategy, types, walk_args, sgns_cfg, seed,
                          threads=threads)
    tr_pairs, tr_y, te_pairs, te_y = split_pairs(split, seed, test_fraction)
    tr_mats = batch_assemble(tables, tr_pairs, combiner)
    te_mats = batch_assemble(tables, te_pairs, combiner)

    tcfg = replace(train_cfg, seed=derive_seed(seed, "train"))
    if model == "logreg":
        fitted = train_logreg(tr_mats, tr_y, tcfg)
    elif model == "mtn":
        fitted = train_mtn(tr_mats, tr_y, tcfg, hidden=mtn_width, embed=mtn_width)
    else:
        raise ValueError(f"unknown model {model!r}")
    scores = predict(fitted, te_mats)
    return {"auc": auc(scores, te_y),
            "strategy": strategy, "combiner": combiner, "model": model,
            "types": types, "seed": seed,
            "elapsed_s": time.perf_counter() - t0}
