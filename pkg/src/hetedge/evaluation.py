"""Offline evaluation: temporal splits, negative sampling, AUC, Precision@k."""

from dataclasses import dataclass

import numpy as np

from .multigraph import MultiGraph


def auc(scores, labels):
    """Rank-based AUC (Mann-Whitney): P(score+ > score-), ties at half credit.

    O(n log n) via midranks. Raises ValueError unless both classes appear.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-d sequences")
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == 0))
    if n_pos + n_neg != len(y):
        raise ValueError("labels must be binary (0/1)")
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires both classes present in labels")
    order = np.argsort(s, kind="mergesort")
    ss = s[order]
    first = np.searchsorted(ss, ss, side="left")
    last = np.searchsorted(ss, ss, side="right")
    ranks = np.empty(len(s))
    ranks[order] = (first + last + 1) / 2.0
    pos_rank_sum = float(ranks[y == 1].sum())
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def precision_at_k(ranked, truth, k=5):
    """Mean over users of hits-in-top-k / min(k, candidates available).

    `ranked`: {user: [(candidate, score), ...]} sorted descending by score;
    `truth`: {user: set of true candidates}. Users with an empty candidate
    list contribute 0. Raises ValueError on an empty user set.
    """
    if not ranked:
        raise ValueError("precision_at_k needs a non-empty user set")
    total = 0.0
    for user, cands in ranked.items():
        if not cands:
            continue
        positives = truth.get(user, ())
        top = cands[:k]
        hits = sum(1 for cand, _ in top if cand in positives)
        total += hits / min(k, len(cands))
    return total / len(ranked)


@dataclass
class TemporalSplit:
    """Labeled pairs derived from a pre-period graph and post-period edges."""

    positives: np.ndarray
    negatives: np.ndarray


def _canonical_pairs(pairs):
    out = []
    for u, v in pairs:
        u, v = int(u), int(v)
        out.append((min(u, v), max(u, v)))
    return list(dict.fromkeys(out))


def temporal_split(pre_graph: MultiGraph, post_edges, neg_count, rng,
                   friend_type="friend"):
    """Positives = post-period friend edges; negatives = sampled non-edges.

    Negatives are unordered node pairs carrying no friend edge in either
    period (other edge types are allowed), drawn uniformly without
    replacement. Raises ValueError if post edges overlap pre-period friend
    edges or if neg_count exceeds the available non-edges.
    """
    n = pre_graph.num_nodes
    pre_friends = set(pre_graph.edges(friend_type))
    positives = _canonical_pairs(post_edges)
    for pair in positives:
        if pair in pre_friends:
            raise ValueError(f"post edge {pair} already a {friend_type} edge pre-period")
        if pair[0] == pair[1]:
            raise ValueError(f"self-pair {pair} in post edges")
    excluded = pre_friends | set(positives)
    total = n * (n - 1) // 2
    available = total - len(excluded)
    if neg_count > available:
        raise ValueError(f"neg_count {neg_count} exceeds the {available} available non-edges")

    negatives = []
    if neg_count > 0:
        if neg_count * 2 >= available:
            # dense regime: enumerate and subsample
            candidates = [(u, v) for u in range(n) for v in range(u + 1, n)
                          if (u, v) not in excluded]
            pick = rng.choice(len(candidates), size=neg_count, replace=False)
            negatives = [candidates[i] for i in np.sort(pick)]
        else:
            drawn = set()
            while len(negatives) < neg_count:
                u = int(rng.integers(n))
                v = int(rng.integers(n))
                if u == v:
                    continue
                pair = (min(u, v), max(u, v))
                if pair in excluded or pair in drawn:
                    continue
                drawn.add(pair)
                negatives.append(pair)
    return TemporalSplit(positives=np.array(positives, dtype=np.int64).reshape(-1, 2),
                         negatives=np.array(negatives, dtype=np.int64).reshape(-1, 2))


# -- report files ---------------------------------------------------------------

def write_predictions(path, pairs, labels01, scores, node_labels):
    """One `u v label score` line per pair, with a version header comment."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# hetedge-predictions v1\n")
        for (u, v), y, s in zip(pairs, labels01, scores):
            f.write(f"{node_labels[u]} {node_labels[v]} {int(y)} {repr(float(s))}\n")


def format_metrics(metrics):
    """Structured key-value metrics report."""
    return "".join(f"{k} = {v}\n" for k, v in metrics.items())
