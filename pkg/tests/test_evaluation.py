import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetedge.evaluation import (auc, precision_at_k, temporal_split,
                                write_predictions)
from hetedge.multigraph import from_edges


def auc_bruteforce(scores, labels):
    """O(n^2) pairwise comparison oracle: wins + half credit for ties."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_ranking(self):
        assert auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_inverted_ranking(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0

    def test_all_tied_scores_give_half(self):
        assert auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_known_mixed_case(self):
        # positives {0.8, 0.4}, negatives {0.4, 0.1}:
        # (0.8 beats both) + (0.4 ties 0.4, beats 0.1) = (2 + 1.5) / 4
        assert auc([0.8, 0.4, 0.4, 0.1], [1, 1, 0, 0]) == pytest.approx(0.875)

    def test_matches_bruteforce_with_ties(self):
        rng = np.random.default_rng(0)
        for trial in range(25):
            n = int(rng.integers(5, 200))
            scores = np.round(rng.random(n), 2)  # coarse grid forces ties
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            assert auc(scores, labels) == pytest.approx(
                auc_bruteforce(scores, labels), abs=1e-12), trial

    def test_single_class_raises(self):
        with pytest.raises(ValueError):
            auc([0.3, 0.4], [1, 1])

    def test_nonbinary_labels_raise(self):
        with pytest.raises(ValueError):
            auc([0.3, 0.4], [1, 2])

    @given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 1)),
                    min_size=4, max_size=60))
    @settings(max_examples=60, deadline=None)
    def test_bruteforce_agreement_property(self, rows):
        scores = [round(s, 1) for s, _ in rows]
        labels = [y for _, y in rows]
        if len(set(labels)) < 2:
            labels[0] = 1 - labels[0]
        assert auc(scores, labels) == pytest.approx(
            auc_bruteforce(scores, labels), abs=1e-12)


class TestPrecisionAtK:
    def test_basic(self):
        ranked = {"u": [(1, 0.9), (2, 0.8), (3, 0.7)]}
        truth = {"u": {1, 3}}
        assert precision_at_k(ranked, truth, k=2) == 0.5

    def test_short_list_uses_min(self):
        # Only 2 candidates; both hits: 2 / min(5, 2) = 1.0.
        ranked = {"u": [(1, 0.9), (2, 0.8)]}
        truth = {"u": {1, 2}}
        assert precision_at_k(ranked, truth, k=5) == 1.0

    def test_mean_over_users(self):
        ranked = {"a": [(1, 0.9), (2, 0.8)], "b": [(3, 0.9), (4, 0.8)]}
        truth = {"a": {1, 2}, "b": set()}
        assert precision_at_k(ranked, truth, k=2) == 0.5

    def test_empty_candidate_list_contributes_zero(self):
        ranked = {"a": [(1, 0.9)], "b": []}
        truth = {"a": {1}}
        assert precision_at_k(ranked, truth, k=1) == 0.5

    def test_empty_user_set_raises(self):
        with pytest.raises(ValueError):
            precision_at_k({}, {}, k=5)


def star_graph():
    edges = [("a", "b", "friend"), ("a", "c", "contact"), ("b", "c", "chat"),
             ("c", "d", "contact"), ("a", "d", "chat")]
    return from_edges(edges, types=("contact", "friend", "chat"),
                      nodes=["a", "b", "c", "d"])


class TestTemporalSplit:
    def test_negatives_avoid_friends_and_positives(self):
        g = star_graph()
        post = np.array([[0, 2]])  # a-c becomes a friendship
        split = temporal_split(g, post, neg_count=3,
                               rng=np.random.default_rng(0))
        assert np.array_equal(split.positives, [[0, 2]])
        neg = {tuple(p) for p in split.negatives}
        assert len(neg) == 3
        assert (0, 1) not in neg            # existing friend edge
        assert (0, 2) not in neg            # the positive
        for u, v in neg:
            assert u < v

    def test_non_friend_edges_may_be_negatives(self):
        # Every non-friend pair carries a contact or chat edge; sampling any
        # negatives at all proves other edge types are eligible.
        g = star_graph()
        post = np.array([[0, 2]])
        split = temporal_split(g, post, neg_count=4,
                               rng=np.random.default_rng(1))
        covered = {tuple(p) for p in split.negatives}
        assert covered == {(0, 3), (1, 2), (1, 3), (2, 3)}

    def test_pre_period_overlap_rejected(self):
        g = star_graph()
        with pytest.raises(ValueError, match="already a friend edge"):
            temporal_split(g, np.array([[0, 1]]), 1, np.random.default_rng(0))

    def test_self_pair_rejected(self):
        g = star_graph()
        with pytest.raises(ValueError, match="self-pair"):
            temporal_split(g, np.array([[2, 2]]), 1, np.random.default_rng(0))

    def test_too_many_negatives_rejected(self):
        g = star_graph()
        with pytest.raises(ValueError, match="exceeds"):
            temporal_split(g, np.array([[0, 2]]), 10, np.random.default_rng(0))

    def test_duplicate_positives_collapse(self):
        g = star_graph()
        post = np.array([[0, 2], [2, 0], [0, 2]])
        split = temporal_split(g, post, 1, np.random.default_rng(0))
        assert len(split.positives) == 1

    def test_sparse_regime_matches_constraints(self):
        rng = np.random.default_rng(7)
        edges = [(f"n{i}", f"n{(i + 1) % 40}", "friend") for i in range(40)]
        g = from_edges(edges, nodes=[f"n{i}" for i in range(40)])
        post = np.array([[0, 5], [3, 9]])
        split = temporal_split(g, post, neg_count=50, rng=rng)
        friends = set(g.edges("friend"))
        seen = set()
        assert len(split.negatives) == 50
        for u, v in split.negatives:
            pair = (int(u), int(v))
            assert pair not in friends
            assert pair not in {(0, 5), (3, 9)}
            assert pair not in seen
            seen.add(pair)


class TestPredictionFile:
    def test_format_and_content(self, tmp_path):
        path = tmp_path / "pred.txt"
        pairs = np.array([[0, 1], [2, 3]])
        write_predictions(path, pairs, [1, 0], [0.75, 0.125],
                          node_labels=["a", "b", "c", "d"])
        lines = path.read_text().splitlines()
        assert lines[0] == "# hetedge-predictions v1"
        assert lines[1] == "a b 1 0.75"
        assert lines[2] == "c d 0 0.125"
