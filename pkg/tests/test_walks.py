import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetedge.multigraph import from_edges
from hetedge.walks import (WalkConfig, generate_corpus, hetero_step,
                           load_corpus, node2vec_step, save_corpus,
                           uniform_step, uniformbias_step)

from conftest import TRIANGLE_EDGES


def empirical_step_law(step, n_samples, seed=0):
    """Frequency of each outcome of a one-step sampler over fresh RNG streams."""
    counts = {}
    for i in range(n_samples):
        nxt = step(np.random.default_rng((seed, i)))
        counts[nxt] = counts.get(nxt, 0) + 1
    return {k: v / n_samples for k, v in counts.items()}


class TestStepLaws:
    """Monte Carlo checks of the one-step transition laws at module scale.

    The acceptance suite repeats these at 100k samples / +-0.02; here we use
    20k / +-0.03 to keep the unit run fast.
    """

    N, TOL = 20_000, 0.03

    def test_uniform_step_is_uniform(self):
        g = from_edges([("c", f"x{i}", "contact") for i in range(5)]).split("contact")
        c = 0
        law = empirical_step_law(lambda rng: uniform_step(g, c, rng), self.N)
        for nbr in g.neighbors(c):
            assert law[int(nbr)] == pytest.approx(0.2, abs=self.TOL)

    def test_hetero_step_weights_by_multiplicity(self):
        # y is reachable by three parallel edges, z by one: y is thrice as likely.
        g = from_edges([("x", "y", "contact"), ("x", "y", "friend"),
                        ("x", "y", "chat"), ("x", "z", "contact")])
        x, y, z = (g.node_id(l) for l in "xyz")
        law = empirical_step_law(lambda rng: hetero_step(g, x, rng), self.N)
        assert law[y] == pytest.approx(0.75, abs=self.TOL)
        assert law[z] == pytest.approx(0.25, abs=self.TOL)

    def test_uniformbias_step_equal_weight_per_present_type(self):
        # contact reaches {y, z}, friend reaches {y}; chat absent at x.
        g = from_edges([("x", "y", "contact"), ("x", "z", "contact"),
                        ("x", "y", "friend"), ("a", "b", "chat")],
                       types=("contact", "friend", "chat"))
        x, y, z = (g.node_id(l) for l in "xyz")
        law = empirical_step_law(lambda rng: uniformbias_step(g, x, rng), self.N)
        assert law[y] == pytest.approx(0.75, abs=self.TOL)  # 1/2*1/2 + 1/2
        assert law[z] == pytest.approx(0.25, abs=self.TOL)  # 1/2*1/2

    def test_node2vec_step_biases_by_p_and_q(self):
        # prev=a, cur=b; candidates: a (back, 1/p), c (triangle, 1), d (out, 1/q).
        g = from_edges([("a", "b", "contact"), ("b", "c", "contact"),
                        ("a", "c", "contact"), ("b", "d", "contact")])
        a, b, c, d = (g.node_id(l) for l in "abcd")
        sub = g.split("contact")
        p, q = 0.5, 2.0
        w = {a: 1 / p, c: 1.0, d: 1 / q}
        z = sum(w.values())
        law = empirical_step_law(
            lambda rng: node2vec_step(sub, a, b, p, q, rng), self.N)
        for node, weight in w.items():
            assert law[node] == pytest.approx(weight / z, abs=self.TOL)

    def test_node2vec_unit_pq_matches_uniform(self):
        g = from_edges([("a", "b", "contact"), ("b", "c", "contact"),
                        ("a", "c", "contact"), ("b", "d", "contact")])
        sub = g.split("contact")
        a, b = g.node_id("a"), g.node_id("b")
        law = empirical_step_law(
            lambda rng: node2vec_step(sub, a, b, 1.0, 1.0, rng), self.N)
        for nbr in sub.neighbors(b):
            assert law[int(nbr)] == pytest.approx(1 / 3, abs=self.TOL)


class TestCorpus:
    def test_walk_count_and_shape(self, ring_graph):
        cfg = WalkConfig(walks_per_node=3, walk_length=7, strategy="hetero", seed=4)
        corpus = generate_corpus(ring_graph, cfg)
        assert len(corpus.walks) == 3 * ring_graph.num_nodes
        assert all(1 <= len(w) <= 7 for w in corpus.walks)
        assert all(w[0] == i // 3 for i, w in enumerate(corpus.walks))

    def test_isolated_node_truncates_immediately(self):
        g = from_edges([("a", "b", "contact")], nodes=["a", "b", "lonely"])
        cfg = WalkConfig(walks_per_node=2, walk_length=5, strategy="uniform", seed=0)
        corpus = generate_corpus(g.split("contact"), cfg)
        lonely = [w for w in corpus.walks if w[0] == 2]
        assert all(len(w) == 1 for w in lonely)

    def test_consecutive_tokens_are_neighbors(self, ring_graph):
        cfg = WalkConfig(walks_per_node=2, walk_length=10, strategy="uniformbias",
                         seed=1)
        for w in generate_corpus(ring_graph, cfg).walks:
            for u, v in zip(w[:-1], w[1:]):
                assert any(ring_graph.has_edge(int(u), int(v), t)
                           for t in ring_graph.types)

    def test_thread_count_does_not_change_corpus(self, ring_graph):
        cfg = WalkConfig(walks_per_node=4, walk_length=12, strategy="hetero", seed=9)
        one = generate_corpus(ring_graph, cfg, threads=1)
        four = generate_corpus(ring_graph, cfg, threads=4)
        assert len(one.walks) == len(four.walks)
        for w1, w4 in zip(one.walks, four.walks):
            assert np.array_equal(w1, w4)

    def test_seed_changes_corpus(self, ring_graph):
        cfg_a = WalkConfig(walks_per_node=2, walk_length=12, strategy="hetero", seed=0)
        cfg_b = WalkConfig(walks_per_node=2, walk_length=12, strategy="hetero", seed=1)
        a = generate_corpus(ring_graph, cfg_a)
        b = generate_corpus(ring_graph, cfg_b)
        assert any(not np.array_equal(x, y) for x, y in zip(a.walks, b.walks))

    def test_strategy_graph_kind_mismatch(self, ring_graph):
        with pytest.raises(TypeError):
            generate_corpus(ring_graph, WalkConfig(strategy="uniform"))
        with pytest.raises(TypeError):
            generate_corpus(ring_graph.split("contact"), WalkConfig(strategy="hetero"))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            WalkConfig(walk_length=0)
        with pytest.raises(ValueError):
            WalkConfig(p=0.0)
        with pytest.raises(ValueError):
            WalkConfig(strategy="levy-flight")

    def test_corpus_roundtrip(self, ring_graph, tmp_path):
        cfg = WalkConfig(walks_per_node=2, walk_length=6, strategy="hetero", seed=2)
        corpus = generate_corpus(ring_graph, cfg, graph_hash=ring_graph.content_hash())
        path = tmp_path / "walks.txt"
        save_corpus(corpus, ring_graph.labels, path)
        back = load_corpus(path, ring_graph.label_to_id)
        assert back.strategy == corpus.strategy
        assert back.seed == corpus.seed
        assert back.graph_hash == corpus.graph_hash
        assert back.num_nodes == corpus.num_nodes
        assert all(np.array_equal(a, b) for a, b in zip(back.walks, corpus.walks))


@given(st.integers(0, 2 ** 31), st.sampled_from(["hetero", "uniformbias"]))
@settings(max_examples=20, deadline=None)
def test_walks_stay_in_node_space(seed, strategy):
    g = from_edges(TRIANGLE_EDGES, types=("contact", "friend", "chat"))
    cfg = WalkConfig(walks_per_node=1, walk_length=8, strategy=strategy, seed=seed)
    for w in generate_corpus(g, cfg).walks:
        assert np.all((w >= 0) & (w < g.num_nodes))
