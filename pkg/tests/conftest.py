import numpy as np
import pytest

from hetedge import from_edges

TRIANGLE_EDGES = [
    ("a", "b", "contact"), ("b", "c", "contact"), ("a", "c", "contact"),
    ("a", "b", "friend"), ("c", "d", "friend"),
    ("a", "b", "chat"), ("b", "d", "chat"), ("a", "d", "chat"),
]


@pytest.fixture
def small_graph():
    """Four nodes, three types, a parallel a-b edge in all three types."""
    return from_edges(TRIANGLE_EDGES, types=("contact", "friend", "chat"))


@pytest.fixture
def ring_graph():
    """A 12-node contact ring with a chat chord pattern; every node connected."""
    edges = []
    for i in range(12):
        edges.append((f"n{i}", f"n{(i + 1) % 12}", "contact"))
        if i % 3 == 0:
            edges.append((f"n{i}", f"n{(i + 4) % 12}", "chat"))
        if i % 2 == 0:
            edges.append((f"n{i}", f"n{(i + 2) % 12}", "friend"))
    return from_edges(edges, types=("contact", "friend", "chat"),
                      nodes=[f"n{i}" for i in range(12)])


def rng_of(*key):
    return np.random.default_rng(key)
