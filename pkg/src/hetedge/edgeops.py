"""Per-type edge vectors from node vectors, and the per-pair feature bundle.

An edge vector for a node pair is built per edge type by combining the two
node rows of that type's embedding table (average, hadamard, or
concatenate). Pairs are canonicalized (smaller id first) so features are
invariant under (u, v) -> (v, u) for every combiner. Nodes inactive in a
subnetwork contribute a zero row by default (they carry no signal there).
"""

import json
from dataclasses import dataclass

import numpy as np

COMBINERS = ("average", "hadamard", "concatenate")
FEATURES_MAGIC = b"HETEDGE-FEAT v1"


def edge_dim(dim, mode):
    """Edge-vector length for node dimension `dim` under `mode`."""
    if mode not in COMBINERS:
        raise ValueError(f"unknown combiner {mode!r} (one of {COMBINERS})")
    return 2 * dim if mode == "concatenate" else dim


def combine(u_vec, v_vec, mode):
    """Edge vector from two equal-length node vectors."""
    u_vec = np.asarray(u_vec, dtype=np.float64)
    v_vec = np.asarray(v_vec, dtype=np.float64)
    if u_vec.shape != v_vec.shape:
        raise ValueError(f"length mismatch: {u_vec.shape} vs {v_vec.shape}")
    if mode == "average":
        return (u_vec + v_vec) / 2.0
    if mode == "hadamard":
        return u_vec * v_vec
    if mode == "concatenate":
        return np.concatenate([u_vec, v_vec])
    raise ValueError(f"unknown combiner {mode!r} (one of {COMBINERS})")


@dataclass
class HeteroEdgeFeatures:
    """Edge vectors of one node pair, one per declared edge type, in type order."""

    pair: tuple
    mode: str
    types: tuple
    vectors: list


def _check_tables(tables):
    dims = {t.dim for t in tables}
    if len(dims) > 1:
        raise ValueError(f"embedding tables must share one dimension, got {sorted(dims)}")
    sizes = {t.num_nodes for t in tables}
    if len(sizes) > 1:
        raise ValueError("embedding tables must share one node-id space")


def _row(table, node, fallback):
    if table.active is not None and not table.active[node] and fallback == "zero":
        return np.zeros(table.dim)
    return table.vectors[node]


def assemble(tables, u, v, mode, fallback="zero"):
    """Per-type edge vectors for the pair (u, v), canonicalized to u < v.

    fallback: "zero" substitutes a zero row for nodes inactive in a
    subnetwork; "row" uses the stored (initialization) row as-is.
    """
    _check_tables(tables)
    n = tables[0].num_nodes
    for node in (u, v):
        if not 0 <= node < n:
            raise KeyError(f"unknown node id {node}")
    a, b = (u, v) if u <= v else (v, u)
    vectors = [combine(_row(t, a, fallback), _row(t, b, fallback), mode) for t in tables]
    return HeteroEdgeFeatures(pair=(a, b), mode=mode,
                              types=tuple(t.edge_type for t in tables), vectors=vectors)


def batch_assemble(tables, pairs, mode, fallback="zero"):
    """Vectorized assemble: per-type matrices of shape (n_pairs, edge_dim)."""
    _check_tables(tables)
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.size == 0:
        pairs = pairs.reshape(0, 2)
    a = np.minimum(pairs[:, 0], pairs[:, 1])
    b = np.maximum(pairs[:, 0], pairs[:, 1])
    out = []
    for t in tables:
        rows_a = t.vectors[a].copy()
        rows_b = t.vectors[b].copy()
        if t.active is not None and fallback == "zero":
            rows_a[~t.active[a]] = 0.0
            rows_b[~t.active[b]] = 0.0
        if mode == "average":
            out.append((rows_a + rows_b) / 2.0)
        elif mode == "hadamard":
            out.append(rows_a * rows_b)
        elif mode == "concatenate":
            out.append(np.hstack([rows_a, rows_b]))
        else:
            raise ValueError(f"unknown combiner {mode!r} (one of {COMBINERS})")
    return out


# -- feature container ---------------------------------------------------------

def save_features(path, pairs, labels, matrices, mode, types, graph_hash=""):
    """Binary feature dump: magic line, JSON meta line, then npy blocks."""
    pairs = np.asarray(pairs, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    meta = {"n": int(pairs.shape[0]), "types": list(types), "mode": mode,
            "d_edge": int(matrices[0].shape[1]) if matrices else 0,
            "graph": graph_hash}
    with open(path, "wb") as f:
        f.write(FEATURES_MAGIC + b"\n")
        f.write(json.dumps(meta, sort_keys=True).encode("utf-8") + b"\n")
        np.save(f, pairs)
        np.save(f, labels)
        for mat in matrices:
            np.save(f, np.ascontiguousarray(mat, dtype=np.float64))


def load_features(path):
    """Returns (pairs, labels, matrices, meta) from a feature dump."""
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != FEATURES_MAGIC:
            raise ValueError(f"bad feature container header in {path}: "
                             f"expected {FEATURES_MAGIC.decode()}")
        meta = json.loads(f.readline().decode("utf-8"))
        pairs = np.load(f, allow_pickle=False)
        labels = np.load(f, allow_pickle=False)
        matrices = [np.load(f, allow_pickle=False) for _ in meta["types"]]
    return pairs, labels, matrices, meta
