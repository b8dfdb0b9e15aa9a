"""Typed, undirected multi-graph stored as one CSR adjacency per edge type."""

import hashlib
import logging

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_TYPES = ("contact", "friend", "chat")
GRAPH_MAGIC = "HETEDGE-GRAPH v1"


class EdgeListError(ValueError):
    """Malformed edge-list or graph-snapshot input."""


def _build_csr(num_nodes, pairs):
    """CSR (indptr, indices) from canonical undirected pairs; neighbor lists sorted."""
    indptr = np.zeros(num_nodes + 1, dtype=np.int64)
    if not pairs:
        return indptr, np.zeros(0, dtype=np.int64)
    arr = np.asarray(sorted(pairs), dtype=np.int64)
    src = np.concatenate([arr[:, 0], arr[:, 1]])
    dst = np.concatenate([arr[:, 1], arr[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst


class HomogeneousGraph:
    """Single edge-type restriction of a multi-graph, over the shared node-id space."""

    def __init__(self, labels, edge_type, indptr, indices):
        self.labels = labels
        self.edge_type = edge_type
        self.indptr = indptr
        self.indices = indices

    @property
    def num_nodes(self):
        return len(self.labels)

    @property
    def num_edges(self):
        return int(self.indptr[-1]) // 2

    def _check_node(self, v):
        if not 0 <= v < self.num_nodes:
            raise IndexError(f"node id {v} out of range [0, {self.num_nodes})")

    def neighbors(self, v):
        self._check_node(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v):
        self._check_node(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def has_edge(self, u, v):
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)


class MultiGraph:
    """Undirected multi-graph: parallel edges exist only across edge types.

    Immutable after construction; all adjacency arrays may be read concurrently.
    """

    def __init__(self, labels, types, adjacency):
        """adjacency: {type: (indptr, indices)} with sorted, symmetric neighbor lists."""
        self.labels = list(labels)
        self.label_to_id = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.label_to_id) != len(self.labels):
            raise EdgeListError("node labels are not unique")
        self.types = tuple(types)
        if not self.types:
            raise EdgeListError("at least one edge type is required")
        self._indptr = {t: adjacency[t][0] for t in self.types}
        self._indices = {t: adjacency[t][1] for t in self.types}
        self._flat = None

    # -- basic accessors ---------------------------------------------------

    @property
    def num_nodes(self):
        return len(self.labels)

    def node_id(self, label):
        try:
            return self.label_to_id[label]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None

    def _check_type(self, t):
        if t not in self._indptr:
            raise KeyError(f"undeclared edge type {t!r} (declared: {self.types})")

    def _check_node(self, v):
        if not 0 <= v < self.num_nodes:
            raise IndexError(f"node id {v} out of range [0, {self.num_nodes})")

    def neighbors(self, v, t):
        self._check_node(v)
        self._check_type(t)
        indptr, indices = self._indptr[t], self._indices[t]
        return indices[indptr[v]:indptr[v + 1]]

    def degree(self, v, t=None):
        """Neighbor count for type t, or summed over all types when t is None."""
        self._check_node(v)
        if t is not None:
            self._check_type(t)
            indptr = self._indptr[t]
            return int(indptr[v + 1] - indptr[v])
        return sum(int(self._indptr[x][v + 1] - self._indptr[x][v]) for x in self.types)

    def type_degrees(self, v):
        """Per-type degrees of v, in declared type order."""
        self._check_node(v)
        return np.array(
            [self._indptr[t][v + 1] - self._indptr[t][v] for t in self.types],
            dtype=np.int64,
        )

    def has_edge(self, u, v, t):
        nbrs = self.neighbors(u, t)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def edge_count(self, t=None):
        if t is not None:
            self._check_type(t)
            return int(self._indptr[t][-1]) // 2
        return sum(int(self._indptr[x][-1]) for x in self.types) // 2

    def edges(self, t):
        """Canonical (u, v) pairs (u < v) of type t, sorted."""
        self._check_type(t)
        indptr, indices = self._indptr[t], self._indices[t]
        out = []
        for u in range(self.num_nodes):
            for v in indices[indptr[u]:indptr[u + 1]]:
                if u < v:
                    out.append((u, int(v)))
        return out

    # -- multi-edge views --------------------------------------------------

    def flat_adjacency(self):
        """(indptr, indices): all incident edge slots per node, across types.

        A neighbor connected by m types appears m times; this is the sampling
        space for multiplicity-weighted walks.
        """
        if self._flat is None:
            n = self.num_nodes
            indptr = np.zeros(n + 1, dtype=np.int64)
            for t in self.types:
                indptr[1:] += np.diff(self._indptr[t])
            np.cumsum(indptr, out=indptr)
            indices = np.empty(indptr[-1], dtype=np.int64)
            cursor = indptr[:-1].copy()
            for t in self.types:
                tp, ti = self._indptr[t], self._indices[t]
                for u in range(n):
                    deg = tp[u + 1] - tp[u]
                    indices[cursor[u]:cursor[u] + deg] = ti[tp[u]:tp[u + 1]]
                    cursor[u] += deg
            self._flat = (indptr, indices)
        return self._flat

    def split(self, t):
        """Homogeneous subgraph of type t over the same node-id space."""
        self._check_type(t)
        return HomogeneousGraph(self.labels, t, self._indptr[t], self._indices[t])

    # -- serialization -----------------------------------------------------

    def dumps(self):
        lines = [GRAPH_MAGIC, f"nodes {self.num_nodes}",
                 "types " + " ".join(self.types), "labels"]
        lines.extend(self.labels)
        for t in self.types:
            lines.append(f"csr {t}")
            lines.append(" ".join(map(str, self._indptr[t])))
            lines.append(" ".join(map(str, self._indices[t])))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.dumps())

    def content_hash(self):
        """Stable hex digest of the serialized adjacency, used for provenance."""
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()[:16]

    @classmethod
    def loads(cls, text):
        lines = text.splitlines()
        if not lines or lines[0] != GRAPH_MAGIC:
            raise EdgeListError(f"bad graph snapshot header (expected {GRAPH_MAGIC!r})")
        n = int(lines[1].split()[1])
        types = tuple(lines[2].split()[1:])
        if lines[3] != "labels":
            raise EdgeListError("graph snapshot missing label table")
        labels = lines[4:4 + n]
        adjacency = {}
        pos = 4 + n
        for _ in types:
            tag, t = lines[pos].split(maxsplit=1)
            if tag != "csr":
                raise EdgeListError(f"graph snapshot: expected csr block, got {lines[pos]!r}")
            indptr = np.array(lines[pos + 1].split(), dtype=np.int64)
            indices = np.array(lines[pos + 2].split(), dtype=np.int64)
            adjacency[t] = (indptr, indices)
            pos += 3
        return cls(labels, types, adjacency)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as f:
            return cls.loads(f.read())


def from_edges(edges, types=None, nodes=None):
    """Build a MultiGraph from (src_label, dst_label, type) triples.

    Duplicate triples (in either orientation) collapse to one undirected edge.
    With types=None the schema is open: types are declared in first-appearance
    order. Self-loops are rejected by the caller (see load_edge_list).
    `nodes` optionally fixes the node roster and id order up front (labels
    not in it still intern on first appearance, after the roster).
    """
    closed = types is not None
    type_list = list(types) if closed else []
    labels = []
    label_to_id = {}
    pairs = {t: set() for t in type_list}

    def intern(label):
        i = label_to_id.get(label)
        if i is None:
            i = len(labels)
            label_to_id[label] = i
            labels.append(label)
        return i

    if nodes is not None:
        for label in nodes:
            intern(label)

    for src, dst, t in edges:
        if t not in pairs:
            if closed:
                raise EdgeListError(f"unknown edge type {t!r} (schema: {type_list})")
            type_list.append(t)
            pairs[t] = set()
        u, v = intern(src), intern(dst)
        if u == v:
            raise EdgeListError(f"self-loop on {src!r}")
        pairs[t].add((min(u, v), max(u, v)))

    if not type_list:
        type_list = list(DEFAULT_TYPES)
        pairs = {t: set() for t in type_list}
    n = len(labels)
    adjacency = {t: _build_csr(n, pairs[t]) for t in type_list}
    return MultiGraph(labels, type_list, adjacency)


def load_edge_list(source, types=DEFAULT_TYPES):
    """Parse a tab-separated `src dst type` edge list into a MultiGraph.

    `source` is a path or an iterable of lines. Lines starting with `#` and
    blank lines are ignored. Self-loop lines are reported and skipped;
    malformed lines and (for a closed schema) unknown types raise
    EdgeListError with the offending line number.
    """
    if isinstance(source, (str, bytes)):
        with open(source, encoding="utf-8") as f:
            return load_edge_list(f, types=types)

    triples = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3 or not all(p.strip() for p in parts):
            raise EdgeListError(f"line {lineno}: expected 'src<TAB>dst<TAB>type', got {line!r}")
        src, dst, t = (p.strip() for p in parts)
        if any(ch.isspace() for ch in src + dst):
            raise EdgeListError(f"line {lineno}: node labels must not contain whitespace")
        if src == dst:
            log.warning("line %d: self-loop on %r rejected, continuing", lineno, src)
            continue
        if types is not None and t not in types:
            raise EdgeListError(f"line {lineno}: unknown edge type {t!r} (schema: {list(types)})")
        triples.append((src, dst, t))
    return from_edges(triples, types=types)
