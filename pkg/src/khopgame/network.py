"""Network, community, and game-parameter loading.

Input files are line-oriented UTF-8 text; lines starting with ``#`` or ``%``
are comments and blank lines are skipped. Node identifiers are opaque
strings; internally they map to dense integer indices in order of first
appearance, and adjacency is CSR with neighbor-sorted rows so every
traversal order is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .errors import ParseError, ValidationError

_COMMENT_PREFIXES = ("#", "%")


def _data_lines(path):
    """Yield (line_no, stripped_line) for non-comment, non-blank lines."""
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    with fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(_COMMENT_PREFIXES):
                continue
            yield line_no, line


def _check_prob(value, what, context=""):
    if not 0.0 <= value <= 1.0:
        where = f" ({context})" if context else ""
        raise ValidationError(f"{what} must lie in [0, 1], got {value}{where}")
    return float(value)


class Graph:
    """Undirected network with edge success and node acceptance probabilities.

    Attributes (treat all as read-only):
        node_ids: identifier of each internal index, in load order.
        edges: int32 array of shape (m, 2), endpoint indices with u < v.
        edge_p: float64[m], per-edge success probability.
        theta: float64[n], per-node acceptance probability.
        indptr, indices, adj_eid: CSR adjacency, neighbor-sorted rows.
    """

    __slots__ = ("node_ids", "edges", "edge_p", "theta", "indptr", "indices", "adj_eid", "_index", "_eid")

    def __init__(self, node_ids, edges, edge_p, theta):
        self.node_ids = tuple(str(u) for u in node_ids)
        n = len(self.node_ids)
        self._index = {u: i for i, u in enumerate(self.node_ids)}
        if len(self._index) != n:
            raise ValidationError("duplicate node identifiers")

        pairs = []
        self._eid = {}
        for eid, (a, b) in enumerate(edges):
            a, b = int(a), int(b)
            if not (0 <= a < n and 0 <= b < n):
                raise ValidationError(f"edge ({a}, {b}) references a node outside the graph")
            if a == b:
                raise ValidationError(f"self-loop on node {self.node_ids[a]!r}")
            if a > b:
                a, b = b, a
            if (a, b) in self._eid:
                raise ValidationError(
                    f"duplicate edge {self.node_ids[a]!r} -- {self.node_ids[b]!r}"
                )
            self._eid[(a, b)] = eid
            pairs.append((a, b))
        m = len(pairs)
        self.edges = np.asarray(pairs, dtype=np.int32).reshape(m, 2)

        self.edge_p = np.ascontiguousarray(edge_p, dtype=np.float64)
        if self.edge_p.shape != (m,):
            raise ValidationError(f"expected {m} edge probabilities, got shape {self.edge_p.shape}")
        for eid in range(m):
            _check_prob(self.edge_p[eid], "edge probability", self._edge_name(eid))
        self.theta = np.ascontiguousarray(theta, dtype=np.float64)
        if self.theta.shape != (n,):
            raise ValidationError(f"expected {n} acceptance probabilities, got shape {self.theta.shape}")
        for i in range(n):
            _check_prob(self.theta[i], "acceptance probability", self.node_ids[i])

        self.indptr, self.indices, self.adj_eid = _build_csr(n, pairs)

    # --- construction helpers -------------------------------------------

    @classmethod
    def build(cls, nodes, edges, default_p=0.5, theta=1.0):
        """Construct a graph from identifiers.

        Args:
            nodes: ordered iterable of node identifiers.
            edges: iterable of (u, v) or (u, v, p) identifier tuples.
            default_p: success probability for edges without an explicit p.
            theta: scalar, mapping id -> value, or sequence aligned to nodes.
        """
        node_ids = [str(u) for u in nodes]
        index = {u: i for i, u in enumerate(node_ids)}
        if len(index) != len(node_ids):
            raise ValidationError("duplicate node identifiers")
        pairs = []
        probs = []
        for item in edges:
            if len(item) == 2:
                u, v = item
                p = default_p
            elif len(item) == 3:
                u, v, p = item
            else:
                raise ValidationError(f"edge must be (u, v) or (u, v, p), got {item!r}")
            for x in (u, v):
                if str(x) not in index:
                    raise ValidationError(f"edge endpoint {x!r} is not a known node")
            pairs.append((index[str(u)], index[str(v)]))
            probs.append(float(p))
        n = len(node_ids)
        if isinstance(theta, dict):
            missing = [u for u in node_ids if u not in theta]
            if missing:
                raise ValidationError(f"theta mapping is missing nodes: {missing}")
            theta_arr = np.array([float(theta[u]) for u in node_ids], dtype=np.float64)
        elif np.isscalar(theta):
            theta_arr = np.full(n, float(theta), dtype=np.float64)
        else:
            theta_arr = np.asarray(theta, dtype=np.float64)
        return cls(node_ids, pairs, np.asarray(probs, dtype=np.float64), theta_arr)

    def with_theta(self, theta):
        """Copy of this graph with a replaced acceptance vector."""
        g = object.__new__(Graph)
        for slot in ("node_ids", "edges", "edge_p", "indptr", "indices", "adj_eid", "_index", "_eid"):
            setattr(g, slot, getattr(self, slot))
        arr = np.ascontiguousarray(theta, dtype=np.float64)
        if arr.shape != (self.n,):
            raise ValidationError(f"expected {self.n} acceptance probabilities, got shape {arr.shape}")
        for i in range(self.n):
            _check_prob(arr[i], "acceptance probability", self.node_ids[i])
        g.theta = arr
        return g

    # --- queries ---------------------------------------------------------

    @property
    def n(self):
        return len(self.node_ids)

    @property
    def m(self):
        return self.edges.shape[0]

    def index_of(self, node_id):
        try:
            return self._index[str(node_id)]
        except KeyError:
            raise ValidationError(f"unknown node {node_id!r}") from None

    def id_of(self, index):
        return self.node_ids[index]

    def edge_index(self, u, v):
        a, b = self.index_of(u), self.index_of(v)
        if a > b:
            a, b = b, a
        try:
            return self._eid[(a, b)]
        except KeyError:
            raise ValidationError(f"no edge between {u!r} and {v!r}") from None

    def edge_prob(self, u, v):
        return float(self.edge_p[self.edge_index(u, v)])

    def accept_prob(self, u):
        return float(self.theta[self.index_of(u)])

    def degree(self, u):
        i = self.index_of(u)
        return int(self.indptr[i + 1] - self.indptr[i])

    def edge_ids(self):
        """Edges as identifier pairs, in edge-index order."""
        return [(self.node_ids[a], self.node_ids[b]) for a, b in self.edges]

    def index_mapping(self):
        """The node identifier -> internal index mapping, for audit."""
        return dict(self._index)

    def _edge_name(self, eid):
        a, b = self.edges[eid] if self.edges.size else (0, 0)
        if not self._eid:
            return f"edge {eid}"
        return f"{self.node_ids[a]} -- {self.node_ids[b]}"

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _build_csr(n, pairs):
    adj = [[] for _ in range(n)]
    for eid, (a, b) in enumerate(pairs):
        adj[a].append((b, eid))
        adj[b].append((a, eid))
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        adj[v].sort()
        indptr[v + 1] = indptr[v] + len(adj[v])
    nnz = int(indptr[n])
    indices = np.zeros(nnz, dtype=np.int32)
    adj_eid = np.zeros(nnz, dtype=np.int32)
    pos = 0
    for v in range(n):
        for w, eid in adj[v]:
            indices[pos] = w
            adj_eid[pos] = eid
            pos += 1
    return indptr, indices, adj_eid


# --- parameters ----------------------------------------------------------


@dataclass(frozen=True)
class GameParams:
    """Hop limit k and the revenue vector R_0..R_k.

    Revenue entries are positive integers and non-increasing (farther
    participants yield less).
    """

    k: int
    revenue: tuple

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 0:
            raise ValidationError(f"k must be a non-negative integer, got {self.k!r}")
        rev = tuple(self.revenue)
        object.__setattr__(self, "revenue", rev)
        if len(rev) != self.k + 1:
            raise ValidationError(f"revenue needs exactly k+1={self.k + 1} entries, got {len(rev)}")
        for r in rev:
            if not isinstance(r, (int, np.integer)) or r < 1:
                raise ValidationError(f"revenue entries must be positive integers, got {r!r}")
        for a, b in zip(rev, rev[1:]):
            if a < b:
                raise ValidationError(f"revenue must be non-increasing, got {rev}")

    def revenue_array(self):
        return np.asarray(self.revenue, dtype=np.int64)


# --- communities ----------------------------------------------------------


class CommunityStructure:
    """A partition of the graph's nodes, ordered by descending size.

    Ties are broken by label order; this ordering is load-bearing for
    budget allocation, which hands leftover invitations to the largest
    communities first.
    """

    __slots__ = ("labels", "members", "node_ids", "node_community", "_index")

    def __init__(self, labels, members, node_ids):
        self.labels = tuple(str(x) for x in labels)
        self.members = tuple(tuple(sorted(int(i) for i in group)) for group in members)
        self.node_ids = tuple(str(u) for u in node_ids)
        self._index = {u: i for i, u in enumerate(self.node_ids)}
        if len(self.labels) != len(self.members):
            raise ValidationError("labels and member groups are misaligned")
        n = len(self.node_ids)
        self.node_community = np.full(n, -1, dtype=np.int32)
        for c, group in enumerate(self.members):
            if not group:
                raise ValidationError(f"community {self.labels[c]!r} is empty")
            for i in group:
                if not 0 <= i < n:
                    raise ValidationError(f"community member index {i} out of range")
                if self.node_community[i] >= 0:
                    raise ValidationError(f"node {self.node_ids[i]!r} belongs to two communities")
                self.node_community[i] = c
        uncovered = [self.node_ids[i] for i in range(n) if self.node_community[i] < 0]
        if uncovered:
            raise ValidationError(f"nodes missing a community label: {uncovered}")

    @classmethod
    def from_assignments(cls, assignment, graph):
        """Build from a node id -> label mapping covering every graph node."""
        groups = {}
        for node_id, label in assignment.items():
            idx = graph.index_of(node_id)
            groups.setdefault(str(label), []).append(idx)
        order = sorted(groups, key=lambda lab: (-len(groups[lab]), lab))
        return cls(order, [groups[lab] for lab in order], graph.node_ids)

    @property
    def r(self):
        return len(self.members)

    @property
    def sizes(self):
        return tuple(len(g) for g in self.members)

    @property
    def n(self):
        return len(self.node_ids)

    def community_of(self, node_id):
        """Index (into `members`) of the community holding node_id."""
        try:
            i = self._index[str(node_id)]
        except KeyError:
            raise ValidationError(f"unknown node {node_id!r}") from None
        return int(self.node_community[i])

    def member_ids(self, c):
        return tuple(self.node_ids[i] for i in self.members[c])

    def matches(self, graph):
        return self.node_ids == graph.node_ids

    def __repr__(self):
        return f"CommunityStructure(r={self.r}, sizes={self.sizes})"


# --- loaders ---------------------------------------------------------------


def parse_theta_mode(spec):
    """Parse an acceptance-sampling directive.

    Accepts ``uniform``, ``const:<v>``, or ``file:<path>``; returns a
    (kind, argument) pair.
    """
    spec = str(spec).strip()
    if spec == "uniform":
        return ("uniform", None)
    if spec.startswith("const:"):
        try:
            value = float(spec[len("const:"):])
        except ValueError:
            raise ValidationError(f"bad constant in theta mode {spec!r}") from None
        return ("const", _check_prob(value, "acceptance probability"))
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        if not path:
            raise ValidationError("theta mode 'file:' needs a path")
        return ("file", path)
    raise ValidationError(f"theta mode must be uniform, const:<v>, or file:<path>, got {spec!r}")


def _load_theta_file(path, node_ids):
    values = {}
    for line_no, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected '<node> <theta>', got {line!r}")
        node, text = parts
        if node in values:
            raise ValidationError(f"{path}:{line_no}: duplicate theta for node {node!r}")
        try:
            value = float(text)
        except ValueError:
            raise ParseError(path, line_no, f"bad theta value {text!r}") from None
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{path}:{line_no}: theta must lie in [0, 1], got {value}")
        values[node] = value
    known = set(node_ids)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValidationError(f"{path}: theta given for unknown nodes: {unknown}")
    missing = [u for u in node_ids if u not in values]
    if missing:
        raise ValidationError(f"{path}: theta missing for nodes: {missing}")
    return np.array([values[u] for u in node_ids], dtype=np.float64)


def load_graph(path, default_p=0.5, theta_mode="uniform", seed=0):
    """Load an edge-list file.

    Each data line is ``<u> <v> [p]``; the optional third field overrides
    `default_p` for that edge. A line holding a single token declares an
    isolated node. Node acceptance probabilities are filled per
    `theta_mode` (see parse_theta_mode); the uniform mode samples once from
    `seed`, so equal seeds give identical graphs.
    """
    _check_prob(default_p, "default edge probability")
    kind, arg = parse_theta_mode(theta_mode)

    node_ids = []
    index = {}
    pairs = []
    probs = []
    seen = {}
    for line_no, line in _data_lines(path):
        parts = line.split()
        if len(parts) == 1:
            u = parts[0]
            if u not in index:
                index[u] = len(node_ids)
                node_ids.append(u)
            continue
        if len(parts) not in (2, 3):
            raise ParseError(path, line_no, f"expected '<u> <v> [p]' or '<u>', got {line!r}")
        u, v = parts[0], parts[1]
        if u == v:
            raise ValidationError(f"{path}:{line_no}: self-loop on node {u!r}")
        p = default_p
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise ParseError(path, line_no, f"bad edge probability {parts[2]!r}") from None
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{path}:{line_no}: edge probability must lie in [0, 1], got {p}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise ValidationError(
                f"{path}:{line_no}: duplicate edge {u!r} -- {v!r} (first seen on line {seen[key]};"
                " directed duplicates are rejected, not merged)"
            )
        seen[key] = line_no
        for x in (u, v):
            if x not in index:
                index[x] = len(node_ids)
                node_ids.append(x)
        pairs.append((index[u], index[v]))
        probs.append(p)

    n = len(node_ids)
    if kind == "uniform":
        theta = seeding.generator(seed).random(n)
    elif kind == "const":
        theta = np.full(n, arg, dtype=np.float64)
    else:
        theta = _load_theta_file(arg, node_ids)
    return Graph(node_ids, pairs, np.asarray(probs, dtype=np.float64), theta)


def load_communities(path, graph):
    """Load a ``<node> <label>`` file as a partition of the graph's nodes."""
    assignment = {}
    for line_no, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected '<node> <label>', got {line!r}")
        node, label = parts
        if node not in graph._index:
            raise ValidationError(f"{path}:{line_no}: label for unknown node {node!r}")
        if node in assignment:
            raise ValidationError(f"{path}:{line_no}: node {node!r} labeled twice")
        assignment[node] = label
    missing = [u for u in graph.node_ids if u not in assignment]
    if missing:
        raise ValidationError(f"{path}: nodes missing a community label: {missing}")
    return CommunityStructure.from_assignments(assignment, graph)


# --- statistics ------------------------------------------------------------


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    average_degree: float


def graph_stats(graph):
    n, m = graph.n, graph.m
    return GraphStats(n=n, m=m, average_degree=(2.0 * m / n) if n else 0.0)


def neighbors(graph, u):
    """All nodes sharing an edge with u, as a set of identifiers."""
    i = graph.index_of(u)
    return {graph.node_ids[w] for w in graph.indices[graph.indptr[i]:graph.indptr[i + 1]]}
