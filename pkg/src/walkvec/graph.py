"""Undirected graph loading, preprocessing and exact BFS distances.

Node names from edge/label files are interned to dense 0-based integer ids;
every downstream module works on those ids and the original names are only
restored at I/O boundaries. Adjacency is stored CSR-style (one flat array of
neighbor ids plus per-node offsets) so walk generation can be vectorized and
edge membership checked by binary search.
"""

from __future__ import annotations

import io
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

COMMENT_PREFIXES = ("#", "%")


class EdgeListError(ValueError):
    """Raised for malformed edge list input, carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Graph:
    """Immutable simple undirected graph over dense integer node ids.

    Parameters
    ----------
    names : list of str
        External name of each node; position defines the internal id.
    edges : iterable of (int, int)
        Undirected edges over internal ids. Duplicates and orientation are
        collapsed; self-loops are kept (``preprocess`` removes them).
    """

    def __init__(self, names: list[str], edges):
        self.names = list(names)
        self.name_to_id = {name: i for i, name in enumerate(self.names)}
        n = len(self.names)
        unique = {(u, v) if u <= v else (v, u) for u, v in edges}
        self._edge_set = unique
        adj = defaultdict(list)
        for u, v in unique:
            adj[u].append(v)
            if u != v:
                adj[v].append(u)
        indptr = np.zeros(n + 1, dtype=np.int64)
        for u in range(n):
            indptr[u + 1] = indptr[u] + len(adj[u])
        flat = np.empty(indptr[-1], dtype=np.int32)
        for u in range(n):
            flat[indptr[u]:indptr[u + 1]] = sorted(adj[u])
        self.indptr = indptr
        self.flat_neighbors = flat
        self.degrees = np.diff(indptr).astype(np.int64)

    @property
    def num_nodes(self) -> int:
        return len(self.names)

    @property
    def num_edges(self) -> int:
        return len(self._edge_set)

    @property
    def nodes(self) -> range:
        return range(self.num_nodes)

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of ``u`` (a read-only view)."""
        return self.flat_neighbors[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.degrees[u])

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return i < len(nbrs) and nbrs[i] == v

    def edges(self):
        """All undirected edges as (u, v) with u <= v, in sorted order."""
        return sorted(self._edge_set)

    def __repr__(self):
        return f"Graph(|V|={self.num_nodes}, |E|={self.num_edges})"


@dataclass
class PreprocessReport:
    self_loops_removed: int
    isolates_removed: int


def _open_lines(source):
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        return open(source, "r", encoding="utf-8")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.IOBase) and not isinstance(source, io.TextIOBase):
        return io.TextIOWrapper(source, encoding="utf-8")
    return source


def load_edge_list(source, directed_input: bool = False) -> Graph:
    """Parse a whitespace-separated edge list into an undirected Graph.

    One edge per line: two node names, optional trailing tokens ignored.
    Lines starting with '#' or '%' and blank lines are skipped. The input is
    treated as undirected either way; ``directed_input`` only documents that
    the file may list an edge in both orientations (they are collapsed).

    Raises
    ------
    EdgeListError
        If a non-comment line has fewer than two tokens.
    """
    del directed_input  # orientation is always collapsed
    names: list[str] = []
    name_to_id: dict[str, int] = {}
    edges = []

    def intern(name: str) -> int:
        i = name_to_id.get(name)
        if i is None:
            i = len(names)
            name_to_id[name] = i
            names.append(name)
        return i

    fh = _open_lines(source)
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            tokens = line.split()
            if len(tokens) < 2:
                raise EdgeListError(lineno, f"expected 2 node names, got {len(tokens)} token(s)")
            edges.append((intern(tokens[0]), intern(tokens[1])))
    finally:
        if fh is not source:
            fh.close()
    return Graph(names, edges)


def preprocess(g: Graph) -> tuple[Graph, PreprocessReport]:
    """Remove self-loops, then isolated nodes; re-compact node ids.

    Idempotent. May return an empty graph.
    """
    edges = [(u, v) for u, v in g.edges() if u != v]
    loops = g.num_edges - len(edges)
    touched = set()
    for u, v in edges:
        touched.add(u)
        touched.add(v)
    kept = sorted(touched)
    isolates = g.num_nodes - len(kept)
    old_to_new = {old: new for new, old in enumerate(kept)}
    names = [g.names[old] for old in kept]
    remapped = [(old_to_new[u], old_to_new[v]) for u, v in edges]
    return Graph(names, remapped), PreprocessReport(loops, isolates)


def bfs_distances(g: Graph, source: int, cap: int) -> dict[int, int]:
    """Exact hop distances from ``source`` to every node within ``cap`` hops.

    Nodes farther than ``cap`` are omitted from the result.
    """
    if not 0 <= source < g.num_nodes:
        raise ValueError(f"unknown source node {source}")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    dist = _bfs_array(g, source, cap)
    reached = np.nonzero(dist >= 0)[0]
    return {int(v): int(dist[v]) for v in reached}


def _bfs_array(g: Graph, source: int, cap: int) -> np.ndarray:
    """BFS distances as an int32 array, -1 for unreached/beyond-cap nodes."""
    dist = np.full(g.num_nodes, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int32)
    level = 0
    while len(frontier) and level < cap:
        level += 1
        nxt = []
        for u in frontier:
            nxt.append(g.flat_neighbors[g.indptr[u]:g.indptr[u + 1]])
        cand = np.unique(np.concatenate(nxt)) if nxt else np.empty(0, np.int32)
        fresh = cand[dist[cand] < 0]
        dist[fresh] = level
        frontier = fresh
    return dist


class LabelTable:
    """Multi-label class assignments over internal node ids.

    ``assignments`` maps node-id to a non-empty set of class ids in
    ``[0, num_classes)``. Class names are interned in first-seen order.
    """

    def __init__(self, assignments: dict[int, set[int]], num_classes: int,
                 class_names: list[str] | None = None):
        for node, labels in assignments.items():
            if not labels:
                raise ValueError(f"node {node} has an empty label set")
            if any(not 0 <= c < num_classes for c in labels):
                raise ValueError(f"node {node} has class ids outside [0, {num_classes})")
        self.assignments = assignments
        self.num_classes = num_classes
        self.class_names = class_names or [str(c) for c in range(num_classes)]

    @property
    def nodes(self) -> list[int]:
        return sorted(self.assignments)

    def __len__(self):
        return len(self.assignments)


def load_labels(source, g: Graph, skip_unknown: bool = False) -> LabelTable:
    """Parse a label file: one line per node, "node-name class [class...]".

    Nodes absent from ``g`` raise unless ``skip_unknown`` (useful after
    preprocessing dropped isolates).
    """
    assignments: dict[int, set[int]] = {}
    class_ids: dict[str, int] = {}
    class_names: list[str] = []
    fh = _open_lines(source)
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            tokens = line.split()
            if len(tokens) < 2:
                raise EdgeListError(lineno, "expected a node name and at least one class")
            node_id = g.name_to_id.get(tokens[0])
            if node_id is None:
                if skip_unknown:
                    continue
                raise EdgeListError(lineno, f"unknown node name {tokens[0]!r}")
            labels = set()
            for cls in tokens[1:]:
                if cls not in class_ids:
                    class_ids[cls] = len(class_names)
                    class_names.append(cls)
                labels.add(class_ids[cls])
            assignments.setdefault(node_id, set()).update(labels)
    finally:
        if fh is not source:
            fh.close()
    return LabelTable(assignments, len(class_names), class_names)
