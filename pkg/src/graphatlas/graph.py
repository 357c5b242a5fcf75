"""Immutable CSR graph, edge-list ingestion, and per-subgraph metrics.

The layout is deliberately minimal: an ``offsets`` array of length ``n + 1``
and a flat ``neighbors`` array, with every adjacency list sorted ascending.
Undirected graphs store each edge in both lists. Nothing downstream mutates a
built graph, so instances are safe to share across threads; derived graphs
(induced subgraphs, undirected views) are fresh rebuilds.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, FormatError

OFFSET_DTYPE = np.int64
NODE_DTYPE = np.int32


@dataclass(eq=False)
class Graph:
    """Adjacency structure in compressed sparse row form.

    The neighbors of node ``u`` are ``neighbors[offsets[u]:offsets[u + 1]]``.
    Invariants: offsets non-decreasing with ``offsets[n]`` equal to the total
    entry count, every neighbor id in ``[0, n)``, no self-loops, no duplicate
    entries within one list, and symmetric adjacency when undirected.
    """

    n: int
    directed: bool
    offsets: np.ndarray
    neighbors: np.ndarray
    labels: list[str] | None = None

    _und: "Graph | None" = field(default=None, repr=False, compare=False)
    _entry_src: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def edge_count(self) -> int:
        """Number of edges; undirected graphs count each stored pair once."""
        total = int(self.offsets[-1])
        return total if self.directed else total // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def degree(self, u: int) -> int:
        return int(self.offsets[u + 1] - self.offsets[u])

    def adj(self, u: int) -> np.ndarray:
        return self.neighbors[self.offsets[u]:self.offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.adj(u)
        i = np.searchsorted(row, v)
        return i < len(row) and row[i] == v

    def entry_sources(self) -> np.ndarray:
        """Source node of every adjacency entry, parallel to ``neighbors``."""
        if self._entry_src is None:
            self._entry_src = np.repeat(
                np.arange(self.n, dtype=NODE_DTYPE), self.degrees()
            )
        return self._entry_src

    def undirected_view(self) -> "Graph":
        """The same node set with symmetrized, deduplicated adjacency."""
        if not self.directed:
            return self
        if self._und is None:
            src = self.entry_sources()
            self._und = from_edge_arrays(
                self.n, src, self.neighbors, directed=False, labels=self.labels
            )[0]
        return self._und

    def induced(self, nodes: np.ndarray) -> "Graph":
        """Subgraph on ``nodes`` (sorted, unique), relabeled to local ids.

        Local id order follows the order of ``nodes``, so neighbor lists stay
        sorted without re-sorting.
        """
        nodes = np.asarray(nodes)
        lookup = np.full(self.n, -1, dtype=NODE_DTYPE)
        lookup[nodes] = np.arange(len(nodes), dtype=NODE_DTYPE)
        src = self.entry_sources()
        keep = (lookup[src] >= 0) & (lookup[self.neighbors] >= 0)
        new_src = lookup[src[keep]]
        new_dst = lookup[self.neighbors[keep]]
        offsets = np.zeros(len(nodes) + 1, dtype=OFFSET_DTYPE)
        np.cumsum(np.bincount(new_src, minlength=len(nodes)), out=offsets[1:])
        labels = None
        if self.labels is not None:
            labels = [self.labels[int(g)] for g in nodes]
        return Graph(len(nodes), self.directed, offsets,
                     new_dst.astype(NODE_DTYPE), labels)

    def validate(self) -> None:
        """Assert all structural invariants; used by tests."""
        assert len(self.offsets) == self.n + 1
        assert self.offsets[0] == 0
        assert np.all(np.diff(self.offsets) >= 0)
        assert int(self.offsets[-1]) == len(self.neighbors)
        if len(self.neighbors):
            assert self.neighbors.min() >= 0 and self.neighbors.max() < self.n
        src = self.entry_sources()
        assert not np.any(src == self.neighbors), "self-loop present"
        for u in range(self.n):
            row = self.adj(u)
            assert np.all(np.diff(row) > 0), f"unsorted or duplicate row {u}"
        if not self.directed:
            fwd = np.lexsort((self.neighbors, src))
            rev = np.lexsort((src, self.neighbors))
            assert np.array_equal(src[fwd], self.neighbors[rev])
            assert np.array_equal(self.neighbors[fwd], src[rev])
        if self.labels is not None:
            assert len(self.labels) == self.n


def from_edge_arrays(n, us, vs, directed=False, labels=None):
    """Build a Graph from parallel endpoint arrays.

    Self-loops and duplicate edges are dropped; for undirected graphs a
    duplicate means the same unordered pair. Returns
    ``(graph, duplicates_dropped, self_loops_dropped)``.
    """
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    loops = us == vs
    loop_count = int(loops.sum())
    us, vs = us[~loops], vs[~loops]
    if directed:
        a, b = us, vs
    else:
        a, b = np.minimum(us, vs), np.maximum(us, vs)
    key = a * n + b
    unique = np.unique(key)
    dup_count = len(key) - len(unique)
    a = unique // n
    b = unique % n
    if directed:
        src, dst = a, b
    else:
        src = np.concatenate([a, b])
        dst = np.concatenate([b, a])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    offsets = np.zeros(n + 1, dtype=OFFSET_DTYPE)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    g = Graph(n, directed, offsets, dst.astype(NODE_DTYPE), labels)
    return g, dup_count, loop_count


@dataclass
class IngestReport:
    """What an edge-list parse accepted and dropped."""

    n: int
    edges: int
    duplicates_dropped: int
    self_loops_dropped: int
    labeled_nodes: int


def parse_edge_list(source, directed=False):
    """Parse edge-list text into a Graph plus an IngestReport.

    ``source`` may be bytes, str, or a binary/text file-like object. Lines are
    ``u v`` integer pairs; ``# <id> <label>`` lines attach labels; a
    ``%% n=<count>`` line declares trailing isolated nodes. Other ``#`` lines
    are plain comments. Empty input is an empty graph, not an error.
    """
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data

    us: list[int] = []
    vs: list[int] = []
    label_map: dict[int, str] = {}
    declared_n = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%%"):
            body = line[2:].strip()
            if body.startswith("n="):
                try:
                    declared_n = max(declared_n, int(body[2:]))
                    continue
                except ValueError:
                    raise FormatError("bad node-count header", line=lineno)
            raise FormatError("unknown %% header", line=lineno)
        if line.startswith("#"):
            parts = line[1:].strip().split(maxsplit=1)
            if len(parts) == 2 and parts[0].isdigit():
                label_map[int(parts[0])] = parts[1]
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError("malformed edge line", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError("malformed edge line", line=lineno)
        if u < 0 or v < 0:
            raise FormatError("negative node id", line=lineno)
        us.append(u)
        vs.append(v)

    max_id = -1
    if us:
        max_id = max(max(us), max(vs))
    if label_map:
        max_id = max(max_id, max(label_map))
    n = max(declared_n, max_id + 1)

    labels = None
    if label_map:
        labels = [""] * n
        for i, lab in label_map.items():
            labels[i] = lab

    g, dups, loops = from_edge_arrays(
        n, np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64),
        directed=directed, labels=labels,
    )
    report = IngestReport(n=n, edges=g.edge_count, duplicates_dropped=dups,
                          self_loops_dropped=loops, labeled_nodes=len(label_map))
    return g, report


def load_edge_list(source, directed=False) -> Graph:
    """Parse edge-list text into a Graph (see :func:`parse_edge_list`)."""
    return parse_edge_list(source, directed=directed)[0]


def load_labels(source, n: int) -> list[str]:
    """Read an ``id<TAB>label`` file into a label array of length ``n``."""
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    labels = [""] * n
    for lineno, raw in enumerate(data.splitlines(), 1):
        if not raw.strip():
            continue
        head, sep, rest = raw.partition("\t")
        if not sep:
            raise FormatError("label line missing tab", line=lineno)
        try:
            i = int(head)
        except ValueError:
            raise FormatError("bad node id in label file", line=lineno)
        if not 0 <= i < n:
            raise FormatError("label id out of range", line=lineno)
        labels[i] = rest.strip()
    return labels


# ---- metrics ---------------------------------------------------------------


@dataclass
class DegreeHistogram:
    """Map degree -> number of nodes with that degree; counts sum to n."""

    entries: dict[int, int]


@dataclass
class HopPlot:
    """Sequence (h, N(h)): ordered pairs u != v within distance h.

    ``exact`` is False when N(h) was estimated from BFS samples and scaled.
    """

    entries: list[tuple[int, int]]
    exact: bool


def degree_distribution(g: Graph) -> DegreeHistogram:
    """Histogram over out-degree (plain degree for undirected graphs)."""
    if g.n == 0:
        return DegreeHistogram({})
    counts = np.bincount(g.degrees())
    return DegreeHistogram({int(d): int(c) for d, c in enumerate(counts) if c})


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-10,
             max_iter: int = 1000) -> np.ndarray:
    """Power-iteration PageRank with uniform teleport.

    Dangling nodes redistribute their mass uniformly. Iteration stops when the
    L1 change drops to ``tol`` or after ``max_iter`` rounds; the result sums
    to 1 within 10 * tol.
    """
    if g.n == 0:
        raise ContractError("pagerank requires a non-empty graph")
    if not 0.0 < damping < 1.0:
        raise ContractError("damping must be in (0, 1)")
    if tol <= 0.0:
        raise ContractError("tol must be positive")
    n = g.n
    deg = g.degrees()
    src = g.entry_sources()
    dst = g.neighbors
    inv_deg = np.zeros(n)
    has_out = deg > 0
    inv_deg[has_out] = 1.0 / deg[has_out]
    pr = np.full(n, 1.0 / n)
    base = (1.0 - damping) / n
    for _ in range(max_iter):
        dangling = float(pr[~has_out].sum()) if not has_out.all() else 0.0
        acc = np.zeros(n)
        np.add.at(acc, dst, pr[src] * inv_deg[src])
        new = base + damping * (acc + dangling / n)
        delta = float(np.abs(new - pr).sum())
        pr = new
        if delta <= tol:
            break
    return pr


def _bfs_levels(offsets, neighbors, start, dist):
    """BFS from ``start`` writing hop counts into ``dist`` (-1 = unreached)."""
    dist[start] = 0
    q = deque([start])
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for v in neighbors[offsets[u]:offsets[u + 1]]:
            if dist[v] < 0:
                dist[v] = du
                q.append(int(v))


def weak_components(g: Graph):
    """Component ids ignoring edge direction.

    Ids are assigned in order of each component's smallest node id, so the
    output is deterministic. Returns ``(ids, count)``.
    """
    und = g.undirected_view()
    ids = np.full(g.n, -1, dtype=NODE_DTYPE)
    count = 0
    for start in range(g.n):
        if ids[start] >= 0:
            continue
        ids[start] = count
        q = deque([start])
        while q:
            u = q.popleft()
            for v in und.adj(u):
                if ids[v] < 0:
                    ids[v] = count
                    q.append(int(v))
        count += 1
    return ids, count


def strong_components(g: Graph):
    """Strongly connected components (mutual reachability) for directed
    graphs; equals :func:`weak_components` for undirected ones.

    Ids are canonicalized the same way: in order of smallest member id.
    """
    if not g.directed:
        return weak_components(g)
    n = g.n
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    comp_raw = np.full(n, -1, dtype=NODE_DTYPE)
    stack: list[int] = []
    counter = 0
    ncomp = 0
    offsets, neighbors = g.offsets, g.neighbors
    for root in range(n):
        if index[root] >= 0:
            continue
        # iterative Tarjan: frames are (node, next-neighbor position)
        work = [(root, int(offsets[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            u, pos = work[-1]
            if pos < offsets[u + 1]:
                work[-1] = (u, pos + 1)
                v = int(neighbors[pos])
                if index[v] < 0:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack[v] = True
                    work.append((v, int(offsets[v])))
                elif on_stack[v]:
                    low[u] = min(low[u], index[v])
            else:
                work.pop()
                if work:
                    p = work[-1][0]
                    low[p] = min(low[p], low[u])
                if low[u] == index[u]:
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp_raw[w] = ncomp
                        if w == u:
                            break
                    ncomp += 1
    # canonicalize: component containing the smallest node id gets id 0, etc.
    first_member = np.full(ncomp, n, dtype=np.int64)
    for u in range(n - 1, -1, -1):
        first_member[comp_raw[u]] = u
    order = np.argsort(first_member)
    relabel = np.empty(ncomp, dtype=NODE_DTYPE)
    relabel[order] = np.arange(ncomp, dtype=NODE_DTYPE)
    return relabel[comp_raw], ncomp


def hop_plot(g: Graph, exact_threshold: int = 512,
             sample_seeds: int = 16) -> HopPlot:
    """N(h) = ordered pairs (u, v), u != v, with shortest-path distance <= h.

    Exact all-pairs BFS when n <= exact_threshold; otherwise BFS from
    evenly spaced seed nodes with counts scaled by n / #seeds and the result
    flagged approximate.
    """
    if g.n == 0:
        raise ContractError("hop_plot requires a non-empty graph")
    n = g.n
    if n <= exact_threshold:
        seeds = np.arange(n)
        scale = 1.0
        exact = True
    else:
        seeds = np.unique(np.linspace(0, n - 1, num=sample_seeds).astype(np.int64))
        scale = n / len(seeds)
        exact = False
    counts: dict[int, int] = {}
    dist = np.full(n, -1, dtype=np.int64)
    for s in seeds:
        dist.fill(-1)
        _bfs_levels(g.offsets, g.neighbors, int(s), dist)
        reached = dist[dist > 0]
        if len(reached):
            for h, c in zip(*np.unique(reached, return_counts=True)):
                counts[int(h)] = counts.get(int(h), 0) + int(c)
    entries: list[tuple[int, int]] = []
    acc = 0
    for h in sorted(counts):
        acc += counts[h]
        entries.append((h, acc if exact else int(round(acc * scale))))
    return HopPlot(entries, exact)
