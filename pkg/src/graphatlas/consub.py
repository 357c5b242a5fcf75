"""Multi-source connection subgraph extraction.

For each query source an independent random walk with restart is solved; the
goodness of a node is the product of its per-source steady-state
probabilities (the chance the walkers meet there). Extraction then grows the
source set iteratively: a hop-bounded dynamic program finds the path whose
new nodes have the best geometric-mean goodness, connecting the sources
first, then enriching the subgraph until the node budget is reached.

Walks always use the undirected view of the graph; meeting probability is
symmetric and the motivating queries (who connects these people?) are too.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ExtractionTimeout, InsufficientBudgetError
from .graph import Graph

DEFAULT_RESTART = 0.15
DEFAULT_MAXLEN = 5
DEFAULT_MAX_SOURCES = 8


@dataclass
class RwrVector:
    """Steady state of one restarting walk: fixed point of
    r = c * e_source + (1 - c) * P r with column-stochastic P."""

    source: int
    restart: float
    scores: np.ndarray


@dataclass
class GoodnessField:
    """Per-node product of the query sources' RWR scores."""

    sources: tuple[int, ...]
    scores: np.ndarray


@dataclass
class ConnectionSubgraph:
    """A connected subgraph containing every source, within the node budget.

    ``edges`` are unordered pairs (u < v) of the undirected view, induced on
    ``nodes``.
    """

    nodes: list[int]
    edges: list[tuple[int, int]]
    sources: list[int]
    budget: int


def _segment_reduce_max(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-row max of a CSR-shaped value array; empty rows give -inf."""
    n = len(offsets) - 1
    out = np.full(n, -np.inf)
    starts = offsets[:-1]
    nonempty = starts < offsets[1:]
    if nonempty.any():
        out[nonempty] = np.maximum.reduceat(values, starts[nonempty])
    return out


def rwr(g: Graph, source: int, c: float = DEFAULT_RESTART,
        tol: float = 1e-10, max_iter: int = 10000) -> RwrVector:
    """Random walk with restart from ``source`` by power iteration.

    Degree-zero nodes restart with probability 1, so an isolated source is
    the valid fixed point r = e_source. Iterates until the L1 change is at
    most ``tol``.
    """
    if g.n == 0:
        raise ContractError("rwr requires a non-empty graph")
    if not 0 <= source < g.n:
        raise ContractError(f"source {source} out of range")
    if not 0.0 < c < 1.0:
        raise ContractError("restart probability must be in (0, 1)")
    und = g.undirected_view()
    n = und.n
    deg = und.degrees().astype(np.float64)
    dangling = deg == 0
    inv_deg = np.zeros(n)
    inv_deg[~dangling] = 1.0 / deg[~dangling]

    r = np.zeros(n)
    r[source] = 1.0
    for _ in range(max_iter):
        spread = r * inv_deg
        acc = _segment_reduce_add(spread[und.neighbors], und.offsets)
        new = (1.0 - c) * acc
        new[source] += c + (1.0 - c) * float(r[dangling].sum())
        delta = float(np.abs(new - r).sum())
        r = new
        if delta <= tol:
            break
    return RwrVector(source=source, restart=c, scores=r)


def _segment_reduce_add(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    n = len(offsets) - 1
    out = np.zeros(n)
    starts = offsets[:-1]
    nonempty = starts < offsets[1:]
    if nonempty.any():
        out[nonempty] = np.add.reduceat(values, starts[nonempty])
    return out


def goodness(g: Graph, sources, c: float = DEFAULT_RESTART,
             tol: float = 1e-10, max_sources: int = DEFAULT_MAX_SOURCES
             ) -> GoodnessField:
    """Elementwise product of the per-source RWR vectors.

    A single source reduces to its RWR scores exactly (same computation
    path). Zero wherever some source cannot reach.
    """
    sources = [int(s) for s in sources]
    if not 1 <= len(sources) <= max_sources:
        raise ContractError(
            f"need between 1 and {max_sources} sources, got {len(sources)}")
    if len(set(sources)) != len(sources):
        raise ContractError("duplicate sources")
    scores = rwr(g, sources[0], c, tol).scores.copy()
    for s in sources[1:]:
        scores *= rwr(g, s, c, tol).scores
    return GoodnessField(sources=tuple(sources), scores=scores)


def _induced_components(und: Graph, members: set[int]) -> list[set[int]]:
    """Connected components of the subgraph induced on ``members``."""
    comps: list[set[int]] = []
    seen: set[int] = set()
    for start in sorted(members):
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        q = deque([start])
        while q:
            u = q.popleft()
            for v in und.adj(u):
                v = int(v)
                if v in members and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    q.append(v)
        comps.append(comp)
    return comps


class _PathFinder:
    """Hop-bounded DP over (node, hop-count) states maximizing the summed log
    goodness of interior nodes."""

    def __init__(self, und: Graph, log_g: np.ndarray, maxlen: int):
        self.und = und
        self.log_g = log_g
        self.maxlen = maxlen

    def best_path(self, members: set[int], start_set: set[int],
                  end_test) -> tuple[float, int, list[int]] | None:
        """Best walk from ``start_set`` into an end node accepted by
        ``end_test``, with all interior nodes outside ``members`` and of
        positive goodness.

        Returns ``(mean_log_goodness, interior_count, node_sequence)`` or
        None. Ranking: higher geometric-mean goodness, then fewer new nodes,
        then the smaller node sequence.
        """
        und, maxlen = self.und, self.maxlen
        n = und.n
        member_arr = np.fromiter(members, dtype=np.int64, count=len(members))
        interior_log = self.log_g.copy()
        interior_log[member_arr] = -np.inf

        seed = np.full(n, -np.inf)
        seed[np.fromiter(start_set, dtype=np.int64, count=len(start_set))] = 0.0

        tables = [seed]
        prev = seed
        for _ in range(1, maxlen):
            best_in = _segment_reduce_max(prev[und.neighbors], und.offsets)
            cur = interior_log + best_in
            tables.append(cur)
            prev = cur

        best: tuple[float, int, list[int]] | None = None
        for h in range(1, maxlen):
            table = tables[h]
            reach = _segment_reduce_max(table[und.neighbors], und.offsets)
            for w in sorted(members):
                if not end_test(w):
                    continue
                total = reach[w]
                if total == -np.inf:
                    continue
                mean = total / h
                if best is not None and (mean < best[0] or
                                         (mean == best[0] and h > best[1])):
                    continue
                seq = self._reconstruct(w, h, tables, interior_log, start_set)
                cand = (mean, h, seq)
                if (best is None or mean > best[0]
                        or (mean == best[0] and h < best[1])
                        or (mean == best[0] and h == best[1] and seq < best[2])):
                    best = cand
        return best

    def _reconstruct(self, end: int, hops: int, tables, interior_log,
                     start_set: set[int]) -> list[int]:
        und = self.und
        seq = [end]
        # pick the best (then smallest-id) interior predecessor at each hop
        cur = end
        for h in range(hops, 0, -1):
            nbrs = und.adj(cur)
            vals = tables[h][nbrs]
            top = vals.max()
            cur = int(nbrs[vals == top].min())
            seq.append(cur)
        # cur is now the first interior node; attach the smallest adjacent start
        first_interior = seq[-1]
        starts = [int(v) for v in und.adj(first_interior)
                  if int(v) in start_set]
        seq.append(min(starts))
        seq.reverse()
        return seq


def extract(g: Graph, sources, budget: int, c: float = DEFAULT_RESTART,
            maxlen: int = DEFAULT_MAXLEN, tol: float = 1e-10,
            max_sources: int = DEFAULT_MAX_SOURCES,
            deadline: float | None = None) -> ConnectionSubgraph:
    """Extract a connected subgraph containing all sources, at most ``budget``
    nodes, maximizing goodness along discovered paths.

    Until the sources share one component of the induced subgraph, only
    component-connecting paths are eligible; afterwards paths may loop back
    into the chosen set to enrich it. The chosen path sequence never depends
    on the budget, so a larger budget only extends the result (monotone
    growth). Raises ``InsufficientBudgetError`` when the sources cannot be
    connected at all, or not within the budget.
    """
    sources = [int(s) for s in sources]
    field = goodness(g, sources, c, tol, max_sources=max_sources)
    if budget < len(sources):
        raise ContractError("budget smaller than the number of sources")
    if maxlen < 1:
        raise ContractError("maxlen must be >= 1")

    und = g.undirected_view()
    with np.errstate(divide="ignore"):
        log_g = np.log(field.scores)
    finder = _PathFinder(und, log_g, maxlen)

    chosen: set[int] = set(sources)
    while True:
        if deadline is not None and time.monotonic() > deadline:
            raise ExtractionTimeout("extraction exceeded its time budget")
        comps = _induced_components(und, chosen)
        connected = len(comps) == 1
        if not connected:
            comp_of = {u: i for i, comp in enumerate(comps) for u in comp}
            best = None
            for i, comp in enumerate(comps):
                cand = finder.best_path(
                    chosen, comp, lambda w, i=i: comp_of[w] != i)
                if cand is None:
                    continue
                if (best is None or cand[0] > best[0]
                        or (cand[0] == best[0] and cand[1] < best[1])
                        or (cand[0] == best[0] and cand[1] == best[1]
                            and cand[2] < best[2])):
                    best = cand
            if best is None:
                raise InsufficientBudgetError(
                    "sources cannot be connected: "
                    + _describe_components(comps, sources),
                    disconnected_sources=tuple(
                        s for s in sources
                        if s not in max(comps, key=len)),
                )
            new_nodes = set(best[2]) - chosen
            if len(chosen) + len(new_nodes) > budget:
                raise InsufficientBudgetError(
                    f"connecting the sources needs more than {budget} nodes: "
                    + _describe_components(comps, sources),
                    disconnected_sources=tuple(
                        s for s in sources if s not in max(comps, key=len)),
                )
            chosen |= new_nodes
            continue
        if len(chosen) >= budget:
            break
        cand = finder.best_path(chosen, chosen, lambda w: True)
        if cand is None:
            break
        new_nodes = set(cand[2]) - chosen
        if not new_nodes or len(chosen) + len(new_nodes) > budget:
            break
        chosen |= new_nodes

    nodes = sorted(chosen)
    edges = []
    node_set = chosen
    for u in nodes:
        for v in und.adj(u):
            v = int(v)
            if u < v and v in node_set:
                edges.append((u, v))
    return ConnectionSubgraph(nodes=nodes, edges=edges,
                              sources=sorted(sources), budget=budget)


def _describe_components(comps: list[set[int]],
                         sources: list[int]) -> str:
    groups = []
    for comp in comps:
        inside = sorted(s for s in sources if s in comp)
        if inside:
            groups.append("{" + ", ".join(map(str, inside)) + "}")
    return "source groups " + " | ".join(groups) + " are not connected"
