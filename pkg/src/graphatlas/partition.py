"""Multilevel balanced k-way graph partitioning.

Pipeline: coarsen by repeated heavy-edge matching until the graph is small,
seed k parts on the coarsest graph by region growing with first-fit-decreasing
placement of connected components, then uncoarsen with boundary refinement at
every level. All tie-breaking is by smallest node id so a fixed
``(graph, k, epsilon, seed)`` reproduces the assignment bit for bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InfeasibleError
from .graph import Graph, NODE_DTYPE, OFFSET_DTYPE

WEIGHT_DTYPE = np.int64


@dataclass(eq=False)
class WeightedGraph:
    """Undirected CSR graph with positive integer node and edge weights.

    ``edge_weight`` is parallel to ``neighbors`` and symmetric: both stored
    directions of an edge carry the same weight.
    """

    n: int
    offsets: np.ndarray
    neighbors: np.ndarray
    node_weight: np.ndarray
    edge_weight: np.ndarray

    _entry_src: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_graph(cls, g: Graph) -> "WeightedGraph":
        und = g.undirected_view()
        return cls(
            und.n,
            und.offsets,
            und.neighbors,
            np.ones(und.n, dtype=WEIGHT_DTYPE),
            np.ones(len(und.neighbors), dtype=WEIGHT_DTYPE),
        )

    @property
    def total_node_weight(self) -> int:
        return int(self.node_weight.sum())

    @property
    def total_edge_weight(self) -> int:
        return int(self.edge_weight.sum()) // 2

    def entry_sources(self) -> np.ndarray:
        if self._entry_src is None:
            self._entry_src = np.repeat(
                np.arange(self.n, dtype=NODE_DTYPE), np.diff(self.offsets)
            )
        return self._entry_src

    def adj_slice(self, u: int):
        lo, hi = int(self.offsets[u]), int(self.offsets[u + 1])
        return self.neighbors[lo:hi], self.edge_weight[lo:hi]


@dataclass
class PartitionAssignment:
    """A k-way split: ``part[u]`` in [0, k), its edge cut, and the balance
    tolerance it was produced under."""

    part: np.ndarray
    k: int
    epsilon: float
    cut: int


def _check_assignment(wg: WeightedGraph, part: np.ndarray) -> None:
    if len(part) != wg.n:
        raise ContractError("assignment length does not match graph")
    if wg.n and (part.min() < 0):
        raise ContractError("negative part id in assignment")


def edge_cut(wg: WeightedGraph, part) -> int:
    """Total weight of edges whose endpoints lie in different parts."""
    part = np.asarray(part)
    _check_assignment(wg, part)
    src = wg.entry_sources()
    cross = part[src] != part[wg.neighbors]
    return int(wg.edge_weight[cross].sum()) // 2


def _capacity(total_weight: int, k: int, epsilon: float) -> int:
    return int((1.0 + epsilon) * math.ceil(total_weight / k) + 1e-9)


# ---- coarsening ------------------------------------------------------------


def _mutual_match(wg: WeightedGraph) -> np.ndarray:
    """Maximal matching preferring the heaviest incident edge.

    Runs rounds of mutual proposals: every unmatched node points at its
    heaviest unmatched neighbor (ties to the smaller id) and mutual pairs
    match. Rounds repeat until no unmatched node has an unmatched neighbor,
    which yields a maximal matching with the stated preference order.
    """
    n = wg.n
    match = np.full(n, -1, dtype=np.int64)
    src = wg.entry_sources()
    dst = wg.neighbors
    ew = wg.edge_weight
    while True:
        unmatched = match < 0
        mask = unmatched[src] & unmatched[dst]
        if not mask.any():
            break
        s = src[mask]
        d = dst[mask].astype(np.int64)
        w = ew[mask]
        run_starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
        run_nodes = s[run_starts]
        wmax = np.maximum.reduceat(w, run_starts)
        run_len = np.diff(np.r_[run_starts, len(s)])
        is_max = w == np.repeat(wmax, run_len)
        best = np.minimum.reduceat(np.where(is_max, d, n), run_starts)
        cand = np.full(n, -1, dtype=np.int64)
        cand[run_nodes] = best
        partner = cand[run_nodes]
        mutual = cand[partner] == run_nodes
        us = run_nodes[mutual]
        vs = partner[mutual]
        pick = us < vs
        if not pick.any():
            break
        match[us[pick]] = vs[pick]
        match[vs[pick]] = us[pick]
    return match


def coarsen(wg: WeightedGraph, seed: int = 0):
    """One level of heavy-edge coarsening.

    Matched pairs merge into supernodes (weights add), parallel edges between
    supernodes merge with summed weights, and collapsed self-loops are
    dropped. An edgeless graph comes back unchanged with an identity mapping.
    Returns ``(coarse_graph, mapping)`` where ``mapping[u]`` is u's supernode.
    """
    n = wg.n
    match = _mutual_match(wg)
    node_ids = np.arange(n, dtype=np.int64)
    rep = np.where(match >= 0, np.minimum(node_ids, match), node_ids)
    uniq, mapping = np.unique(rep, return_inverse=True)
    nc = len(uniq)
    if nc == n:
        return wg, node_ids.astype(NODE_DTYPE)
    node_w = np.bincount(mapping, weights=wg.node_weight, minlength=nc)
    src = wg.entry_sources()
    cu = mapping[src]
    cv = mapping[wg.neighbors]
    keep = cu != cv
    key = cu[keep].astype(np.int64) * nc + cv[keep]
    ukey, kinv = np.unique(key, return_inverse=True)
    wsum = np.bincount(kinv, weights=wg.edge_weight[keep])
    csrc = (ukey // nc).astype(NODE_DTYPE)
    cdst = (ukey % nc).astype(NODE_DTYPE)
    offsets = np.zeros(nc + 1, dtype=OFFSET_DTYPE)
    np.cumsum(np.bincount(csrc, minlength=nc), out=offsets[1:])
    coarse = WeightedGraph(nc, offsets, cdst,
                           node_w.astype(WEIGHT_DTYPE),
                           wsum.astype(WEIGHT_DTYPE))
    return coarse, mapping.astype(NODE_DTYPE)


# ---- initial partitioning --------------------------------------------------


def _components(wg: WeightedGraph) -> list[list[int]]:
    seen = np.zeros(wg.n, dtype=bool)
    comps = []
    for start in range(wg.n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        q = deque([start])
        while q:
            u = q.popleft()
            nbrs, _ = wg.adj_slice(u)
            for v in nbrs:
                if not seen[v]:
                    seen[v] = True
                    comp.append(int(v))
                    q.append(int(v))
        comps.append(comp)
    return comps


def _split_component(wg: WeightedGraph, comp: list[int],
                     target: int) -> list[list[int]]:
    """Break one oversized component into BFS-grown chunks of ~target weight.

    Growing starts at the smallest node id and continues from the BFS
    frontier after each chunk fills, so successive chunks stay spread out."""
    comp_sorted = sorted(comp)
    in_comp = set(comp_sorted)
    visited: set[int] = set()
    chunks: list[list[int]] = []
    chunk: list[int] = []
    chunk_w = 0
    pending = deque()
    pending.append(comp_sorted[0])
    remaining_iter = iter(comp_sorted)
    while len(visited) < len(comp_sorted):
        if not pending:
            for u in remaining_iter:
                if u not in visited:
                    pending.append(u)
                    break
        u = pending.popleft()
        if u in visited:
            continue
        visited.add(u)
        chunk.append(u)
        chunk_w += int(wg.node_weight[u])
        nbrs, _ = wg.adj_slice(u)
        for v in sorted(int(x) for x in nbrs):
            if v in in_comp and v not in visited:
                pending.append(v)
        if chunk_w >= target:
            chunks.append(chunk)
            chunk = []
            chunk_w = 0
            remaining_iter = iter(comp_sorted)
    if chunk:
        chunks.append(chunk)
    return chunks


def _initial_partition(wg: WeightedGraph, k: int, epsilon: float,
                       seed: int) -> np.ndarray:
    """Seed k parts: split oversized components by BFS region growing, then
    place all blocks first-fit-decreasing under the capacity bound.

    Fully deterministic: growing and tie-breaking always prefer the smallest
    node id, so ``seed`` is kept only for interface stability."""
    del seed
    total = wg.total_node_weight
    target = math.ceil(total / k)
    cap = _capacity(total, k, epsilon)

    comp_weight = lambda c: int(wg.node_weight[c].sum())
    comps = sorted(_components(wg), key=lambda c: (-comp_weight(c), min(c)))
    blocks: list[list[int]] = []
    for comp in comps:
        if comp_weight(comp) > target:
            blocks.extend(_split_component(wg, comp, target))
        else:
            blocks.append(sorted(comp))

    blocks.sort(key=lambda b: (-int(wg.node_weight[b].sum()), min(b)))
    part = np.full(wg.n, -1, dtype=NODE_DTYPE)
    part_w = np.zeros(k, dtype=np.int64)
    for block in blocks:
        bw = int(wg.node_weight[block].sum())
        placed = False
        for p in range(k):
            if part_w[p] + bw <= cap:
                part[block] = p
                part_w[p] += bw
                placed = True
                break
        if not placed:
            p = int(np.argmin(part_w))
            part[block] = p
            part_w[p] += bw
    _fill_empty_parts(wg, part, k)
    return part


def _fill_empty_parts(wg: WeightedGraph, part: np.ndarray, k: int) -> None:
    """Guarantee every part is non-empty when n >= k (moves one node at a
    time out of the most populated part)."""
    if wg.n < k:
        return
    counts = np.bincount(part, minlength=k)
    while (counts == 0).any():
        empty = int(np.argmin(counts))
        donor = int(np.argmax(counts))
        candidates = np.flatnonzero(part == donor)
        u = int(candidates[0])
        part[u] = empty
        counts[donor] -= 1
        counts[empty] += 1


# ---- refinement ------------------------------------------------------------


def _boundary_nodes(wg: WeightedGraph, part: np.ndarray) -> np.ndarray:
    src = wg.entry_sources()
    cross = part[src] != part[wg.neighbors]
    mask = np.zeros(wg.n, dtype=bool)
    mask[src[cross]] = True
    return np.flatnonzero(mask)


def _node_conn(wg: WeightedGraph, part: np.ndarray, u: int, k: int) -> np.ndarray:
    nbrs, wts = wg.adj_slice(u)
    return np.bincount(part[nbrs], weights=wts, minlength=k)


def _single_move_sweep(wg, part, k, cap, part_w, part_count):
    """One first-improvement pass; returns (moved, blocked).

    Gains for every node are snapshot in one vectorized pass; only nodes
    whose snapshot shows an improving move are visited (in id order) and
    re-verified against the live assignment before moving. Moves must
    strictly reduce the cut, keep the target part at or under capacity, and
    never empty the source part. ``blocked`` lists the nodes whose improving
    move was rejected only by the balance gate; those are the only
    candidates that can head an improving pairwise swap."""
    n = wg.n
    if n * k <= 50_000_000:
        src = wg.entry_sources()
        key = src.astype(np.int64) * k + part[wg.neighbors]
        conn_all = np.bincount(key, weights=wg.edge_weight,
                               minlength=n * k).reshape(n, k)
        own = conn_all[np.arange(n), part]
        best = conn_all.max(axis=1)
        candidates = np.flatnonzero(best > own)
    else:
        candidates = _boundary_nodes(wg, part)
    moved = False
    blocked: list[int] = []
    for u in candidates:
        u = int(u)
        a = int(part[u])
        if part_count[a] <= 1:
            continue
        conn = _node_conn(wg, part, u, k)
        gains = conn - conn[a]
        gains[a] = 0.0
        order = np.argsort(-gains, kind="stable")
        wu = int(wg.node_weight[u])
        was_blocked = False
        for b in order:
            b = int(b)
            if gains[b] <= 0:
                break
            if part_w[b] + wu <= cap:
                part[u] = b
                part_w[a] -= wu
                part_w[b] += wu
                part_count[a] -= 1
                part_count[b] += 1
                moved = True
                was_blocked = False
                break
            was_blocked = True
        if was_blocked:
            blocked.append(u)
    return moved, blocked


def _swap_sweep(wg, part, k, cap, part_w, part_count, heads) -> bool:
    """Find one profitable pairwise exchange.

    Needed when a cut-improving move is blocked by the balance gate (the
    classic two-misplaced-nodes situation). ``heads`` are the blocked movers
    from the preceding sweep; an improving swap must start at one of them.
    Applies the first strictly improving, balance-preserving swap."""
    boundary = [int(u) for u in _boundary_nodes(wg, part)]
    by_part: dict[int, list[int]] = {}
    for u in boundary:
        by_part.setdefault(int(part[u]), []).append(u)
    for u in heads:
        a = int(part[u])
        conn_u = _node_conn(wg, part, u, k)
        wu = int(wg.node_weight[u])
        targets = [b for b in range(k) if b != a and conn_u[b] > 0]
        targets.sort(key=lambda b: -(conn_u[b] - conn_u[a]))
        for b in targets:
            gain_u = conn_u[b] - conn_u[a]
            for v in by_part.get(b, ()):
                wv = int(wg.node_weight[v])
                if part_w[a] - wu + wv > cap or part_w[b] - wv + wu > cap:
                    continue
                conn_v = _node_conn(wg, part, v, k)
                gain_v = conn_v[a] - conn_v[b]
                nbrs_u, wts_u = wg.adj_slice(u)
                i = np.searchsorted(nbrs_u, v)
                w_uv = int(wts_u[i]) if i < len(nbrs_u) and nbrs_u[i] == v else 0
                if gain_u + gain_v - 2 * w_uv > 0:
                    part[u] = b
                    part[v] = a
                    part_w[a] += wv - wu
                    part_w[b] += wu - wv
                    return True
    return False


def refine_boundary(wg: WeightedGraph, part, epsilon: float,
                    passes: int = 4, *, swap_node_limit: int = 4096,
                    k: int | None = None) -> np.ndarray:
    """Boundary refinement: at most ``passes`` sweeps of first-improvement
    moves (plus a pairwise-swap fallback on small graphs). The cut never
    increases and balance is never made worse."""
    part = np.asarray(part, dtype=NODE_DTYPE).copy()
    _check_assignment(wg, part)
    if k is None:
        k = int(part.max()) + 1 if wg.n else 1
    cap = _capacity(wg.total_node_weight, k, epsilon)
    part_w = np.bincount(part, weights=wg.node_weight, minlength=k).astype(np.int64)
    part_count = np.bincount(part, minlength=k)
    for _ in range(passes):
        moved, blocked = _single_move_sweep(wg, part, k, cap, part_w,
                                            part_count)
        if not moved and blocked and wg.n <= swap_node_limit:
            moved = _swap_sweep(wg, part, k, cap, part_w, part_count, blocked)
        if not moved:
            break
    return part


def _rebalance(wg, part, k, epsilon) -> None:
    """Pull overweight parts back under capacity, preferring the cheapest
    moves. Best effort: stops if no feasible move exists (coarse graphs with
    lumpy supernode weights); finer levels finish the job."""
    cap = _capacity(wg.total_node_weight, k, epsilon)
    part_w = np.bincount(part, weights=wg.node_weight, minlength=k).astype(np.int64)
    part_count = np.bincount(part, minlength=k)
    guard = 4 * wg.n + 16
    while guard > 0:
        guard -= 1
        over = np.flatnonzero(part_w > cap)
        if len(over) == 0:
            break
        a = int(over[np.argmax(part_w[over])])
        if part_count[a] <= 1:
            break
        members = np.flatnonzero(part == a)
        best = None  # (neg gain, node id, target part)
        for u in members:
            u = int(u)
            wu = int(wg.node_weight[u])
            conn = _node_conn(wg, part, u, k)
            for b in range(k):
                if b == a or part_w[b] + wu > cap:
                    continue
                loss = conn[a] - conn[b]
                cand = (loss, u, b)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, u, b = best
        wu = int(wg.node_weight[u])
        part[u] = b
        part_w[a] -= wu
        part_w[b] += wu
        part_count[a] -= 1
        part_count[b] += 1


# ---- the multilevel driver -------------------------------------------------


def partition_kway(g: Graph, k: int, epsilon: float = 0.05,
                   seed: int = 0, *, passes: int = 4) -> PartitionAssignment:
    """Balanced k-way partition minimizing edge cut.

    Every part is non-empty (when n >= k) and weighs at most
    ``(1 + epsilon) * ceil(n / k)``. Deterministic for a fixed seed.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    if not 0.0 <= epsilon <= 1.0:
        raise ContractError("epsilon must be in [0, 1]")
    if g.n < k:
        raise InfeasibleError(f"cannot split {g.n} nodes into {k} parts")
    wg = WeightedGraph.from_graph(g)
    if k == 1:
        return PartitionAssignment(np.zeros(g.n, dtype=NODE_DTYPE), 1, epsilon, 0)

    target_n = max(4 * k, 64)
    levels: list[WeightedGraph] = [wg]
    mappings: list[np.ndarray] = []
    while levels[-1].n > target_n:
        coarse, mapping = coarsen(levels[-1], seed)
        if coarse.n >= int(levels[-1].n * 0.98):
            break
        levels.append(coarse)
        mappings.append(mapping)

    part = _initial_partition(levels[-1], k, epsilon, seed)
    part = refine_boundary(levels[-1], part, epsilon, passes, k=k)
    for level in range(len(mappings) - 1, -1, -1):
        part = part[mappings[level]]
        fine = levels[level]
        _rebalance(fine, part, k, epsilon)
        part = refine_boundary(fine, part, epsilon, passes, k=k)
    _fill_empty_parts(wg, part, k)
    cut = edge_cut(wg, part)
    return PartitionAssignment(part.astype(NODE_DTYPE), k, epsilon, cut)
