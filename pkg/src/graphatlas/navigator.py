"""Context selection and on-demand metrics over an open tree handle.

The context of a focus node is the small display set {focus, its ancestors,
its siblings, its children}, which bounds on-screen clutter to
``1 + (levels - 1) + (fanout - 1) + fanout`` nodes regardless of graph size.
Context assembly reads only the resident tree: no leaf block is touched.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import graph as graph_core
from .gtree import GTreeHandle


@dataclass
class ContextSet:
    """What is visible when ``focus`` is selected.

    ``visible_connectivity`` lists (a, b, weight) pairs among visible nodes:
    child-child pairs from the focus's records, and focus-sibling plus
    sibling-sibling pairs from the parent's records. Crossings from inside
    the focus to a sibling are summed per sibling, which is exactly the
    stored focus-sibling weight, so those arcs carry the aggregate.
    """

    focus: int
    ancestors: list[int]
    siblings: list[int]
    children: list[int]
    visible_connectivity: list[tuple[int, int, int]]

    @property
    def visible(self) -> list[int]:
        return sorted({self.focus, *self.ancestors, *self.siblings,
                       *self.children})


def tomahawk_context(handle: GTreeHandle, focus: int) -> ContextSet:
    """Assemble the display context for ``focus`` (read-only, tree-resident)."""
    tree = handle.tree
    node = tree.node(focus)

    ancestors: list[int] = []
    cur = node
    while cur.parent is not None:
        ancestors.append(cur.parent)
        cur = tree.node(cur.parent)
    ancestors.reverse()

    siblings: list[int] = []
    if node.parent is not None:
        siblings = [c for c in tree.node(node.parent).children if c != focus]

    conn: list[tuple[int, int, int]] = []
    conn.extend(node.connectivity)
    if node.parent is not None:
        conn.extend(tree.node(node.parent).connectivity)
    conn.sort()

    return ContextSet(focus=focus, ancestors=ancestors, siblings=siblings,
                      children=list(node.children),
                      visible_connectivity=conn)


@dataclass
class LeafMetrics:
    """All five per-subgraph metrics of one leaf, keyed by global node id
    where per-node."""

    leaf_id: int
    degree_histogram: dict[int, int]
    hop_plot: list[tuple[int, int]]
    hop_plot_exact: bool
    weak_component_count: int
    weak_component_ids: dict[int, int]
    strong_component_count: int
    strong_component_ids: dict[int, int]
    pagerank: dict[int, float]


def leaf_metrics(handle: GTreeHandle, leaf_id: int, *,
                 damping: float = 0.85, tol: float = 1e-10,
                 hop_exact_threshold: int = 512,
                 hop_sample_seeds: int = 64) -> LeafMetrics:
    """Load one leaf and compute its metrics on the local subgraph only."""
    sub = handle.load_leaf(leaf_id)
    g = sub.graph
    gids = [int(x) for x in sub.global_ids]

    hist = graph_core.degree_distribution(g).entries
    weak_ids, weak_count = graph_core.weak_components(g)
    strong_ids, strong_count = graph_core.strong_components(g)
    if g.n:
        hp = graph_core.hop_plot(g, exact_threshold=hop_exact_threshold,
                                 sample_seeds=hop_sample_seeds)
        pr = graph_core.pagerank(g, damping=damping, tol=tol)
        pr_map = {gids[i]: float(pr[i]) for i in range(g.n)}
        hp_entries, hp_exact = hp.entries, hp.exact
    else:
        pr_map, hp_entries, hp_exact = {}, [], True

    return LeafMetrics(
        leaf_id=leaf_id,
        degree_histogram=hist,
        hop_plot=hp_entries,
        hop_plot_exact=hp_exact,
        weak_component_count=weak_count,
        weak_component_ids={gids[i]: int(weak_ids[i]) for i in range(g.n)},
        strong_component_count=strong_count,
        strong_component_ids={gids[i]: int(strong_ids[i]) for i in range(g.n)},
        pagerank=pr_map,
    )


@dataclass
class NodeLocation:
    """Where a labeled node lives: the root-to-leaf path plus its position
    inside the leaf."""

    path: list[int]
    leaf_id: int
    local_index: int
    global_id: int


def find_node(handle: GTreeHandle, label: str) -> list[NodeLocation]:
    """Locate every node carrying ``label``; empty list when unknown.

    Multiple nodes may share a label; all matches come back ordered by
    global id.
    """
    results: list[NodeLocation] = []
    for hit in handle.label_matches(label):
        path = [hit.leaf_id]
        cur = handle.tree.node(hit.leaf_id)
        while cur.parent is not None:
            path.append(cur.parent)
            cur = handle.tree.node(cur.parent)
        path.reverse()
        results.append(NodeLocation(path=path, leaf_id=hit.leaf_id,
                                    local_index=hit.local_index,
                                    global_id=hit.global_id))
    return results
