"""Context selection, leaf metrics and label navigation."""

from __future__ import annotations

import io

import pytest

from graphatlas import graph as graph_core
from graphatlas.errors import ContractError, NotFoundError
from graphatlas.gtree import build_gtree, open_gtree, serialize
from graphatlas.navigator import find_node, leaf_metrics, tomahawk_context

from conftest import gnm_graph, graph_from_pairs


def handle_for(g, fanout, levels, seed=0):
    tree, leaves = build_gtree(g, fanout=fanout, levels=levels, seed=seed)
    sink = io.BytesIO()
    serialize(tree, leaves, sink)
    return open_gtree(io.BytesIO(sink.getvalue()))


# ---- context -------------------------------------------------------------


def test_context_at_root(chain16):
    handle = handle_for(chain16, 2, 3)
    ctx = tomahawk_context(handle, 0)
    assert ctx.ancestors == [] and ctx.siblings == []
    assert len(ctx.children) == 2
    assert len(ctx.visible) == 3
    # single connectivity arc between the two halves
    assert len(ctx.visible_connectivity) == 1
    a, b, w = ctx.visible_connectivity[0]
    assert {a, b} == set(ctx.children) and w == 1


def test_context_at_leaf(chain16):
    handle = handle_for(chain16, 2, 3)
    leaf_id = handle.tree.leaf_ids()[0]
    ctx = tomahawk_context(handle, leaf_id)
    assert ctx.children == []
    node = handle.tree.node(leaf_id)
    assert ctx.ancestors == [0, node.parent]
    assert len(ctx.siblings) == 1
    assert set(ctx.visible) == {leaf_id, 0, node.parent, *ctx.siblings}


def test_context_at_mid_level(chain16):
    handle = handle_for(chain16, 2, 3)
    ctx = tomahawk_context(handle, 1)
    # 1 focus + 1 ancestor + (fanout-1) siblings + fanout children
    assert len(ctx.visible) == 1 + 1 + 1 + 2


def test_context_unknown_focus(chain16):
    handle = handle_for(chain16, 2, 3)
    with pytest.raises(NotFoundError):
        tomahawk_context(handle, 99)


def test_context_connectivity_endpoints_visible():
    g = gnm_graph(250, 900, seed=8)
    handle = handle_for(g, 3, 3)
    for focus in range(len(handle.tree.nodes)):
        ctx = tomahawk_context(handle, focus)
        visible = set(ctx.visible)
        for a, b, w in ctx.visible_connectivity:
            assert a in visible and b in visible
            assert w >= 1


def test_context_sibling_arcs_aggregate_child_crossings():
    # conservation makes the parent-stored focus-sibling weight equal the
    # sum of the focus's children's crossings to that sibling
    g = gnm_graph(250, 900, seed=8)
    handle = handle_for(g, 3, 3)
    tree = handle.tree
    focus = tree.node(0).children[0]
    parent_conn = {(a, b): w for a, b, w in tree.node(0).connectivity}
    total_to_siblings = sum(
        w for (a, b), w in parent_conn.items() if focus in (a, b))
    ctx = tomahawk_context(handle, focus)
    arcs = sum(w for a, b, w in ctx.visible_connectivity
               if focus in (a, b))
    assert arcs == total_to_siblings


def test_context_is_read_only(chain16):
    handle = handle_for(chain16, 2, 3)
    before = handle.bytes_read
    for focus in range(len(handle.tree.nodes)):
        tomahawk_context(handle, focus)
    assert handle.bytes_read == before


def test_tomahawk_visible_bound():
    g = gnm_graph(400, 1600, seed=12)
    fanout, levels = 3, 4
    handle = handle_for(g, fanout, levels)
    bound = 1 + (levels - 1) + (fanout - 1) + fanout
    for focus in range(len(handle.tree.nodes)):
        ctx = tomahawk_context(handle, focus)
        assert len(ctx.visible) <= bound


# ---- leaf metrics -----------------------------------------------------------


def test_leaf_metrics_k4(chain16):
    handle = handle_for(chain16, 2, 3)
    leaf_id = handle.tree.leaf_ids()[0]
    report = leaf_metrics(handle, leaf_id)
    assert report.degree_histogram == {3: 4}
    assert report.weak_component_count == 1
    assert report.strong_component_count == 1
    for score in report.pagerank.values():
        assert abs(score - 0.25) < 1e-9
    # keyed by global ids
    sub = handle.load_leaf(leaf_id)
    assert set(report.pagerank) == {int(x) for x in sub.global_ids}


def test_leaf_metrics_edgeless():
    g = graph_from_pairs(6, [])
    handle = handle_for(g, 2, 2)
    leaf_id = handle.tree.leaf_ids()[0]
    report = leaf_metrics(handle, leaf_id)
    assert report.weak_component_count == 3
    assert report.degree_histogram == {0: 3}


def test_leaf_metrics_equal_direct_calls():
    g = gnm_graph(300, 900, seed=10)
    handle = handle_for(g, 3, 3)
    leaf_id = handle.tree.leaf_ids()[-1]
    report = leaf_metrics(handle, leaf_id)
    sub = handle.load_leaf(leaf_id)
    local = sub.graph
    assert report.degree_histogram == \
        graph_core.degree_distribution(local).entries
    ids, count = graph_core.weak_components(local)
    assert report.weak_component_count == count
    gids = [int(x) for x in sub.global_ids]
    assert report.weak_component_ids == \
        {gids[i]: int(ids[i]) for i in range(local.n)}
    pr = graph_core.pagerank(local, 0.85, tol=1e-10)
    assert report.pagerank == {gids[i]: float(pr[i]) for i in range(local.n)}
    hp = graph_core.hop_plot(local, exact_threshold=512, sample_seeds=64)
    assert report.hop_plot == hp.entries


def test_leaf_metrics_rejects_internal(chain16):
    handle = handle_for(chain16, 2, 3)
    with pytest.raises(ContractError):
        leaf_metrics(handle, 0)


# ---- label navigation -------------------------------------------------------


def test_find_node_path(chain16_labeled):
    handle = handle_for(chain16_labeled, 2, 3)
    matches = find_node(handle, "node07")
    assert len(matches) == 1
    m = matches[0]
    assert len(m.path) == 3  # root -> internal -> leaf
    assert m.path[0] == 0
    assert m.path[-1] == m.leaf_id
    sub = handle.load_leaf(m.leaf_id)
    assert sub.labels[m.local_index] == "node07"
    # the path is a real ancestor chain
    for parent, child in zip(m.path, m.path[1:]):
        assert handle.tree.node(child).parent == parent


def test_find_node_unknown(chain16_labeled):
    handle = handle_for(chain16_labeled, 2, 3)
    assert find_node(handle, "missing") == []


def test_find_node_duplicate_labels(chain16_labeled):
    handle = handle_for(chain16_labeled, 2, 3)
    matches = find_node(handle, "shared")
    assert [m.global_id for m in matches] == [5, 9]
