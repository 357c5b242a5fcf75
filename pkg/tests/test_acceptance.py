"""Acceptance suite: one test per criterion, at its stated tolerance,
printing one pass/fail line each (run with ``pytest tests/test_acceptance.py
-v -s``).

The million-edge synthetic graph and its 5-level tree are built once per
session and shared by the criteria that need them.
"""

from __future__ import annotations

import io
import itertools
import json
import math
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from graphatlas.cli import cli
from graphatlas.consub import extract, goodness, rwr
from graphatlas.errors import FormatError, InsufficientBudgetError
from graphatlas.graph import Graph
from graphatlas.gtree import build_gtree, open_gtree, serialize
from graphatlas.navigator import tomahawk_context
from graphatlas.partition import WeightedGraph, edge_cut, partition_kway
from graphatlas.service import (DatasetRegistration, ServiceConfig,
                                create_app)

from conftest import (barbell_pairs, chain16_pairs, clique_pairs, gnm_graph,
                      gnm_graph_fast, graph_from_pairs)
from test_consub import (brute_force_best, check_subgraph_invariants,
                         dense_rwr_oracle)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    print(f"[acceptance] {name}: PASS")


@dataclass
class BigBundle:
    graph: Graph
    tree: object
    leaves: dict
    build_elapsed: float
    gtree_path: str
    edges_path: str


@pytest.fixture(scope="session")
def big(tmp_path_factory) -> BigBundle:
    g = gnm_graph_fast(100_000, 1_000_000, seed=42)
    started = time.monotonic()
    tree, leaves = build_gtree(g, fanout=5, levels=5, epsilon=0.05, seed=0)
    elapsed = time.monotonic() - started

    root = tmp_path_factory.mktemp("acceptance")
    gtree_path = root / "big.gtree"
    with open(gtree_path, "wb") as sink:
        serialize(tree, leaves, sink)
    src = g.entry_sources()
    mask = src < g.neighbors
    lines = np.char.add(np.char.add(src[mask].astype("U7"), " "),
                        g.neighbors[mask].astype("U7"))
    edges_path = root / "big.edges"
    edges_path.write_text("\n".join(lines.tolist()), encoding="utf-8")
    return BigBundle(g, tree, leaves, elapsed, str(gtree_path),
                     str(edges_path))


def bfs_sources(g: Graph, want_dists=(2, 3)) -> list[int]:
    """Node 0 plus the first node found at each requested BFS distance."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[0] = 0
    q = deque([0])
    while q:
        u = q.popleft()
        for v in g.adj(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(int(v))
    return [0] + [int(np.flatnonzero(dist == d)[0]) for d in want_dists]


# -- criterion 1 -------------------------------------------------------------


def test_partitioner_optimality_on_planted_instances():
    with criterion("partitioner optimality (barbell cut=1, triangles cut=0, "
                   "< 1 s)"):
        started = time.monotonic()
        barbell = graph_from_pairs(8, barbell_pairs())
        result = partition_kway(barbell, k=2, epsilon=0.1, seed=0)
        assert result.cut == 1

        # exhaustive oracle over balanced bipartitions
        wg = WeightedGraph.from_graph(barbell)
        cap = int(1.1 * math.ceil(8 / 2))
        best = min(
            edge_cut(wg, np.isin(np.arange(8), combo).astype(int))
            for size in range(8 - cap, cap + 1)
            for combo in itertools.combinations(range(8), size)
        )
        assert best == 1 and result.cut == best

        pairs = []
        for b in range(0, 12, 3):
            pairs += clique_pairs(range(b, b + 3))
        triangles = graph_from_pairs(12, pairs)
        result4 = partition_kway(triangles, k=4, epsilon=0.0, seed=0)
        assert result4.cut == 0
        elapsed = time.monotonic() - started
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


# -- criterion 2 -------------------------------------------------------------


def test_balance_and_determinism_on_seeded_random_graphs():
    with criterion("balance bound and byte-identical determinism over 50 "
                   "seeded graphs"):
        ks = (2, 5, 8)
        epsilon = 0.05
        for i in range(50):
            g = gnm_graph_fast(2000, 10_000, seed=1000 + i)
            k = ks[i % 3]
            first = partition_kway(g, k=k, epsilon=epsilon, seed=i)
            again = partition_kway(g, k=k, epsilon=epsilon, seed=i)
            assert first.part.tobytes() == again.part.tobytes()
            assert first.cut == again.cut
            sizes = np.bincount(first.part, minlength=k)
            assert (sizes > 0).all()
            assert sizes.max() <= int((1 + epsilon) * math.ceil(2000 / k)
                                      + 1e-9)


# -- criterion 3 -------------------------------------------------------------


def test_gtree_conservation_at_paper_scale(big):
    with criterion("tree conservation on n=100k/e=1M, 625 leaves, "
                   "build < 120 s"):
        tree, leaves = big.tree, big.leaves
        assert big.build_elapsed < 120.0, f"build took {big.build_elapsed:.0f}s"
        leaf_ids = tree.leaf_ids()
        assert len(leaf_ids) == 625
        sizes = [tree.nodes[i].member_count for i in leaf_ids]
        assert 100 <= float(np.mean(sizes)) <= 2500
        for node in tree.nodes:
            if node.is_leaf:
                continue
            child_internal = sum(tree.nodes[c].internal_edges
                                 for c in node.children)
            conn = sum(w for _, _, w in node.connectivity)
            assert child_internal + conn == node.internal_edges
        assert tree.nodes[0].internal_edges == big.graph.edge_count
        # leaves partition the vertex set
        total = sum(len(leaves[i].global_ids) for i in leaf_ids)
        assert total == big.graph.n


# -- criterion 4 -------------------------------------------------------------


def test_on_demand_locality(big):
    with criterion("on-demand locality: open + one leaf reads only the "
                   "sections plus that block, < 5% of the file"):
        file_size = __import__("os").path.getsize(big.gtree_path)
        handle = open_gtree(big.gtree_path)
        try:
            after_open = handle.bytes_read
            leaf_region_start = min(nd.leaf_block[0]
                                    for nd in handle.tree.nodes if nd.is_leaf)
            assert after_open <= leaf_region_start
            leaf_id = handle.tree.leaf_ids()[311]
            handle.load_leaf(leaf_id)
            block_len = handle.tree.node(leaf_id).leaf_block[1]
            assert handle.bytes_read == after_open + block_len
            assert handle.bytes_read < 0.05 * file_size
        finally:
            handle.close()


# -- criterion 5 -------------------------------------------------------------


def test_rwr_against_dense_oracle():
    with criterion("RWR matches dense linear solve on 100 seeded graphs "
                   "(L1 <= 1e-8, sum within 1e-9)"):
        rng = np.random.default_rng(77)
        for i in range(100):
            n = int(rng.integers(10, 201))
            m = min(int(rng.integers(n, 3 * n)), n * (n - 1) // 2)
            g = gnm_graph(n, m, seed=2000 + i)
            source = int(rng.integers(0, n))
            c = float(rng.uniform(0.1, 0.5))
            r = rwr(g, source, c=c, tol=1e-12).scores
            oracle = dense_rwr_oracle(g, source, c)
            assert np.abs(r - oracle).sum() <= 1e-8
            assert abs(r.sum() - 1.0) <= 1e-9


# -- criterion 6 -------------------------------------------------------------


def test_extraction_contract(big):
    with criterion("extraction contract: small-corpus properties, 0.8x "
                   "brute force, P3 cases, 30-node large run < 30 s"):
        p3 = graph_from_pairs(3, [(0, 1), (1, 2)])
        sub = extract(p3, [0, 2], budget=3)
        assert sub.nodes == [0, 1, 2]
        assert sub.edges == [(0, 1), (1, 2)]
        with pytest.raises(InsufficientBudgetError):
            extract(p3, [0, 2], budget=2)

        checked = 0
        from graphatlas.graph import weak_components
        for seed in range(14):
            g = gnm_graph(11, 20, seed=300 + seed)
            ids, _ = weak_components(g)
            comp = np.flatnonzero(ids == np.bincount(ids).argmax())
            if len(comp) < 6:
                continue
            sources = sorted({int(comp[0]), int(comp[len(comp) // 2]),
                              int(comp[-1])})
            budget = min(len(comp), 8)
            if budget < len(sources) + 2:
                continue
            try:
                out = extract(g, sources, budget=budget)
            except InsufficientBudgetError:
                continue
            check_subgraph_invariants(g, out)
            field = goodness(g, sources, c=0.15)
            ours = float(field.scores[out.nodes].sum())
            best, _ = brute_force_best(g, sources, budget)
            assert ours >= 0.8 * best
            checked += 1
        assert checked >= 8

        sources = bfs_sources(big.graph)
        started = time.monotonic()
        out = extract(big.graph, sources, budget=30)
        elapsed = time.monotonic() - started
        check_subgraph_invariants(big.graph, out)
        assert len(out.nodes) <= 30
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


# -- criterion 7 -------------------------------------------------------------


def test_extract_then_partition_pipeline(big, tmp_path):
    with criterion("extract budget=200 piped into build fanout=3 levels=2 "
                   "yields 3 balanced leaves"):
        sources = bfs_sources(big.graph)
        sub_path = tmp_path / "sub.edges"
        runner = CliRunner()
        result = runner.invoke(cli, [
            "extract", big.edges_path,
            "--sources", ",".join(map(str, sources)),
            "--budget", "200", "--out", str(sub_path),
        ], catch_exceptions=False)
        assert result.exit_code == 0, result.output
        report = json.loads(result.stdout)
        assert report["nodes"] <= 200

        out_path = tmp_path / "sub.gtree"
        result = runner.invoke(cli, [
            "build", str(sub_path), "--fanout", "3", "--levels", "2",
            "--out", str(out_path),
        ], catch_exceptions=False)
        assert result.exit_code == 0, result.output
        build_report = json.loads(result.stdout)
        assert build_report["leaves"] == 3

        handle = open_gtree(str(out_path))
        try:
            tree = handle.tree
            n_sub = tree.global_n
            cap = int(1.05 * math.ceil(n_sub / 3) + 1e-9)
            sizes = [tree.node(i).member_count for i in tree.leaf_ids()]
            assert len(sizes) == 3
            assert max(sizes) <= cap
        finally:
            handle.close()


# -- criterion 8 -------------------------------------------------------------


def test_tomahawk_bound(big):
    with criterion("Tomahawk bound: every focus in the fanout-5 5-level "
                   "tree shows <= 14 nodes"):
        handle = open_gtree(big.gtree_path)
        try:
            bound = 1 + 4 + 4 + 5
            for focus in range(len(handle.tree.nodes)):
                ctx = tomahawk_context(handle, focus)
                assert len(ctx.visible) <= bound
        finally:
            handle.close()


# -- criterion 9 -------------------------------------------------------------


def test_file_format_round_trip():
    with criterion("byte-identical round trip on 20 seeded trees; corrupted "
                   "checksum rejected"):
        for seed in range(20):
            n = 60 + 10 * seed
            g = gnm_graph(n, 3 * n, seed=400 + seed)
            if seed % 3 == 0:
                g.labels = [f"L{seed}_{i}" if i % 2 else "" for i in range(n)]
            fanout = 2 + seed % 2
            tree, leaves = build_gtree(g, fanout=fanout, levels=3, seed=seed)
            first = io.BytesIO()
            serialize(tree, leaves, first)
            handle = open_gtree(io.BytesIO(first.getvalue()))
            assert handle.tree.structurally_equal(tree)
            reloaded = {i: handle.load_leaf(i)
                        for i in handle.tree.leaf_ids()}
            second = io.BytesIO()
            serialize(handle.tree, reloaded, second)
            assert first.getvalue() == second.getvalue()

        corrupted = bytearray(first.getvalue())
        corrupted[-3] ^= 0x5A  # inside the last leaf block
        bad_handle = open_gtree(io.BytesIO(bytes(corrupted)))
        last_leaf = bad_handle.tree.leaf_ids()[-1]
        with pytest.raises(FormatError):
            bad_handle.load_leaf(last_leaf)
        corrupted2 = bytearray(first.getvalue())
        corrupted2[90] ^= 0x5A  # inside the tree section
        with pytest.raises(FormatError):
            open_gtree(io.BytesIO(bytes(corrupted2)))


# -- criterion 10 ------------------------------------------------------------


def test_service_contract(tmp_path):
    with criterion("service endpoints: documented shapes, byte-identical "
                   "GETs, insufficient-budget code"):
        labels = [f"node{i:02d}" for i in range(16)]
        g = graph_from_pairs(16, chain16_pairs(), labels=labels)
        tree, leaves = build_gtree(g, fanout=2, levels=3, seed=0)
        gtree_path = tmp_path / "demo.gtree"
        with open(gtree_path, "wb") as sink:
            serialize(tree, leaves, sink)
        edges_path = tmp_path / "demo.edges"
        edges_path.write_text(
            "\n".join(f"{u} {v}" for u, v in chain16_pairs()),
            encoding="utf-8")

        client = TestClient(create_app(ServiceConfig(datasets=[
            DatasetRegistration("demo", gtree_path, edges_path)])))

        body = client.get("/api/v1/datasets").json()
        assert set(body["datasets"][0]) >= {"id", "n", "e", "levels",
                                            "fanout"}
        ctx = client.get("/api/v1/tree/demo/context?focus=0")
        assert ctx.status_code == 200
        assert set(ctx.json()) == {"focus", "ancestors", "siblings",
                                   "children", "visible", "connectivity",
                                   "nodes"}
        search = client.get("/api/v1/tree/demo/search?label=node05").json()
        assert search["matches"][0]["global_id"] == 5
        subgraph = client.get("/api/v1/leaf/demo/3/subgraph").json()
        assert set(subgraph) == {"leaf_id", "n", "e", "directed",
                                 "global_ids", "labels", "edges"}
        metrics = client.get("/api/v1/leaf/demo/3/metrics").json()
        assert set(metrics) == {"leaf_id", "degree_histogram", "hop_plot",
                                "hop_plot_exact", "weak_components",
                                "strong_components", "weak_component_ids",
                                "strong_component_ids", "pagerank"}

        for url in ("/api/v1/datasets", "/api/v1/tree/demo/context?focus=1",
                    "/api/v1/leaf/demo/3/metrics"):
            assert client.get(url).content == client.get(url).content

        extract_resp = client.post(
            "/api/v1/extract/demo", json={"sources": [0, 7], "budget": 30})
        assert extract_resp.status_code == 200
        assert set(extract_resp.json()) == {"nodes", "edges", "sources",
                                            "budget", "node_count",
                                            "edge_count", "labels"}
        starved = client.post(
            "/api/v1/extract/demo", json={"sources": [0, 15], "budget": 2})
        assert starved.status_code == 422
        assert starved.json()["error"]["code"] == "insufficient-budget"
