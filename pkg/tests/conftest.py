"""Shared fixtures: small named graphs and seeded random generators."""

from __future__ import annotations

import numpy as np
import pytest

from graphatlas.graph import Graph, from_edge_arrays


def graph_from_pairs(n, pairs, directed=False, labels=None) -> Graph:
    pairs = list(pairs)
    us = np.array([u for u, _ in pairs], dtype=np.int64)
    vs = np.array([v for _, v in pairs], dtype=np.int64)
    return from_edge_arrays(n, us, vs, directed=directed, labels=labels)[0]


def clique_pairs(nodes):
    nodes = list(nodes)
    return [(nodes[i], nodes[j]) for i in range(len(nodes))
            for j in range(i + 1, len(nodes))]


def gnm_graph(n, m, seed, directed=False) -> Graph:
    """Exactly m distinct edges (no loops), reproducible for a seed."""
    rng = np.random.default_rng(seed)
    chosen: dict[int, None] = {}
    while len(chosen) < m:
        need = m - len(chosen)
        us = rng.integers(0, n, size=2 * need + 8)
        vs = rng.integers(0, n, size=2 * need + 8)
        for u, v in zip(us, vs):
            if u == v:
                continue
            if not directed and u > v:
                u, v = v, u
            key = int(u) * n + int(v)
            if key not in chosen:
                chosen[key] = None
                if len(chosen) == m:
                    break
    keys = np.fromiter(chosen.keys(), dtype=np.int64, count=m)
    return from_edge_arrays(n, keys // n, keys % n, directed=directed)[0]


def gnm_graph_fast(n, m, seed) -> Graph:
    """Vectorized undirected G(n, m) for large instances: oversample pairs,
    deduplicate, then subsample back to exactly m edges."""
    rng = np.random.default_rng(seed)
    keys = np.empty(0, dtype=np.int64)
    while len(keys) < m:
        need = int((m - len(keys)) * 1.2) + 1024
        us = rng.integers(0, n, size=need)
        vs = rng.integers(0, n, size=need)
        ok = us != vs
        a = np.minimum(us[ok], vs[ok]).astype(np.int64)
        b = np.maximum(us[ok], vs[ok]).astype(np.int64)
        keys = np.unique(np.concatenate([keys, a * n + b]))
    keys = keys[rng.choice(len(keys), size=m, replace=False)]
    return from_edge_arrays(n, keys // n, keys % n)[0]


@pytest.fixture
def p3():
    return graph_from_pairs(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3():
    return graph_from_pairs(3, clique_pairs(range(3)))


@pytest.fixture
def c4():
    return graph_from_pairs(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def barbell_pairs():
    return clique_pairs(range(4)) + clique_pairs(range(4, 8)) + [(3, 4)]


@pytest.fixture
def barbell():
    """Two K4s joined by the single edge 3-4."""
    return graph_from_pairs(8, barbell_pairs())


@pytest.fixture
def four_triangles():
    pairs = []
    for b in range(0, 12, 3):
        pairs += clique_pairs(range(b, b + 3))
    return graph_from_pairs(12, pairs)


def chain16_pairs():
    pairs = []
    for b in range(0, 16, 4):
        pairs += clique_pairs(range(b, b + 4))
    pairs += [(3, 4), (7, 8), (11, 12)]
    return pairs


@pytest.fixture
def chain16():
    """Four K4s chained by the bridges 3-4, 7-8, 11-12."""
    return graph_from_pairs(16, chain16_pairs())


@pytest.fixture
def chain16_labeled():
    labels = [f"node{i:02d}" for i in range(16)]
    labels[5] = "shared"
    labels[9] = "shared"
    return graph_from_pairs(16, chain16_pairs(), labels=labels)
