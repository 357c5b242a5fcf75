"""HTTP facade over open tree handles and their source graphs.

All endpoints live under ``/api/v1`` and answer JSON. Handles are immutable
and leaf caches are internally synchronized, so requests can interleave
freely; every response is a pure function of (dataset state, request).
Errors carry the module taxonomy codes in a uniform envelope::

    {"error": {"code": "not-found", "message": "..."}}
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import consub, navigator
from .errors import ContractError, GraphAtlasError, NotFoundError
from .graph import Graph, parse_edge_list
from .gtree import GTreeHandle, build_gtree, open_gtree

_STATUS = {
    "not-found": 404,
    "contract-error": 400,
    "insufficient-budget": 422,
    "format-error": 500,
    "timeout": 504,
}


@dataclass
class DatasetRegistration:
    """One served dataset: a tree file plus, optionally, the raw edge list
    the tree was built from (required for extraction queries)."""

    dataset_id: str
    gtree_path: str | Path
    graph_path: str | Path | None = None


@dataclass
class ServiceConfig:
    datasets: list[DatasetRegistration] = field(default_factory=list)
    leaf_cache: int = 64
    extract_time_budget_s: float | None = 30.0
    max_sources: int = consub.DEFAULT_MAX_SOURCES
    # built browser client to serve at /; the API works without one
    webui_dir: str | Path | None = None


class _Dataset:
    """An open handle plus a lazily loaded raw graph."""

    def __init__(self, reg: DatasetRegistration, leaf_cache: int):
        self.id = reg.dataset_id
        self.handle: GTreeHandle = open_gtree(reg.gtree_path, leaf_cache)
        self.graph_path = reg.graph_path
        self._graph: Graph | None = None
        self._graph_lock = threading.Lock()

    def graph(self) -> Graph:
        if self.graph_path is None:
            raise ContractError(
                f"dataset {self.id!r} has no raw graph registered; "
                "extraction is unavailable")
        with self._graph_lock:
            if self._graph is None:
                with open(self.graph_path, "rb") as fh:
                    self._graph = parse_edge_list(fh)[0]
            return self._graph


def _require(body: dict, key: str, kind, what: str):
    if key not in body:
        raise ContractError(f"missing field {key!r} in {what}")
    value = body[key]
    if kind is int and isinstance(value, bool):
        raise ContractError(f"field {key!r} must be an integer")
    if not isinstance(value, kind):
        raise ContractError(f"field {key!r} has the wrong type")
    return value


def _subgraph_payload(sub: consub.ConnectionSubgraph, g: Graph) -> dict:
    labels = None
    if g.labels is not None:
        labels = {str(u): g.labels[u] for u in sub.nodes if g.labels[u]}
    return {
        "nodes": sub.nodes,
        "edges": [[u, v] for u, v in sub.edges],
        "sources": sub.sources,
        "budget": sub.budget,
        "node_count": len(sub.nodes),
        "edge_count": len(sub.edges),
        "labels": labels,
    }


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the service; every registered tree file is validated by opening
    it now."""
    datasets: dict[str, _Dataset] = {}
    for reg in config.datasets:
        if reg.dataset_id in datasets:
            raise ContractError(f"duplicate dataset id {reg.dataset_id!r}")
        datasets[reg.dataset_id] = _Dataset(reg, config.leaf_cache)

    app = FastAPI(title="graphatlas", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"])

    @app.exception_handler(GraphAtlasError)
    async def _handle_module_error(request: Request, exc: GraphAtlasError):
        return JSONResponse(
            status_code=_STATUS.get(exc.code, 500),
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    def _dataset(ds: str) -> _Dataset:
        if ds not in datasets:
            raise NotFoundError(f"unknown dataset {ds!r}")
        return datasets[ds]

    @app.get("/api/v1/datasets")
    def list_datasets():
        out = []
        for ds_id in sorted(datasets):
            tree = datasets[ds_id].handle.tree
            out.append({
                "id": ds_id,
                "n": tree.global_n,
                "e": tree.global_e,
                "levels": tree.levels,
                "fanout": tree.fanout,
                "tree_nodes": len(tree.nodes),
                "leaves": len(tree.leaf_ids()),
                "extractable": datasets[ds_id].graph_path is not None,
            })
        return {"datasets": out}

    @app.get("/api/v1/tree/{ds}/context")
    def tree_context(ds: str, focus: int = 0):
        dataset = _dataset(ds)
        ctx = navigator.tomahawk_context(dataset.handle, focus)
        tree = dataset.handle.tree
        summaries = {}
        for node_id in ctx.visible:
            node = tree.node(node_id)
            summaries[str(node_id)] = {
                "id": node_id,
                "parent": node.parent,
                "level": node.level,
                "member_count": node.member_count,
                "internal_edges": node.internal_edges,
                "is_leaf": node.is_leaf,
            }
        return {
            "focus": ctx.focus,
            "ancestors": ctx.ancestors,
            "siblings": ctx.siblings,
            "children": ctx.children,
            "visible": ctx.visible,
            "connectivity": [
                {"a": a, "b": b, "weight": w}
                for a, b, w in ctx.visible_connectivity
            ],
            "nodes": summaries,
        }

    @app.get("/api/v1/tree/{ds}/search")
    def tree_search(ds: str, label: str = ""):
        dataset = _dataset(ds)
        matches = navigator.find_node(dataset.handle, label)
        return {
            "label": label,
            "matches": [
                {
                    "global_id": m.global_id,
                    "leaf_id": m.leaf_id,
                    "local_index": m.local_index,
                    "path": m.path,
                }
                for m in matches
            ],
        }

    @app.get("/api/v1/leaf/{ds}/{leaf_id}/subgraph")
    def leaf_subgraph(ds: str, leaf_id: int):
        dataset = _dataset(ds)
        sub = dataset.handle.load_leaf(leaf_id)
        g = sub.graph
        edges = []
        src = g.entry_sources()
        for i in range(len(g.neighbors)):
            u, v = int(src[i]), int(g.neighbors[i])
            if g.directed or u < v:
                edges.append([u, v])
        return {
            "leaf_id": leaf_id,
            "n": g.n,
            "e": g.edge_count,
            "directed": g.directed,
            "global_ids": [int(x) for x in sub.global_ids],
            "labels": sub.labels,
            "edges": edges,
        }

    @app.get("/api/v1/leaf/{ds}/{leaf_id}/metrics")
    def leaf_metrics(ds: str, leaf_id: int):
        dataset = _dataset(ds)
        report = navigator.leaf_metrics(dataset.handle, leaf_id)
        return {
            "leaf_id": report.leaf_id,
            "degree_histogram": {str(d): c for d, c
                                 in sorted(report.degree_histogram.items())},
            "hop_plot": [[h, c] for h, c in report.hop_plot],
            "hop_plot_exact": report.hop_plot_exact,
            "weak_components": report.weak_component_count,
            "strong_components": report.strong_component_count,
            "weak_component_ids": {str(k): v for k, v
                                   in sorted(report.weak_component_ids.items())},
            "strong_component_ids": {str(k): v for k, v
                                     in sorted(report.strong_component_ids.items())},
            "pagerank": {str(k): v for k, v
                         in sorted(report.pagerank.items())},
        }

    def _run_extract(dataset: _Dataset, body: dict) -> consub.ConnectionSubgraph:
        sources = _require(body, "sources", list, "extract request")
        budget = _require(body, "budget", int, "extract request")
        c = float(body.get("c", consub.DEFAULT_RESTART))
        maxlen = int(body.get("maxlen", consub.DEFAULT_MAXLEN))
        for s in sources:
            if isinstance(s, bool) or not isinstance(s, int):
                raise ContractError("sources must be integers")
        g = dataset.graph()
        deadline = None
        if config.extract_time_budget_s is not None:
            deadline = time.monotonic() + config.extract_time_budget_s
        return consub.extract(g, sources, budget, c=c, maxlen=maxlen,
                              max_sources=config.max_sources,
                              deadline=deadline)

    @app.post("/api/v1/extract/{ds}")
    async def extract_subgraph(ds: str, request: Request):
        dataset = _dataset(ds)
        body = await request.json()
        if not isinstance(body, dict):
            raise ContractError("extract request body must be an object")
        sub = _run_extract(dataset, body)
        return _subgraph_payload(sub, dataset.graph())

    @app.post("/api/v1/extract-and-partition/{ds}")
    async def extract_and_partition(ds: str, request: Request):
        dataset = _dataset(ds)
        body = await request.json()
        if not isinstance(body, dict):
            raise ContractError("extract request body must be an object")
        fanout = _require(body, "fanout", int, "extract-and-partition request")
        levels = _require(body, "levels", int, "extract-and-partition request")
        sub = _run_extract(dataset, body)

        index = {u: i for i, u in enumerate(sub.nodes)}
        from .graph import from_edge_arrays
        local, _, _ = from_edge_arrays(
            len(sub.nodes),
            [index[u] for u, _ in sub.edges],
            [index[v] for _, v in sub.edges],
        )
        tree, leaves = build_gtree(local, fanout, levels)
        nodes_json = []
        for node in tree.nodes:
            entry = {
                "id": node.id,
                "parent": node.parent,
                "level": node.level,
                "children": node.children,
                "member_count": node.member_count,
                "internal_edges": node.internal_edges,
                "is_leaf": node.is_leaf,
                "connectivity": [[a, b, w] for a, b, w in node.connectivity],
            }
            if node.is_leaf:
                entry["members"] = [sub.nodes[int(i)]
                                    for i in leaves[node.id].global_ids]
            nodes_json.append(entry)
        return {
            "subgraph": _subgraph_payload(sub, dataset.graph()),
            "tree": {
                "fanout": tree.fanout,
                "levels": tree.levels,
                "nodes": nodes_json,
            },
        }

    if config.webui_dir is not None and Path(config.webui_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.webui_dir, html=True),
                  name="webui")

    return app


def run(config: ServiceConfig, port: int = 8571, host: str = "127.0.0.1"):
    """Serve until interrupted (uvicorn handles signals and drains in-flight
    requests)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_level="info")
