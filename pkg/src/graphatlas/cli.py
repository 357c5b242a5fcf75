"""Batch entry points: build tree files, extract subgraphs, dump metrics.

Reports go to stdout as JSON so pipelines can parse them; human-readable
logging goes to stderr. Exit codes: 0 success, 1 I/O trouble, 2 contract or
infeasibility errors (the machine-readable error code is printed on stderr).
"""

from __future__ import annotations

import json
import os
import sys
import time
from pathlib import Path

import click

from . import consub, navigator
from .errors import FormatError, GraphAtlasError, NotFoundError
from .graph import load_labels, parse_edge_list
from .gtree import build_gtree, open_gtree, serialize


@click.group()
def cli():
    """Explore large graphs: hierarchy building, navigation, extraction."""


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True))


def _log(message: str) -> None:
    click.echo(message, err=True)


@cli.command()
@click.argument("edge_list", type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "label_path", type=click.Path(exists=True),
              default=None, help="Optional id<TAB>label file.")
@click.option("--fanout", default=5, show_default=True)
@click.option("--levels", default=5, show_default=True)
@click.option("--epsilon", default=0.05, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--directed", is_flag=True, default=False)
@click.option("--strict-depth", is_flag=True, default=False,
              help="Fail instead of creating shallow leaves.")
@click.option("--out", "out_path", required=True, type=click.Path())
def build(edge_list, label_path, fanout, levels, epsilon, seed, directed,
          strict_depth, out_path):
    """Build a tree file from an edge list."""
    started = time.monotonic()
    with open(edge_list, "rb") as fh:
        g, report = parse_edge_list(fh, directed=directed)
    if label_path is not None:
        with open(label_path, "rb") as fh:
            g.labels = load_labels(fh, g.n)
    _log(f"loaded n={g.n} e={g.edge_count} "
         f"(dropped {report.duplicates_dropped} duplicates, "
         f"{report.self_loops_dropped} self-loops)")
    tree, leaves = build_gtree(g, fanout, levels, epsilon, seed,
                               strict_depth=strict_depth)
    with open(out_path, "wb") as sink:
        serialize(tree, leaves, sink)
    elapsed = time.monotonic() - started

    per_level_cuts: dict[int, int] = {}
    for node in tree.nodes:
        if not node.is_leaf:
            per_level_cuts[node.level] = per_level_cuts.get(node.level, 0) + \
                sum(w for _, _, w in node.connectivity)
    _emit({
        "n": g.n,
        "e": g.edge_count,
        "fanout": fanout,
        "levels": levels,
        "tree_nodes": len(tree.nodes),
        "leaves": len(tree.leaf_ids()),
        "per_level_cuts": {str(k): v for k, v in sorted(per_level_cuts.items())},
        "elapsed_s": round(elapsed, 3),
        "file_bytes": os.path.getsize(out_path),
        "out": str(out_path),
    })


def _resolve_sources(raw_sources: str, g, handle) -> list[int]:
    """Each comma-separated item is a node id, or a label resolved via the
    tree's label index (or the graph's own labels)."""
    out: list[int] = []
    for item in raw_sources.split(","):
        item = item.strip()
        if not item:
            continue
        if item.isdigit():
            out.append(int(item))
            continue
        if handle is not None:
            hit = handle.label_lookup(item)
            if hit is None:
                raise NotFoundError(f"label {item!r} not found in tree index")
            out.append(hit.global_id)
            continue
        if g.labels is not None and item in g.labels:
            out.append(g.labels.index(item))
            continue
        raise NotFoundError(f"label {item!r} cannot be resolved")
    return out


@cli.command()
@click.argument("edge_list", type=click.Path(exists=True, dir_okay=False))
@click.option("--gtree", "gtree_path", type=click.Path(exists=True),
              default=None, help="Tree file used to resolve label sources.")
@click.option("--sources", required=True,
              help="Comma-separated node ids or labels.")
@click.option("--budget", required=True, type=int)
@click.option("--c", "restart", default=consub.DEFAULT_RESTART,
              show_default=True)
@click.option("--maxlen", default=consub.DEFAULT_MAXLEN, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def extract(edge_list, gtree_path, sources, budget, restart, maxlen, out_path):
    """Extract a connection subgraph and write it as an edge list.

    The output keeps global node ids and is valid input for ``build``."""
    with open(edge_list, "rb") as fh:
        g, _ = parse_edge_list(fh)
    handle = open_gtree(gtree_path) if gtree_path else None
    try:
        source_ids = _resolve_sources(sources, g, handle)
    finally:
        if handle is not None:
            handle.close()
    sub = consub.extract(g, source_ids, budget, c=restart, maxlen=maxlen)
    lines = []
    if g.labels is not None:
        for u in sub.nodes:
            if g.labels[u]:
                lines.append(f"# {u} {g.labels[u]}")
    lines.extend(f"{u} {v}" for u, v in sub.edges)
    Path(out_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit({
        "sources": sub.sources,
        "budget": sub.budget,
        "nodes": len(sub.nodes),
        "edges": len(sub.edges),
        "out": str(out_path),
    })


@cli.command()
@click.argument("gtree_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--leaf", "leaf_id", required=True, type=int)
def metrics(gtree_path, leaf_id):
    """Compute the five per-subgraph metrics of one leaf."""
    with open_gtree(gtree_path) as handle:
        report = navigator.leaf_metrics(handle, leaf_id)
    _emit({
        "leaf_id": report.leaf_id,
        "degree_histogram": {str(k): v for k, v
                             in sorted(report.degree_histogram.items())},
        "hop_plot": [[h, c] for h, c in report.hop_plot],
        "hop_plot_exact": report.hop_plot_exact,
        "weak_components": report.weak_component_count,
        "strong_components": report.strong_component_count,
        "pagerank": {str(k): v for k, v in sorted(report.pagerank.items())},
    })


@cli.command()
@click.argument("gtree_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--focus", default=0, show_default=True, type=int)
def context(gtree_path, focus):
    """Print the display context of one tree node."""
    with open_gtree(gtree_path) as handle:
        ctx = navigator.tomahawk_context(handle, focus)
    _emit({
        "focus": ctx.focus,
        "ancestors": ctx.ancestors,
        "siblings": ctx.siblings,
        "children": ctx.children,
        "visible": ctx.visible,
        "connectivity": [[a, b, w] for a, b, w in ctx.visible_connectivity],
    })


@cli.command()
@click.argument("gtree_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("label")
def search(gtree_path, label):
    """Locate nodes by label."""
    with open_gtree(gtree_path) as handle:
        matches = navigator.find_node(handle, label)
    _emit({
        "label": label,
        "matches": [
            {"global_id": m.global_id, "leaf_id": m.leaf_id,
             "local_index": m.local_index, "path": m.path}
            for m in matches
        ],
    })


@cli.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file: {port, datasets: [{id, gtree, graph?}], ...}")
@click.option("--port", default=None, type=int,
              help="Overrides the config file and the PORT variable.")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(config_path, port, host):
    """Run the HTTP service. PORT and DATA_DIR environment variables
    override the config file."""
    from .service import DatasetRegistration, ServiceConfig, run

    raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
    data_dir = Path(os.environ.get("DATA_DIR", Path(config_path).parent))

    def _resolve(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else data_dir / path

    registrations = [
        DatasetRegistration(
            dataset_id=d["id"],
            gtree_path=_resolve(d["gtree"]),
            graph_path=_resolve(d["graph"]) if d.get("graph") else None,
        )
        for d in raw.get("datasets", [])
    ]
    config = ServiceConfig(
        datasets=registrations,
        leaf_cache=int(raw.get("leaf_cache", 64)),
        extract_time_budget_s=raw.get("extract_time_budget_s", 30.0),
        webui_dir=_resolve(raw["webui"]) if raw.get("webui") else None,
    )
    if port is None:
        port = int(os.environ.get("PORT", raw.get("port", 8571)))
    run(config, port=port, host=host)


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except FormatError as exc:
        _log(f"{exc.code}: {exc}")
        return 1
    except OSError as exc:
        _log(f"io-error: {exc}")
        return 1
    except GraphAtlasError as exc:
        _log(f"{exc.code}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
