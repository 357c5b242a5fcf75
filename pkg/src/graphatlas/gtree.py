"""Community hierarchy construction and its single-file on-disk format.

A tree is built by recursively partitioning a graph; every internal node
stores connectivity edges (crossing-edge counts between pairs of its direct
children) and every leaf stores its concrete subgraph. The file layout keeps
the tree, connectivity and label index in small leading sections so a reader
can open a file and answer structural queries without touching any leaf
block; leaf blocks are self-contained and fetched on demand.

File format v1, little-endian, all offsets absolute from file start::

    magic "GTRE" | version u32
    header: global_n u64, global_e u64, fanout u16, levels u16,
            tree_node_count u32, conn_entry_count u64,
            tree_off u64, conn_off u64, label_off u64, leaf_off u64,
            file_len u64 | crc32
    tree section:  tree_node_count fixed 64-byte records, ordered by id | crc32
    conn section:  conn_entry_count (a u32, b u32, weight u64) records | crc32
    label section: count u64, then sorted var-length entries | crc32
    leaf region:   per-leaf blocks, each ending in its own crc32
"""

from __future__ import annotations

import struct
import threading
import zlib
from collections import OrderedDict, deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractError, FormatError, InfeasibleError, NotFoundError
from .graph import Graph, NODE_DTYPE, OFFSET_DTYPE
from .partition import partition_kway

MAGIC = b"GTRE"
VERSION = 1

_HEADER = struct.Struct("<QQHHIQQQQQQ")
_TREE_RECORD = struct.Struct("<qHBBQIIQIQQQ")
_CONN_RECORD_DTYPE = np.dtype([("a", "<u4"), ("b", "<u4"), ("w", "<u8")])
_LEAF_HEAD = struct.Struct("<IQBBH")

_TREE_RECORD_DTYPE = np.dtype([
    ("parent", "<i8"), ("level", "<u2"), ("is_leaf", "u1"), ("pad", "u1"),
    ("member_count", "<u8"), ("child_start", "<u4"), ("child_count", "<u4"),
    ("conn_start", "<u8"), ("conn_count", "<u4"), ("internal_edges", "<u8"),
    ("leaf_off", "<u8"), ("leaf_len", "<u8"),
])
assert _TREE_RECORD_DTYPE.itemsize == _TREE_RECORD.size == 64


class LabelHit(NamedTuple):
    leaf_id: int
    local_index: int
    global_id: int


@dataclass
class GTreeNode:
    """One community in the hierarchy.

    Internal nodes carry ``connectivity``: (child_a, child_b, weight) triples
    over direct children only, each unordered pair at most once, weight >= 1.
    Leaves carry a ``leaf_block`` (offset, length) once serialized or opened.
    """

    id: int
    parent: int | None
    level: int
    children: list[int]
    member_count: int
    connectivity: list[tuple[int, int, int]]
    internal_edges: int
    leaf_block: tuple[int, int] | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class GTree:
    """The resident tree: all node records plus the label index.

    ``levels`` is the nominal depth requested at build time; communities too
    small to split may sit as leaves above the bottom level.
    """

    nodes: list[GTreeNode]
    levels: int
    fanout: int
    global_n: int
    global_e: int
    label_index: dict[str, list[tuple[int, int, int]]]

    @property
    def root(self) -> GTreeNode:
        return self.nodes[0]

    def node(self, node_id: int) -> GTreeNode:
        if not 0 <= node_id < len(self.nodes):
            raise NotFoundError(f"no tree node {node_id}")
        return self.nodes[node_id]

    def leaf_ids(self) -> list[int]:
        return [nd.id for nd in self.nodes if nd.is_leaf]

    def structurally_equal(self, other: "GTree") -> bool:
        """Equality ignoring leaf block placement (set only after
        serialization)."""
        if (self.levels, self.fanout, self.global_n, self.global_e) != \
           (other.levels, other.fanout, other.global_n, other.global_e):
            return False
        if self.label_index != other.label_index:
            return False
        if len(self.nodes) != len(other.nodes):
            return False
        for a, b in zip(self.nodes, other.nodes):
            if (a.id, a.parent, a.level, a.children, a.member_count,
                    a.connectivity, a.internal_edges) != \
               (b.id, b.parent, b.level, b.children, b.member_count,
                    b.connectivity, b.internal_edges):
                return False
        return True


@dataclass
class LeafSubgraph:
    """A bottom-level community: local graph plus its global node ids."""

    graph: Graph
    global_ids: np.ndarray
    labels: list[str] | None = None


def connectivity_between(tree: GTree, a: int, b: int) -> int:
    """Stored crossing-edge weight between two sibling communities (0 when no
    record exists). Non-siblings are a contract error."""
    na, nb = tree.node(a), tree.node(b)
    if a == b or na.parent is None or na.parent != nb.parent:
        raise ContractError(f"tree nodes {a} and {b} are not siblings")
    lo, hi = min(a, b), max(a, b)
    for ca, cb, w in tree.node(na.parent).connectivity:
        if ca == lo and cb == hi:
            return w
    return 0


# ---- building --------------------------------------------------------------


def build_gtree(g: Graph, fanout: int, levels: int, epsilon: float = 0.05,
                seed: int = 0, strict_depth: bool = False):
    """Recursively partition ``g`` into a communities-within-communities tree.

    Nodes get ids in breadth-first order (root = 0, children consecutive).
    A community smaller than ``2 * fanout`` becomes a leaf even above the
    bottom level. Returns ``(tree, leaf_subgraphs)`` where the second item
    maps leaf id to its :class:`LeafSubgraph`.
    """
    if fanout < 2:
        raise ContractError("fanout must be >= 2")
    if levels < 2:
        raise ContractError("levels must be >= 2")
    if g.n == 0:
        raise ContractError("cannot build a tree over an empty graph")
    if strict_depth and g.n < fanout ** (levels - 1):
        raise InfeasibleError(
            f"{g.n} nodes cannot fill {levels} levels of fanout {fanout}")

    nodes: list[GTreeNode] = []
    leaves: dict[int, LeafSubgraph] = {}
    raw_conn: dict[int, list[tuple[int, int, int]]] = {}
    queue: deque = deque()
    queue.append((None, 0, g, np.arange(g.n, dtype=np.int64)))

    while queue:
        parent_id, level, local, gids = queue.popleft()
        node_id = len(nodes)
        if parent_id is not None:
            nodes[parent_id].children.append(node_id)
        is_leaf = level == levels - 1 or local.n < 2 * fanout
        node = GTreeNode(
            id=node_id, parent=parent_id, level=level, children=[],
            member_count=local.n, connectivity=[],
            internal_edges=local.edge_count,
        )
        nodes.append(node)
        if is_leaf:
            leaves[node_id] = LeafSubgraph(local, gids, local.labels)
            continue
        assignment = partition_kway(local, fanout, epsilon, seed + node_id)
        part = assignment.part
        src = local.entry_sources()
        cross = part[src] != part[local.neighbors]
        if cross.any():
            lo = np.minimum(part[src[cross]], part[local.neighbors[cross]])
            hi = np.maximum(part[src[cross]], part[local.neighbors[cross]])
            key, cnt = np.unique(lo.astype(np.int64) * fanout + hi,
                                 return_counts=True)
            if not local.directed:
                cnt = cnt // 2
            raw_conn[node_id] = [
                (int(k // fanout), int(k % fanout), int(c))
                for k, c in zip(key, cnt) if c > 0
            ]
        for p in range(fanout):
            members = np.flatnonzero(part == p)
            queue.append((node_id, level + 1, local.induced(members),
                          gids[members]))

    # connectivity was recorded against part indices; children ids are in
    # part order, so remap now that they exist
    for node_id, triples in raw_conn.items():
        children = nodes[node_id].children
        nodes[node_id].connectivity = [
            (children[i], children[j], w) for i, j, w in triples
        ]

    label_index: dict[str, list[tuple[int, int, int]]] = {}
    for leaf_id in sorted(leaves):
        sub = leaves[leaf_id]
        if sub.labels is None:
            continue
        for local_i, lab in enumerate(sub.labels):
            if lab:
                label_index.setdefault(lab, []).append(
                    (int(sub.global_ids[local_i]), leaf_id, local_i))
    for lab in label_index:
        label_index[lab].sort()

    tree = GTree(nodes=nodes, levels=levels, fanout=fanout,
                 global_n=g.n, global_e=g.edge_count,
                 label_index=label_index)
    return tree, leaves


# ---- serialization ---------------------------------------------------------


def _crc(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def _leaf_block_bytes(sub: LeafSubgraph) -> bytes:
    g = sub.graph
    parts = [_LEAF_HEAD.pack(g.n, len(g.neighbors), int(g.directed),
                             int(sub.labels is not None), 0)]
    parts.append(np.asarray(g.offsets, dtype="<u8").tobytes())
    parts.append(np.asarray(g.neighbors, dtype="<u4").tobytes())
    parts.append(np.asarray(sub.global_ids, dtype="<u8").tobytes())
    if sub.labels is not None:
        for lab in sub.labels:
            raw = lab.encode("utf-8")
            parts.append(struct.pack("<H", len(raw)))
            parts.append(raw)
    payload = b"".join(parts)
    return payload + struct.pack("<I", _crc(payload))


def _parse_leaf_block(block: bytes, leaf_id: int) -> LeafSubgraph:
    if len(block) < _LEAF_HEAD.size + 4:
        raise FormatError("truncated leaf block", section=f"leaf {leaf_id}")
    payload, crc_raw = block[:-4], block[-4:]
    if struct.unpack("<I", crc_raw)[0] != _crc(payload):
        raise FormatError("leaf block checksum mismatch",
                          section=f"leaf {leaf_id}")
    n, entries, directed, has_labels, _ = _LEAF_HEAD.unpack_from(payload, 0)
    pos = _LEAF_HEAD.size
    offsets = np.frombuffer(payload, "<u8", n + 1, pos).astype(OFFSET_DTYPE)
    pos += (n + 1) * 8
    neighbors = np.frombuffer(payload, "<u4", entries, pos).astype(NODE_DTYPE)
    pos += entries * 4
    gids = np.frombuffer(payload, "<u8", n, pos).astype(np.int64)
    pos += n * 8
    labels = None
    if has_labels:
        labels = []
        for _ in range(n):
            (ln,) = struct.unpack_from("<H", payload, pos)
            pos += 2
            labels.append(payload[pos:pos + ln].decode("utf-8"))
            pos += ln
    graph = Graph(n, bool(directed), offsets, neighbors, labels)
    return LeafSubgraph(graph, gids, labels)


def serialize(tree: GTree, leaf_subgraphs: dict[int, LeafSubgraph],
              sink) -> None:
    """Write the single-file format; byte-deterministic for identical input."""
    leaf_ids = tree.leaf_ids()
    missing = [i for i in leaf_ids if i not in leaf_subgraphs]
    if missing:
        raise ContractError(f"missing leaf subgraphs for {missing}")

    leaf_blocks = {i: _leaf_block_bytes(leaf_subgraphs[i]) for i in leaf_ids}

    conn_flat: list[tuple[int, int, int]] = []
    conn_span: dict[int, tuple[int, int]] = {}
    for nd in tree.nodes:
        conn_span[nd.id] = (len(conn_flat), len(nd.connectivity))
        conn_flat.extend(nd.connectivity)
    conn_arr = np.zeros(len(conn_flat), dtype=_CONN_RECORD_DTYPE)
    for i, (a, b, w) in enumerate(conn_flat):
        conn_arr[i] = (a, b, w)
    conn_payload = conn_arr.tobytes()

    label_parts = [struct.pack("<Q", sum(len(v) for v in tree.label_index.values()))]
    for lab in sorted(tree.label_index):
        raw = lab.encode("utf-8")
        for gid, leaf, local in tree.label_index[lab]:
            label_parts.append(struct.pack("<H", len(raw)))
            label_parts.append(raw)
            label_parts.append(struct.pack("<QII", gid, leaf, local))
    label_payload = b"".join(label_parts)

    preamble_len = len(MAGIC) + 4 + _HEADER.size + 4
    tree_off = preamble_len
    tree_len = len(tree.nodes) * _TREE_RECORD.size + 4
    conn_off = tree_off + tree_len
    conn_len = len(conn_payload) + 4
    label_off = conn_off + conn_len
    label_len = len(label_payload) + 4
    leaf_off = label_off + label_len

    leaf_pos: dict[int, tuple[int, int]] = {}
    pos = leaf_off
    for i in leaf_ids:
        leaf_pos[i] = (pos, len(leaf_blocks[i]))
        pos += len(leaf_blocks[i])
    file_len = pos

    records = []
    for nd in tree.nodes:
        child_start = nd.children[0] if nd.children else 0
        off, ln = leaf_pos.get(nd.id, (0, 0))
        cstart, ccount = conn_span[nd.id]
        records.append(_TREE_RECORD.pack(
            -1 if nd.parent is None else nd.parent, nd.level,
            int(nd.is_leaf), 0, nd.member_count, child_start,
            len(nd.children), cstart, ccount, nd.internal_edges, off, ln))
        nd.leaf_block = (off, ln) if nd.is_leaf else None
    tree_payload = b"".join(records)

    header_payload = _HEADER.pack(
        tree.global_n, tree.global_e, tree.fanout, tree.levels,
        len(tree.nodes), len(conn_flat), tree_off, conn_off, label_off,
        leaf_off, file_len)
    head = MAGIC + struct.pack("<I", VERSION) + header_payload
    sink.write(head + struct.pack("<I", _crc(head)))
    sink.write(tree_payload + struct.pack("<I", _crc(tree_payload)))
    sink.write(conn_payload + struct.pack("<I", _crc(conn_payload)))
    sink.write(label_payload + struct.pack("<I", _crc(label_payload)))
    for i in leaf_ids:
        sink.write(leaf_blocks[i])


# ---- opening ---------------------------------------------------------------


class CountingReader:
    """Wraps a binary file and counts bytes actually read; the on-demand
    locality guarantees are asserted against this counter."""

    def __init__(self, raw):
        self._raw = raw
        self.bytes_read = 0

    def read(self, size: int) -> bytes:
        data = self._raw.read(size)
        self.bytes_read += len(data)
        return data

    def seek(self, offset: int) -> None:
        self._raw.seek(offset)

    def close(self) -> None:
        self._raw.close()


def _read_section(reader: CountingReader, offset: int, length: int,
                  name: str) -> bytes:
    reader.seek(offset)
    data = reader.read(length)
    if len(data) != length:
        raise FormatError("file truncated", section=name, offset=offset)
    payload, crc_raw = data[:-4], data[-4:]
    if struct.unpack("<I", crc_raw)[0] != _crc(payload):
        raise FormatError("checksum mismatch", section=name, offset=offset)
    return payload


class GTreeHandle:
    """An open tree file: resident tree plus an LRU cache of leaf blocks.

    Safe for concurrent readers; file access and the cache share one lock.
    """

    def __init__(self, reader: CountingReader, tree: GTree,
                 leaf_cache: int = 64):
        self._reader = reader
        self.tree = tree
        self._capacity = max(1, leaf_cache)
        self._cache: OrderedDict[int, LeafSubgraph] = OrderedDict()
        self._lock = threading.Lock()

    @property
    def bytes_read(self) -> int:
        return self._reader.bytes_read

    def load_leaf(self, leaf_id: int) -> LeafSubgraph:
        """Fetch one leaf's subgraph, reading exactly its block (cached)."""
        node = self.tree.node(leaf_id)
        if not node.is_leaf:
            raise ContractError(f"tree node {leaf_id} is not a leaf")
        with self._lock:
            if leaf_id in self._cache:
                self._cache.move_to_end(leaf_id)
                return self._cache[leaf_id]
            off, length = node.leaf_block
            self._reader.seek(off)
            block = self._reader.read(length)
            if len(block) != length:
                raise FormatError("file truncated", section=f"leaf {leaf_id}",
                                  offset=off)
            sub = _parse_leaf_block(block, leaf_id)
            self._cache[leaf_id] = sub
            if len(self._cache) > self._capacity:
                self._cache.popitem(last=False)
            return sub

    def label_matches(self, label: str) -> list[LabelHit]:
        """Every node carrying ``label``, ordered by global id."""
        if not label:
            return []
        hits = self.tree.label_index.get(label, [])
        return [LabelHit(leaf, local, gid) for gid, leaf, local in hits]

    def label_lookup(self, label: str) -> LabelHit | None:
        """First (smallest global id) match, or None. Empty labels are never
        indexed."""
        hits = self.label_matches(label)
        return hits[0] if hits else None

    def close(self) -> None:
        self._reader.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def open_gtree(source, leaf_cache: int = 64) -> GTreeHandle:
    """Open a tree file: reads header, tree, connectivity and label index,
    but no leaf blocks."""
    if hasattr(source, "read"):
        reader = CountingReader(source)
    else:
        reader = CountingReader(open(source, "rb"))
    try:
        preamble_len = len(MAGIC) + 4 + _HEADER.size + 4
        head = reader.read(preamble_len)
        if len(head) < preamble_len:
            raise FormatError("file truncated", section="header", offset=0)
        if head[:4] != MAGIC:
            raise FormatError("bad magic", section="header", offset=0)
        (version,) = struct.unpack_from("<I", head, 4)
        if version != VERSION:
            raise FormatError(f"unsupported version {version}",
                              section="header", offset=4)
        if struct.unpack("<I", head[-4:])[0] != _crc(head[:-4]):
            raise FormatError("checksum mismatch", section="header", offset=0)
        (global_n, global_e, fanout, levels, node_count, conn_count,
         tree_off, conn_off, label_off, leaf_off, _file_len) = \
            _HEADER.unpack_from(head, 8)

        tree_payload = _read_section(reader, tree_off, conn_off - tree_off,
                                     "tree")
        conn_payload = _read_section(reader, conn_off, label_off - conn_off,
                                     "connectivity")
        label_payload = _read_section(reader, label_off, leaf_off - label_off,
                                      "label index")

        recs = np.frombuffer(tree_payload, dtype=_TREE_RECORD_DTYPE,
                             count=node_count)
        conn = np.frombuffer(conn_payload, dtype=_CONN_RECORD_DTYPE,
                             count=conn_count)

        nodes: list[GTreeNode] = []
        for i in range(node_count):
            r = recs[i]
            cstart, ccount = int(r["conn_start"]), int(r["conn_count"])
            triples = [(int(conn[j]["a"]), int(conn[j]["b"]), int(conn[j]["w"]))
                       for j in range(cstart, cstart + ccount)]
            children = list(range(int(r["child_start"]),
                                  int(r["child_start"]) + int(r["child_count"])))
            nodes.append(GTreeNode(
                id=i,
                parent=None if int(r["parent"]) < 0 else int(r["parent"]),
                level=int(r["level"]),
                children=children,
                member_count=int(r["member_count"]),
                connectivity=triples,
                internal_edges=int(r["internal_edges"]),
                leaf_block=(int(r["leaf_off"]), int(r["leaf_len"]))
                if r["is_leaf"] else None,
            ))

        label_index: dict[str, list[tuple[int, int, int]]] = {}
        (entry_count,) = struct.unpack_from("<Q", label_payload, 0)
        pos = 8
        for _ in range(entry_count):
            (ln,) = struct.unpack_from("<H", label_payload, pos)
            pos += 2
            lab = label_payload[pos:pos + ln].decode("utf-8")
            pos += ln
            gid, leaf, local = struct.unpack_from("<QII", label_payload, pos)
            pos += 16
            label_index.setdefault(lab, []).append((gid, leaf, local))

        tree = GTree(nodes=nodes, levels=levels, fanout=fanout,
                     global_n=global_n, global_e=global_e,
                     label_index=label_index)
        return GTreeHandle(reader, tree, leaf_cache)
    except Exception:
        reader.close()
        raise
