"""Attributed social networks with overlapping node groups.

A graph is stored as a flat arc list in a canonical order (sorted by
source, then target, ties in input order) together with CSR-style
forward and reverse adjacency built over that order. The canonical arc
order is load-bearing: live-edge samplers draw one Bernoulli per arc and
index those draws by canonical arc position.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np


class GraphFormatError(ValueError):
    """Malformed input file (parse-level problem, with location info)."""


class GraphValidationError(ValueError):
    """Structurally invalid graph (bad index, empty group, uncovered node)."""


class AttributedGraph:
    """Directed graph with uniform arc activation probability and node groups.

    Undirected inputs are normalized to two arcs per edge at load time, so
    everything downstream is direction-only. Instances are immutable after
    construction and safe to share across workers.
    """

    def __init__(self, n, arcs, p, groups, node_ids=None, group_names=None):
        self.n = int(n)
        if self.n <= 0:
            raise GraphValidationError("graph must have at least one node")
        if not (0.0 <= p <= 1.0):
            raise GraphValidationError(f"activation probability p={p} outside [0, 1]")
        self.p = float(p)

        arcs = np.asarray(arcs, dtype=np.int64).reshape(-1, 2)
        if arcs.size and (arcs.min() < 0 or arcs.max() >= self.n):
            bad = arcs[(arcs < 0).any(axis=1) | (arcs >= self.n).any(axis=1)][0]
            raise GraphValidationError(f"arc ({bad[0]}, {bad[1]}) references a node outside [0, {self.n})")
        # canonical arc order: lexicographic by (src, dst), stable for duplicates
        order = np.lexsort((arcs[:, 1], arcs[:, 0])) if arcs.size else np.empty(0, dtype=np.int64)
        self.arc_src = np.ascontiguousarray(arcs[order, 0]) if arcs.size else np.empty(0, dtype=np.int64)
        self.arc_dst = np.ascontiguousarray(arcs[order, 1]) if arcs.size else np.empty(0, dtype=np.int64)
        self.num_arcs = len(self.arc_src)

        self.groups = []
        for gi, members in enumerate(groups):
            members = np.unique(np.asarray(members, dtype=np.int64))
            if members.size == 0:
                raise GraphValidationError(f"group {gi} is empty")
            if members.min() < 0 or members.max() >= self.n:
                raise GraphValidationError(f"group {gi} references a node outside [0, {self.n})")
            self.groups.append(members)
        self.groups = tuple(self.groups)
        self.m = len(self.groups)
        if self.m == 0:
            raise GraphValidationError("at least one group is required")

        self.member_mask = np.zeros((self.m, self.n), dtype=np.uint8)
        for gi, members in enumerate(self.groups):
            self.member_mask[gi, members] = 1
        uncovered = np.flatnonzero(self.member_mask.max(axis=0) == 0)
        if uncovered.size:
            raise GraphValidationError(f"node {uncovered[0]} belongs to no group")

        self.node_ids = tuple(str(v) for v in node_ids) if node_ids is not None else tuple(
            str(v) for v in range(self.n))
        if len(self.node_ids) != self.n:
            raise GraphValidationError("node_ids length does not match node count")
        self.group_names = tuple(str(g) for g in group_names) if group_names is not None else tuple(
            f"g{gi}" for gi in range(self.m))
        if len(self.group_names) != self.m:
            raise GraphValidationError("group_names length does not match group count")
        self.id_to_index = {v: i for i, v in enumerate(self.node_ids)}

        # forward CSR: arcs already sorted by src, so indptr comes from counts
        counts = np.bincount(self.arc_src, minlength=self.n) if self.num_arcs else np.zeros(self.n, dtype=np.int64)
        self.out_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.out_indptr[1:])
        # reverse CSR: positions of canonical arcs grouped by target
        rev_order = np.argsort(self.arc_dst, kind="stable") if self.num_arcs else np.empty(0, dtype=np.int64)
        self.rev_arc_ids = np.ascontiguousarray(rev_order)
        self.rev_src = np.ascontiguousarray(self.arc_src[rev_order]) if self.num_arcs else np.empty(0, dtype=np.int64)
        rcounts = np.bincount(self.arc_dst, minlength=self.n) if self.num_arcs else np.zeros(self.n, dtype=np.int64)
        self.rev_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(rcounts, out=self.rev_indptr[1:])

    def group_sizes(self) -> np.ndarray:
        return np.array([g.size for g in self.groups], dtype=np.int64)

    def __eq__(self, other):
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (self.n == other.n and self.p == other.p
                and np.array_equal(self.arc_src, other.arc_src)
                and np.array_equal(self.arc_dst, other.arc_dst)
                and len(self.groups) == len(other.groups)
                and all(np.array_equal(a, b) for a, b in zip(self.groups, other.groups))
                and self.node_ids == other.node_ids
                and self.group_names == other.group_names)

    def __repr__(self):
        return (f"AttributedGraph(n={self.n}, arcs={self.num_arcs}, "
                f"m={self.m}, p={self.p})")


@dataclass(frozen=True)
class SeedSet:
    """A chosen seed set together with its budget."""
    members: frozenset[int]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(v) for v in self.members))
        if len(self.members) > self.k:
            raise GraphValidationError(f"seed set of size {len(self.members)} exceeds budget {self.k}")

    def as_array(self) -> np.ndarray:
        return np.array(sorted(self.members), dtype=np.int64)


def from_edges(edges, p, groups, n=None, directed=False, node_ids=None, group_names=None) -> AttributedGraph:
    """Build a graph from an edge list; undirected edges become two arcs."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 1
    if not directed and edges.size:
        arcs = np.vstack([edges, edges[:, ::-1]])
    else:
        arcs = edges
    return AttributedGraph(n, arcs, p, groups, node_ids=node_ids, group_names=group_names)


def _as_text(source):
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    if isinstance(source, bytes):
        return source.decode("utf-8")
    text = str(source)
    if "\n" not in text and ("{" not in text):
        with open(text, "r", encoding="utf-8") as fh:
            return fh.read()
    return text


def load_graph(source, fmt="json", attrs=None, p=None) -> AttributedGraph:
    """Load a graph from JSON or from an edge list plus attribute file.

    ``source`` may be a path, file object, bytes, or text content. For
    fmt="edgelist", ``attrs`` supplies the node attribute CSV and ``p``
    the activation probability (the edge list carries no probability).
    """
    if fmt == "json":
        return _load_json(source)
    if fmt == "edgelist":
        if attrs is None or p is None:
            raise GraphFormatError("edgelist format requires an attribute file and p")
        return _load_edgelist(source, attrs, p)
    raise GraphFormatError(f"unknown graph format {fmt!r}")


def _load_json(source) -> AttributedGraph:
    text = _as_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    for key in ("directed", "p", "nodes", "edges"):
        if key not in doc:
            raise GraphFormatError(f"missing required field {key!r}")
    node_ids, group_names, node_groups = [], [], []
    name_to_gi = {}
    for pos, node in enumerate(doc["nodes"]):
        if "id" not in node or "groups" not in node:
            raise GraphFormatError(f"node entry {pos} missing 'id' or 'groups'")
        node_ids.append(str(node["id"]))
        gids = []
        for gname in node["groups"]:
            gname = str(gname)
            if gname not in name_to_gi:
                name_to_gi[gname] = len(group_names)
                group_names.append(gname)
            gids.append(name_to_gi[gname])
        node_groups.append(gids)
    if len(set(node_ids)) != len(node_ids):
        dup = next(v for v in node_ids if node_ids.count(v) > 1)
        raise GraphFormatError(f"duplicate node id {dup!r}")
    idx = {v: i for i, v in enumerate(node_ids)}
    groups = [[] for _ in group_names]
    for i, gids in enumerate(node_groups):
        if not gids:
            raise GraphValidationError(f"node {node_ids[i]!r} belongs to no group")
        for gi in gids:
            groups[gi].append(i)
    edges = []
    for pos, edge in enumerate(doc["edges"]):
        if len(edge) != 2:
            raise GraphFormatError(f"edge entry {pos} is not a pair")
        a, b = str(edge[0]), str(edge[1])
        if a not in idx or b not in idx:
            missing = a if a not in idx else b
            raise GraphFormatError(f"edge entry {pos} references unknown node {missing!r}")
        edges.append((idx[a], idx[b]))
    return from_edges(edges, doc["p"], groups, n=len(node_ids), directed=bool(doc["directed"]),
                      node_ids=node_ids, group_names=group_names)


def _load_edgelist(edge_source, attr_source, p) -> AttributedGraph:
    attr_text = _as_text(attr_source)
    node_ids, group_names, groups = [], [], []
    name_to_gi = {}
    reader = csv.reader(io.StringIO(attr_text))
    for lineno, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise GraphFormatError(f"attribute line {lineno}: expected 'id,group1;group2'")
        nid = row[0].strip()
        node_ids.append(nid)
        for gname in row[1].split(";"):
            gname = gname.strip()
            if not gname:
                raise GraphValidationError(f"attribute line {lineno}: node {nid!r} belongs to no group")
            if gname not in name_to_gi:
                name_to_gi[gname] = len(group_names)
                group_names.append(gname)
                groups.append([])
            groups[name_to_gi[gname]].append(len(node_ids) - 1)
    idx = {v: i for i, v in enumerate(node_ids)}
    edge_text = _as_text(edge_source)
    edges = []
    for lineno, line in enumerate(edge_text.splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"edge line {lineno}: expected two whitespace-separated ids")
        for v in parts:
            if v not in idx:
                raise GraphFormatError(f"edge line {lineno}: unknown node id {v!r}")
        edges.append((idx[parts[0]], idx[parts[1]]))
    return from_edges(edges, p, groups, n=len(node_ids), directed=False,
                      node_ids=node_ids, group_names=group_names)


def graph_to_json(G: AttributedGraph) -> dict:
    """Serializable dict in the same schema accepted by load_graph."""
    nodes = []
    for i in range(G.n):
        gnames = [G.group_names[gi] for gi in range(G.m) if G.member_mask[gi, i]]
        nodes.append({"id": G.node_ids[i], "groups": gnames})
    edges = [[G.node_ids[int(u)], G.node_ids[int(v)]] for u, v in zip(G.arc_src, G.arc_dst)]
    return {"directed": True, "p": G.p, "nodes": nodes, "edges": edges}


def save_graph(G: AttributedGraph, target) -> None:
    """Write the JSON form; load_graph(save_graph(G)) reproduces G."""
    doc = graph_to_json(G)
    if hasattr(target, "write"):
        json.dump(doc, target, indent=1)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1)


def induced_subgraph(G: AttributedGraph, nodes) -> tuple[AttributedGraph, np.ndarray]:
    """Subgraph on ``nodes`` with exactly the arcs internal to them.

    Returns the relabeled graph (single group covering everything) and the
    array mapping new indices back to indices in G.
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    if nodes.size == 0:
        raise GraphValidationError("cannot induce a subgraph on an empty node set")
    if nodes.min() < 0 or nodes.max() >= G.n:
        raise GraphValidationError("induced node set references a node outside the graph")
    new_index = np.full(G.n, -1, dtype=np.int64)
    new_index[nodes] = np.arange(nodes.size)
    keep = (new_index[G.arc_src] >= 0) & (new_index[G.arc_dst] >= 0)
    arcs = np.stack([new_index[G.arc_src[keep]], new_index[G.arc_dst[keep]]], axis=1)
    sub = AttributedGraph(nodes.size, arcs, G.p, [np.arange(nodes.size)],
                          node_ids=[G.node_ids[int(v)] for v in nodes], group_names=["all"])
    return sub, nodes


def with_probability(G: AttributedGraph, p: float) -> AttributedGraph:
    """Copy of G with a different activation probability."""
    arcs = np.stack([G.arc_src, G.arc_dst], axis=1) if G.num_arcs else np.empty((0, 2), dtype=np.int64)
    return AttributedGraph(G.n, arcs, p, G.groups, node_ids=G.node_ids, group_names=G.group_names)


def fair_allocation(G: AttributedGraph, k: int, i: int) -> int:
    """Proportional seed share of group i, rounded up: ceil(k*|C_i|/n)."""
    if not (1 <= k <= G.n):
        raise GraphValidationError(f"budget k={k} outside [1, {G.n}]")
    if not (0 <= i < G.m):
        raise GraphValidationError(f"group index {i} outside [0, {G.m})")
    size = int(G.groups[i].size)
    return -((-k * size) // G.n)
