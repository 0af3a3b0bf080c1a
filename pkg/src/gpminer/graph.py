"""
gpminer Graph Module

Loads, cleans and stores input graphs in compressed sparse row (CSR) form.
Neighbor lists are sorted ascending, which enables binary-search connectivity
checks and degree-based DAG orientation.
"""

import logging
from bisect import bisect_left
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .models import ConfigurationError, GraphFormat

logger = logging.getLogger(__name__)

UNLABELED = -1
COMMENT_PREFIXES = ("#", "%")

Lines = Union[TextIO, Iterable[str]]


class GraphFormatError(ValueError):
    """Malformed graph input; carries the offending line number when known."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable CSR graph.

    Undirected graphs store every edge as two half-edges. Oriented graphs
    (see orient_dag) store each edge once, pointing along a total order.
    """
    row_offsets: np.ndarray
    column_indices: np.ndarray
    labels: Optional[np.ndarray] = None
    is_oriented: bool = False
    id_map: Optional[np.ndarray] = None  # compact id -> id in the input file
    label_names: Optional[Tuple[str, ...]] = None  # interned string labels

    @property
    def num_vertices(self) -> int:
        return len(self.row_offsets) - 1

    @property
    def num_edges(self) -> int:
        """Number of stored half-edges (directed edges when oriented)."""
        return len(self.column_indices)

    @property
    def num_undirected_edges(self) -> int:
        return self.num_edges if self.is_oriented else self.num_edges // 2

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @cached_property
    def adjacency(self) -> List[List[int]]:
        """Neighbor lists as Python lists for tight mining loops."""
        return [
            self.column_indices[self.row_offsets[v]:self.row_offsets[v + 1]].tolist()
            for v in range(self.num_vertices)
        ]

    @cached_property
    def label_list(self) -> List[int]:
        if self.labels is None:
            return [UNLABELED] * self.num_vertices
        return self.labels.tolist()

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.num_vertices:
            raise IndexError(f"vertex {v} out of range [0, {self.num_vertices})")

    def neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self.column_indices[self.row_offsets[v]:self.row_offsets[v + 1]]

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.row_offsets[v + 1] - self.row_offsets[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def label(self, v: int) -> int:
        self._check_vertex(v)
        return UNLABELED if self.labels is None else int(self.labels[v])

    def is_connected(self, u: int, v: int) -> bool:
        """True iff v is in N(u), found by binary search over the sorted list."""
        self._check_vertex(u)
        self._check_vertex(v)
        adj = self.adjacency[u]
        i = bisect_left(adj, v)
        return i < len(adj) and adj[i] == v

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Each undirected edge once as (u, v) with u < v; every arc when oriented."""
        for u, adj in enumerate(self.adjacency):
            for v in adj:
                if self.is_oriented or u < v:
                    yield u, v

    def original_id(self, v: int) -> int:
        self._check_vertex(v)
        return v if self.id_map is None else int(self.id_map[v])

    def label_name(self, v: int) -> str:
        label = self.label(v)
        if self.label_names is not None:
            return self.label_names[label]
        return str(label)

    def __repr__(self) -> str:
        kind = "oriented" if self.is_oriented else "undirected"
        return (f"Graph({kind}, |V|={self.num_vertices}, "
                f"|E|={self.num_undirected_edges}, labeled={self.has_labels})")


# =============================================================================
# Construction
# =============================================================================

def _csr_from_arcs(src: np.ndarray, dst: np.ndarray, num_vertices: int) -> Tuple[np.ndarray, np.ndarray]:
    """Build CSR arrays from arcs already sorted by (src, dst)."""
    row_offsets = np.zeros(num_vertices + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=num_vertices), out=row_offsets[1:])
    return row_offsets, dst.astype(np.int64, copy=False)


def build_graph(
    edges: Union[np.ndarray, Iterable[Tuple[int, int]]],
    num_vertices: Optional[int] = None,
    labels: Optional[Sequence[int]] = None,
    id_map: Optional[np.ndarray] = None,
    label_names: Optional[Tuple[str, ...]] = None,
) -> Graph:
    """
    Build a cleaned undirected graph from dense vertex ids.

    Edges are symmetrized, self-loops dropped and duplicates merged; neighbor
    lists come out sorted ascending.
    """
    arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if num_vertices is None:
        num_vertices = int(arr.max()) + 1 if arr.size else 0
    if arr.size and (arr.min() < 0 or arr.max() >= num_vertices):
        raise IndexError(f"edge endpoint outside [0, {num_vertices})")

    src = np.concatenate([arr[:, 0], arr[:, 1]])
    dst = np.concatenate([arr[:, 1], arr[:, 0]])
    keep = src != dst
    keys = np.unique(src[keep] * num_vertices + dst[keep])
    row_offsets, column_indices = _csr_from_arcs(
        keys // max(num_vertices, 1), keys % max(num_vertices, 1), num_vertices
    )

    label_array = None
    if labels is not None:
        label_array = np.asarray(labels, dtype=np.int64)
        if len(label_array) != num_vertices:
            raise ValueError(f"expected {num_vertices} labels, got {len(label_array)}")
        if label_array.size and label_array.min() < 0:
            raise ValueError("labels must be non-negative integers")

    return Graph(
        row_offsets=row_offsets,
        column_indices=column_indices,
        labels=label_array,
        id_map=id_map,
        label_names=label_names,
    )


def _compact_ids(raw_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """Map arbitrary non-negative ids onto [0, n); returns (ids, inverse, id_map or None)."""
    ids, inverse = np.unique(raw_ids, return_inverse=True)
    if len(ids) and ids[-1] == len(ids) - 1:
        return ids, inverse, None
    if len(ids):
        logger.warning("Compacted %d vertex ids (max input id %d)", len(ids), int(ids[-1]))
    return ids, inverse, ids


def _content_lines(source: Lines) -> Iterator[Tuple[int, List[str]]]:
    for line_number, line in enumerate(source, start=1):
        text = line.strip()
        if not text or text.startswith(COMMENT_PREFIXES):
            continue
        yield line_number, text.split()


def _is_ascii_number(token: str) -> bool:
    return token.isascii() and token.isdigit()


def _parse_vertex_id(token: str, line_number: int) -> int:
    if not _is_ascii_number(token):
        raise GraphFormatError(f"expected a non-negative ASCII integer vertex id, got {token!r}", line_number)
    return int(token)


# =============================================================================
# Loaders
# =============================================================================

def load_edge_list(source: Lines) -> Graph:
    """
    Load an unlabeled edge list ("u v" per line, '#'/'%' comments).

    Raises:
        GraphFormatError: malformed line or no edge left after cleaning
    """
    pairs: List[Tuple[int, int]] = []
    for line_number, parts in _content_lines(source):
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'u v', got {' '.join(parts)!r}", line_number)
        pairs.append((_parse_vertex_id(parts[0], line_number),
                      _parse_vertex_id(parts[1], line_number)))

    if not pairs:
        raise GraphFormatError("empty edge set")

    raw = np.asarray(pairs, dtype=np.int64)
    ids, inverse, id_map = _compact_ids(raw.ravel())
    graph = build_graph(inverse.reshape(-1, 2), num_vertices=len(ids), id_map=id_map)
    if graph.num_edges == 0:
        raise GraphFormatError("empty edge set after removing self-loops")

    logger.info("Loaded edge list: |V|=%d |E|=%d", graph.num_vertices, graph.num_undirected_edges)
    return graph


def _intern_labels(tokens: List[str]) -> Tuple[List[int], Optional[Tuple[str, ...]]]:
    """Keep non-negative integer labels; otherwise intern strings in sorted order."""
    if all(_is_ascii_number(tok) for tok in tokens):
        return [int(tok) for tok in tokens], None
    names = tuple(sorted(set(tokens)))
    index = {name: i for i, name in enumerate(names)}
    return [index[tok] for tok in tokens], names


def load_labeled_graph(source: Lines) -> Graph:
    """
    Load a gSpan-style labeled graph.

    Lines are "v <id> <label>" and "e <u> <v> [edge-label]"; an optional
    "t # <id>" header is accepted once. Edge labels are ignored.

    Raises:
        GraphFormatError: malformed line, duplicate or undeclared vertex,
            or an empty edge set
    """
    vertex_ids: List[int] = []
    label_tokens: List[str] = []
    declared: Dict[int, int] = {}
    raw_edges: List[Tuple[int, int]] = []
    seen_header = False

    for line_number, parts in _content_lines(source):
        kind = parts[0]
        if kind == "t":
            if seen_header:
                raise GraphFormatError("only single-graph inputs are supported", line_number)
            seen_header = True
        elif kind == "v":
            if len(parts) != 3:
                raise GraphFormatError("expected 'v <id> <label>'", line_number)
            vid = _parse_vertex_id(parts[1], line_number)
            if vid in declared:
                raise GraphFormatError(f"vertex {vid} declared twice", line_number)
            declared[vid] = len(vertex_ids)
            vertex_ids.append(vid)
            label_tokens.append(parts[2])
        elif kind == "e":
            if len(parts) not in (3, 4):
                raise GraphFormatError("expected 'e <u> <v> [label]'", line_number)
            u = _parse_vertex_id(parts[1], line_number)
            v = _parse_vertex_id(parts[2], line_number)
            for endpoint in (u, v):
                if endpoint not in declared:
                    raise GraphFormatError(f"undeclared vertex {endpoint}", line_number)
            raw_edges.append((u, v))
        else:
            raise GraphFormatError(f"unknown record type {kind!r}", line_number)

    if not raw_edges:
        raise GraphFormatError("empty edge set")

    ids, _, id_map = _compact_ids(np.asarray(vertex_ids, dtype=np.int64))
    order = np.argsort(np.asarray(vertex_ids))
    labels, names = _intern_labels([label_tokens[i] for i in order])
    position = {int(raw): i for i, raw in enumerate(ids)}
    edges = [(position[u], position[v]) for u, v in raw_edges]

    graph = build_graph(edges, num_vertices=len(ids), labels=labels,
                        id_map=id_map, label_names=names)
    if graph.num_edges == 0:
        raise GraphFormatError("empty edge set after removing self-loops")
    isolated = int(np.count_nonzero(graph.degrees() == 0))
    if isolated:
        logger.warning("%d declared vertices have no edges", isolated)

    logger.info("Loaded labeled graph: |V|=%d |E|=%d labels=%d",
                graph.num_vertices, graph.num_undirected_edges, len(set(labels)))
    return graph


def load_graph(path: Union[str, Path], fmt: Optional[GraphFormat] = None) -> Graph:
    """Open a file and dispatch on its format (guessed from the extension if omitted)."""
    path = Path(path)
    fmt = fmt or GraphFormat.from_path(path)
    with open(path, "r", encoding="utf-8") as f:
        if fmt == GraphFormat.LABELED:
            return load_labeled_graph(f)
        return load_edge_list(f)


# =============================================================================
# Writers
# =============================================================================

def write_edge_list(graph: Graph, stream: TextIO) -> None:
    """Write edges with their original ids, one "u v" line each."""
    stream.write(f"# |V|={graph.num_vertices} |E|={graph.num_undirected_edges}\n")
    for u, v in graph.edges():
        stream.write(f"{graph.original_id(u)} {graph.original_id(v)}\n")


def write_labeled_graph(graph: Graph, stream: TextIO) -> None:
    """Write the graph in the gSpan-style format read by load_labeled_graph."""
    stream.write("t # 0\n")
    for v in range(graph.num_vertices):
        stream.write(f"v {graph.original_id(v)} {graph.label_name(v)}\n")
    for u, v in graph.edges():
        stream.write(f"e {graph.original_id(u)} {graph.original_id(v)}\n")


# =============================================================================
# Orientation
# =============================================================================

def orient_dag(graph: Graph) -> Graph:
    """
    Orient every undirected edge toward its higher-degree endpoint.

    Ties go to the larger vertex id, so the order (degree, id) is total and
    the result is acyclic. Core-value ordering would slot in here as another
    rank array.
    """
    if graph.is_oriented:
        raise ConfigurationError("graph is already oriented")

    deg = graph.degrees()
    src = np.repeat(np.arange(graph.num_vertices, dtype=np.int64), deg)
    dst = graph.column_indices
    forward = (deg[src] < deg[dst]) | ((deg[src] == deg[dst]) & (src < dst))

    row_offsets, column_indices = _csr_from_arcs(src[forward], dst[forward], graph.num_vertices)
    logger.debug("Oriented %d undirected edges", len(column_indices))
    return replace(
        graph,
        row_offsets=row_offsets,
        column_indices=column_indices,
        is_oriented=True,
    )
