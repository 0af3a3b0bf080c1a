"""
gpminer Pattern Module

Quick patterns (position-ordered structural keys of embeddings), exact
canonical labeling for small patterns, automorphism-canonicality tests used
to grow each subgraph exactly once, and customized classifiers that skip
the isomorphism test for 3- and 4-vertex motifs.
"""

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Dict, List, Optional, Sequence, Tuple

from .config import settings
from .embedding import Embedding
from .graph import UNLABELED, Graph

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


class PatternTooLargeError(ValueError):
    """Canonicalization requested above the supported pattern size."""


@dataclass(frozen=True, order=True)
class QuickPattern:
    """Labels and adjacency of an embedding, indexed by insertion position."""
    num_vertices: int
    position_labels: Tuple[int, ...]
    position_edges: Tuple[Edge, ...]


@dataclass(frozen=True, order=True)
class CanonicalPattern:
    """Isomorphism-invariant form of a pattern; the key of pattern maps."""
    num_vertices: int
    labels: Tuple[int, ...]
    edges: Tuple[Edge, ...]

    _TEXT = re.compile(r"^k=(\d+);L=([^;]*);E=((?:\(\d+,\d+\))*)$")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_labeled(self) -> bool:
        return any(label != UNLABELED for label in self.labels)

    @property
    def name(self) -> Optional[str]:
        return motif_name(self)

    def to_text(self) -> str:
        """Stable serialization: k=<n>;L=<l0,...>;E=(i,j)(i,j)..."""
        labels = ",".join(str(x) for x in self.labels) if self.is_labeled else "*"
        edges = "".join(f"({i},{j})" for i, j in self.edges)
        return f"k={self.num_vertices};L={labels};E={edges}"

    @classmethod
    def from_text(cls, text: str) -> "CanonicalPattern":
        match = cls._TEXT.match(text.strip())
        if not match:
            raise ValueError(f"not a pattern: {text!r}")
        n = int(match.group(1))
        labels_text = match.group(2)
        labels = (UNLABELED,) * n if labels_text == "*" else tuple(int(x) for x in labels_text.split(","))
        edges = tuple((int(i), int(j)) for i, j in re.findall(r"\((\d+),(\d+)\)", match.group(3)))
        return cls(n, labels, edges)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class PositionMap:
    """perm[i] is the canonical position of quick-pattern position i."""
    perm: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")

    def __len__(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "PositionMap":
        return cls(tuple(range(n)))

    def apply(self, qp: QuickPattern) -> CanonicalPattern:
        labels = [UNLABELED] * qp.num_vertices
        for i, label in enumerate(qp.position_labels):
            labels[self.perm[i]] = label
        return CanonicalPattern(qp.num_vertices, tuple(labels), _relabel_edges(qp.position_edges, self.perm))


def _norm(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def _relabel_edges(edges: Sequence[Edge], perm: Sequence[int]) -> Tuple[Edge, ...]:
    return tuple(sorted(_norm(perm[i], perm[j]) for i, j in edges))


def _adjacent(graph: Graph, a: int, b: int) -> bool:
    """Adjacency regardless of orientation."""
    return graph.is_connected(a, b) or (graph.is_oriented and graph.is_connected(b, a))


# =============================================================================
# Quick patterns and canonical labeling
# =============================================================================

def quick_pattern(emb: Embedding, graph: Graph) -> QuickPattern:
    """
    Position-ordered key of an embedding.

    Vertex-induced: every graph edge among the embedding's vertices.
    Edge-induced: exactly the embedding's edges.
    """
    verts = emb.vertices
    labels = graph.label_list
    if emb.is_edge_induced:
        pos = {v: i for i, v in enumerate(verts)}
        edges = tuple(sorted({_norm(pos[a], pos[b]) for a, b in emb.edge_pairs()}))
    else:
        edges = tuple(
            (i, j)
            for i, j in combinations(range(len(verts)), 2)
            if _adjacent(graph, verts[i], verts[j])
        )
    return QuickPattern(len(verts), tuple(labels[v] for v in verts), edges)


@lru_cache(maxsize=65536)
def canonicalize(qp: QuickPattern) -> Tuple[CanonicalPattern, PositionMap]:
    """
    Exact canonical form by minimization over permutations.

    Vertices are first partitioned by (label, degree within the pattern);
    only permutations that list the blocks in key order are tried, and the
    smallest edge encoding wins. Ties keep the first permutation found.
    """
    n = qp.num_vertices
    if n > settings.max_pattern_vertices:
        raise PatternTooLargeError(
            f"pattern has {n} vertices, limit is {settings.max_pattern_vertices}"
        )

    degree = [0] * n
    for i, j in qp.position_edges:
        degree[i] += 1
        degree[j] += 1
    keys = [(qp.position_labels[i], -degree[i]) for i in range(n)]
    blocks: Dict[Tuple[int, int], List[int]] = {}
    for i in sorted(range(n), key=lambda i: keys[i]):
        blocks.setdefault(keys[i], []).append(i)
    ordered_blocks = [blocks[key] for key in sorted(blocks)]

    best_edges: Optional[Tuple[Edge, ...]] = None
    best_perm: Optional[List[int]] = None
    for choice in product(*(permutations(block) for block in ordered_blocks)):
        perm = [0] * n
        slot = 0
        for block in choice:
            for position in block:
                perm[position] = slot
                slot += 1
        encoded = _relabel_edges(qp.position_edges, perm)
        if best_edges is None or encoded < best_edges:
            best_edges, best_perm = encoded, perm

    position_map = PositionMap(tuple(best_perm))
    return position_map.apply(qp), position_map


def canonical_pattern(emb: Embedding, graph: Graph) -> CanonicalPattern:
    """Direct per-embedding canonicalization (no quick-pattern grouping)."""
    return canonicalize(quick_pattern(emb, graph))[0]


@lru_cache(maxsize=4096)
def automorphisms(pattern: CanonicalPattern) -> Tuple[Tuple[int, ...], ...]:
    """
    Every label- and edge-preserving permutation of the pattern's positions.

    perm[i] is the image of position i. Only positions with equal label and
    degree are exchanged; the identity always comes first.
    """
    n = pattern.num_vertices
    degree = [0] * n
    for i, j in pattern.edges:
        degree[i] += 1
        degree[j] += 1
    blocks: Dict[Tuple[int, int], List[int]] = {}
    for i in range(n):
        blocks.setdefault((pattern.labels[i], degree[i]), []).append(i)
    groups = list(blocks.values())

    edges = set(pattern.edges)
    found = []
    for choice in product(*(permutations(group) for group in groups)):
        perm = [0] * n
        for group, images in zip(groups, choice):
            for position, image in zip(group, images):
                perm[position] = image
        if {_norm(perm[i], perm[j]) for i, j in edges} == edges:
            found.append(tuple(perm))
    return tuple(found)


# =============================================================================
# Automorphism-canonicality tests
# =============================================================================

def is_auto_canonical_vertex(graph: Graph, emb: Embedding, u: int) -> bool:
    """
    True iff appending u follows the canonical generation order of the set.

    The canonical order starts from the smallest vertex and keeps appending
    the smallest unchosen vertex adjacent to a chosen one.
    """
    verts = emb.vertices
    if u <= verts[0] or u in verts:
        return False
    for p, v in enumerate(verts):
        if _adjacent(graph, v, u):
            return all(u > verts[t] for t in range(p + 1, len(verts)))
    return False


def is_auto_canonical_edge(graph: Graph, emb: Embedding, edge: Edge) -> bool:
    """
    Edge-induced counterpart: the edge sequence must match the canonical
    order that starts from the smallest edge and keeps appending the
    smallest unused edge touching the chosen subgraph.
    """
    new = _norm(*edge)
    seq = [_norm(a, b) for a, b in emb.edge_pairs()]
    if new in seq or new < seq[0]:
        return False
    covered = set(seq[0])
    for step in seq[1:]:
        if (new[0] in covered or new[1] in covered) and new < step:
            return False
        covered.update(step)
    return new[0] in covered or new[1] in covered


# =============================================================================
# Well-known motifs and customized classifiers
# =============================================================================

def _unlabeled(n: int, edges: Sequence[Edge]) -> CanonicalPattern:
    return canonicalize(QuickPattern(n, (UNLABELED,) * n, tuple(sorted(edges))))[0]


SINGLE_EDGE = _unlabeled(2, [(0, 1)])
WEDGE = _unlabeled(3, [(0, 1), (0, 2)])
TRIANGLE = _unlabeled(3, [(0, 1), (0, 2), (1, 2)])
THREE_STAR = _unlabeled(4, [(0, 1), (0, 2), (0, 3)])
FOUR_PATH = _unlabeled(4, [(0, 1), (1, 2), (2, 3)])
TAILED_TRIANGLE = _unlabeled(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
FOUR_CYCLE = _unlabeled(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
DIAMOND = _unlabeled(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
FOUR_CLIQUE = _unlabeled(4, list(combinations(range(4), 2)))

# Pattern ids used by the memoized classifier; index into MEMO_PATTERNS
MEMO_PATTERNS: Tuple[CanonicalPattern, ...] = (
    SINGLE_EDGE, WEDGE, TRIANGLE,
    THREE_STAR, FOUR_PATH, TAILED_TRIANGLE, FOUR_CYCLE, DIAMOND, FOUR_CLIQUE,
)
(EDGE_ID, WEDGE_ID, TRIANGLE_ID, THREE_STAR_ID, FOUR_PATH_ID,
 TAILED_TRIANGLE_ID, FOUR_CYCLE_ID, DIAMOND_ID, FOUR_CLIQUE_ID) = range(len(MEMO_PATTERNS))

_MOTIF_NAMES: Dict[CanonicalPattern, str] = {
    SINGLE_EDGE: "edge",
    WEDGE: "wedge",
    TRIANGLE: "triangle",
    THREE_STAR: "3-star",
    FOUR_PATH: "4-path",
    TAILED_TRIANGLE: "tailed-triangle",
    FOUR_CYCLE: "4-cycle",
    DIAMOND: "diamond",
    FOUR_CLIQUE: "4-clique",
}


def motif_name(pattern: CanonicalPattern) -> Optional[str]:
    return _MOTIF_NAMES.get(pattern)


def _is_connected_edge_set(n: int, edges: Sequence[Edge]) -> bool:
    reached = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for a, b in edges:
            for x, y in ((a, b), (b, a)):
                if x == v and y not in reached:
                    reached.add(y)
                    frontier.append(y)
    return len(reached) == n


@lru_cache(maxsize=None)
def motif_patterns(k: int) -> Tuple[CanonicalPattern, ...]:
    """All connected unlabeled k-vertex patterns (2 for k=3, 6 for k=4)."""
    pairs = list(combinations(range(k), 2))
    found = set()
    for r in range(k - 1, len(pairs) + 1):
        for edges in combinations(pairs, r):
            if _is_connected_edge_set(k, edges):
                found.add(_unlabeled(k, edges))
    return tuple(sorted(found))


def classify_3_vertex(emb: Embedding, graph: Graph) -> CanonicalPattern:
    """Triangle or wedge from the induced edge count alone."""
    if len(emb) != 3:
        raise ValueError(f"expected a 3-vertex embedding, got {len(emb)} vertices")
    a, b, c = emb.vertices
    num_edges = _adjacent(graph, a, b) + _adjacent(graph, a, c) + _adjacent(graph, b, c)
    return TRIANGLE if num_edges == 3 else WEDGE


def classify_extension(graph: Graph, emb: Embedding, u: int, parent_id: int) -> int:
    """
    Pattern id of emb + u, given the memoized pattern id of emb.

    Only the links between u and the embedding are inspected; for a wedge
    parent the wedge center decides between the 4-vertex shapes.
    """
    verts = emb.vertices
    links = [_adjacent(graph, v, u) for v in verts]
    count = sum(links)
    if len(verts) == 2:
        return TRIANGLE_ID if count == 2 else WEDGE_ID
    if len(verts) != 3:
        raise ValueError("memoized classification covers up to 4 vertices")

    if parent_id == TRIANGLE_ID:
        return {1: TAILED_TRIANGLE_ID, 2: DIAMOND_ID, 3: FOUR_CLIQUE_ID}[count]

    a, b, c = verts
    if _adjacent(graph, a, b) and _adjacent(graph, a, c):
        center = 0
    elif _adjacent(graph, a, b):
        center = 1
    else:
        center = 2
    if count == 3:
        return DIAMOND_ID
    if count == 2:
        return TAILED_TRIANGLE_ID if links[center] else FOUR_CYCLE_ID
    return THREE_STAR_ID if links[center] else FOUR_PATH_ID
