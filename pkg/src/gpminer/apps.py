"""
gpminer Applications

Triangle counting (TC), k-clique finding (CF), k-motif counting (MC) and
frequent subgraph mining (FSM), each expressed as an AppCallbacks
configuration over the mining engine.
"""

import logging
import time
from dataclasses import replace
from typing import Any, Dict, List, Optional, Set, Tuple

from .config import settings
from .embedding import Embedding
from .engine import AppCallbacks, MiningResult, PatternMap, mine
from .graph import Graph, orient_dag
from .models import (
    AppName,
    AppResult,
    CliConfig,
    ConfigurationError,
    EmbeddingMode,
    EngineConfig,
    PatternRow,
)
from .pattern import (
    MEMO_PATTERNS,
    CanonicalPattern,
    PositionMap,
    classify_3_vertex,
    classify_extension,
    motif_patterns,
    quick_pattern,
)
from .support import DomainSupport, closed_mni, domain_support, merge_domain

logger = logging.getLogger(__name__)


def _engine_config(**kwargs) -> EngineConfig:
    """EngineConfig from keyword arguments, leaving unset (None) knobs at their defaults."""
    return EngineConfig(**{key: value for key, value in kwargs.items() if value is not None})


# =============================================================================
# Callbacks
# =============================================================================

class TriangleCallbacks(AppCallbacks):
    """Extend the last vertex only; accept u when it closes back to the first vertex."""

    def __init__(self, graph: Graph, oriented: bool = True):
        super().__init__(graph)
        self.oriented = oriented

    def to_extend(self, emb: Embedding, position: int) -> bool:
        return position == len(emb) - 1

    def _in_order(self, emb: Embedding, u: int) -> bool:
        # without a DAG, increasing ids keep each clique to one discovery order
        return self.oriented or u > emb.last_vertex

    def to_add_vertex(self, emb: Embedding, u: int) -> bool:
        return self._in_order(emb, u) and self.graph.is_connected(emb.first_vertex, u)


class CliqueCallbacks(TriangleCallbacks):
    """u must be adjacent to every vertex already in the embedding."""

    def to_add_vertex(self, emb: Embedding, u: int) -> bool:
        if not self._in_order(emb, u):
            return False
        # u comes from N(last vertex), so the last one needs no check
        return all(self.graph.is_connected(v, u) for v in emb.vertices[:-1])


class MotifCallbacks(AppCallbacks):
    """Vertex-induced counting with the automorphism test and count support."""
    reduce_enabled = True

    def __init__(self, graph: Graph, k: int, memoize: bool = False):
        super().__init__(graph)
        self.k = k
        self.memoize_patterns = memoize and k == 4

    def get_pattern(self, emb: Embedding):
        if self.k == 3:
            return classify_3_vertex(emb, self.graph)
        if self.memoize_patterns:
            return MEMO_PATTERNS[emb.pattern_id]
        return quick_pattern(emb, self.graph)

    def memo_pattern(self, emb: Embedding, u: int) -> int:
        return classify_extension(self.graph, emb, u, emb.pattern_id)


class FsmCallbacks(AppCallbacks):
    """
    Edge-induced growth with domain (MNI) support and per-level pruning.

    Embeddings survive while their pattern's automorphism-closed MNI reaches
    min_support; the pattern map reports canonical-mapping MNI.
    """
    mode = EmbeddingMode.EDGE
    reduce_enabled = True
    filter_enabled = True

    def __init__(self, graph: Graph, min_support: int):
        super().__init__(graph)
        self.min_support = min_support
        self.survivors: Set[CanonicalPattern] = set()

    def get_support(self, emb: Embedding) -> DomainSupport:
        return domain_support(emb, PositionMap.identity(len(emb)))

    def aggregate(self, s1: DomainSupport, s2: DomainSupport) -> DomainSupport:
        return merge_domain(s1, s2)

    def accumulate(self, acc: DomainSupport, s: DomainSupport) -> DomainSupport:
        return acc.update(s)

    def remap_support(self, support: DomainSupport, position_map: PositionMap) -> DomainSupport:
        return support.permuted(position_map)

    def prepare_filter(self, pattern_map: PatternMap) -> None:
        self.survivors = {
            pattern for pattern, support in pattern_map.items()
            if closed_mni(support, pattern) >= self.min_support
        }

    def to_prune(self, emb: Embedding, pattern_map: PatternMap) -> bool:
        return pattern_map.resolve(self.get_pattern(emb)) not in self.survivors


# =============================================================================
# Mining runs
# =============================================================================

def mine_triangles(graph: Graph, orient: bool = True, listing: bool = False,
                   num_workers: Optional[int] = None,
                   chunk_size: Optional[int] = None) -> MiningResult:
    work = orient_dag(graph) if orient else graph
    config = _engine_config(max_size=3, count_only=not listing,
                            num_workers=num_workers, chunk_size=chunk_size)
    return mine(work, config, TriangleCallbacks(work, oriented=orient))


def mine_cliques(graph: Graph, k: int, orient: bool = True, listing: bool = False,
                 num_workers: Optional[int] = None,
                 chunk_size: Optional[int] = None) -> MiningResult:
    if not 3 <= k <= settings.max_clique_size:
        raise ConfigurationError(f"clique size must be in [3, {settings.max_clique_size}], got {k}")
    work = orient_dag(graph) if orient else graph
    config = _engine_config(max_size=k, count_only=not listing,
                            num_workers=num_workers, chunk_size=chunk_size)
    return mine(work, config, CliqueCallbacks(work, oriented=orient))


def mine_motifs(graph: Graph, k: int, memoize: bool = False,
                num_workers: Optional[int] = None,
                chunk_size: Optional[int] = None) -> MiningResult:
    if k not in (3, 4, 5):
        raise ConfigurationError(f"motif size must be 3, 4 or 5, got {k}")
    if graph.is_oriented:
        raise ConfigurationError("motif counting needs the undirected graph")
    # motifs are structural only
    work = replace(graph, labels=None, label_names=None) if graph.has_labels else graph
    config = _engine_config(max_size=k, num_workers=num_workers, chunk_size=chunk_size)
    result = mine(work, config, MotifCallbacks(work, k, memoize=memoize))
    for pattern in motif_patterns(k):
        result.pattern_map.ensure(pattern, 0)
    return result


def mine_frequent(graph: Graph, k: int, min_support: int,
                  num_workers: Optional[int] = None,
                  chunk_size: Optional[int] = None) -> MiningResult:
    if not graph.has_labels:
        raise ConfigurationError("frequent subgraph mining needs a labeled graph")
    if not 2 <= k <= settings.max_pattern_vertices:
        raise ConfigurationError(
            f"fsm k must be in [2, {settings.max_pattern_vertices}], got {k}"
        )
    config = _engine_config(max_size=k, mode=EmbeddingMode.EDGE,
                            min_support=min_support, num_workers=num_workers,
                            chunk_size=chunk_size)
    return mine(graph, config, FsmCallbacks(graph, min_support))


# =============================================================================
# Public entry points
# =============================================================================

def triangle_count(graph: Graph, orient: bool = True, **engine_kwargs) -> int:
    """Exact number of triangles."""
    return mine_triangles(graph, orient=orient, **engine_kwargs).num_embeddings


def clique_find(graph: Graph, k: int, orient: bool = True, **engine_kwargs) -> int:
    """Exact number of k-cliques."""
    return mine_cliques(graph, k, orient=orient, **engine_kwargs).num_embeddings


def clique_list(graph: Graph, k: int, orient: bool = True, **engine_kwargs) -> List[Tuple[int, ...]]:
    """Every k-clique as a sorted tuple of original vertex ids, in sorted order."""
    result = mine_cliques(graph, k, orient=orient, listing=True, **engine_kwargs)
    return _listed(result, graph)


def motif_count(graph: Graph, k: int, memoize: bool = False, **engine_kwargs) -> PatternMap:
    """Counts of every connected k-vertex induced pattern (zero when absent)."""
    return mine_motifs(graph, k, memoize=memoize, **engine_kwargs).pattern_map


def fsm(graph: Graph, k: int, sigma: int, **engine_kwargs) -> PatternMap:
    """All patterns with up to k-1 edges whose MNI support is at least sigma."""
    result = mine_frequent(graph, k, sigma, **engine_kwargs)
    return result.all_patterns(merge_domain)


def _listed(result: MiningResult, graph: Graph) -> List[Tuple[int, ...]]:
    el = result.embedding_list
    if el.current_level == 0:
        return []
    return sorted(
        tuple(sorted(graph.original_id(v) for v in emb.vertices))
        for emb in el.embeddings()
    )


def _pattern_rows(pattern_map: PatternMap) -> List[PatternRow]:
    return [
        PatternRow(pattern=pattern.to_text(), support=value, name=pattern.name)
        for pattern, value in pattern_map.rows()
    ]


def execute_app(config: CliConfig, graph: Graph) -> Tuple[AppResult, MiningResult]:
    """Run the configured application; elapsed time excludes loading."""
    engine_kwargs: Dict[str, Any] = {"num_workers": config.threads}
    if config.app != AppName.FSM:
        engine_kwargs["chunk_size"] = config.effective_chunk_size

    start = time.perf_counter()
    total_count = None
    rows: List[PatternRow] = []
    if config.app == AppName.TC:
        result = mine_triangles(graph, orient=config.orient,
                                listing=config.list_embeddings, **engine_kwargs)
        total_count = result.num_embeddings
    elif config.app == AppName.CF:
        result = mine_cliques(graph, config.k, orient=config.orient,
                              listing=config.list_embeddings, **engine_kwargs)
        total_count = result.num_embeddings
    elif config.app == AppName.MC:
        result = mine_motifs(graph, config.k, memoize=config.memo, **engine_kwargs)
        rows = _pattern_rows(result.pattern_map)
    else:
        result = mine_frequent(graph, config.k, config.minsup, **engine_kwargs)
        rows = _pattern_rows(result.all_patterns(merge_domain))
    elapsed = time.perf_counter() - start

    embeddings = [list(e) for e in _listed(result, graph)] if config.list_embeddings else []
    logger.info("%s finished in %.3fs", config.app.value, elapsed)
    app_result = AppResult(
        app=config.app,
        total_count=total_count,
        pattern_table=rows,
        embeddings=embeddings,
        elapsed=elapsed,
        config=config.echo(),
    )
    return app_result, result


def run_app(config: CliConfig, graph: Graph) -> AppResult:
    return execute_app(config, graph)[0]
