"""
gpminer Mining Engine

Level-by-level extend / reduce / filter execution over an EmbeddingList.

Applications plug in through AppCallbacks. Each phase is data-parallel over
index ranges of the current level (see parallel.py) and ends before the next
phase starts. Extension is two-pass: the inspection pass counts accepted
children per parent, an exclusive prefix sum reserves output offsets, and
the execution pass writes children into those disjoint slots. Candidates
are filtered inline; no candidate list is built.
"""

import logging
import operator
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .embedding import (
    PID_DTYPE,
    Embedding,
    EmbeddingList,
    init_single_edges,
    level_class,
)
from .graph import Graph
from .models import ConfigurationError, EmbeddingMode, EngineConfig
from .parallel import SharedColumns, exclusive_prefix_sum, open_sink, run_ranges
from .pattern import (
    EDGE_ID,
    CanonicalPattern,
    PositionMap,
    QuickPattern,
    canonicalize,
    is_auto_canonical_edge,
    is_auto_canonical_vertex,
    quick_pattern,
)
from .support import Support, support_value

logger = logging.getLogger(__name__)

AnyPattern = Union[QuickPattern, CanonicalPattern]
Aggregate = Callable[[Support, Support], Support]

NO_PATTERN = -1


# =============================================================================
# Application contract
# =============================================================================

class AppCallbacks:
    """
    Hooks an application overrides to steer mining.

    Every hook has a default, so an application overrides only what it needs.
    Hooks must be pure functions of their arguments and the graph; they may
    run concurrently in worker processes.
    """
    mode: EmbeddingMode = EmbeddingMode.VERTEX
    reduce_enabled: bool = False
    filter_enabled: bool = False
    memoize_patterns: bool = False

    def __init__(self, graph: Graph):
        self.graph = graph

    def to_extend(self, emb: Embedding, position: int) -> bool:
        """Whether the vertex at `position` may be extended."""
        return True

    def to_add_vertex(self, emb: Embedding, u: int) -> bool:
        return is_auto_canonical_vertex(self.graph, emb, u)

    def to_add_edge(self, emb: Embedding, edge: Tuple[int, int]) -> bool:
        return is_auto_canonical_edge(self.graph, emb, edge)

    def get_pattern(self, emb: Embedding) -> AnyPattern:
        """Quick pattern by default; returning a CanonicalPattern skips canonicalization."""
        return quick_pattern(emb, self.graph)

    def get_support(self, emb: Embedding) -> Support:
        return 1

    def aggregate(self, s1: Support, s2: Support) -> Support:
        return s1 + s2

    def accumulate(self, acc: Support, s: Support) -> Support:
        """Fold s into an engine-owned accumulator; may update acc in place."""
        return self.aggregate(acc, s)

    def remap_support(self, support: Support, position_map: PositionMap) -> Support:
        """Re-key a support gathered in quick-pattern positions to canonical positions."""
        return support

    def prepare_filter(self, pattern_map: "PatternMap") -> None:
        """Called once per filter phase, before any to_prune call."""

    def to_prune(self, emb: Embedding, pattern_map: "PatternMap") -> bool:
        return False

    def memo_pattern(self, emb: Embedding, u: int) -> int:
        """Pattern id of emb + u from emb.pattern_id (memoizing apps only)."""
        raise NotImplementedError(f"{type(self).__name__} does not memoize patterns")


# =============================================================================
# Pattern map
# =============================================================================

class PatternMap:
    """
    Canonical pattern -> support.

    aliases remembers which canonical pattern each quick pattern reduced to,
    so later phases can resolve a quick pattern without canonicalizing again.
    """

    def __init__(self):
        self.entries: Dict[CanonicalPattern, Support] = {}
        self.aliases: Dict[QuickPattern, CanonicalPattern] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[CanonicalPattern]:
        return iter(self.entries)

    def __contains__(self, pattern: CanonicalPattern) -> bool:
        return pattern in self.entries

    def __getitem__(self, pattern: CanonicalPattern) -> Support:
        return self.entries[pattern]

    def items(self):
        return self.entries.items()

    def add(self, pattern: CanonicalPattern, support: Support,
            aggregate: Aggregate = operator.add) -> None:
        if pattern in self.entries:
            self.entries[pattern] = aggregate(self.entries[pattern], support)
        else:
            self.entries[pattern] = support

    def ensure(self, pattern: CanonicalPattern, support: Support) -> None:
        """Insert pattern with support unless already present."""
        self.entries.setdefault(pattern, support)

    def resolve(self, pattern: AnyPattern) -> Optional[CanonicalPattern]:
        if isinstance(pattern, CanonicalPattern):
            return pattern
        return self.aliases.get(pattern)

    def support_of(self, pattern: AnyPattern) -> Optional[int]:
        canonical = self.resolve(pattern)
        if canonical is None or canonical not in self.entries:
            return None
        return support_value(self.entries[canonical])

    def counts(self) -> Dict[CanonicalPattern, int]:
        return {pattern: support_value(s) for pattern, s in self.entries.items()}

    def total(self) -> int:
        return sum(self.counts().values())

    def prune(self, min_support: int) -> int:
        """Drop entries whose support value is below min_support; returns how many."""
        doomed = [p for p, s in self.entries.items() if support_value(s) < min_support]
        for pattern in doomed:
            del self.entries[pattern]
        return len(doomed)

    def merged(self, other: "PatternMap", aggregate: Aggregate = operator.add) -> "PatternMap":
        result = PatternMap()
        result.entries = dict(self.entries)
        result.aliases = {**self.aliases, **other.aliases}
        for pattern, support in other.entries.items():
            result.add(pattern, support, aggregate)
        return result

    @classmethod
    def merge_all(cls, maps: Sequence["PatternMap"], aggregate: Aggregate = operator.add) -> "PatternMap":
        result = cls()
        for pmap in maps:
            result = result.merged(pmap, aggregate)
        return result

    def rows(self) -> List[Tuple[CanonicalPattern, int]]:
        """(pattern, support value) sorted by descending support, then pattern text."""
        return sorted(self.counts().items(), key=lambda item: (-item[1], item[0].to_text()))

    def to_tsv(self) -> str:
        lines = ["pattern\tsupport"]
        lines.extend(f"{pattern.to_text()}\t{value}" for pattern, value in self.rows())
        return "\n".join(lines) + "\n"


@dataclass
class MiningResult:
    """Final worklist, last reduced pattern map and per-level maps."""
    embedding_list: EmbeddingList
    pattern_map: PatternMap
    level_maps: List[PatternMap] = field(default_factory=list)
    num_embeddings: int = 0

    def all_patterns(self, aggregate: Aggregate = operator.add) -> PatternMap:
        """Union of every reduced level (patterns of different levels never collide)."""
        return PatternMap.merge_all(self.level_maps, aggregate)

    @classmethod
    def combine(cls, parts: Sequence["MiningResult"], aggregate: Aggregate = operator.add) -> "MiningResult":
        """Join per-chunk results in chunk order."""
        depth = max(len(p.level_maps) for p in parts)
        level_maps = [
            PatternMap.merge_all([p.level_maps[i] for p in parts if i < len(p.level_maps)], aggregate)
            for i in range(depth)
        ]
        return cls(
            embedding_list=EmbeddingList.concatenate([p.embedding_list for p in parts]),
            pattern_map=PatternMap.merge_all([p.pattern_map for p in parts], aggregate),
            level_maps=level_maps,
            num_embeddings=sum(p.num_embeddings for p in parts),
        )


# =============================================================================
# Candidate generation
# =============================================================================

def _norm(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _vertex_children(cb: AppCallbacks, emb: Embedding) -> Iterator[Tuple[int, int, int]]:
    adjacency = cb.graph.adjacency
    members = set(emb.vertices)
    offered = set()
    for i, v in enumerate(emb.vertices):
        if not cb.to_extend(emb, i):
            continue
        for u in adjacency[v]:
            # offer each candidate once, from its first extendable neighbor
            if u in members or u in offered:
                continue
            offered.add(u)
            if cb.to_add_vertex(emb, u):
                pid = cb.memo_pattern(emb, u) if cb.memoize_patterns else NO_PATTERN
                yield u, 0, pid


def _edge_children(cb: AppCallbacks, emb: Embedding) -> Iterator[Tuple[int, int, int]]:
    adjacency = cb.graph.adjacency
    verts = emb.vertices
    position = {v: i for i, v in enumerate(verts)}
    elements = emb.elements
    used = {_norm(a, b) for a, b in emb.edge_pairs()}
    extendable = [cb.to_extend(emb, i) for i in range(len(verts))]
    for i, v in enumerate(verts):
        if not extendable[i]:
            continue
        his = elements.index(v)
        for w in adjacency[v]:
            if _norm(v, w) in used:
                continue
            j = position.get(w)
            # back edge: offered from its earlier extendable endpoint only
            if j is not None and j < i and extendable[j]:
                continue
            if cb.to_add_edge(emb, (v, w)):
                yield w, his, NO_PATTERN


def iter_children(cb: AppCallbacks, emb: Embedding) -> Iterator[Tuple[int, int, int]]:
    """Accepted children of one embedding as (vid, his, pattern id)."""
    if cb.mode == EmbeddingMode.EDGE:
        return _edge_children(cb, emb)
    return _vertex_children(cb, emb)


# =============================================================================
# Phase kernels (module level so worker processes can import them)
# =============================================================================

def _range_embeddings(state: Dict[str, Any], start: int, end: int) -> List[Embedding]:
    return state["embeddings"].embeddings(state["level"], start, end)


def _count_kernel(state: Dict[str, Any], start: int, end: int) -> np.ndarray:
    cb = state["callbacks"]
    return np.fromiter(
        (sum(1 for _ in iter_children(cb, emb)) for emb in _range_embeddings(state, start, end)),
        dtype=np.int64,
        count=end - start,
    )


def _write_range(state: Dict[str, Any], start: int, end: int, out: Dict[str, np.ndarray]) -> int:
    cb = state["callbacks"]
    offsets = state["offsets"]
    idx: List[int] = []
    vid: List[int] = []
    his: List[int] = []
    pid: List[int] = []
    for pos, emb in enumerate(_range_embeddings(state, start, end), start=start):
        for child, source_level, pattern_id in iter_children(cb, emb):
            idx.append(pos)
            vid.append(child)
            his.append(source_level)
            pid.append(pattern_id)

    base = int(offsets[start])
    stop = base + len(idx)
    reserved = int(offsets[end]) if end < len(offsets) else state["total"]
    if stop != reserved:
        raise RuntimeError(
            f"range [{start}, {end}) produced {len(idx)} children, {reserved - base} were reserved"
        )
    out["idx"][base:stop] = idx
    out["vid"][base:stop] = vid
    if "his" in out:
        out["his"][base:stop] = his
    if "pid" in out:
        out["pid"][base:stop] = pid
    return len(idx)


def _write_kernel(state: Dict[str, Any], start: int, end: int) -> int:
    with open_sink(state["sink"]) as out:
        return _write_range(state, start, end, out)


def _reduce_kernel(state: Dict[str, Any], start: int, end: int) -> Dict[AnyPattern, Support]:
    cb = state["callbacks"]
    partial: Dict[AnyPattern, Support] = {}
    for emb in _range_embeddings(state, start, end):
        key = cb.get_pattern(emb)
        support = cb.get_support(emb)
        partial[key] = cb.accumulate(partial[key], support) if key in partial else support
    return partial


def _filter_kernel(state: Dict[str, Any], start: int, end: int) -> np.ndarray:
    cb = state["callbacks"]
    pattern_map = state["pattern_map"]
    return np.fromiter(
        (not cb.to_prune(emb, pattern_map) for emb in _range_embeddings(state, start, end)),
        dtype=bool,
        count=end - start,
    )


def _merge_partials(partials: List[Dict[AnyPattern, Support]],
                    cb: AppCallbacks) -> Dict[AnyPattern, Support]:
    """Pairwise tree merge of per-range partial maps."""
    while len(partials) > 1:
        merged = []
        for left, right in zip(partials[0::2], partials[1::2]):
            for key, support in right.items():
                left[key] = cb.accumulate(left[key], support) if key in left else support
            merged.append(left)
        if len(partials) % 2:
            merged.append(partials[-1])
        partials = merged
    return partials[0] if partials else {}


# =============================================================================
# Engine
# =============================================================================

class MiningEngine:
    """
    Runs one mining job.

    Usage:
        engine = MiningEngine(graph, EngineConfig(max_size=4), callbacks)
        result = engine.mine()
    """

    def __init__(self, graph: Graph, config: EngineConfig, callbacks: AppCallbacks):
        self.graph = graph
        self.config = config
        self.callbacks = callbacks
        self._check_config()

    def _check_config(self) -> None:
        cfg, cb = self.config, self.callbacks
        if cb.mode != cfg.mode:
            raise ConfigurationError(
                f"callbacks grow {cb.mode.value} embeddings, config asks for {cfg.mode.value}"
            )
        if cb.filter_enabled and not cb.reduce_enabled:
            raise ConfigurationError("filtering needs reduction")
        if cb.filter_enabled and cfg.blocking_enabled:
            logger.warning("refusing edge blocking (chunk_size=%d) for %s", cfg.chunk_size, type(cb).__name__)
            raise ConfigurationError("edge blocking cannot be combined with filtering")
        if cfg.count_only and cb.reduce_enabled:
            raise ConfigurationError("count-only runs do not reduce the last level")
        if cb.memoize_patterns and cfg.mode == EmbeddingMode.EDGE:
            raise ConfigurationError("pattern memoization is vertex-mode only")

    def _phase_state(self, el: EmbeddingList, **extra) -> Dict[str, Any]:
        state = {"embeddings": el, "level": el.current_level, "callbacks": self.callbacks}
        state.update(extra)
        return state

    def _in_process(self, size: int) -> bool:
        return self.config.num_workers <= 1 or size < self.config.parallel_threshold

    def _run_phase(self, kernel, state: Dict[str, Any], size: int) -> List[Any]:
        return run_ranges(kernel, state, size, self.config.num_workers, self.config.parallel_threshold)

    def should_reduce(self, level: int) -> bool:
        """Reduce every level when filtering, otherwise only the last one."""
        cb = self.callbacks
        return cb.reduce_enabled and (cb.filter_enabled or level == self.config.last_level)

    # -------------------------------------------------------------------------
    # Phases
    # -------------------------------------------------------------------------

    def init(self) -> EmbeddingList:
        """Level 1: every single edge once."""
        el = init_single_edges(self.graph, self.config.mode)
        if self.callbacks.memoize_patterns:
            first = el.level(1)
            el.replace_last(replace(first, pid=np.full(len(first), EDGE_ID, dtype=PID_DTYPE)))
        return el

    def count_children(self, el: EmbeddingList) -> np.ndarray:
        """Inspection pass: accepted children per entry of the last level."""
        size = len(el)
        parts = self._run_phase(_count_kernel, self._phase_state(el), size)
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def extend(self, el: EmbeddingList) -> EmbeddingList:
        """Append the next level to el (and return it)."""
        counts = self.count_children(el)
        offsets, total = exclusive_prefix_sum(counts, settings.prefix_sum_serial_threshold)
        cls = level_class(self.config.mode)
        dtypes = cls.column_dtypes(with_pid=self.callbacks.memoize_patterns)
        size = len(counts)

        if total == 0:
            columns = {name: np.zeros(0, dtype=dtype) for name, dtype in dtypes.items()}
        elif self._in_process(size):
            columns = {name: np.empty(total, dtype=dtype) for name, dtype in dtypes.items()}
            _write_kernel(self._phase_state(el, offsets=offsets, total=total, sink=columns), 0, size)
        else:
            with SharedColumns(dtypes, total) as shared:
                state = self._phase_state(el, offsets=offsets, total=total, sink=shared.specs())
                self._run_phase(_write_kernel, state, size)
                columns = shared.copy_out()

        el.push(cls.from_columns(columns))
        logger.debug("extend: level %d -> %d entries from %d parents", el.current_level, total, size)
        return el

    def reduce(self, el: EmbeddingList) -> PatternMap:
        """Group by quick pattern per range, merge, then canonicalize each group once."""
        cb = self.callbacks
        partials = self._run_phase(_reduce_kernel, self._phase_state(el), len(el))
        grouped = _merge_partials(partials, cb)

        pattern_map = PatternMap()
        for key, support in grouped.items():
            if isinstance(key, CanonicalPattern):
                canonical = key
            else:
                canonical, position_map = canonicalize(key)
                support = cb.remap_support(support, position_map)
                pattern_map.aliases[key] = canonical
            pattern_map.add(canonical, support, cb.aggregate)

        logger.debug("reduce: %d entries, %d quick patterns, %d patterns",
                     len(el), len(grouped), len(pattern_map))
        return pattern_map

    def reduce_direct(self, el: EmbeddingList) -> PatternMap:
        """Slow path: canonicalize every embedding on its own (no quick-pattern grouping)."""
        cb = self.callbacks
        pattern_map = PatternMap()
        for emb in el.embeddings():
            key = cb.get_pattern(emb)
            support = cb.get_support(emb)
            if isinstance(key, CanonicalPattern):
                canonical = key
            else:
                canonical, position_map = canonicalize.__wrapped__(key)
                support = cb.remap_support(support, position_map)
            pattern_map.add(canonical, support, cb.aggregate)
        return pattern_map

    def filter(self, el: EmbeddingList, pattern_map: PatternMap) -> EmbeddingList:
        """Keep entries with to_prune false, then drop infrequent patterns from the map."""
        size = len(el)
        self.callbacks.prepare_filter(pattern_map)
        parts = self._run_phase(_filter_kernel, self._phase_state(el, pattern_map=pattern_map), size)
        keep = np.concatenate(parts) if parts else np.zeros(0, dtype=bool)
        offsets, total = exclusive_prefix_sum(keep.astype(np.int64), settings.prefix_sum_serial_threshold)

        level = el.level(el.current_level)
        kept = np.flatnonzero(keep)
        columns = {}
        for name, col in level.columns().items():
            out = np.empty(total, dtype=col.dtype)
            out[offsets[kept]] = col[kept]
            columns[name] = out
        el.replace_last(type(level).from_columns(columns))

        removed = pattern_map.prune(self.config.min_support)
        logger.debug("filter: kept %d of %d entries, pruned %d patterns", total, size, removed)
        return el

    # -------------------------------------------------------------------------
    # Driver
    # -------------------------------------------------------------------------

    def _reduce_and_filter(self, el: EmbeddingList) -> PatternMap:
        pattern_map = self.reduce(el)
        if self.callbacks.filter_enabled:
            self.filter(el, pattern_map)
        return pattern_map

    def _check_level(self, el: EmbeddingList) -> None:
        if self.config.validate_levels:
            el.validate()

    def _run(self, el: EmbeddingList) -> MiningResult:
        cfg = self.config
        level_maps: List[PatternMap] = []
        pattern_map = PatternMap()

        if self.should_reduce(1):
            pattern_map = self._reduce_and_filter(el)
            level_maps.append(pattern_map)
        self._check_level(el)
        num_embeddings = len(el)

        level = 1
        while level < cfg.last_level:
            level += 1
            if level == cfg.last_level and cfg.count_only:
                num_embeddings = int(self.count_children(el).sum())
                logger.debug("count-only: %d embeddings at level %d", num_embeddings, level)
                break
            self.extend(el)
            if self.should_reduce(level):
                pattern_map = self._reduce_and_filter(el)
                level_maps.append(pattern_map)
            self._check_level(el)
            num_embeddings = len(el)

        return MiningResult(el, pattern_map, level_maps, num_embeddings)

    def mine(self) -> MiningResult:
        """init, optional level-1 reduce/filter, then extend until the last level."""
        initial = self.init()
        chunk_size = self.config.chunk_size
        if not self.config.blocking_enabled or len(initial) <= chunk_size:
            return self._run(initial)

        parts = []
        for number, chunk in enumerate(initial.chunks(chunk_size)):
            logger.debug("chunk %d: %d single edges", number, len(chunk))
            parts.append(self._run(chunk))
        return MiningResult.combine(parts, self.callbacks.aggregate)


def mine(graph: Graph, config: EngineConfig, callbacks: AppCallbacks) -> MiningResult:
    """Run a full mining job."""
    return MiningEngine(graph, config, callbacks).mine()


def naive_extend(el: EmbeddingList, callbacks: AppCallbacks) -> EmbeddingList:
    """Single-pass sequential extension with list appends (reference for tests)."""
    idx, vid, his, pid = [], [], [], []
    for pos, emb in enumerate(el.embeddings()):
        for child, source_level, pattern_id in iter_children(callbacks, emb):
            idx.append(pos)
            vid.append(child)
            his.append(source_level)
            pid.append(pattern_id)
    cls = level_class(el.mode)
    dtypes = cls.column_dtypes(with_pid=callbacks.memoize_patterns)
    values = {"idx": idx, "vid": vid, "his": his, "pid": pid}
    el.push(cls.from_columns({name: np.asarray(values[name], dtype=dt) for name, dt in dtypes.items()}))
    return el
