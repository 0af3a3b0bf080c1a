"""
gpminer Embedding Store

Level-structured structure-of-arrays (SoA) worklist of partial embeddings.

Level k holds one entry per embedding discovered at that level. Each entry
points (idx) at its parent entry in level k-1, so a full embedding is
rebuilt by backtracking. Level 0 is conceptual only: it is the identity
array over vertex ids, so a level-1 idx *is* the first vertex id.

Edge-induced levels carry a third column, his, holding the level at which
the source vertex of the added edge first appeared.
"""

import logging
from dataclasses import dataclass, fields
from typing import ClassVar, Dict, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from .graph import Graph
from .models import EmbeddingMode

logger = logging.getLogger(__name__)

ID_DTYPE = np.int64
HIS_DTYPE = np.int16
PID_DTYPE = np.int16


@dataclass(frozen=True)
class Embedding:
    """
    One reconstructed embedding.

    vertices are distinct, in insertion order. Edge-induced embeddings also
    carry edges: one (source level, destination vertex) pair per level, the
    first being (0, vertices[1]).
    """
    vertices: Tuple[int, ...]
    edges: Tuple[Tuple[int, int], ...] = ()
    pattern_id: Optional[int] = None

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def is_edge_induced(self) -> bool:
        return bool(self.edges)

    @property
    def first_vertex(self) -> int:
        return self.vertices[0]

    @property
    def last_vertex(self) -> int:
        return self.vertices[-1]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def elements(self) -> Tuple[int, ...]:
        """Per-level vertex sequence (edge mode); may repeat a vertex."""
        return (self.vertices[0],) + tuple(vid for _, vid in self.edges)

    def level_of(self, v: int) -> int:
        """Level at which vertex v first appears (edge mode)."""
        return self.elements.index(v)

    def edge_pairs(self) -> List[Tuple[int, int]]:
        """Edges as (source vertex, destination vertex) in insertion order."""
        elements = self.elements
        return [(elements[his], vid) for his, vid in self.edges]


# =============================================================================
# Levels
# =============================================================================

class _Level:
    column_names: ClassVar[Tuple[str, ...]] = ()

    idx: np.ndarray
    vid: np.ndarray
    pid: Optional[np.ndarray]

    def __len__(self) -> int:
        return len(self.idx)

    def columns(self) -> Dict[str, np.ndarray]:
        """Independent contiguous column arrays of this level."""
        cols = {name: getattr(self, name) for name in self.column_names}
        if self.pid is not None:
            cols["pid"] = self.pid
        return cols

    def take(self, positions: Union[slice, np.ndarray]) -> "_Level":
        return type(self)(**{name: col[positions] for name, col in self.columns().items()})

    @classmethod
    def from_columns(cls, columns: Dict[str, np.ndarray]) -> "_Level":
        names = {f.name for f in fields(cls)}
        return cls(**{name: col for name, col in columns.items() if name in names})

    @classmethod
    def column_dtypes(cls, with_pid: bool = False) -> Dict[str, np.dtype]:
        dtypes = {name: np.dtype(HIS_DTYPE if name == "his" else ID_DTYPE)
                  for name in cls.column_names}
        if with_pid:
            dtypes["pid"] = np.dtype(PID_DTYPE)
        return dtypes


@dataclass
class VertexLevel(_Level):
    """(idx, vid) columns of a vertex-induced level."""
    column_names: ClassVar[Tuple[str, ...]] = ("idx", "vid")

    idx: np.ndarray
    vid: np.ndarray
    pid: Optional[np.ndarray] = None


@dataclass
class EdgeLevel(_Level):
    """(idx, vid, his) columns of an edge-induced level."""
    column_names: ClassVar[Tuple[str, ...]] = ("idx", "vid", "his")

    idx: np.ndarray
    vid: np.ndarray
    his: np.ndarray
    pid: Optional[np.ndarray] = None


def level_class(mode: EmbeddingMode) -> type:
    return EdgeLevel if mode == EmbeddingMode.EDGE else VertexLevel


# =============================================================================
# Embedding list
# =============================================================================

class EmbeddingList:
    """Sequence of completed levels; level numbers are 1-based."""

    def __init__(self, mode: EmbeddingMode, levels: Optional[Sequence[_Level]] = None):
        self.mode = mode
        self.levels: List[_Level] = list(levels or [])

    @property
    def current_level(self) -> int:
        return len(self.levels)

    @property
    def is_edge_induced(self) -> bool:
        return self.mode == EmbeddingMode.EDGE

    def __len__(self) -> int:
        return len(self.levels[-1]) if self.levels else 0

    def level(self, k: int) -> _Level:
        if not 1 <= k <= self.current_level:
            raise IndexError(f"level {k} out of range [1, {self.current_level}]")
        return self.levels[k - 1]

    def size(self, level: Optional[int] = None) -> int:
        return len(self.level(level or self.current_level))

    def push(self, level: _Level) -> None:
        """Append a completed level (the next worklist)."""
        self.levels.append(level)

    def replace_last(self, level: _Level) -> None:
        """Swap the last level for its filtered version."""
        self.levels[-1] = level

    # -------------------------------------------------------------------------
    # Reconstruction
    # -------------------------------------------------------------------------

    def _backtrack(self, level: int, positions: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Gather per-level vid (and his) columns for the given entries."""
        vids = [None] * (level + 1)
        his = [None] * (level + 1) if self.is_edge_induced else None
        pos = positions
        for k in range(level, 0, -1):
            lv = self.levels[k - 1]
            vids[k] = lv.vid[pos]
            if his is not None:
                his[k] = lv.his[pos]
            pos = lv.idx[pos]
        vids[0] = pos  # level 0 is the identity over vertex ids
        vid_matrix = np.stack(vids, axis=1)
        his_matrix = np.stack(his[1:], axis=1) if his is not None else None
        return vid_matrix, his_matrix

    def embeddings(self, level: Optional[int] = None, start: int = 0,
                   end: Optional[int] = None) -> List[Embedding]:
        """Reconstruct entries [start, end) of a level in one vectorised pass."""
        level = level or self.current_level
        lv = self.level(level)
        end = len(lv) if end is None else end
        if not 0 <= start <= end <= len(lv):
            raise IndexError(f"range [{start}, {end}) outside level {level} of size {len(lv)}")
        if start == end:
            return []

        positions = np.arange(start, end)
        vid_matrix, his_matrix = self._backtrack(level, positions)
        pids = lv.pid[start:end].tolist() if lv.pid is not None else [None] * (end - start)

        rows = vid_matrix.tolist()
        if his_matrix is None:
            return [Embedding(tuple(row), pattern_id=pid) for row, pid in zip(rows, pids)]

        result = []
        for row, his_row, pid in zip(rows, his_matrix.tolist(), pids):
            result.append(Embedding(
                vertices=tuple(dict.fromkeys(row)),
                edges=tuple(zip(his_row, row[1:])),
                pattern_id=pid,
            ))
        return result

    def reconstruct(self, level: int, position: int) -> Embedding:
        """Rebuild one embedding by following idx links down to level 1."""
        size = self.size(level)
        if not 0 <= position < size:
            raise IndexError(f"position {position} out of range for level {level} (size {size})")
        return self.embeddings(level, position, position + 1)[0]

    # -------------------------------------------------------------------------
    # Edge blocking
    # -------------------------------------------------------------------------

    def chunks(self, chunk_size: int) -> Iterator["EmbeddingList"]:
        """Split the level-1 list into contiguous blocks of at most chunk_size."""
        if self.current_level != 1:
            raise ValueError("only a level-1 list can be blocked")
        if chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")
        first = self.levels[0]
        for start in range(0, len(first), chunk_size):
            yield EmbeddingList(self.mode, [first.take(slice(start, start + chunk_size))])

    @classmethod
    def concatenate(cls, parts: Sequence["EmbeddingList"]) -> "EmbeddingList":
        """Join per-chunk lists level by level, shifting parent indices."""
        if not parts:
            raise ValueError("nothing to concatenate")
        mode = parts[0].mode
        depth = min(p.current_level for p in parts)
        merged = cls(mode)
        for k in range(1, depth + 1):
            columns: Dict[str, List[np.ndarray]] = {}
            shift = 0
            for part in parts:
                for name, col in part.level(k).columns().items():
                    if name == "idx" and k > 1:
                        col = col + shift
                    columns.setdefault(name, []).append(col)
                if k > 1:
                    shift += part.size(k - 1)
            merged.push(level_class(mode).from_columns(
                {name: np.concatenate(cols) for name, cols in columns.items()}
            ))
        return merged

    # -------------------------------------------------------------------------
    # Debugging
    # -------------------------------------------------------------------------

    def validate(self) -> None:
        """Structural check: column lengths, idx and his bounds."""
        for k, lv in enumerate(self.levels, start=1):
            lengths = {name: len(col) for name, col in lv.columns().items()}
            if len(set(lengths.values())) > 1:
                raise ValueError(f"level {k}: column lengths differ {lengths}")
            if not len(lv):
                continue
            if lv.idx.min() < 0:
                raise ValueError(f"level {k}: negative idx")
            if k > 1 and lv.idx.max() >= len(self.levels[k - 2]):
                raise ValueError(f"level {k}: idx points past level {k - 1}")
            if isinstance(lv, EdgeLevel) and (lv.his.min() < 0 or lv.his.max() >= k):
                raise ValueError(f"level {k}: his outside [0, {k})")

    def dump_level(self, level: int, stream: TextIO) -> None:
        """Write one level as TSV: level, position, idx, vid[, his]."""
        lv = self.level(level)
        names = list(lv.column_names)
        stream.write("\t".join(["level", "position"] + names) + "\n")
        columns = [getattr(lv, name).tolist() for name in names]
        for position, values in enumerate(zip(*columns)):
            stream.write("\t".join(str(x) for x in (level, position) + values) + "\n")


def init_single_edges(graph: Graph, mode: EmbeddingMode) -> EmbeddingList:
    """
    Level-1 worklist with every single edge once.

    Oriented graphs contribute each arc; undirected graphs contribute the
    half-edges with u < v.
    """
    src = np.repeat(np.arange(graph.num_vertices, dtype=ID_DTYPE), graph.degrees())
    dst = graph.column_indices.astype(ID_DTYPE, copy=False)
    if not graph.is_oriented:
        keep = src < dst
        src, dst = src[keep], dst[keep]

    if mode == EmbeddingMode.EDGE:
        level = EdgeLevel(idx=src, vid=dst, his=np.zeros(len(src), dtype=HIS_DTYPE))
    else:
        level = VertexLevel(idx=src, vid=dst)
    logger.debug("Initialized %d single-edge embeddings (%s mode)", len(src), mode.value)
    return EmbeddingList(mode, [level])
