"""
gpminer Parallel Execution

Data-parallel phase helpers. A phase splits its input worklist into
contiguous index ranges and runs a kernel ``kernel(state, start, end)`` on
each. The read-only phase state reaches worker processes once, through the
pool initializer (inherited at fork where available); results come back in
range order, so a phase's output never depends on scheduling.

Extension output is written into shared-memory columns at offsets reserved
by an exclusive prefix sum over per-parent child counts.
"""

import logging
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from multiprocessing import shared_memory
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from .config import settings

logger = logging.getLogger(__name__)

# Ranges per worker; more ranges than workers balances skewed degrees
RANGES_PER_WORKER = 4

Kernel = Callable[[Dict[str, Any], int, int], Any]
ColumnSpec = Tuple[str, str, int]  # (shared block name, dtype string, length)
Sink = Union[Dict[str, np.ndarray], Dict[str, ColumnSpec]]

_STATE: Optional[Dict[str, Any]] = None


def _install_state(state: Dict[str, Any]) -> None:
    global _STATE
    _STATE = state


def _run_in_worker(kernel: Kernel, start: int, end: int) -> Any:
    return kernel(_STATE, start, end)


def _pool_context():
    if "fork" in mp.get_all_start_methods():
        return mp.get_context("fork")
    return mp.get_context("spawn")


def split_ranges(total: int, parts: int) -> List[Tuple[int, int]]:
    """Cut [0, total) into at most `parts` contiguous non-empty ranges."""
    if total <= 0:
        return []
    parts = max(1, min(parts, total))
    bounds = [total * i // parts for i in range(parts + 1)]
    return [(a, b) for a, b in zip(bounds, bounds[1:]) if a < b]


def run_ranges(
    kernel: Kernel,
    state: Dict[str, Any],
    total: int,
    num_workers: int = 1,
    threshold: int = 0,
) -> List[Any]:
    """
    Run kernel over [0, total) and return the per-range results in order.

    Args:
        kernel: Module-level function (picklable by reference)
        state: Read-only phase state handed to every kernel call
        total: Number of input entries
        num_workers: Worker processes; 1 runs in-process
        threshold: Inputs smaller than this run in-process

    Returns:
        One result per range, ordered by range start
    """
    if total <= 0:
        return []
    if num_workers <= 1 or total < threshold:
        return [kernel(state, 0, total)]

    ranges = split_ranges(total, num_workers * RANGES_PER_WORKER)
    logger.debug("Dispatching %d ranges over %d workers", len(ranges), num_workers)
    with ProcessPoolExecutor(
        max_workers=num_workers,
        mp_context=_pool_context(),
        initializer=_install_state,
        initargs=(state,),
    ) as pool:
        futures = [pool.submit(_run_in_worker, kernel, start, end) for start, end in ranges]
        return [future.result() for future in futures]


def exclusive_prefix_sum(
    counts: np.ndarray,
    serial_threshold: Optional[int] = None,
) -> Tuple[np.ndarray, int]:
    """
    Write offsets for per-parent counts.

    Small inputs use one cumulative sum. Larger inputs are scanned in
    blocks of `serial_threshold` entries: block totals are scanned first and
    each block is then offset by its prefix, the layout a parallel scan uses.

    Returns:
        (offsets, total) with offsets[i] = sum(counts[:i])
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = len(counts)
    offsets = np.zeros(n, dtype=np.int64)
    if n == 0:
        return offsets, 0

    block = serial_threshold or settings.prefix_sum_serial_threshold
    if n < block:
        np.cumsum(counts[:-1], out=offsets[1:])
        return offsets, int(counts.sum())

    starts = np.arange(0, n, block)
    block_sums = np.add.reduceat(counts, starts)
    block_offsets = np.zeros(len(starts), dtype=np.int64)
    np.cumsum(block_sums[:-1], out=block_offsets[1:])
    for b, start in enumerate(starts):
        segment = counts[start:start + block]
        offsets[start:start + len(segment)] = block_offsets[b] + np.cumsum(segment) - segment
    return offsets, int(block_offsets[-1] + block_sums[-1])


# =============================================================================
# Shared-memory output columns
# =============================================================================

class SharedColumns:
    """
    Output columns living in shared memory blocks owned by the parent.

    Workers attach by name (see open_sink) and write disjoint slices.
    """

    def __init__(self, dtypes: Mapping[str, np.dtype], length: int):
        self.length = length
        self._dtypes = {name: np.dtype(dtype) for name, dtype in dtypes.items()}
        self._blocks: Dict[str, shared_memory.SharedMemory] = {}
        try:
            for name, dtype in self._dtypes.items():
                size = max(1, length * dtype.itemsize)
                self._blocks[name] = shared_memory.SharedMemory(create=True, size=size)
        except Exception:
            self.close()
            raise

    def specs(self) -> Dict[str, ColumnSpec]:
        return {
            name: (block.name, self._dtypes[name].str, self.length)
            for name, block in self._blocks.items()
        }

    def copy_out(self) -> Dict[str, np.ndarray]:
        """Private copies of every column (safe after close)."""
        return {
            name: np.ndarray((self.length,), dtype=self._dtypes[name], buffer=block.buf).copy()
            for name, block in self._blocks.items()
        }

    def close(self) -> None:
        for block in self._blocks.values():
            block.close()
            block.unlink()
        self._blocks = {}

    def __enter__(self) -> "SharedColumns":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


@contextmanager
def open_sink(sink: Sink) -> Iterator[Dict[str, np.ndarray]]:
    """
    Yield writable column arrays for a sink.

    A sink is either a dict of plain arrays (in-process run) or a dict of
    shared block specs (worker run). Callers must not keep references to
    the yielded arrays after the block exits.
    """
    if all(isinstance(col, np.ndarray) for col in sink.values()):
        yield dict(sink)
        return

    blocks = {name: shared_memory.SharedMemory(name=spec[0]) for name, spec in sink.items()}
    views = {
        name: np.ndarray((spec[2],), dtype=np.dtype(spec[1]), buffer=blocks[name].buf)
        for name, spec in sink.items()
    }
    try:
        yield views
    finally:
        views.clear()
        for block in blocks.values():
            block.close()
