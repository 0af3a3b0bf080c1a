"""Tests for the extend / reduce / filter engine."""

import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from gpminer.apps import FsmCallbacks, MotifCallbacks
from gpminer.embedding import EmbeddingList, VertexLevel
from gpminer.engine import (
    AppCallbacks,
    MiningEngine,
    PatternMap,
    mine,
    naive_extend,
)
from gpminer.graph import build_graph
from gpminer.models import ConfigurationError, EmbeddingMode, EngineConfig
from gpminer.parallel import exclusive_prefix_sum, split_ranges
from gpminer.pattern import TRIANGLE, WEDGE, CanonicalPattern

from tests.oracles import (
    connected_atlas_graphs,
    connected_edge_subsets,
    connected_vertex_subsets,
    random_connected_graph,
    random_graph,
    random_labeled_graph,
)


class PermissiveCallbacks(AppCallbacks):
    """Accept every candidate."""

    def to_add_vertex(self, emb, u):
        return True


class RejectAllCallbacks(AppCallbacks):
    def to_add_vertex(self, emb, u):
        return False


class EdgeExplorer(AppCallbacks):
    mode = EmbeddingMode.EDGE


class ThresholdCallbacks(AppCallbacks):
    """Count support with pruning below a threshold."""
    reduce_enabled = True
    filter_enabled = True

    def __init__(self, graph, min_support):
        super().__init__(graph)
        self.min_support = min_support

    def to_prune(self, emb, pattern_map):
        value = pattern_map.support_of(self.get_pattern(emb))
        return value is None or value < self.min_support


def _rows(el, level=None):
    return [e.vertices for e in el.embeddings(level)]


def _motif_worklist(graph):
    """Level 2 holding the two triangles and the wedge of motif_graph."""
    el = EmbeddingList(EmbeddingMode.VERTEX)
    el.push(VertexLevel(idx=np.asarray([0, 3, 6]), vid=np.asarray([1, 4, 7])))
    el.push(VertexLevel(idx=np.asarray([0, 1, 2]), vid=np.asarray([2, 5, 8])))
    return el


class TestPrefixSum:
    """Tests for write-offset computation."""

    def test_reserved_offsets(self):
        offsets, total = exclusive_prefix_sum(np.asarray([1, 2, 1, 3]))
        assert list(offsets) == [0, 1, 3, 4]
        assert total == 7

    def test_empty(self):
        offsets, total = exclusive_prefix_sum(np.zeros(0, dtype=np.int64))
        assert len(offsets) == 0 and total == 0

    @hyp_settings(max_examples=80, deadline=None)
    @given(st.lists(st.integers(0, 20), max_size=300), st.integers(1, 64))
    def test_blocked_scan_matches_cumsum(self, counts, block):
        offsets, total = exclusive_prefix_sum(np.asarray(counts, dtype=np.int64), serial_threshold=block)
        running, expected = 0, []
        for c in counts:
            expected.append(running)
            running += c
        assert offsets.tolist() == expected
        assert total == running

    def test_split_ranges_cover(self):
        ranges = split_ranges(10, 4)
        assert ranges[0][0] == 0 and ranges[-1][1] == 10
        assert all(a[1] == b[0] for a, b in zip(ranges, ranges[1:]))
        assert split_ranges(2, 8) == [(0, 1), (1, 2)]
        assert split_ranges(0, 4) == []


class TestExtend:
    """Tests for the two-pass extension."""

    def test_permissive_growth(self, square_graph):
        config = EngineConfig(max_size=3)
        engine = MiningEngine(square_graph, config, PermissiveCallbacks(square_graph))
        el = engine.init()
        assert _rows(el) == [(0, 1), (0, 2), (1, 3), (2, 3)]
        engine.extend(el)
        children = [e.vertices for e in el.embeddings(2) if e.vertices[:2] == (0, 1)]
        assert children == [(0, 1, 2), (0, 1, 3)]

    def test_reject_all(self, square_graph):
        engine = MiningEngine(square_graph, EngineConfig(max_size=3), RejectAllCallbacks(square_graph))
        el = engine.extend(engine.init())
        assert el.current_level == 2
        assert len(el) == 0

    def test_counts_match_written_children(self, k4):
        engine = MiningEngine(k4, EngineConfig(max_size=4), AppCallbacks(k4))
        el = engine.init()
        counts = engine.count_children(el)
        engine.extend(el)
        assert int(counts.sum()) == len(el)
        assert list(np.bincount(el.level(2).idx, minlength=6)) == list(counts)

    @pytest.mark.parametrize("seed", range(100))
    def test_equals_naive_append(self, seed):
        g = random_graph(14, 0.3, seed=seed)
        mode = EmbeddingMode.EDGE if seed % 2 else EmbeddingMode.VERTEX
        cb = EdgeExplorer(g) if mode == EmbeddingMode.EDGE else AppCallbacks(g)
        engine = MiningEngine(g, EngineConfig(max_size=4, mode=mode), cb)
        fast = engine.init()
        slow = engine.init()
        for _ in range(2):
            engine.extend(fast)
            naive_extend(slow, cb)
        assert Counter(_rows(fast)) == Counter(_rows(slow))
        for name, column in fast.level(3).columns().items():
            assert np.array_equal(column, slow.level(3).columns()[name])

    @pytest.mark.parametrize("workers", [2, 8])
    def test_worker_processes_match_in_process(self, workers):
        g = random_graph(40, 0.2, seed=17)
        serial = MiningEngine(g, EngineConfig(max_size=4), AppCallbacks(g))
        pooled = MiningEngine(
            g, EngineConfig(max_size=4, num_workers=workers, parallel_threshold=0), AppCallbacks(g)
        )
        a, b = serial.init(), pooled.init()
        for _ in range(2):
            serial.extend(a)
            pooled.extend(b)
        for name, column in a.level(3).columns().items():
            assert np.array_equal(column, b.level(3).columns()[name])


class TestReduce:
    """Tests for two-level pattern aggregation."""

    def test_triangles_and_wedge(self, motif_graph):
        el = _motif_worklist(motif_graph)
        engine = MiningEngine(motif_graph, EngineConfig(max_size=3), MotifCallbacks(motif_graph, 4))
        pmap = engine.reduce(el)
        assert pmap.counts() == {TRIANGLE: 2, WEDGE: 1}
        assert len(pmap.aliases) == 2

    def test_custom_classifier_skips_canonicalization(self, motif_graph):
        el = _motif_worklist(motif_graph)
        engine = MiningEngine(motif_graph, EngineConfig(max_size=3), MotifCallbacks(motif_graph, 3))
        pmap = engine.reduce(el)
        assert pmap.counts() == {TRIANGLE: 2, WEDGE: 1}
        assert pmap.aliases == {}

    def test_empty_worklist(self, triangle):
        engine = MiningEngine(triangle, EngineConfig(max_size=3), MotifCallbacks(triangle, 3))
        el = engine.extend(engine.extend(engine.init()))
        assert len(el) == 0
        assert len(engine.reduce(el)) == 0

    def test_mass_conservation(self):
        g = random_graph(50, 0.15, seed=1)
        result = mine(g, EngineConfig(max_size=3), MotifCallbacks(g, 3))
        assert result.pattern_map.total() == len(result.embedding_list)

    @pytest.mark.parametrize("seed", range(5))
    def test_two_level_equals_direct(self, seed):
        g = random_graph(25, 0.25, seed=seed)
        engine = MiningEngine(g, EngineConfig(max_size=4), MotifCallbacks(g, 4))
        el = engine.init()
        engine.extend(el)
        engine.extend(el)
        assert engine.reduce(el).counts() == engine.reduce_direct(el).counts()

    @pytest.mark.parametrize("seed", range(5))
    def test_two_level_equals_direct_domains(self, seed):
        g = random_labeled_graph(25, 0.2, num_labels=2, seed=seed)
        cb = FsmCallbacks(g, min_support=0)
        engine = MiningEngine(g, EngineConfig(max_size=3, mode=EmbeddingMode.EDGE), cb)
        el = engine.init()
        engine.extend(el)
        fast, slow = engine.reduce(el), engine.reduce_direct(el)
        assert fast.entries == slow.entries


class TestFilter:
    """Tests for support-based pruning."""

    def _graph(self):
        # five disjoint triangles and one wedge
        edges = []
        for t in range(5):
            a = 3 * t
            edges += [(a, a + 1), (a + 1, a + 2), (a, a + 2)]
        edges += [(15, 16), (16, 17)]
        return build_graph(edges)

    def test_infrequent_pattern_removed(self):
        g = self._graph()
        result = mine(g, EngineConfig(max_size=3, min_support=3), ThresholdCallbacks(g, 3))
        assert {e.vertices for e in result.embedding_list.embeddings()} == {
            (0, 1, 2), (3, 4, 5), (6, 7, 8), (9, 10, 11), (12, 13, 14)
        }
        assert result.pattern_map.counts() == {TRIANGLE: 5}

    def test_zero_threshold_keeps_everything(self):
        g = self._graph()
        result = mine(g, EngineConfig(max_size=3, min_support=0), ThresholdCallbacks(g, 0))
        assert len(result.embedding_list) == 6
        assert result.pattern_map.counts() == {TRIANGLE: 5, WEDGE: 1}

    def test_single_edges_filtered_before_loop(self):
        g = build_graph(
            [(0, 1), (2, 3), (4, 5), (6, 7)],
            labels=[0, 1, 0, 1, 0, 1, 0, 2],
        )
        cb = FsmCallbacks(g, min_support=2)
        result = mine(g, EngineConfig(max_size=2, mode=EmbeddingMode.EDGE, min_support=2), cb)
        assert sorted(e.vertices for e in result.embedding_list.embeddings()) == [(0, 1), (2, 3), (4, 5)]
        assert [p.labels for p in result.pattern_map] == [(0, 1)]


class TestMine:
    """Tests for the driver loop."""

    def test_triangle_count_on_triangle(self, triangle):
        from gpminer.apps import TriangleCallbacks
        result = mine(triangle, EngineConfig(max_size=3, count_only=True),
                      TriangleCallbacks(triangle, oriented=False))
        assert result.num_embeddings == 1

    def test_k4_three_motifs(self, k4):
        result = mine(k4, EngineConfig(max_size=3), MotifCallbacks(k4, 3))
        assert result.pattern_map.counts() == {TRIANGLE: 4}

    def test_blocking_with_filter_rejected(self, triangle):
        g = build_graph([(0, 1)], labels=[0, 0])
        with pytest.raises(ConfigurationError):
            mine(g, EngineConfig(max_size=2, mode=EmbeddingMode.EDGE, chunk_size=4), FsmCallbacks(g, 1))

    def test_mode_mismatch_rejected(self, triangle):
        with pytest.raises(ConfigurationError):
            MiningEngine(triangle, EngineConfig(max_size=3), EdgeExplorer(triangle))

    def test_count_only_with_reduce_rejected(self, triangle):
        with pytest.raises(ConfigurationError):
            MiningEngine(triangle, EngineConfig(max_size=3, count_only=True), MotifCallbacks(triangle, 3))

    def test_max_size_lower_bound(self):
        with pytest.raises(ValueError):
            EngineConfig(max_size=1)

    @pytest.mark.parametrize("chunk_size", [1, 3, 16])
    def test_chunked_equals_unchunked(self, chunk_size):
        g = random_graph(30, 0.25, seed=8)
        whole = mine(g, EngineConfig(max_size=4), MotifCallbacks(g, 4))
        chunked = mine(g, EngineConfig(max_size=4, chunk_size=chunk_size), MotifCallbacks(g, 4))
        assert whole.pattern_map.counts() == chunked.pattern_map.counts()
        assert _rows(whole.embedding_list) == _rows(chunked.embedding_list)
        assert whole.num_embeddings == chunked.num_embeddings

    @pytest.mark.parametrize("workers", [1, 2, 8])
    def test_worker_count_does_not_change_patterns(self, workers):
        g = random_graph(35, 0.2, seed=21)
        baseline = mine(g, EngineConfig(max_size=4), MotifCallbacks(g, 4)).pattern_map.to_tsv()
        config = EngineConfig(max_size=4, num_workers=workers, parallel_threshold=0, chunk_size=64)
        assert mine(g, config, MotifCallbacks(g, 4)).pattern_map.to_tsv() == baseline

    def test_validation_pass(self):
        g = random_graph(20, 0.3, seed=2)
        result = mine(g, EngineConfig(max_size=4, validate_levels=True), MotifCallbacks(g, 4))
        assert result.embedding_list.current_level == 3

    def test_level_maps_per_filtered_level(self, labeled_wedges_graph):
        g = labeled_wedges_graph
        result = mine(g, EngineConfig(max_size=3, mode=EmbeddingMode.EDGE, min_support=1),
                      FsmCallbacks(g, 1))
        assert len(result.level_maps) == 2
        assert {p.num_edges for p in result.level_maps[0]} == {1}
        assert {p.num_edges for p in result.level_maps[1]} == {2}


class TestEnumerationUniqueness:
    """Every connected subgraph is visited exactly once."""

    def _graphs(self):
        # every connected shape on 4 to 7 vertices, then a few larger random ones
        graphs = [g for g in connected_atlas_graphs() if g.num_vertices >= 4]
        graphs += [random_connected_graph(8, 0.4, seed=s) for s in range(10)]
        return graphs

    def test_vertex_induced(self):
        for g in self._graphs():
            result = mine(g, EngineConfig(max_size=4), AppCallbacks(g))
            el = result.embedding_list
            for level, k in ((1, 2), (2, 3), (3, 4)):
                visited = [frozenset(e.vertices) for e in el.embeddings(level)]
                assert len(visited) == len(set(visited))
                assert set(visited) == connected_vertex_subsets(g, k)

    def test_edge_induced(self):
        for g in self._graphs():
            result = mine(g, EngineConfig(max_size=4, mode=EmbeddingMode.EDGE), EdgeExplorer(g))
            el = result.embedding_list
            for size in (1, 2, 3):
                visited = [
                    frozenset(tuple(sorted(p)) for p in e.edge_pairs())
                    for e in el.embeddings(size)
                ]
                assert len(visited) == len(set(visited))
                assert set(visited) == connected_edge_subsets(g, size)


class TestPatternMap:
    """Tests for the pattern table."""

    def test_tsv_sorted_by_support_then_text(self):
        pmap = PatternMap()
        a = CanonicalPattern(2, (1, 2), ((0, 1),))
        b = CanonicalPattern(2, (0, 2), ((0, 1),))
        pmap.add(TRIANGLE, 3)
        pmap.add(a, 5)
        pmap.add(b, 5)
        assert pmap.to_tsv().splitlines() == [
            "pattern\tsupport",
            "k=2;L=0,2;E=(0,1)\t5",
            "k=2;L=1,2;E=(0,1)\t5",
            "k=3;L=*;E=(0,1)(0,2)(1,2)\t3",
        ]

    def test_prune_and_resolve(self):
        pmap = PatternMap()
        pmap.add(TRIANGLE, 1)
        pmap.add(WEDGE, 4)
        assert pmap.prune(2) == 1
        assert pmap.support_of(TRIANGLE) is None
        assert pmap.support_of(WEDGE) == 4

    def test_merged_adds_supports(self):
        a, b = PatternMap(), PatternMap()
        a.add(TRIANGLE, 2)
        b.add(TRIANGLE, 3)
        b.add(WEDGE, 1)
        assert a.merged(b).counts() == {TRIANGLE: 5, WEDGE: 1}


class TestInitLevel:
    def test_memo_level_one_has_pattern_ids(self, k4):
        cb = MotifCallbacks(k4, 4, memoize=True)
        el = MiningEngine(k4, EngineConfig(max_size=4), cb).init()
        assert el.level(1).pid is not None
        assert set(el.level(1).pid.tolist()) == {0}


@pytest.mark.slow
class TestComplexitySmoke:
    """Extension work grows faster than the average degree."""

    def test_doubling_degree(self):
        work = []
        for p in (0.02, 0.04, 0.08):
            g = random_graph(400, p, seed=3)
            start = time.perf_counter()
            result = mine(g, EngineConfig(max_size=4), AppCallbacks(g))
            work.append((result.num_embeddings, time.perf_counter() - start))
        counts = [w[0] for w in work]
        assert counts[0] < counts[1] < counts[2]
        assert counts[2] / counts[1] > 2 and counts[1] / counts[0] > 2
