# gpminer Graph Pattern Mining Framework
from .graph import (
    Graph,
    GraphFormatError,
    UNLABELED,
    build_graph,
    load_edge_list,
    load_graph,
    load_labeled_graph,
    orient_dag,
    write_edge_list,
    write_labeled_graph,
)
from .embedding import Embedding, EmbeddingList, init_single_edges
from .pattern import (
    CanonicalPattern,
    PatternTooLargeError,
    PositionMap,
    QuickPattern,
    canonicalize,
    classify_3_vertex,
    is_auto_canonical_edge,
    is_auto_canonical_vertex,
    motif_patterns,
    quick_pattern,
)
from .support import DomainSupport, domain_support, merge_domain, mni
from .engine import AppCallbacks, MiningEngine, MiningResult, PatternMap, mine
from .apps import clique_find, clique_list, fsm, motif_count, run_app, triangle_count
from .models import AppName, AppResult, CliConfig, ConfigurationError, EmbeddingMode, EngineConfig
from .config import settings, get_settings

__version__ = "0.1.0"
__all__ = [
    # Graph
    "Graph",
    "GraphFormatError",
    "UNLABELED",
    "build_graph",
    "load_edge_list",
    "load_labeled_graph",
    "load_graph",
    "write_edge_list",
    "write_labeled_graph",
    "orient_dag",
    # Embeddings
    "Embedding",
    "EmbeddingList",
    "init_single_edges",
    # Patterns
    "QuickPattern",
    "CanonicalPattern",
    "PositionMap",
    "PatternTooLargeError",
    "quick_pattern",
    "canonicalize",
    "is_auto_canonical_vertex",
    "is_auto_canonical_edge",
    "classify_3_vertex",
    "motif_patterns",
    # Support
    "DomainSupport",
    "domain_support",
    "merge_domain",
    "mni",
    # Engine
    "AppCallbacks",
    "PatternMap",
    "MiningEngine",
    "MiningResult",
    "mine",
    # Applications
    "triangle_count",
    "clique_find",
    "clique_list",
    "motif_count",
    "fsm",
    "run_app",
    # Models & config
    "AppName",
    "AppResult",
    "CliConfig",
    "ConfigurationError",
    "EmbeddingMode",
    "EngineConfig",
    "settings",
    "get_settings",
]
