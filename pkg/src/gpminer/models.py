"""
gpminer Data Models

Pydantic schemas for validating mining configurations and reporting results.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Optional, List, Dict, Any
from pydantic import BaseModel, Field, model_validator

from .config import settings


class ConfigurationError(ValueError):
    """Raised when a mining configuration is contradictory or unsupported."""


# =============================================================================
# ENUMERATIONS
# =============================================================================

class EmbeddingMode(str, Enum):
    """How embeddings grow: one vertex or one edge per level."""
    VERTEX = "vertex"
    EDGE = "edge"


class AppName(str, Enum):
    """Bundled mining applications."""
    TC = "tc"
    CF = "cf"
    MC = "mc"
    FSM = "fsm"


class GraphFormat(str, Enum):
    """Supported input formats."""
    EDGELIST = "edgelist"
    LABELED = "labeled"

    @classmethod
    def from_path(cls, path: Path) -> "GraphFormat":
        """Guess the format from the file extension (.lg is labeled)."""
        if path.suffix.lower() == ".lg":
            return cls.LABELED
        return cls.EDGELIST


# Size limits per application (k semantics: vertices for tc/cf/mc, edges+1 for fsm)
APP_K_RANGES: Dict[AppName, tuple] = {
    AppName.TC: (3, 3),
    AppName.CF: (3, settings.max_clique_size),
    AppName.MC: (3, 5),
    AppName.FSM: (2, settings.max_pattern_vertices),
}


# =============================================================================
# ENGINE CONFIGURATION
# =============================================================================

class EngineConfig(BaseModel):
    """Knobs of one mining run."""
    max_size: int = Field(..., ge=2, description="k: vertices (vertex mode) or edges+1 (edge mode)")
    mode: EmbeddingMode = Field(EmbeddingMode.VERTEX, description="Embedding growth mode")
    chunk_size: Optional[int] = Field(
        None, ge=1,
        description="Level-1 entries per block; None disables edge blocking"
    )
    min_support: int = Field(0, ge=0, description="Threshold for filter applications")
    num_workers: int = Field(
        default_factory=lambda: settings.num_workers, ge=1,
        description="Worker processes per phase"
    )
    count_only: bool = Field(
        False,
        description="Count the last level instead of materializing it (no reduce on it)"
    )
    parallel_threshold: int = Field(
        default_factory=lambda: settings.parallel_threshold, ge=0,
        description="Levels smaller than this run in-process"
    )
    validate_levels: bool = Field(
        default_factory=lambda: settings.debug,
        description="Run the structural validation pass on every level"
    )

    @property
    def last_level(self) -> int:
        """Level at which the main loop stops (max_size - 1)."""
        return self.max_size - 1

    @property
    def blocking_enabled(self) -> bool:
        return self.chunk_size is not None


# =============================================================================
# CLI CONFIGURATION
# =============================================================================

class CliConfig(BaseModel):
    """Validated command-line request."""
    app: AppName
    input: Path
    format: Optional[GraphFormat] = None
    k: Optional[int] = Field(None, ge=2)
    minsup: Optional[int] = Field(None, ge=0)
    threads: int = Field(1, ge=1)
    chunk_size: int = Field(0, ge=0, description="0 disables edge blocking")
    orient: bool = True
    output: Optional[Path] = None
    list_embeddings: bool = False
    json_output: bool = False
    memo: bool = False
    dump_level: Optional[Path] = None

    @model_validator(mode='after')
    def validate_app_requirements(self) -> 'CliConfig':
        """Check app-specific requirements before any work starts."""
        if self.format is None:
            self.format = GraphFormat.from_path(self.input)

        if self.app == AppName.TC and self.k is None:
            self.k = 3
        if self.k is None:
            raise ConfigurationError(f"--k is required for {self.app.value}")

        low, high = APP_K_RANGES[self.app]
        if not low <= self.k <= high:
            raise ConfigurationError(
                f"{self.app.value} supports k in [{low}, {high}], got {self.k}"
            )

        if self.app == AppName.FSM:
            if self.format != GraphFormat.LABELED:
                raise ConfigurationError("fsm needs a labeled graph (--format labeled)")
            if self.minsup is None:
                raise ConfigurationError("fsm needs --minsup")
            if self.chunk_size:
                raise ConfigurationError("edge blocking cannot be combined with fsm")
        return self

    @property
    def effective_chunk_size(self) -> Optional[int]:
        return self.chunk_size or None

    def echo(self) -> Dict[str, Any]:
        """Configuration fields that influence the result payload (the input path does not)."""
        return {
            "app": self.app.value,
            "format": self.format.value if self.format else None,
            "k": self.k,
            "minsup": self.minsup,
            "orient": self.orient,
        }


# =============================================================================
# OUTPUT MODELS
# =============================================================================

class PatternRow(BaseModel):
    """One line of a pattern table."""
    pattern: str = Field(..., description="Stable textual pattern form")
    support: int = Field(..., ge=0)
    name: Optional[str] = Field(None, description="Well-known motif name, if any")


class AppResult(BaseModel):
    """Outcome of one application run."""
    app: AppName
    total_count: Optional[int] = Field(None, ge=0, description="TC/CF count")
    pattern_table: List[PatternRow] = Field(default_factory=list)
    embeddings: List[List[int]] = Field(default_factory=list)
    elapsed: float = Field(0.0, ge=0, description="Compute seconds, loading excluded")
    config: Dict[str, Any] = Field(default_factory=dict)

    def payload_text(self) -> str:
        """Human-readable result without timing fields."""
        lines = []
        if self.app == AppName.TC:
            lines.append(f"triangles: {self.total_count}")
        elif self.app == AppName.CF:
            lines.append(f"{self.config.get('k')}-cliques: {self.total_count}")
        else:
            lines.append("pattern\tsupport")
            lines.extend(f"{row.pattern}\t{row.support}" for row in self.pattern_table)
        for emb in self.embeddings:
            lines.append(" ".join(str(v) for v in emb))
        return "\n".join(lines) + "\n"

    def to_json_line(self) -> str:
        """Single-line machine-parseable record (keys sorted)."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
