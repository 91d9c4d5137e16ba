"""Analysis configuration model with Pydantic validation."""

import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator

from models.premeasure import CoveringClass, SolveMode


class MetricChoice(str, Enum):
    """Metric applied to point tables."""
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"
    PRECOMPUTED = "precomputed"


class AnalysisConfig(BaseModel):
    """Settings shared by the CLI subcommands; every field mirrors a flag."""

    metric: MetricChoice = Field(default=MetricChoice.EUCLIDEAN, description="Metric for point tables")
    covering_class: CoveringClass = Field(default=CoveringClass.BALLS, description="Cover family")
    mode: SolveMode = Field(default=SolveMode.GREEDY, description="Cover optimisation mode")
    threads: int = Field(default=1, ge=1, le=256, description="Worker threads")
    s_grid: Optional[List[float]] = Field(default=None, description="Exponent grid for scaling profiles")
    deltas: Optional[List[float]] = Field(default=None, description="Scale grid")
    k_min: int = Field(default=16, ge=2, description="Minimum points per local ball")
    n_radii: int = Field(default=3, ge=3, description="Radii per point in local schedules")
    window: Optional[Tuple[float, float]] = Field(default=None, description="Radius window for measure fits")
    q_const: Optional[float] = Field(default=None, ge=0.0, description="Constant exponent instead of a fitted field")
    tolerance: float = Field(default=0.1, ge=0.0, description="Tolerance for field comparisons")
    c_threshold: float = Field(default=50.0, gt=1.0, description="Pass threshold for the regularity constant")
    lh_threshold: float = Field(default=10.0, gt=0.0, description="Pass threshold for the log-Hoelder constant")
    seed: int = Field(default=0, ge=0, description="Seed for randomised test sets")
    quick: bool = Field(default=False, description="Run the reduced verification suite")

    @field_validator('s_grid')
    @classmethod
    def validate_s_grid(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Exponents are finite, nonnegative and at least two."""
        if v is None:
            return None
        if len(v) < 2:
            raise ValueError("s_grid needs at least two exponents")
        for s in v:
            if not math.isfinite(s) or s < 0:
                raise ValueError(f"exponent {s} must be finite and >= 0")
        return sorted(v)

    @field_validator('deltas')
    @classmethod
    def validate_deltas(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Scales are positive and at least four."""
        if v is None:
            return None
        if len(v) < 4:
            raise ValueError("deltas needs at least four scales")
        for d in v:
            if not math.isfinite(d) or d <= 0:
                raise ValueError(f"scale {d} must be finite and > 0")
        return sorted(v, reverse=True)

    @field_validator('window')
    @classmethod
    def validate_window(cls, v: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if v is None:
            return None
        lo, hi = v
        if not 0 < lo < hi:
            raise ValueError(f"window must satisfy 0 < lo < hi, got {lo},{hi}")
        return v
