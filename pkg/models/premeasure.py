"""Gauge specifications for premeasure evaluation with Pydantic validation."""

import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class GaugeKind(str, Enum):
    """How the exponent of a cover element is chosen."""
    CONSTANT_S = "constant_s"
    VARIABLE_CENTERED = "variable_centered"
    VARIABLE_INF = "variable_inf"
    VARIABLE_SUP = "variable_sup"
    LOCAL_DIM = "local_dim"


class CoveringClass(str, Enum):
    """Family the cover elements are drawn from."""
    ALL_SUBSETS = "all_subsets"
    BALLS = "balls"


class SolveMode(str, Enum):
    """Cover optimisation mode."""
    EXACT = "exact"
    GREEDY = "greedy"


class ClampMode(str, Enum):
    """Resolution clamp applied to diameters before exponentiation."""
    MAX = "max"
    CELL = "cell"


class ClampRule(BaseModel):
    """Resolution clamp.

    ``max``: ``max(|U|, floor)``; ``cell``: ``max(|U| + h, floor)``. A missing
    floor means the resolution of the space.
    """

    model_config = {"frozen": True}

    mode: ClampMode = Field(default=ClampMode.MAX, description="Clamp rule")
    floor: Optional[float] = Field(default=None, ge=0.0, description="Lower bound on clamped diameters")

    def apply(self, diameter: float, resolution_h: float) -> float:
        """Clamped diameter of a nonempty set."""
        floor = resolution_h if self.floor is None else self.floor
        if self.mode == ClampMode.CELL:
            return max(diameter + resolution_h, floor)
        return max(diameter, floor)


DEFAULT_CLAMP = ClampRule()


class PremeasureSpec(BaseModel):
    """The gauge tau of a Caratheodory construction."""

    model_config = {"frozen": True}

    kind: GaugeKind = Field(..., description="Gauge kind")
    s: Optional[float] = Field(default=None, description="Exponent for constant_s")
    q_field: Optional[List[float]] = Field(default=None, description="Per-point exponents for variable kinds")
    dim_field: Optional[List[float]] = Field(default=None, description="Per-point local dimensions for local_dim")

    @field_validator('s')
    @classmethod
    def validate_s(cls, v: Optional[float]) -> Optional[float]:
        """Exponent must be finite and nonnegative."""
        if v is not None and (not math.isfinite(v) or v < 0):
            raise ValueError(f"exponent s must be finite and >= 0, got {v}")
        return v

    @field_validator('q_field', 'dim_field')
    @classmethod
    def validate_field(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Per-point exponents must be finite and nonnegative."""
        if v is None:
            return None
        for i, value in enumerate(v):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"exponent at point {i} must be finite and >= 0, got {value}")
        return v

    @model_validator(mode='after')
    def validate_fields_for_kind(self) -> 'PremeasureSpec':
        """Exactly the fields required by the kind are present."""
        present = {
            's': self.s is not None,
            'q_field': self.q_field is not None,
            'dim_field': self.dim_field is not None,
        }
        if self.kind == GaugeKind.CONSTANT_S:
            required = 's'
        elif self.kind == GaugeKind.LOCAL_DIM:
            required = 'dim_field'
        else:
            required = 'q_field'
        extra = [name for name, has in present.items() if has and name != required]
        if not present[required]:
            raise ValueError(f"gauge kind '{self.kind.value}' requires '{required}'")
        if extra:
            raise ValueError(f"gauge kind '{self.kind.value}' does not take {', '.join(extra)}")
        return self

    @classmethod
    def constant(cls, s: float) -> 'PremeasureSpec':
        return cls(kind=GaugeKind.CONSTANT_S, s=float(s))

    @classmethod
    def variable(cls, kind: GaugeKind, q_field) -> 'PremeasureSpec':
        return cls(kind=kind, q_field=[float(q) for q in q_field])

    @classmethod
    def local(cls, dim_field) -> 'PremeasureSpec':
        return cls(kind=GaugeKind.LOCAL_DIM, dim_field=[float(d) for d in dim_field])

    @property
    def point_field(self) -> Optional[List[float]]:
        """The per-point field used by this kind, if any."""
        if self.kind == GaugeKind.LOCAL_DIM:
            return self.dim_field
        return self.q_field

    @property
    def depends_on_diameter_only(self) -> bool:
        """True when tau(U) is a function of the clamped diameter alone."""
        if self.kind == GaugeKind.CONSTANT_S:
            return True
        values = self.point_field or []
        return len(set(values)) <= 1 and self.kind != GaugeKind.VARIABLE_CENTERED
