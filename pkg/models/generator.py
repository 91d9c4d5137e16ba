"""Generator specifications for test spaces with Pydantic validation."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class GeneratorKind(str, Enum):
    """Families of generated spaces."""
    GRID = "grid"
    CANTOR = "cantor"
    SIERPINSKI = "sierpinski"
    GLUE = "glue"
    PRODUCT = "product"


class GeneratorSpec(BaseModel):
    """Parameters of a generated space."""

    kind: GeneratorKind = Field(..., description="Space family")
    depth: int = Field(default=6, ge=1, le=16, description="Recursion depth for self-similar kinds")
    ratios: List[float] = Field(default_factory=lambda: [1 / 3, 1 / 3], description="Contraction ratios for cantor")
    n: int = Field(default=257, ge=1, description="Point count for grid")
    gap: float = Field(default=2.0, description="Distance between glued pieces")
    pieces: List['GeneratorSpec'] = Field(default_factory=list, description="Component specs for glue and product")
    seed: int = Field(default=0, ge=0, description="Seed for optional jitter")
    jitter: float = Field(default=0.0, ge=0.0, description="Coordinate jitter as a fraction of the resolution")

    @field_validator('ratios')
    @classmethod
    def validate_ratios(cls, v: List[float]) -> List[float]:
        """Cantor ratios lie in (0, 1/2]."""
        if len(v) != 2:
            raise ValueError(f"cantor takes exactly two ratios, got {len(v)}")
        for r in v:
            if not 0 < r <= 0.5:
                raise ValueError(f"ratio {r} outside (0, 1/2]")
        return v

    @field_validator('jitter')
    @classmethod
    def validate_jitter(cls, v: float) -> float:
        if v >= 0.5:
            raise ValueError("jitter must stay below half the resolution")
        return v

    @model_validator(mode='after')
    def validate_pieces_for_kind(self) -> 'GeneratorSpec':
        """Composite kinds need pieces; glue needs a positive gap."""
        if self.kind in (GeneratorKind.GLUE, GeneratorKind.PRODUCT):
            if len(self.pieces) < 2:
                raise ValueError(f"'{self.kind.value}' needs at least two pieces")
            if self.kind == GeneratorKind.GLUE and not self.gap > 0:
                raise ValueError(f"glue gap must be > 0, got {self.gap}")
        elif self.pieces:
            raise ValueError(f"'{self.kind.value}' does not take pieces")
        return self

    @classmethod
    def grid(cls, n: int = 257) -> 'GeneratorSpec':
        return cls(kind=GeneratorKind.GRID, n=n)

    @classmethod
    def cantor(cls, depth: int = 6, ratios: Tuple[float, float] = (1 / 3, 1 / 3)) -> 'GeneratorSpec':
        return cls(kind=GeneratorKind.CANTOR, depth=depth, ratios=list(ratios))

    @classmethod
    def sierpinski(cls, depth: int = 5) -> 'GeneratorSpec':
        return cls(kind=GeneratorKind.SIERPINSKI, depth=depth)

    @classmethod
    def glue(cls, pieces: List['GeneratorSpec'], gap: float = 2.0) -> 'GeneratorSpec':
        return cls(kind=GeneratorKind.GLUE, pieces=pieces, gap=gap)

    @classmethod
    def product(cls, pieces: List['GeneratorSpec']) -> 'GeneratorSpec':
        return cls(kind=GeneratorKind.PRODUCT, pieces=pieces)


GeneratorSpec.model_rebuild()


@dataclass
class GroundTruth:
    """Independently known properties of a generated space."""
    kind: str
    dimension: float
    piece_dimensions: List[float]
    piece_slices: List[Tuple[int, int]]
    q_expected: Optional[np.ndarray] = field(default=None, repr=False)

    def piece_of(self, index: int) -> int:
        """Piece containing point ``index``."""
        for k, (start, stop) in enumerate(self.piece_slices):
            if start <= index < stop:
                return k
        raise IndexError(f"point {index} is outside every piece")

    def to_dict(self) -> Dict[str, object]:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "piece_dimensions": list(self.piece_dimensions),
            "pieces": [{"start": a, "stop": b} for a, b in self.piece_slices],
            "q_expected": None if self.q_expected is None else [float(q) for q in self.q_expected],
        }
