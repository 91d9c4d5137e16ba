"""Finite metric space, ball and subset models."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np


def iter_bits(mask: int):
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_from_indices(indices) -> int:
    """Build a bitset from an iterable of point indices."""
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def indices_from_mask(mask: int) -> np.ndarray:
    """Point indices of a bitset as an integer array."""
    return np.fromiter(iter_bits(mask), dtype=np.intp)


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Points with a validated distance matrix.

    ``resolution_h`` is the smallest nonzero pairwise distance; it is 0.0 only
    for a single-point space. ``multiplicity`` counts how many input rows were
    merged into each point; ``aliases`` maps the ids of merged rows to the
    point that absorbed them.
    """
    ids: Tuple[str, ...]
    dist: np.ndarray
    resolution_h: float
    diameter: float
    multiplicity: np.ndarray
    coords: Optional[np.ndarray] = None
    metric: str = "precomputed"
    aliases: Dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def is_degenerate(self) -> bool:
        """True when the space has a single point and no resolution."""
        return self.n <= 1

    def index_of(self, point_id: str) -> int:
        """Index of a point id."""
        try:
            return self.ids.index(point_id)
        except ValueError:
            if point_id in self.aliases:
                return self.aliases[point_id]
            raise KeyError(f"Unknown point id '{point_id}'")


@dataclass(frozen=True)
class BallRef:
    """Open ball ``{j : dist[center][j] < radius}``."""
    center: int
    radius: float
    mask: int
    diameter: float
    members: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.mask == 0


@dataclass(frozen=True)
class SubsetRef:
    """Arbitrary subset of the sample with its diameter."""
    mask: int
    diameter: float
    members: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.mask == 0


Candidate = Union[BallRef, SubsetRef]


def describe_mask(mask: int, ids: List[str], limit: int = 8) -> str:
    """Short human-readable listing of a mask."""
    names = [ids[i] for i in iter_bits(mask)]
    if len(names) > limit:
        return "{" + ", ".join(names[:limit]) + f", ... ({len(names)} points)}}"
    return "{" + ", ".join(names) + "}"
