"""Sampled measure on a finite metric space."""

from dataclasses import dataclass

import numpy as np

from models.metric_space import indices_from_mask


@dataclass(frozen=True, eq=False)
class SampledMeasure:
    """Nonnegative weight per point.

    ``nu(mask)`` is the exact weight sum over the mask, so additivity holds by
    construction.
    """
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ValueError("weights must be a one-dimensional array")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if w.size == 0 or w.sum() <= 0:
            raise ValueError("measure total must be positive")
        object.__setattr__(self, 'weights', w)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def nu(self, mask: int) -> float:
        """Mass of the points in ``mask``."""
        if mask == 0:
            return 0.0
        return float(self.weights[indices_from_mask(mask)].sum())

    def scaled(self, factor: float) -> 'SampledMeasure':
        """The measure ``factor * nu``."""
        return SampledMeasure(self.weights * float(factor))

    @classmethod
    def uniform(cls, n: int) -> 'SampledMeasure':
        """Equal weights summing to one."""
        return cls(np.full(n, 1.0 / n))
