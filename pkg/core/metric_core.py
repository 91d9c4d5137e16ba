"""Finite metric spaces: loading, balls, diameters and the Vitali subfamily."""

import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from core.errors import MetricValidationError
from models.metric_space import (
    BallRef,
    FiniteMetricSpace,
    SubsetRef,
    indices_from_mask,
    mask_from_indices,
)

logger = logging.getLogger(__name__)

METRIC_TOLERANCE = 1e-9

# scipy names for the coordinate metrics
_SCIPY_METRICS = {"euclidean": "euclidean", "manhattan": "cityblock"}


def _check_matrix(dist: np.ndarray, check_triangle: bool) -> None:
    """Raise MetricValidationError when ``dist`` is not a metric."""
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise MetricValidationError(f"distance matrix must be square, got shape {dist.shape}")
    if not np.all(np.isfinite(dist)):
        raise MetricValidationError("distance matrix has non-finite entries")
    if np.any(dist < 0):
        i, j = np.argwhere(dist < 0)[0]
        raise MetricValidationError(f"negative distance at ({i}, {j}): {dist[i, j]}")
    if np.any(np.diag(dist) != 0):
        i = int(np.nonzero(np.diag(dist))[0][0])
        raise MetricValidationError(f"nonzero self-distance at point {i}: {dist[i, i]}")

    tol = METRIC_TOLERANCE * max(1.0, float(dist.max()))
    asym = np.abs(dist - dist.T)
    if np.any(asym > tol):
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise MetricValidationError(
            f"symmetry violated: dist[{i}][{j}]={dist[i, j]} but dist[{j}][{i}]={dist[j, i]}"
        )
    if not check_triangle:
        return
    for k in range(dist.shape[0]):
        excess = dist - (dist[:, k:k + 1] + dist[k:k + 1, :])
        if np.any(excess > tol):
            i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
            raise MetricValidationError(
                f"triangle inequality violated: dist[{i}][{j}]={dist[i, j]} > "
                f"dist[{i}][{k}] + dist[{k}][{j}] = {dist[i, k] + dist[k, j]}"
            )


def _merge_duplicates(dist: np.ndarray):
    """Group points at distance zero; returns representatives and group lists."""
    n = dist.shape[0]
    assigned = np.zeros(n, dtype=bool)
    reps, groups = [], []
    for i in range(n):
        if assigned[i]:
            continue
        group = np.nonzero((dist[i] == 0) & ~assigned)[0]
        assigned[group] = True
        reps.append(i)
        groups.append(group)
    return np.array(reps, dtype=np.intp), groups


def resolution_of(dist: np.ndarray) -> float:
    """Smallest off-diagonal distance; 0.0 for fewer than two points."""
    n = dist.shape[0]
    if n < 2:
        return 0.0
    off = dist + np.diag(np.full(n, np.inf))
    return float(off.min())


def build_space(
    dist: np.ndarray,
    ids: Optional[Sequence[str]] = None,
    coords: Optional[np.ndarray] = None,
    metric: str = "precomputed",
    multiplicity: Optional[np.ndarray] = None,
    check_triangle: bool = True,
) -> FiniteMetricSpace:
    """
    Validate a distance matrix and wrap it as a FiniteMetricSpace.

    Points at distance zero are merged into the first of them; the merged ids
    stay reachable through ``index_of``.

    Args:
        dist: Square distance matrix
        ids: Point ids, defaults to ``p0, p1, ...``
        coords: Optional coordinate payload, one row per point
        metric: Name recorded on the space
        multiplicity: Existing multiplicities to accumulate when merging
        check_triangle: Run the O(n^3) triangle check

    Returns:
        Validated space
    """
    dist = np.asarray(dist, dtype=float)
    if dist.size == 0:
        raise MetricValidationError("empty input: no points")
    _check_matrix(dist, check_triangle)
    dist = 0.5 * (dist + dist.T)

    n = dist.shape[0]
    ids = [f"p{i}" for i in range(n)] if ids is None else [str(i) for i in ids]
    if len(ids) != n:
        raise MetricValidationError(f"{len(ids)} ids for {n} points")
    if len(set(ids)) != n:
        raise MetricValidationError("point ids must be unique")
    mult = np.ones(n, dtype=int) if multiplicity is None else np.asarray(multiplicity, dtype=int)

    reps, groups = _merge_duplicates(dist)
    aliases = {}
    if len(reps) < n:
        logger.info(f"Merged {n - len(reps)} duplicate points")
        for new_index, group in enumerate(groups):
            for j in group[1:]:
                aliases[ids[j]] = new_index
        mult = np.array([mult[g].sum() for g in groups], dtype=int)
        dist = dist[np.ix_(reps, reps)]
        ids = [ids[i] for i in reps]
        if coords is not None:
            coords = np.asarray(coords, dtype=float)[reps]

    return FiniteMetricSpace(
        ids=tuple(ids),
        dist=dist,
        resolution_h=resolution_of(dist),
        diameter=float(dist.max()),
        multiplicity=mult,
        coords=None if coords is None else np.asarray(coords, dtype=float),
        metric=metric,
        aliases=aliases,
    )


def load_space(source, metric: str = "euclidean", ids: Optional[Sequence[str]] = None) -> FiniteMetricSpace:
    """
    Build a validated space from a point table or a distance matrix.

    Args:
        source: Coordinates (one row per point) or, for ``precomputed``, a square matrix
        metric: One of euclidean, manhattan, precomputed
        ids: Optional point ids

    Returns:
        Validated space with duplicates merged
    """
    data = np.asarray(source, dtype=float)
    if data.size == 0:
        raise MetricValidationError("empty input: no points")
    if metric == "precomputed":
        space = build_space(data, ids=ids, metric=metric)
    elif metric in _SCIPY_METRICS:
        if data.ndim == 1:
            data = data[:, None]
        if not np.all(np.isfinite(data)):
            raise MetricValidationError("coordinates have non-finite entries")
        if data.shape[0] == 1:
            dist = np.zeros((1, 1))
        else:
            dist = squareform(pdist(data, metric=_SCIPY_METRICS[metric]))
        space = build_space(dist, ids=ids, coords=data, metric=metric, check_triangle=False)
    else:
        raise MetricValidationError(f"unknown metric '{metric}'")
    logger.info(f"Loaded {space.n} points ({metric}), h={space.resolution_h:.6g}, diam={space.diameter:.6g}")
    return space


def diameter_of(space: FiniteMetricSpace, indices: np.ndarray) -> float:
    """Largest pairwise distance among ``indices``; 0 for fewer than two."""
    if len(indices) < 2:
        return 0.0
    return float(space.dist[np.ix_(indices, indices)].max())


def ball(space: FiniteMetricSpace, center: int, radius: float) -> BallRef:
    """Open ball ``{j : dist[center][j] < radius}``."""
    if not 0 <= center < space.n:
        raise IndexError(f"center {center} out of range for {space.n} points")
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    members = np.nonzero(space.dist[center] < radius)[0]
    return BallRef(
        center=int(center),
        radius=float(radius),
        mask=mask_from_indices(members),
        diameter=diameter_of(space, members),
        members=members,
    )


def subset_ref(space: FiniteMetricSpace, mask: int) -> SubsetRef:
    """Subset reference with its diameter."""
    members = indices_from_mask(mask)
    return SubsetRef(mask=mask, diameter=diameter_of(space, members), members=members)


def set_distance(space: FiniteMetricSpace, mask_a: int, mask_b: int) -> float:
    """Smallest distance between two nonempty sets."""
    a, b = indices_from_mask(mask_a), indices_from_mask(mask_b)
    if len(a) == 0 or len(b) == 0:
        return float("inf")
    return float(space.dist[np.ix_(a, b)].min())


def sub_space(space: FiniteMetricSpace, mask: int) -> FiniteMetricSpace:
    """Restriction of the space to ``mask`` with its own resolution."""
    idx = indices_from_mask(mask)
    if len(idx) == 0:
        raise MetricValidationError("empty input: sub-space of an empty set")
    dist = space.dist[np.ix_(idx, idx)]
    return FiniteMetricSpace(
        ids=tuple(space.ids[i] for i in idx),
        dist=dist,
        resolution_h=resolution_of(dist),
        diameter=float(dist.max()),
        multiplicity=space.multiplicity[idx],
        coords=None if space.coords is None else space.coords[idx],
        metric=space.metric,
    )


def rescaled(space: FiniteMetricSpace, factor: float) -> FiniteMetricSpace:
    """The space with every distance multiplied by ``factor``."""
    if not factor > 0:
        raise ValueError(f"scale factor must be > 0, got {factor}")
    return FiniteMetricSpace(
        ids=space.ids,
        dist=space.dist * factor,
        resolution_h=space.resolution_h * factor,
        diameter=space.diameter * factor,
        multiplicity=space.multiplicity,
        coords=None if space.coords is None else space.coords * factor,
        metric=space.metric,
        aliases=dict(space.aliases),
    )


def normalized(space: FiniteMetricSpace) -> FiniteMetricSpace:
    """The space scaled to diameter 1 (unchanged when the diameter is 0)."""
    if space.diameter <= 0:
        return space
    return rescaled(space, 1.0 / space.diameter)


def dilate(space: FiniteMetricSpace, b: BallRef, factor: float = 5.0) -> BallRef:
    """Concentric ball with radius scaled by ``factor``."""
    return ball(space, b.center, factor * b.radius)


def vitali_5r_subfamily(space: FiniteMetricSpace, balls: List[BallRef]) -> List[BallRef]:
    """
    Disjoint subfamily whose 5-fold dilations cover every input ball.

    Balls are scanned largest radius first, ties by lowest center index, and
    kept when ``dist(c_i, c_j) >= r_i + r_j`` against every kept ball.

    Args:
        space: Space the balls live in
        balls: Balls with positive radius

    Returns:
        Selected balls in selection order
    """
    for b in balls:
        if not b.radius > 0:
            raise ValueError(f"ball at center {b.center} has radius {b.radius}; radii must be > 0")
    order = sorted(range(len(balls)), key=lambda i: (-balls[i].radius, balls[i].center, i))
    selected: List[BallRef] = []
    for i in order:
        b = balls[i]
        if all(space.dist[b.center, s.center] >= b.radius + s.radius for s in selected):
            selected.append(b)
    logger.debug(f"Vitali subfamily kept {len(selected)} of {len(balls)} balls")
    return selected
