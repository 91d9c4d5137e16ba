"""Brute-force reference computations for covers and covering numbers."""

import logging
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from core.errors import SizeGuardError
from core.premeasure import check_spec, enumerate_candidates, eval_tau
from core.set_cover import greedy_cover
from models.metric_space import BallRef, FiniteMetricSpace, SubsetRef, indices_from_mask, mask_from_indices
from models.premeasure import DEFAULT_CLAMP, ClampRule, CoveringClass, PremeasureSpec

logger = logging.getLogger(__name__)

ORACLE_MAX_POINTS = 12


def _subset_diameters(dist: np.ndarray, universe: List[int]) -> np.ndarray:
    """Diameter of every subset of ``universe``, indexed by local bitmask."""
    k = len(universe)
    diam = np.zeros(1 << k)
    for local in range(1, 1 << k):
        top = local.bit_length() - 1
        rest = local & ~(1 << top)
        if rest == 0:
            continue
        others = [universe[j] for j in range(top) if rest >> j & 1]
        diam[local] = max(diam[rest], float(dist[universe[top], others].max()))
    return diam


def _all_small_subsets(space: FiniteMetricSpace, universe: List[int], delta: float) -> List[SubsetRef]:
    diam = _subset_diameters(space.dist, universe)
    out = []
    for local in range(1, 1 << len(universe)):
        if diam[local] <= delta:
            members = np.array([universe[j] for j in range(len(universe)) if local >> j & 1], dtype=np.intp)
            out.append(SubsetRef(mask=mask_from_indices(members), diameter=float(diam[local]), members=members))
    return out


def _all_balls(space: FiniteMetricSpace, delta: float) -> List[BallRef]:
    """Every open ball at a sample center, one per radius in the distance set."""
    step = space.resolution_h if space.resolution_h > 0 else 1.0
    out = []
    for c in range(space.n):
        levels = np.unique(space.dist[c])
        radii = list(levels[1:]) + [levels[-1] + step]
        for r in radii:
            members = np.nonzero(space.dist[c] < r)[0]
            d = float(space.dist[np.ix_(members, members)].max())
            if d <= delta or len(members) == 1:
                out.append(BallRef(center=c, radius=float(r), mask=mask_from_indices(members),
                                   diameter=d, members=members))
    return out


def exhaustive_min_cover(
    space: FiniteMetricSpace,
    target_mask: int,
    spec: PremeasureSpec,
    delta: float,
    covering_class: CoveringClass,
    clamp: ClampRule = DEFAULT_CLAMP,
) -> float:
    """
    True minimum cover cost over the unpruned candidate list.

    Memoised search over uncovered masks, branching on the lowest uncovered
    point. All-subsets candidates are every subset of the space with diameter
    at most ``delta`` (of the target only when the gauge depends on the
    diameter alone and the space is too large).

    Args:
        space: Metric space
        target_mask: Set to cover, at most 12 points
        spec: Gauge
        delta: Scale
        covering_class: all_subsets or balls
        clamp: Resolution clamp

    Returns:
        Minimum cost, +inf when no cover exists
    """
    size = target_mask.bit_count()
    if size > ORACLE_MAX_POINTS:
        raise SizeGuardError(f"oracle needs |A| <= {ORACLE_MAX_POINTS}, got {size}")
    check_spec(space, spec)
    if target_mask == 0:
        return 0.0

    if CoveringClass(covering_class) == CoveringClass.BALLS:
        candidates = _all_balls(space, delta)
    elif space.n <= ORACLE_MAX_POINTS:
        candidates = _all_small_subsets(space, list(range(space.n)), delta)
    elif spec.depends_on_diameter_only:
        candidates = _all_small_subsets(space, [int(i) for i in indices_from_mask(target_mask)], delta)
    else:
        raise SizeGuardError(f"oracle over all subsets needs n <= {ORACLE_MAX_POINTS}, got {space.n}")

    masks = [c.mask & target_mask for c in candidates]
    costs = [eval_tau(spec, c, space.resolution_h, clamp) for c in candidates]
    by_point = {int(e): [k for k, m in enumerate(masks) if m >> int(e) & 1] for e in indices_from_mask(target_mask)}

    @lru_cache(maxsize=None)
    def best(uncovered: int) -> float:
        if uncovered == 0:
            return 0.0
        e = (uncovered & -uncovered).bit_length() - 1
        result = float("inf")
        for k in by_point[e]:
            value = costs[k] + best(uncovered & ~masks[k])
            if value < result:
                result = value
        return result

    value = best(target_mask)
    logger.debug(f"oracle: {len(candidates)} candidates, cost={value:.12g}")
    return value


def covering_number(space: FiniteMetricSpace, target_mask: int, delta: float) -> Tuple[int, bool]:
    """
    Fewest sets of diameter at most ``delta`` covering the target.

    Exact for targets of at most 12 points; larger targets get a greedy
    upper bound over balls, flagged by the second return value.

    Returns:
        (count, is_exact)
    """
    size = target_mask.bit_count()
    if size == 0:
        return 0, True
    if size <= ORACLE_MAX_POINTS:
        universe = [int(i) for i in indices_from_mask(target_mask)]
        subsets = _all_small_subsets(space, universe, delta)
        masks = [s.mask for s in subsets]

        @lru_cache(maxsize=None)
        def fewest(uncovered: int) -> int:
            if uncovered == 0:
                return 0
            low = uncovered & -uncovered
            return 1 + min(fewest(uncovered & ~m) for m in masks if m & low)

        return fewest(target_mask), True

    balls = enumerate_candidates(space, delta, CoveringClass.BALLS)
    _, chosen = greedy_cover([b.mask for b in balls], [1.0] * len(balls), target_mask)
    logger.warning(f"covering number of {size} points is a greedy upper bound")
    return len(chosen), False
