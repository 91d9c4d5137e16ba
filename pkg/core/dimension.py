"""Hausdorff dimension from scaling profiles, and the local dimension field."""

import logging
import math
import threading
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree

from core.errors import EstimationError, LochausError, MetricValidationError, NoBracketError
from core.metric_core import sub_space
from core.premeasure import clamped_diameters, enumerate_candidates, solve_costs
from core.workers import parallel_map
from models.metric_space import FiniteMetricSpace, indices_from_mask, mask_from_indices
from models.premeasure import ClampMode, ClampRule, CoveringClass, SolveMode
from models.results import (
    DimensionEstimate,
    EstimateMethod,
    LocalDimensionField,
    ScalingProfile,
    SemicontinuityRow,
)

logger = logging.getLogger(__name__)

DEFAULT_SCALE_COUNT = 8
BISECTION_TOL = 1e-3
MIN_SCALES = 4
RESOLVED_CELLS = 4.0
SEPARATION = 1.5
K_MIN = 16
MIN_RADII = 3


def default_deltas(diameter: float, resolution_h: float, count: int = DEFAULT_SCALE_COUNT) -> np.ndarray:
    """Geometric scales from diam/4 down to max(h, diam/256)."""
    lo = max(resolution_h, diameter / 256.0)
    if lo <= 0:
        lo = 1.0
    hi = max(diameter / 4.0, 2.0 * lo)
    return np.geomspace(hi, lo, count)


def resolved_scales(scales: Sequence[float], resolution_h: float) -> np.ndarray:
    """
    Mask of the scales spanning at least ``RESOLVED_CELLS`` sample spacings.

    Below that, the cell clamp dominates the diameters and the costs stop
    following the scaling law. When fewer than ``MIN_SCALES`` scales qualify,
    the coarsest ``MIN_SCALES`` are used.
    """
    scales = np.asarray(scales, dtype=float)
    mask = scales >= RESOLVED_CELLS * resolution_h
    if mask.sum() < MIN_SCALES:
        mask = np.zeros(len(scales), dtype=bool)
        mask[np.argsort(-scales, kind='stable')[:MIN_SCALES]] = True
    return mask


def sanity_bound(n: int, diameter: float, resolution_h: float) -> float:
    """log n / log(diam / h); infinite when the ratio is at most 1."""
    if n <= 1:
        return 0.0
    if resolution_h <= 0 or diameter / resolution_h <= 1.0:
        return math.inf
    return math.log(n) / math.log(diameter / resolution_h)


def default_s_grid(bound: float, count: int = 7) -> np.ndarray:
    top = 3.0 if not math.isfinite(bound) else bound + 1.0
    return np.linspace(0.0, top, count)


def _diameter(space: FiniteMetricSpace, idx: np.ndarray) -> float:
    return float(space.dist[np.ix_(idx, idx)].max()) if len(idx) > 1 else 0.0


def separated_pieces(space: FiniteMetricSpace, target_mask: Optional[int] = None) -> List[int]:
    """
    Split a set at gaps wider than ``SEPARATION`` times the pieces on both sides.

    The widest edge of the minimum spanning tree splits the set in two; each
    side is split again while the gap stays that wide. A set without such a
    gap is returned whole.

    Args:
        space: Metric space
        target_mask: Set to split, the whole space by default

    Returns:
        Piece masks in increasing order
    """
    target = space.full_mask if target_mask is None else target_mask
    stack, pieces = [target], []
    while stack:
        mask = stack.pop()
        idx = indices_from_mask(mask)
        if len(idx) < 2:
            pieces.append(mask)
            continue
        tree = minimum_spanning_tree(space.dist[np.ix_(idx, idx)]).toarray()
        a, b = np.unravel_index(int(np.argmax(tree)), tree.shape)
        gap = float(tree[a, b])
        tree[a, b] = 0.0
        _, labels = connected_components(tree, directed=False)
        left, right = idx[labels == labels[a]], idx[labels != labels[a]]
        if gap > SEPARATION * max(_diameter(space, left), _diameter(space, right)):
            stack += [mask_from_indices(left), mask_from_indices(right)]
        else:
            pieces.append(mask)
    return sorted(pieces)


def scaling_profile(
    space: FiniteMetricSpace,
    target_mask: Optional[int] = None,
    s_grid: Optional[Sequence[float]] = None,
    deltas: Optional[Sequence[float]] = None,
    covering_class: CoveringClass = CoveringClass.BALLS,
    mode: SolveMode = SolveMode.GREEDY,
    threads: int = 1,
) -> ScalingProfile:
    """
    Cover costs over a grid of exponents and scales.

    At scale delta the cover is chosen with the cell clamp and floor
    ``(delta + h) / 3``, and its cost is reported at the unfloored cell
    diameters ``|U| + h``; ``delta + h`` is the abscissa used in regressions.
    This keeps ``cost ~ C * (delta + h) ** (s - dim)`` on both sides of the
    critical exponent. Candidates are enumerated once per scale.

    Args:
        space: Metric space
        target_mask: Set to cover, the whole space by default
        s_grid: Exponents
        deltas: Scales, sorted decreasing
        covering_class: Candidate family
        mode: exact or greedy
        threads: Worker count over scales

    Returns:
        Profile with a refinement hook for off-grid exponents
    """
    covering_class = CoveringClass(covering_class)
    mode = SolveMode(mode)
    target = space.full_mask if target_mask is None else target_mask
    idx = indices_from_mask(target)
    diameter = _diameter(space, idx)
    h = space.resolution_h
    bound = sanity_bound(len(idx), diameter, h)
    deltas = np.unique(np.asarray(deltas if deltas is not None else default_deltas(diameter, h), dtype=float))[::-1]
    s_values = np.array(sorted(s_grid) if s_grid is not None else default_s_grid(bound), dtype=float)

    def prepare(delta: float) -> Tuple[List[int], np.ndarray, np.ndarray]:
        clamp = ClampRule(mode=ClampMode.CELL, floor=(delta + h) / 3.0)
        candidates = enumerate_candidates(space, delta, covering_class)
        cells = np.array([c.diameter + h for c in candidates], dtype=float)
        return [c.mask for c in candidates], clamped_diameters(candidates, h, clamp), cells

    tables = parallel_map(prepare, list(deltas), threads)

    def row(s: float) -> np.ndarray:
        def solve(j: int) -> float:
            masks, priced, cells = tables[j]
            solution = solve_costs(masks, list(priced ** s), target, mode)
            if not math.isfinite(solution.cost):
                return math.inf
            return math.fsum(cells[i] ** s for i in solution.chosen)
        return np.array(parallel_map(solve, range(len(deltas)), threads), dtype=float)

    costs = np.vstack([row(s) for s in s_values])
    fit_mask = resolved_scales(deltas, h)
    logger.debug(f"profile: {len(s_values)} exponents x {len(deltas)} scales on {len(idx)} points, "
                 f"{int(fit_mask.sum())} scales fitted")
    return ScalingProfile(
        scales=deltas,
        effective_scales=deltas + h,
        s_grid=s_values,
        costs=costs,
        covering_class=covering_class,
        mode=mode,
        point_count=len(idx),
        upper_bound=bound,
        fit_mask=fit_mask,
        row_fn=row,
    )


def _fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Slope and its standard error of ``log y`` against ``log x`` over finite entries."""
    ok = np.isfinite(y) & (y > 0)
    if ok.sum() < MIN_SCALES:
        raise EstimationError(f"only {int(ok.sum())} finite scales; need {MIN_SCALES}")
    lx, ly = np.log(x[ok]), np.log(y[ok])
    if np.ptp(ly) == 0:
        return 0.0, 0.0
    fit = stats.linregress(lx, ly)
    return float(fit.slope), float(fit.stderr)


def _fitted(profile: ScalingProfile, s: float) -> Tuple[np.ndarray, np.ndarray]:
    keep = profile.fit_mask if profile.fit_mask is not None else np.ones(len(profile.scales), dtype=bool)
    return profile.effective_scales[keep], profile.row(s)[keep]


def profile_slope(profile: ScalingProfile, s: float) -> Tuple[float, float]:
    """Regression slope of log cost against log effective scale at exponent ``s`` over the fitted scales."""
    return _fit(*_fitted(profile, s))


def slope_spread(profile: ScalingProfile, s: float) -> float:
    """Standard deviation of the slopes between neighbouring fitted scales."""
    x, y = _fitted(profile, s)
    ok = np.isfinite(y) & (y > 0)
    if ok.sum() < 3:
        return 0.0
    local = np.diff(np.log(y[ok])) / np.diff(np.log(x[ok]))
    return float(np.std(local, ddof=1))


def critical_exponent(profile: ScalingProfile, tol: float = BISECTION_TOL) -> DimensionEstimate:
    """
    Exponent where the profile slope changes sign.

    Slopes are evaluated on the grid, the sign change is bracketed by
    neighbouring grid exponents and narrowed by bisection with fresh
    evaluations. Several grid exponents whose slope is zero within its
    standard error give their span midpoint and a widened interval. The
    half-width is the larger of the regression error and the spread of the
    slopes between neighbouring scales, both mapped to exponent units.

    Args:
        profile: Scaling profile with at least four finite scales
        tol: Bracket width at which bisection stops

    Returns:
        Estimate, clipped to the point-count bound and flagged when clipped
    """
    if profile.point_count <= 1:
        return DimensionEstimate(value=0.0, ci_halfwidth=0.0, method=EstimateMethod.CRITICAL_EXPONENT, profile=profile)
    if not np.any(np.isfinite(profile.costs)):
        raise EstimationError("all profile costs are infinite")
    if len(profile.scales) < MIN_SCALES:
        raise EstimationError(f"profile has {len(profile.scales)} scales; need {MIN_SCALES}")

    grid = profile.s_grid
    fits = [profile_slope(profile, s) for s in grid]
    slopes = np.array([f[0] for f in fits])
    errs = np.array([f[1] for f in fits])
    span = grid[-1] - grid[0]
    rate = (slopes[-1] - slopes[0]) / span if span > 0 else 1.0
    if not rate > 0:
        rate = 1.0

    flat = np.nonzero(np.abs(slopes) <= errs)[0] if np.any(errs > 0) else np.array([], dtype=int)
    if len(flat) > 1:
        lo_s, hi_s = grid[flat[0]], grid[flat[-1]]
        value = 0.5 * (lo_s + hi_s)
        ci = 0.5 * (hi_s - lo_s) + float(errs[flat].max()) / rate
        return _finish(profile, value, ci, float(errs[flat].max()), rate)

    if slopes[0] >= 0:
        if grid[0] == 0:
            return _finish(profile, 0.0, float(errs[0]) / rate, float(errs[0]), rate)
        raise NoBracketError(f"slope is already >= 0 at s={grid[0]}; widen the s grid downwards")
    if slopes[-1] <= 0:
        raise NoBracketError(f"slope is still <= 0 at s={grid[-1]}; widen the s grid upwards")

    k = int(np.nonzero(slopes > 0)[0][0])
    lo, hi = float(grid[k - 1]), float(grid[k])
    err = float(errs[k])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        slope, err = profile_slope(profile, mid)
        if slope > 0:
            hi = mid
        elif slope < 0:
            lo = mid
        else:
            lo = hi = mid
    value = 0.5 * (lo + hi)
    return _finish(profile, value, err / rate, err, rate)


def _finish(profile: ScalingProfile, value: float, ci: float, stderr: float, rate: float) -> DimensionEstimate:
    ci = max(ci, slope_spread(profile, value) / rate)
    clipped, raw = False, None
    if value > profile.upper_bound:
        logger.warning(f"estimate {value:.4f} above point-count bound {profile.upper_bound:.4f}; clipped and flagged")
        raw, value, clipped = float(value), profile.upper_bound, True
    return DimensionEstimate(
        value=max(0.0, float(value)),
        ci_halfwidth=max(0.0, float(ci)),
        method=EstimateMethod.CRITICAL_EXPONENT,
        profile=profile,
        slope_stderr=stderr,
        clipped=clipped,
        raw_value=raw,
    )


def covering_slope(profile: ScalingProfile) -> DimensionEstimate:
    """Minus the slope of the log covering number against log effective scale."""
    if profile.point_count <= 1:
        return DimensionEstimate(value=0.0, ci_halfwidth=0.0, method=EstimateMethod.COVERING_SLOPE, profile=profile)
    slope, err = profile_slope(profile, 0.0)
    return DimensionEstimate(
        value=max(0.0, -slope),
        ci_halfwidth=max(err, slope_spread(profile, 0.0)),
        method=EstimateMethod.COVERING_SLOPE,
        profile=profile,
        slope_stderr=err,
    )


def _estimate_piece(
    space: FiniteMetricSpace,
    target: int,
    s_grid: Optional[Sequence[float]],
    deltas: Optional[Sequence[float]],
    covering_class: CoveringClass,
    mode: SolveMode,
    threads: int,
    method: EstimateMethod,
    tol: float,
) -> DimensionEstimate:
    if target.bit_count() <= 1:
        return DimensionEstimate(value=0.0, ci_halfwidth=0.0, method=method)
    profile = scaling_profile(space, target, s_grid, deltas, covering_class, mode, threads)
    if method == EstimateMethod.COVERING_SLOPE:
        return covering_slope(profile)
    return critical_exponent(profile, tol)


def estimate_dimension(
    space: FiniteMetricSpace,
    target_mask: Optional[int] = None,
    s_grid: Optional[Sequence[float]] = None,
    deltas: Optional[Sequence[float]] = None,
    covering_class: CoveringClass = CoveringClass.BALLS,
    mode: SolveMode = SolveMode.GREEDY,
    threads: int = 1,
    method: EstimateMethod = EstimateMethod.CRITICAL_EXPONENT,
    tol: float = BISECTION_TOL,
) -> DimensionEstimate:
    """
    Profile a set and estimate its dimension.

    Well-separated pieces (see ``separated_pieces``) are profiled on their own
    sub-spaces, each with its own resolution and point-count bound, and the
    largest piece estimate is returned.
    """
    method = EstimateMethod(method)
    target = space.full_mask if target_mask is None else target_mask
    if target.bit_count() <= 1:
        return DimensionEstimate(value=0.0, ci_halfwidth=0.0, method=method)
    pieces = separated_pieces(space, target)
    if len(pieces) == 1:
        return _estimate_piece(space, target, s_grid, deltas, covering_class, mode, threads, method, tol)

    estimates = []
    failure: Optional[LochausError] = None
    for piece in pieces:
        if piece.bit_count() <= 1:
            continue
        piece_space = sub_space(space, piece)
        try:
            estimates.append(_estimate_piece(piece_space, piece_space.full_mask, s_grid, deltas,
                                             covering_class, mode, threads, method, tol))
        except (EstimationError, NoBracketError) as e:
            logger.warning(f"piece of {piece.bit_count()} points skipped: {e}")
            failure = e
    if not estimates:
        if failure is not None:
            raise failure
        return DimensionEstimate(value=0.0, ci_halfwidth=0.0, method=method, pieces=len(pieces))
    best = max(estimates, key=lambda e: e.value)
    best.pieces = len(pieces)
    logger.info(f"{len(pieces)} separated pieces, estimates "
                + ", ".join(f"{e.value:.4f}" for e in estimates) + f"; reporting {best.value:.4f}")
    return best


def radius_schedule(space: FiniteMetricSpace, index: int, k_min: int = K_MIN, n_radii: int = MIN_RADII) -> List[float]:
    """
    Radii ``r_min * 2**k`` around a point.

    ``r_min`` is the smallest open-ball radius from the distance set that holds
    at least ``k_min`` points. Radii are capped at the whole space and kept only
    when they change the ball. Empty when the space has fewer than ``k_min``
    points.
    """
    if space.n < k_min:
        return []
    sd = np.sort(space.dist[index])
    step = space.resolution_h if space.resolution_h > 0 else 1.0
    cap = float(sd[-1]) + step
    larger = sd[sd > sd[k_min - 1]]
    r_min = float(larger[0]) if len(larger) else cap
    radii, counts = [], []
    for k in range(n_radii):
        r = min(r_min * 2 ** k, cap)
        count = int(np.count_nonzero(space.dist[index] < r))
        if counts and count == counts[-1]:
            continue
        radii.append(r)
        counts.append(count)
        if r >= cap:
            break
    return radii


class _EstimateCache:
    """Ball estimates keyed by member mask."""

    def __init__(self):
        self._values: Dict[int, Optional[DimensionEstimate]] = {}
        self._lock = threading.Lock()

    def get(self, mask: int, compute):
        with self._lock:
            if mask in self._values:
                return self._values[mask]
        value = compute()
        with self._lock:
            self._values.setdefault(mask, value)
        return value


def local_dimension_field(
    space: FiniteMetricSpace,
    k_min: int = K_MIN,
    n_radii: int = MIN_RADII,
    covering_class: CoveringClass = CoveringClass.BALLS,
    mode: SolveMode = SolveMode.GREEDY,
    threads: int = 1,
    tol: float = BISECTION_TOL,
    schedule: Optional[Sequence[Sequence[float]]] = None,
) -> LocalDimensionField:
    """
    Per-point minimum of ball dimension estimates over a radius schedule.

    Each ball is estimated on its own sub-space with its own resolution.
    Radii whose ball holds fewer than ``k_min`` points, or the same points as
    a smaller radius, are dropped. Points left with fewer than three radii,
    or with no estimable ball, are flagged with value 0.

    Args:
        space: Metric space
        k_min: Minimum points per ball
        n_radii: Radii per point of the default schedule
        covering_class: Candidate family for the ball estimates
        mode: Cover mode for the ball estimates
        threads: Worker count over points
        tol: Bisection tolerance
        schedule: Radii per point; ``radius_schedule`` by default

    Returns:
        Local dimension field
    """
    if schedule is not None and len(schedule) != space.n:
        raise MetricValidationError(f"radius schedule has {len(schedule)} entries for {space.n} points")
    cache = _EstimateCache()

    def estimate_ball(mask: int) -> Optional[DimensionEstimate]:
        ball_space = sub_space(space, mask)
        try:
            return estimate_dimension(ball_space, covering_class=covering_class, mode=mode, tol=tol)
        except (EstimationError, NoBracketError) as e:
            logger.debug(f"ball of {mask.bit_count()} points not estimable: {e}")
            return None

    def usable_radii(i: int) -> Tuple[List[float], List[int]]:
        wanted = radius_schedule(space, i, k_min, n_radii) if schedule is None else sorted(float(r) for r in schedule[i])
        radii, counts = [], []
        for r in wanted:
            count = int(np.count_nonzero(space.dist[i] < r))
            if count < k_min or (counts and count == counts[-1]):
                continue
            radii.append(r)
            counts.append(count)
        return radii, counts

    def point(i: int):
        radii, counts = usable_radii(i)
        best, best_radius = None, 0.0
        if len(radii) < MIN_RADII:
            return radii, counts, best, best_radius
        for r in radii:
            mask = mask_from_indices(np.nonzero(space.dist[i] < r)[0])
            est = cache.get(mask, lambda m=mask: estimate_ball(m))
            if est is not None and (best is None or est.value < best.value):
                best, best_radius = est, r
        return radii, counts, best, best_radius

    results = parallel_map(point, range(space.n), threads)
    values = np.zeros(space.n)
    ci = np.zeros(space.n)
    chosen = np.zeros(space.n)
    flagged = np.zeros(space.n, dtype=bool)
    for i, (radii, counts, best, r) in enumerate(results):
        if best is None:
            flagged[i] = True
            continue
        values[i], ci[i], chosen[i] = best.value, best.ci_halfwidth, r
    if flagged.any():
        logger.warning(f"{int(flagged.sum())} points have fewer than {MIN_RADII} usable radii "
                       f"of at least {k_min} points, or no estimable ball; set to 0")
    if space.n:
        logger.info(f"Local dimension field: {space.n} points, range [{values.min():.4f}, {values.max():.4f}]")
    return LocalDimensionField(
        values=values,
        ci=ci,
        radii=[r[0] for r in results],
        neighbor_counts=[r[1] for r in results],
        chosen_radius=chosen,
        flagged=flagged,
    )


def semicontinuity_report(
    field: LocalDimensionField,
    space: FiniteMetricSpace,
    tol: float = 0.1,
    k_min: int = K_MIN,
) -> List[SemicontinuityRow]:
    """
    Neighbourhood excess ``max_{j in B_r(x_i)} d_j - d_i`` over each point's radii.

    A point violates the discrete upper-semicontinuity surrogate when the
    excess at its smallest radius exceeds ``tol``. Fields without recorded
    radii use the default schedule; points without one use the whole space.
    """
    rows = []
    for i in range(space.n):
        radii = list(field.radii[i]) or radius_schedule(space, i, k_min) or [space.diameter + max(space.resolution_h, 1.0)]
        radii = sorted(radii, reverse=True)
        excess = []
        for r in radii:
            near = np.nonzero(space.dist[i] < r)[0]
            near = near[near != i]
            excess.append(float((field.values[near] - field.values[i]).max()) if len(near) else 0.0)
        rows.append(SemicontinuityRow(
            index=i,
            value=float(field.values[i]),
            radii=radii,
            excess=excess,
            violation=excess[-1] > tol,
        ))
    violations = sum(r.violation for r in rows)
    if violations:
        logger.warning(f"{violations} points violate the semicontinuity check at tol={tol}")
    return rows


def global_from_local(field: LocalDimensionField) -> float:
    """Maximum of the field; 0 for an empty field."""
    if len(field.values) == 0:
        return 0.0
    return float(np.max(field.values))
