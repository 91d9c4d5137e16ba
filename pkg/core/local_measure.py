"""Local Hausdorff and local spherical premeasures built from a local dimension field."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.dimension import global_from_local
from core.metric_core import normalized
from core.premeasure import ALL_SUBSETS_MAX_POINTS, build_problem, eval_tau, min_cover_cost, premeasure_at_scale
from core.set_cover import EXACT_MAX_TARGET
from models.metric_space import FiniteMetricSpace, mask_from_indices
from models.premeasure import CoveringClass, PremeasureSpec, SolveMode
from models.results import EquivalenceReport, LocalDimensionField, MeasureEstimate, ProbeRow, RatioRow

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-9


def local_spec(field: LocalDimensionField) -> PremeasureSpec:
    return PremeasureSpec.local(field.values)


def local_hausdorff_measure(
    space: FiniteMetricSpace,
    target_mask: int,
    field: LocalDimensionField,
    delta: float,
    covering_class: CoveringClass = CoveringClass.ALL_SUBSETS,
    mode: SolveMode = SolveMode.EXACT,
) -> MeasureEstimate:
    """
    Premeasure with gauge ``|U| ** max(field over U)``.

    The all_subsets class gives the local Hausdorff premeasure, the balls
    class the local spherical one. A constant field prices every candidate
    exactly as the constant-exponent gauge does.
    """
    spec = local_spec(field)
    value = premeasure_at_scale(space, target_mask, spec, delta, covering_class, mode)
    return MeasureEstimate(
        set_mask=target_mask,
        value=value,
        delta_used=delta,
        covering_class=CoveringClass(covering_class),
        spec=spec,
        mode=SolveMode(mode),
    )


def _default_probe_deltas(h: float) -> List[float]:
    lo = max(h, 1.0 / 16.0)
    return [float(d) for d in np.geomspace(0.5, lo, 4)] if lo < 0.5 else [0.5]


def equivalence_ratio_local(
    space: FiniteMetricSpace,
    target_mask: int,
    field: LocalDimensionField,
    deltas: Optional[Sequence[float]] = None,
    dimension: Optional[float] = None,
    tol: float = RATIO_TOLERANCE,
) -> EquivalenceReport:
    """
    Compare the local spherical premeasure at 4 delta with the local Hausdorff one at delta.

    Runs exactly on the space scaled to diameter 1, so every delta is in
    normalised units. A row passes when ``lambda(4 delta) <= 4**dim * H(delta) + tol``
    and ``H(delta) <= lambda(delta) + tol``; rows with ``H = 0`` report the
    raw values and no ratio.

    Args:
        space: Space with at most 20 points
        target_mask: Set to compare on
        field: Local dimension field on the space
        deltas: Normalised scales, default geometric from 1/2
        dimension: Global dimension, default the field maximum
        tol: Absolute slack

    Returns:
        Ratio report
    """
    unit = normalized(space)
    dim = global_from_local(field) if dimension is None else float(dimension)
    bound = 4.0 ** dim
    deltas = list(deltas) if deltas is not None else _default_probe_deltas(unit.resolution_h)
    spec = local_spec(field)
    rows = []
    for delta in deltas:
        h_loc = premeasure_at_scale(unit, target_mask, spec, delta, CoveringClass.ALL_SUBSETS, SolveMode.EXACT)
        lam_same = premeasure_at_scale(unit, target_mask, spec, delta, CoveringClass.BALLS, SolveMode.EXACT)
        lam_4 = premeasure_at_scale(unit, target_mask, spec, 4 * delta, CoveringClass.BALLS, SolveMode.EXACT)
        ratio = lam_4 / h_loc if h_loc > 0 else None
        passed = lam_4 <= bound * h_loc + tol and h_loc <= lam_same + tol
        rows.append(RatioRow(delta=delta, h_loc=h_loc, lambda_loc_same=lam_same,
                             lambda_loc_4delta=lam_4, ratio=ratio, passed=passed))
        logger.debug(f"delta={delta:.4g}: H={h_loc:.6g}, lambda={lam_same:.6g}, lambda(4d)={lam_4:.6g}")
    return EquivalenceReport(rows=rows, bound=bound, dimension=dim)


def _probe_class(space: FiniteMetricSpace) -> Tuple[CoveringClass, SolveMode]:
    if space.n <= ALL_SUBSETS_MAX_POINTS:
        return CoveringClass.ALL_SUBSETS, SolveMode.EXACT
    return CoveringClass.BALLS, SolveMode.GREEDY


def _mode_for(mask: int, mode: SolveMode) -> SolveMode:
    return mode if mask.bit_count() <= EXACT_MAX_TARGET else SolveMode.GREEDY


def absolute_continuity_probe(
    space: FiniteMetricSpace,
    subsets: Sequence[Tuple[str, int]],
    d0: float,
    field: LocalDimensionField,
    delta: Optional[float] = None,
) -> List[ProbeRow]:
    """
    Check that sets small for the local measure are small for the d0-measure.

    Works on the space scaled to diameter 1 at the finest scale ``h`` unless
    ``delta`` is given. A set whose local premeasure is below
    ``eps = 10 * n * h**d0`` passes when its d0-premeasure is at most eps.
    The d0 value is also compared with the local cover priced at exponent
    d0, which bounds it from above.

    Args:
        space: Metric space
        subsets: (label, mask) pairs
        d0: Global dimension estimate
        field: Local dimension field
        delta: Normalised scale

    Returns:
        One row per subset
    """
    unit = normalized(space)
    h = unit.resolution_h if unit.resolution_h > 0 else 1.0
    delta = h if delta is None else float(delta)
    eps = 10.0 * unit.n * h ** d0
    spec_loc = local_spec(field)
    spec_d0 = PremeasureSpec.constant(d0)
    covering_class, base_mode = _probe_class(unit)
    rows = []
    for label, mask in subsets:
        if mask == 0:
            rows.append(ProbeRow(label=label, set_size=0, h_loc=0.0, lambda_loc=0.0,
                                 h_d0=0.0, threshold=eps, passed=True))
            continue
        mode = _mode_for(mask, base_mode)
        problem = build_problem(unit, mask, delta, covering_class, spec_loc)
        loc = min_cover_cost(problem, spec_loc, mode)
        repriced = sum(eval_tau(spec_d0, problem.candidates[k], unit.resolution_h) for k in loc.chosen)
        h_d0 = min(premeasure_at_scale(unit, mask, spec_d0, delta, covering_class, mode), repriced)
        lam = premeasure_at_scale(unit, mask, spec_loc, delta, CoveringClass.BALLS, mode)
        passed = loc.cost >= eps or h_d0 <= eps
        rows.append(ProbeRow(label=label, set_size=mask.bit_count(), h_loc=loc.cost,
                             lambda_loc=lam, h_d0=h_d0, threshold=eps, passed=passed))
    failed = [r.label for r in rows if not r.passed]
    if failed:
        logger.warning(f"absolute continuity probe failed on: {', '.join(failed)}")
    return rows


def null_set_check(
    space: FiniteMetricSpace,
    field: LocalDimensionField,
    d0: float,
    delta: Optional[float] = None,
) -> ProbeRow:
    """
    The points whose local dimension is below ``d0 - 2 * ci`` should carry
    no d0-dimensional mass: their d0-premeasure at the finest scale is at
    most ``10 * n * h**d0`` on the space scaled to diameter 1.
    """
    low = [i for i in range(space.n) if field.values[i] < d0 - 2.0 * field.ci[i]]
    mask = mask_from_indices(low)
    unit = normalized(space)
    h = unit.resolution_h if unit.resolution_h > 0 else 1.0
    delta = h if delta is None else float(delta)
    eps = 10.0 * unit.n * h ** d0
    covering_class, mode = _probe_class(unit)
    mode = _mode_for(mask, mode)
    h_d0 = premeasure_at_scale(unit, mask, PremeasureSpec.constant(d0), delta, covering_class, mode)
    h_loc = premeasure_at_scale(unit, mask, local_spec(field), delta, covering_class, mode)
    lam = premeasure_at_scale(unit, mask, local_spec(field), delta, CoveringClass.BALLS, mode)
    return ProbeRow(label="low-dimension region", set_size=len(low), h_loc=h_loc, lambda_loc=lam,
                    h_d0=h_d0, threshold=eps, passed=h_d0 <= eps)
