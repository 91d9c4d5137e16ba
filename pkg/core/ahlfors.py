"""Pointwise exponents of sampled measures, Ahlfors constants and log-Hoelder checks."""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from core.errors import CandidateExplosionError, MetricValidationError, SizeGuardError
from core.metric_core import ball, dilate, vitali_5r_subfamily
from core.premeasure import ALL_SUBSETS_MAX_POINTS, enumerate_candidates, premeasure_at_scale, tau_exponent
from core.workers import parallel_map
from models.measure import SampledMeasure
from models.metric_space import Candidate, FiniteMetricSpace, indices_from_mask, mask_from_indices
from models.premeasure import ClampRule, CoveringClass, GaugeKind, PremeasureSpec, SolveMode
from models.results import (
    AmenabilityReport,
    EquivalenceRow,
    FieldComparison,
    LocalDimensionField,
    LogHolderCertificate,
    MeasureEquivalenceReport,
    QField,
    RegularityCertificate,
    SandwichReport,
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 50.0
DEFAULT_LH_THRESHOLD = 10.0
LOG_HOLDER_MAX_POINTS = 5000
REGULARITY_SLACK = 0.5
WINDOW_RADII = 8

Exponents = Union[QField, np.ndarray, Sequence[float], float]


def default_window(space: FiniteMetricSpace) -> Tuple[float, float]:
    """[4h, diam/4]."""
    return 4.0 * space.resolution_h, space.diameter / 4.0


def window_radii(space: FiniteMetricSpace, window: Optional[Tuple[float, float]] = None,
                 count: int = WINDOW_RADII) -> np.ndarray:
    lo, hi = window if window is not None else default_window(space)
    if not 0 < lo < hi:
        raise ValueError(f"window must satisfy 0 < lo < hi, got {lo},{hi}")
    return np.geomspace(lo, hi, count)


def ball_masses(space: FiniteMetricSpace, measure: SampledMeasure, radii: Sequence[float]) -> np.ndarray:
    """``nu(B_r(x_i))`` for every radius (rows) and point (columns)."""
    w = measure.weights
    return np.vstack([(space.dist < r).astype(float) @ w for r in radii])


def _exponents(q: Exponents, n: int) -> np.ndarray:
    if isinstance(q, QField):
        return np.asarray(q.values, dtype=float)
    if np.isscalar(q):
        return np.full(n, float(q))
    values = np.asarray(q, dtype=float)
    if values.shape != (n,):
        raise ValueError(f"exponent field has shape {values.shape}, expected ({n},)")
    return values


def fit_q_field(
    space: FiniteMetricSpace,
    measure: SampledMeasure,
    window: Optional[Tuple[float, float]] = None,
    radii: Optional[Sequence[float]] = None,
    threads: int = 1,
    schedule: Optional[Sequence[Sequence[float]]] = None,
) -> QField:
    """
    Least-squares slope of ``log nu(B_r(x))`` against ``log r`` at every point.

    With a per-point ``schedule`` the slope is taken against the ball's own
    cell diameter ``|B| + h`` over that point's radii, which is the abscissa
    the local dimension estimates use.

    Args:
        space: Metric space
        measure: Weights on the space
        window: Radius window, default [4h, diam/4]
        radii: Explicit radii; overrides the window schedule
        threads: Worker count over points
        schedule: Radii per point; overrides both ``window`` and ``radii``

    Returns:
        Fitted exponents; points with fewer than three positive-mass radii are
        flagged with q = 0
    """
    if schedule is not None:
        return _fit_scheduled(space, measure, schedule, threads)
    if radii is None:
        radii = window_radii(space, window)
    radii = np.sort(np.asarray(radii, dtype=float))
    used_window = (float(radii[0]), float(radii[-1]))
    masses = ball_masses(space, measure, radii)
    log_r = np.log(radii)

    def fit(i: int) -> Tuple[float, float, bool]:
        return _slope(log_r, masses[:, i])

    fits = parallel_map(fit, range(space.n), threads)
    return _q_field(fits, used_window, radii)


def _slope(log_x: np.ndarray, m: np.ndarray) -> Tuple[float, float, bool]:
    ok = m > 0
    if ok.sum() < 3:
        return 0.0, 0.0, True
    y = np.log(m[ok])
    if np.ptp(y) == 0:
        return 0.0, 0.0, False
    result = stats.linregress(log_x[ok], y)
    return float(result.slope), float(result.stderr), False


def _fit_scheduled(space: FiniteMetricSpace, measure: SampledMeasure,
                   schedule: Sequence[Sequence[float]], threads: int) -> QField:
    if len(schedule) != space.n:
        raise MetricValidationError(f"radius schedule has {len(schedule)} entries for {space.n} points")
    w = measure.weights
    h = space.resolution_h

    def fit(i: int) -> Tuple[float, float, bool]:
        radii = sorted(float(r) for r in schedule[i])
        if len(radii) < 3:
            return 0.0, 0.0, True
        cells, masses = [], []
        for r in radii:
            idx = np.nonzero(space.dist[i] < r)[0]
            cells.append(float(space.dist[np.ix_(idx, idx)].max()) + h)
            masses.append(float(w[idx].sum()))
        return _slope(np.log(cells), np.array(masses))

    fits = parallel_map(fit, range(space.n), threads)
    every = [float(r) for radii in schedule for r in radii]
    if not every:
        every = [4.0 * h, space.diameter / 4.0]
    used_window = (min(every), max(every))
    radii = np.geomspace(used_window[0], used_window[1], WINDOW_RADII) if used_window[0] < used_window[1] \
        else np.array([used_window[0]])
    return _q_field(fits, used_window, radii)


def _q_field(fits: List[Tuple[float, float, bool]], used_window: Tuple[float, float], radii: np.ndarray) -> QField:
    values = np.array([f[0] for f in fits])
    stderr = np.array([f[1] for f in fits])
    flagged = np.array([f[2] for f in fits], dtype=bool)
    if flagged.any():
        logger.warning(f"{int(flagged.sum())} points have zero-mass balls at most radii; q set to 0")
    if len(values):
        logger.info(f"Q field on window [{used_window[0]:.4g}, {used_window[1]:.4g}]: "
                    f"range [{values.min():.4f}, {values.max():.4f}]")
    return QField(values=values, stderr=stderr, window=used_window, radii=radii, flagged=flagged)


def regularity_certificate(
    space: FiniteMetricSpace,
    measure: SampledMeasure,
    q: Exponents,
    window: Optional[Tuple[float, float]] = None,
    radii: Optional[Sequence[float]] = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> RegularityCertificate:
    """
    Ahlfors constants on a radius window.

    ``C1 = max nu(B_r(x)) / r**q(x)`` and ``C2 = max r**q(x) / nu(B_r(x))``
    over the tested pairs; ``C = max(C1, C2)``. A zero-mass ball fails the
    certificate and is reported as the witness.
    """
    if radii is None:
        radii = q.radii if isinstance(q, QField) and window is None else window_radii(space, window)
    radii = np.sort(np.asarray(radii, dtype=float))
    exps = _exponents(q, space.n)
    masses = ball_masses(space, measure, radii)
    powers = radii[:, None] ** exps[None, :]

    zero = np.argwhere(masses <= 0)
    witness = None
    if len(zero):
        j, i = zero[0]
        witness = (int(i), float(radii[j]))
        logger.warning(f"zero-mass ball at point {i}, radius {radii[j]:.4g}")

    with np.errstate(divide='ignore'):
        upper = masses / powers
        lower = np.where(masses > 0, powers / np.where(masses > 0, masses, 1.0), np.inf)
    ju, iu = np.unravel_index(int(np.argmax(upper)), upper.shape)
    jl, il = np.unravel_index(int(np.argmax(lower)), lower.shape)
    c1, c2 = float(upper[ju, iu]), float(lower[jl, il])
    c = max(c1, c2)
    passed = witness is None and c <= threshold
    logger.info(f"Regularity certificate: C={c:.4g} (C1={c1:.4g}, C2={c2:.4g}), pass={passed}")
    return RegularityCertificate(
        C=c,
        C1=c1,
        C2=c2,
        window=(float(radii[0]), float(radii[-1])),
        worst_upper=(int(iu), float(radii[ju])),
        worst_lower=(int(il), float(radii[jl])),
        threshold=threshold,
        passed=passed,
        zero_mass_witness=witness,
    )


def log_holder_certificate(
    space: FiniteMetricSpace,
    q: Exponents,
    threshold: float = DEFAULT_LH_THRESHOLD,
    regularity: Optional[RegularityCertificate] = None,
    slack: float = REGULARITY_SLACK,
    threads: int = 1,
    block: int = 256,
) -> LogHolderCertificate:
    """
    Smallest constant C with ``|q_x - q_y| <= -C / log d(x, y)`` over pairs with ``0 < d < 1/2``.

    Distances are divided by ``max(diam, 1)``. With a regularity certificate
    the constant is also compared with ``log(C1 * C2 * 2**R) + slack``.
    """
    n = space.n
    if n > LOG_HOLDER_MAX_POINTS:
        raise SizeGuardError(f"log-Hoelder scan needs n <= {LOG_HOLDER_MAX_POINTS}, got {n}")
    exps = _exponents(q, n)
    scale = max(space.diameter, 1.0)

    def scan(start: int) -> Tuple[float, Optional[Tuple[int, int]], int]:
        stop = min(start + block, n)
        d = space.dist[start:stop] / scale
        near = (d > 0) & (d < 0.5)
        if not near.any():
            return 0.0, None, 0
        with np.errstate(divide='ignore'):
            values = np.where(near, np.abs(exps[start:stop, None] - exps[None, :]) * -np.log(np.where(near, d, 1.0)), -1.0)
        k = int(np.argmax(values))
        i, j = np.unravel_index(k, values.shape)
        return float(values[i, j]), (int(start + i), int(j)), int(near.sum())

    parts = parallel_map(scan, range(0, n, block), threads)
    c_lh, witness, pairs = 0.0, None, 0
    for value, w, count in parts:
        pairs += count
        if w is not None and (witness is None or value > c_lh):
            c_lh, witness = value, w
    pairs //= 2
    c_lh = max(c_lh, 0.0)

    bound = bound_ok = None
    if regularity is not None:
        r_max = float(exps.max()) if n else 0.0
        bound = math.log(regularity.C1 * regularity.C2 * 2.0 ** r_max) + slack
        bound_ok = c_lh <= bound
    passed = c_lh <= threshold
    logger.info(f"log-Hoelder constant {c_lh:.4g} over {pairs} pairs, pass={passed}")
    return LogHolderCertificate(
        C_lh=c_lh,
        threshold=threshold,
        passed=passed,
        witness=witness,
        scale=scale,
        pair_count=pairs,
        regularity_bound=bound,
        bound_passed=bound_ok,
    )


def default_test_sets(
    space: FiniteMetricSpace,
    radii: Sequence[float],
    pieces: Sequence[Tuple[str, int]] = (),
    seed: int = 0,
    count: int = 24,
) -> List[Tuple[str, int]]:
    """Balls, the given pieces and seeded random masks; at least ``count`` sets."""
    sets: List[Tuple[str, int]] = [("whole", space.full_mask)] + list(pieces)
    centers = np.unique(np.linspace(0, space.n - 1, 5).astype(int))
    for c in centers:
        for r in list(radii)[::3]:
            b = ball(space, int(c), float(r))
            sets.append((f"ball({space.ids[c]},{r:.4g})", b.mask))
    rng = np.random.default_rng(seed)
    k = 0
    while len(sets) < count:
        p = (0.1, 0.3, 0.6)[k % 3]
        chosen = np.nonzero(rng.random(space.n) < p)[0]
        if len(chosen) == 0:
            chosen = np.array([int(rng.integers(space.n))])
        sets.append((f"random{k}", mask_from_indices(chosen)))
        k += 1
    return sets


def nu_vs_lambda_qc(
    space: FiniteMetricSpace,
    measure: SampledMeasure,
    q: Exponents,
    regularity: RegularityCertificate,
    test_sets: Sequence[Tuple[str, int]],
    deltas: Optional[Sequence[float]] = None,
    slack: float = 1e-9,
) -> MeasureEquivalenceReport:
    """
    Compare ``nu(A)`` with the centred spherical premeasure on test sets.

    The premeasure is the largest value over the scale grid, with ball
    diameters clamped at the lower end of the certificate window. A set passes
    when ``lambda / nu`` lies in ``[1 / (C1 * k**R) - slack, C2 * 10**R + slack]``,
    where ``k`` is the largest ratio between consecutive certificate radii.
    Each set also gets a Vitali witness: balls of the smallest window radius
    around its points, thinned to a disjoint subfamily and dilated five
    times, give ``sum max(|5B|, lo) ** q(center)``, checked against
    ``C2 * 10**R * nu(union of the balls)``.
    """
    exps = _exponents(q, space.n)
    r_max = float(exps.max())
    lo, hi = regularity.window
    clamp = ClampRule(floor=lo)
    spec = PremeasureSpec.variable(GaugeKind.VARIABLE_CENTERED, exps)
    radii = q.radii if isinstance(q, QField) else window_radii(space, regularity.window)
    gap = float(np.max(radii[1:] / radii[:-1])) if len(radii) > 1 else 1.0
    lower = 1.0 / (regularity.C1 * gap ** r_max) - slack
    upper = regularity.C2 * 10.0 ** r_max + slack
    if deltas is None:
        deltas = [d for d in (2 * lo, 4 * lo, 8 * lo, 16 * lo) if d <= max(hi, 2 * lo)]

    rows = []
    for label, mask in test_sets:
        if mask == 0:
            rows.append(EquivalenceRow(label=label, set_size=0, lambda_qc=0.0, nu=0.0, ratio=None,
                                       vitali_bound=None, passed=True, note="empty set skipped"))
            continue
        mode = SolveMode.EXACT if mask.bit_count() <= 12 else SolveMode.GREEDY
        lam = max(premeasure_at_scale(space, mask, spec, d, CoveringClass.BALLS, mode, clamp) for d in deltas)
        nu = measure.nu(mask)
        if nu <= 0:
            rows.append(EquivalenceRow(label=label, set_size=mask.bit_count(), lambda_qc=lam, nu=nu,
                                       ratio=None, vitali_bound=None, passed=lam <= 0,
                                       note="zero measure with positive premeasure" if lam > 0 else ""))
            continue

        family = [ball(space, int(i), lo) for i in indices_from_mask(mask)]
        chosen = vitali_5r_subfamily(space, family)
        dilated = [dilate(space, b) for b in chosen]
        vitali = math.fsum(max(b.diameter, lo) ** exps[b.center] for b in dilated)
        covered = 0
        for b in chosen:
            covered |= b.mask
        vitali_ok = vitali <= regularity.C2 * 10.0 ** r_max * measure.nu(covered) + slack

        ratio = lam / nu
        passed = lower <= ratio <= upper and vitali_ok
        rows.append(EquivalenceRow(label=label, set_size=mask.bit_count(), lambda_qc=lam, nu=nu,
                                   ratio=ratio, vitali_bound=vitali, passed=passed,
                                   note="" if vitali_ok else "Vitali bound exceeded"))
    report = MeasureEquivalenceReport(rows=rows, lower=lower, upper=upper)
    logger.info(f"nu vs lambda: {report.tested} sets, bounds [{lower:.4g}, {upper:.4g}], pass={report.passed}")
    return report


def q_equals_dimloc_check(q: Exponents, field: LocalDimensionField, tol: float = 0.1) -> FieldComparison:
    """Pointwise ``|q_i - d_i| <= tol + stderr_i + ci_i``, skipping flagged points."""
    n = len(field.values)
    exps = _exponents(q, n)
    q_err = np.asarray(q.stderr) if isinstance(q, QField) else np.zeros(n)
    q_flag = np.asarray(q.flagged) if isinstance(q, QField) else np.zeros(n, dtype=bool)
    diff = np.abs(exps - field.values)
    allowed = tol + q_err + field.ci
    active = ~(q_flag | field.flagged)
    failures = [int(i) for i in np.nonzero(active & (diff > allowed))[0]]
    if active.any():
        masked = np.where(active, diff, -np.inf)
        witness = int(np.argmax(masked))
        max_diff = float(diff[witness])
    else:
        witness, max_diff = None, 0.0
    passed = not failures
    if not passed:
        logger.warning(f"Q and local dimension differ at {len(failures)} points (worst {witness})")
    return FieldComparison(max_difference=max_diff, witness=witness if failures else None,
                           tolerance=tol, passed=passed, failures=failures)


def _sandwich_candidates(space: FiniteMetricSpace, delta: float, spec: PremeasureSpec) -> List[Candidate]:
    candidates: List[Candidate] = list(enumerate_candidates(space, delta, CoveringClass.BALLS))
    if space.n > ALL_SUBSETS_MAX_POINTS:
        return candidates
    try:
        subsets = enumerate_candidates(space, delta, CoveringClass.ALL_SUBSETS, spec)
    except CandidateExplosionError:
        logger.info(f"too many subsets at delta={delta:.4g}; checking maximal ones only")
        subsets = enumerate_candidates(space, delta, CoveringClass.ALL_SUBSETS)
    seen = {c.mask for c in candidates}
    candidates += [c for c in subsets if c.mask not in seen]
    return candidates


def exponent_sandwich_check(
    space: FiniteMetricSpace,
    q: Exponents,
    c_lh: float,
    delta: float = 0.5,
    rel_tol: float = 1e-12,
) -> SandwichReport:
    """
    Check ``|U|**Q+ <= |U|**Q- <= e**C * |U|**Q+`` for every candidate with ``|U| < 1/2``.

    Candidates are the balls, plus every bounded-diameter subset when the
    space has at most ``ALL_SUBSETS_MAX_POINTS`` points. Diameters are clamped
    and divided by ``max(diam, 1)`` as in the log-Hoelder scan.
    """
    exps = _exponents(q, space.n)
    scale = max(space.diameter, 1.0)
    h = space.resolution_h
    inf_spec = PremeasureSpec.variable(GaugeKind.VARIABLE_INF, exps)
    sup_spec = PremeasureSpec.variable(GaugeKind.VARIABLE_SUP, exps)
    checked = violations = 0
    worst, witness = 0.0, None
    for cand in _sandwich_candidates(space, delta * scale, inf_spec):
        size = max(cand.diameter, h) / scale
        if not 0 < size < 0.5:
            continue
        q_lo, q_hi = tau_exponent(inf_spec, cand), tau_exponent(sup_spec, cand)
        low, high = size ** q_hi, size ** q_lo
        checked += 1
        log_ratio = (q_hi - q_lo) * -math.log(size)
        if log_ratio > worst:
            worst, witness = log_ratio, [int(i) for i in cand.members]
        if low > high * (1 + rel_tol) or high > math.exp(c_lh) * low * (1 + rel_tol):
            violations += 1
    passed = violations == 0
    return SandwichReport(checked=checked, violations=violations, max_log_ratio=worst,
                          bound=c_lh, passed=passed, witness=witness)


def q_amenability_check(
    space: FiniteMetricSpace,
    q: Exponents,
    centers: Optional[Sequence[int]] = None,
    radii: Optional[Sequence[float]] = None,
    delta: Optional[float] = None,
) -> AmenabilityReport:
    """Every nonempty test ball has positive finite centred spherical premeasure."""
    exps = _exponents(q, space.n)
    spec = PremeasureSpec.variable(GaugeKind.VARIABLE_CENTERED, exps)
    centers = list(centers) if centers is not None else sorted({0, space.n // 2, space.n - 1})
    radii = list(radii) if radii is not None else list(window_radii(space)[::3])
    delta = 2 * space.resolution_h if delta is None else delta
    values = []
    for c in centers:
        for r in radii:
            b = ball(space, int(c), float(r))
            mode = SolveMode.EXACT if b.size <= 12 else SolveMode.GREEDY
            values.append((int(c), float(r), premeasure_at_scale(space, b.mask, spec, delta, CoveringClass.BALLS, mode)))
    passed = all(0 < v < math.inf for _, _, v in values)
    return AmenabilityReport(values=values, passed=passed)
