"""Property suite checked on generated fixtures and seeded random spaces."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from core.ahlfors import (
    default_test_sets,
    exponent_sandwich_check,
    fit_q_field,
    log_holder_certificate,
    nu_vs_lambda_qc,
    q_amenability_check,
    q_equals_dimloc_check,
    regularity_certificate,
    window_radii,
)
from core.dimension import estimate_dimension, global_from_local, local_dimension_field
from core.local_measure import absolute_continuity_probe, equivalence_ratio_local, null_set_check
from core.metric_core import ball, load_space, normalized, sub_space, vitali_5r_subfamily
from core.oracle import covering_number, exhaustive_min_cover
from core.premeasure import premeasure_at_scale
from core.spaces import generate, standard_fixtures
from models.generator import GroundTruth
from models.measure import SampledMeasure
from models.metric_space import FiniteMetricSpace, mask_from_indices
from models.premeasure import CoveringClass, PremeasureSpec, SolveMode
from models.results import LocalDimensionField, PropertyRow, QField, VerifyReport

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-12
SUBSAMPLE_POINTS = 12
COMPARISON_EXPONENTS = (0.0, 0.5, 1.0, 1.7)
Q_MATCH_KINDS = ("grid", "cantor", "glue")


@dataclass
class Fixture:
    """A generated space with lazily computed fields."""
    name: str
    space: FiniteMetricSpace
    measure: SampledMeasure
    truth: GroundTruth
    _field: Optional[LocalDimensionField] = field(default=None, repr=False)
    _qfield: Optional[QField] = field(default=None, repr=False)
    _scheduled_q: Optional[QField] = field(default=None, repr=False)


class VerificationSuite:
    """
    Runs every property row and collects a report.

    The quick suite uses smaller fixtures and fewer random instances; both
    are deterministic for a given seed and independent of the thread count.
    """

    def __init__(self, quick: bool = False, threads: int = 1, tolerance: float = 0.1,
                 seed: int = 0, k_min: int = 16):
        self.quick = quick
        self.threads = threads
        self.tolerance = tolerance
        self.seed = seed
        self.k_min = k_min
        self.instances = 20 if quick else 200
        self.fixtures: List[Fixture] = []

    # fixtures

    def _load_fixtures(self) -> None:
        for name, spec in standard_fixtures(self.quick):
            space, measure, truth = generate(spec)
            self.fixtures.append(Fixture(name=name, space=space, measure=measure, truth=truth))

    def field_of(self, fx: Fixture) -> LocalDimensionField:
        if fx._field is None:
            fx._field = local_dimension_field(fx.space, k_min=self.k_min, threads=self.threads)
        return fx._field

    def window_of(self, fx: Fixture) -> Tuple[float, float]:
        """Default window, narrowed on glued spaces to what every piece resolves."""
        if len(fx.truth.piece_slices) == 1:
            return 4.0 * fx.space.resolution_h, fx.space.diameter / 4.0
        pieces = [sub_space(fx.space, mask_from_indices(range(a, b))) for a, b in fx.truth.piece_slices]
        return 4.0 * max(p.resolution_h for p in pieces), min(p.diameter for p in pieces) / 4.0

    def qfield_of(self, fx: Fixture) -> QField:
        if fx._qfield is None:
            fx._qfield = fit_q_field(fx.space, fx.measure, window=self.window_of(fx), threads=self.threads)
        return fx._qfield

    def scheduled_qfield_of(self, fx: Fixture) -> QField:
        """Q fitted over the radii of the local dimension field."""
        if fx._scheduled_q is None:
            fx._scheduled_q = fit_q_field(fx.space, fx.measure, threads=self.threads,
                                          schedule=self.field_of(fx).radii)
        return fx._scheduled_q

    def _random_space(self, rng: np.random.Generator, low: int = 4, high: int = 10) -> FiniteMetricSpace:
        n = int(rng.integers(low, high + 1))
        return load_space(rng.random((n, 2)), metric="euclidean")

    @staticmethod
    def _subsample(fx: Fixture, field_values: Optional[LocalDimensionField] = None):
        """Evenly spaced points of a fixture with the matching slice of a field."""
        idx = np.unique(np.linspace(0, fx.space.n - 1, SUBSAMPLE_POINTS).astype(int))
        sub = sub_space(fx.space, mask_from_indices(idx))
        if field_values is None:
            return sub, None
        restricted = LocalDimensionField(
            values=field_values.values[idx],
            ci=field_values.ci[idx],
            radii=[[] for _ in idx],
            neighbor_counts=[[] for _ in idx],
            chosen_radius=field_values.chosen_radius[idx],
            flagged=field_values.flagged[idx],
        )
        return sub, restricted

    # rows

    def check_oracle_equivalence(self) -> List[PropertyRow]:
        rng = np.random.default_rng(self.seed)
        worst_gap, worst_ratio = 0.0, 1.0
        mismatches = greedy_failures = 0
        for _ in range(self.instances):
            space = self._random_space(rng)
            spec = PremeasureSpec.constant(float(rng.uniform(0.0, 2.0)))
            delta = float(rng.uniform(space.resolution_h, space.diameter))
            covering_class = CoveringClass.ALL_SUBSETS if rng.random() < 0.5 else CoveringClass.BALLS
            target = space.full_mask
            exact = premeasure_at_scale(space, target, spec, delta, covering_class, SolveMode.EXACT)
            oracle = exhaustive_min_cover(space, target, spec, delta, covering_class)
            greedy = premeasure_at_scale(space, target, spec, delta, covering_class, SolveMode.GREEDY)
            gap = abs(exact - oracle) / max(1.0, oracle)
            ratio = greedy / exact if exact > 0 else 1.0
            worst_gap, worst_ratio = max(worst_gap, gap), max(worst_ratio, ratio)
            mismatches += gap > EXACT_TOLERANCE
            greedy_failures += greedy > (1.0 + math.log(space.n)) * exact * (1 + EXACT_TOLERANCE)
        return [
            PropertyRow(name="exact cover equals exhaustive oracle", fixture=f"random x{self.instances}",
                        passed=mismatches == 0, value=worst_gap, bound=EXACT_TOLERANCE,
                        detail=f"{mismatches} failing instances"),
            PropertyRow(name="greedy within 1 + ln n of exact", fixture=f"random x{self.instances}",
                        passed=greedy_failures == 0, value=worst_ratio,
                        detail=f"{greedy_failures} failing instances"),
        ]

    def check_covering_number(self) -> PropertyRow:
        rng = np.random.default_rng(self.seed + 1)
        grid = load_space(np.linspace(0.0, 1.0, 9)[:, None])
        count, exact = covering_number(grid, grid.full_mask, 0.5)
        failures = 0 if (count, exact) == (2, True) else 1
        counting = PremeasureSpec.constant(0.0)
        for _ in range(self.instances // 2):
            space = self._random_space(rng)
            delta = float(rng.uniform(space.resolution_h, space.diameter))
            count, _ = covering_number(space, space.full_mask, delta)
            cost = premeasure_at_scale(space, space.full_mask, counting, delta, CoveringClass.ALL_SUBSETS)
            if abs(cost - count) > EXACT_TOLERANCE:
                failures += 1
        return PropertyRow(name="zero-exponent cost is the covering number", fixture="grid9 + random",
                           passed=failures == 0, detail=f"{failures} failing instances")

    def check_spherical_comparison(self) -> PropertyRow:
        rng = np.random.default_rng(self.seed + 2)
        failures, worst = 0, 0.0
        for _ in range(max(10, self.instances // 4)):
            space = self._random_space(rng, high=12 if not self.quick else 9)
            delta = float(rng.uniform(space.resolution_h, space.diameter / 2.0))
            for s in COMPARISON_EXPONENTS:
                spec = PremeasureSpec.constant(s)
                h_cost = premeasure_at_scale(space, space.full_mask, spec, delta, CoveringClass.ALL_SUBSETS)
                lam = premeasure_at_scale(space, space.full_mask, spec, delta, CoveringClass.BALLS)
                lam_4 = premeasure_at_scale(space, space.full_mask, spec, 4 * delta, CoveringClass.BALLS)
                worst = max(worst, lam_4 / (4.0 ** s * h_cost))
                if h_cost > lam + 1e-9 or lam_4 > 4.0 ** s * h_cost + 1e-9:
                    failures += 1
        return PropertyRow(name="H <= lambda and lambda(4d) <= 4^s H(d)", fixture="random",
                           passed=failures == 0, value=worst, bound=1.0,
                           detail=f"{failures} failing (space, s) pairs")

    def check_monotone_in_s(self) -> PropertyRow:
        failures = 0
        grid = np.linspace(0.0, 2.0, 9)
        for fx in self.fixtures:
            sub, _ = self._subsample(fx)
            unit = normalized(sub)
            for delta in (0.5, 0.25):
                costs = [premeasure_at_scale(unit, unit.full_mask, PremeasureSpec.constant(s), delta,
                                             CoveringClass.ALL_SUBSETS) for s in grid]
                if any(b > a * (1 + EXACT_TOLERANCE) for a, b in zip(costs, costs[1:])):
                    failures += 1
        return PropertyRow(name="cost nonincreasing in s below diameter 1/2", fixture="all subsampled",
                           passed=failures == 0, detail=f"{failures} failing (fixture, delta) pairs")

    def check_dimension_recovery(self) -> List[PropertyRow]:
        rows = []
        for fx in self.fixtures:
            if fx.truth.kind == "glue":
                continue
            tol = self.tolerance if self.quick else (0.10 if fx.truth.kind == "sierpinski" else 0.05)
            est = estimate_dimension(fx.space, threads=self.threads)
            error = abs(est.value - fx.truth.dimension)
            rows.append(PropertyRow(name="dimension recovery", fixture=fx.name, passed=error <= tol,
                                    value=est.value, bound=fx.truth.dimension,
                                    detail=f"|error|={error:.4f}, tol={tol}"))
        return rows

    def check_sup_of_local(self) -> Optional[PropertyRow]:
        glued = [fx for fx in self.fixtures if fx.truth.kind == "glue"]
        if not glued:
            return None
        fx = glued[0]
        field_values = self.field_of(fx)
        est = estimate_dimension(fx.space, threads=self.threads)
        top = int(np.argmax(field_values.values))
        gap = abs(global_from_local(field_values) - est.value)
        allowed = field_values.ci[top] + est.ci_halfwidth + self.tolerance
        piece_tol = self.tolerance if self.quick else 0.07
        means = [float(field_values.values[a:b].mean()) for a, b in fx.truth.piece_slices]
        piece_errors = [abs(m - d) for m, d in zip(means, fx.truth.piece_dimensions)]
        passed = gap <= allowed and max(piece_errors) <= piece_tol
        return PropertyRow(name="global dimension is the sup of the local field", fixture=fx.name,
                           passed=passed, value=gap, bound=allowed,
                           detail="piece means " + ", ".join(f"{m:.4f}" for m in means))

    def check_local_equivalence(self) -> PropertyRow:
        failures, worst = [], 0.0
        for fx in self.fixtures:
            sub, restricted = self._subsample(fx, self.field_of(fx))
            report = equivalence_ratio_local(sub, sub.full_mask, restricted)
            worst = max([worst] + [r.ratio / report.bound for r in report.rows if r.ratio is not None])
            if not report.passed:
                failures.append(fx.name)
        return PropertyRow(name="lambda_loc(4d) <= 4^dim H_loc(d)", fixture="all subsampled",
                           passed=not failures, value=worst, bound=1.0,
                           detail="failing: " + ", ".join(failures) if failures else "")

    def check_absolute_continuity(self) -> PropertyRow:
        failures = []
        for fx in self.fixtures:
            sub, restricted = self._subsample(fx, self.field_of(fx))
            d0 = global_from_local(restricted)
            half = sub.n // 2
            subsets = [("whole", sub.full_mask),
                       ("first half", mask_from_indices(range(half))),
                       ("second half", mask_from_indices(range(half, sub.n))),
                       ("point", 1)]
            rows = absolute_continuity_probe(sub, subsets, d0, restricted)
            rows.append(null_set_check(sub, restricted, d0))
            failures += [f"{fx.name}:{r.label}" for r in rows if not r.passed]
        return PropertyRow(name="small H_loc implies small H^d0; low region is null", fixture="all subsampled",
                           passed=not failures, detail=", ".join(failures))

    def check_q_matches_local(self) -> List[PropertyRow]:
        rows = []
        for fx in self.fixtures:
            if fx.truth.kind not in Q_MATCH_KINDS:
                continue
            report = q_equals_dimloc_check(self.scheduled_qfield_of(fx), self.field_of(fx), self.tolerance)
            rows.append(PropertyRow(name="fitted Q equals local dimension", fixture=fx.name,
                                    passed=report.passed, value=report.max_difference, bound=self.tolerance,
                                    detail=f"{len(report.failures)} points outside tolerance"))
        return rows

    def check_regularity(self) -> List[PropertyRow]:
        rows = []
        for fx in self.fixtures:
            window = self.window_of(fx)
            cert = regularity_certificate(fx.space, fx.measure, fx.truth.q_expected, window=window)
            lh = log_holder_certificate(fx.space, fx.truth.q_expected, regularity=cert, threads=self.threads)
            rows.append(PropertyRow(name="Ahlfors constant with the expected Q", fixture=fx.name,
                                    passed=cert.passed, value=cert.C, bound=cert.threshold,
                                    detail=f"window [{window[0]:.4g}, {window[1]:.4g}]"))
            rows.append(PropertyRow(name="log-Hoelder constant within log(C1 C2 2^R) + 1/2", fixture=fx.name,
                                    passed=lh.passed and bool(lh.bound_passed), value=lh.C_lh,
                                    bound=lh.regularity_bound))
        return rows

    def check_sandwich(self) -> PropertyRow:
        failures, checked = [], 0
        for fx in self.fixtures:
            qfield = self.qfield_of(fx)
            lh = log_holder_certificate(fx.space, qfield, threads=self.threads)
            report = exponent_sandwich_check(fx.space, qfield, lh.C_lh)
            checked += report.checked
            if not report.passed:
                failures.append(fx.name)
        return PropertyRow(name="|U|^Q+ <= |U|^Q- <= e^C |U|^Q+", fixture="all", passed=not failures,
                           value=float(checked), detail="failing: " + ", ".join(failures) if failures else "")

    def check_measure_equivalence(self) -> List[PropertyRow]:
        rows = []
        for fx in self.fixtures:
            if self.quick and fx.truth.kind == "glue":
                continue
            window = self.window_of(fx)
            q = fx.truth.q_expected
            cert = regularity_certificate(fx.space, fx.measure, q, window=window)
            pieces = [(f"piece {k}", mask_from_indices(range(a, b)))
                      for k, (a, b) in enumerate(fx.truth.piece_slices)] if len(fx.truth.piece_slices) > 1 else []
            sets = default_test_sets(fx.space, window_radii(fx.space, window), pieces, seed=self.seed)
            report = nu_vs_lambda_qc(fx.space, fx.measure, q, cert, sets)
            rows.append(PropertyRow(name="nu comparable to centred spherical premeasure", fixture=fx.name,
                                    passed=report.passed and report.tested >= 20, value=float(report.tested),
                                    bound=report.upper,
                                    detail=f"ratio bounds [{report.lower:.4g}, {report.upper:.4g}]"))
            amen = q_amenability_check(fx.space, q)
            rows.append(PropertyRow(name="balls have positive finite premeasure", fixture=fx.name,
                                    passed=amen.passed, value=float(len(amen.values))))
        return rows

    def check_vitali(self) -> PropertyRow:
        rng = np.random.default_rng(self.seed + 3)
        failures = 0
        trials = 50 if self.quick else 500
        for _ in range(trials):
            space = self._random_space(rng, low=6, high=16)
            family = [ball(space, int(rng.integers(space.n)), float(rng.uniform(0.05, 0.5)))
                      for _ in range(int(rng.integers(1, 8)))]
            chosen = vitali_5r_subfamily(space, family)
            union = 0
            for b in family:
                union |= b.mask
            seen, covered, disjoint = 0, 0, True
            for b in chosen:
                disjoint &= (seen & b.mask) == 0
                seen |= b.mask
                covered |= ball(space, b.center, 5.0 * b.radius).mask
            if not disjoint or union & ~covered:
                failures += 1
        return PropertyRow(name="Vitali subfamily disjoint, 5r dilations cover", fixture=f"random x{trials}",
                           passed=failures == 0, detail=f"{failures} failing families")

    def run(self) -> VerifyReport:
        """Run every row in a fixed order."""
        self._load_fixtures()
        steps: List[Callable[[], object]] = [
            self.check_oracle_equivalence,
            self.check_covering_number,
            self.check_spherical_comparison,
            self.check_monotone_in_s,
            self.check_vitali,
            self.check_dimension_recovery,
            self.check_sup_of_local,
            self.check_local_equivalence,
            self.check_absolute_continuity,
            self.check_q_matches_local,
            self.check_regularity,
            self.check_sandwich,
            self.check_measure_equivalence,
        ]
        rows: List[PropertyRow] = []
        for step in steps:
            result = step()
            if result is None:
                continue
            batch = result if isinstance(result, list) else [result]
            for row in batch:
                logger.info(f"{'PASS' if row.passed else 'FAIL'}  {row.name} [{row.fixture}]")
            rows.extend(batch)
        report = VerifyReport(rows=rows, quick=self.quick)
        logger.info(f"Verification: {sum(r.passed for r in rows)}/{len(rows)} rows pass")
        return report


def run_suite(quick: bool = False, threads: int = 1, tolerance: float = 0.1, seed: int = 0) -> VerifyReport:
    return VerificationSuite(quick=quick, threads=threads, tolerance=tolerance, seed=seed).run()


def summary_rows(report: VerifyReport) -> List[Tuple[str, str, str, str]]:
    """Rows for the printed pass/fail table."""
    out = []
    for row in report.rows:
        value = "" if row.value is None else "%.6g" % row.value
        out.append(("PASS" if row.passed else "FAIL", row.name, row.fixture, value))
    return out
