"""Result types produced by the estimators."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from models.metric_space import Candidate
from models.premeasure import ClampRule, CoveringClass, PremeasureSpec, SolveMode


class SolutionQuality(Enum):
    """Whether a cover cost is a true minimum."""
    EXACT = "exact"
    GREEDY = "greedy"


class EstimateMethod(Enum):
    """How a dimension estimate was obtained."""
    CRITICAL_EXPONENT = "critical_exponent"
    COVERING_SLOPE = "covering_slope"


@dataclass
class CoverProblem:
    """Weighted set-cover instance at one scale."""
    target_mask: int
    delta: float
    candidates: List[Candidate]
    covering_class: CoveringClass
    resolution_h: float
    clamp: ClampRule = field(default_factory=ClampRule)

    @property
    def feasible(self) -> bool:
        """True when the candidates jointly cover the target."""
        covered = 0
        for cand in self.candidates:
            covered |= cand.mask
        return (self.target_mask & ~covered) == 0


@dataclass
class CoverSolution:
    """Chosen candidates and their total gauge cost."""
    chosen: List[int]
    cost: float
    quality: SolutionQuality

    @property
    def is_feasible(self) -> bool:
        return self.cost != float("inf")


@dataclass
class ScalingProfile:
    """Table of cover costs over exponents and scales."""
    scales: np.ndarray
    effective_scales: np.ndarray
    s_grid: np.ndarray
    costs: np.ndarray
    covering_class: CoveringClass
    mode: SolveMode
    point_count: int
    upper_bound: float
    fit_mask: Optional[np.ndarray] = None
    row_fn: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False, compare=False)
    _rows: Dict[float, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def row(self, s: float) -> np.ndarray:
        """Costs over all scales at exponent ``s`` (fresh evaluation, cached)."""
        s = float(s)
        if s not in self._rows:
            hits = np.nonzero(self.s_grid == s)[0]
            if hits.size:
                self._rows[s] = self.costs[hits[0]]
            elif self.row_fn is None:
                raise ValueError(f"exponent {s} is not on the grid and the profile cannot be refined")
            else:
                self._rows[s] = self.row_fn(s)
        return self._rows[s]

    @property
    def fit_scales(self) -> np.ndarray:
        """Scales entering the regressions."""
        if self.fit_mask is None:
            return self.scales
        return self.scales[self.fit_mask]

    def to_rows(self) -> List[Tuple[float, float, float]]:
        """(s, delta, cost) triples in grid order."""
        rows = []
        for i, s in enumerate(self.s_grid):
            for j, delta in enumerate(self.scales):
                rows.append((float(s), float(delta), float(self.costs[i, j])))
        return rows


@dataclass
class DimensionEstimate:
    """Hausdorff dimension estimate with its confidence half-width."""
    value: float
    ci_halfwidth: float
    method: EstimateMethod
    profile: Optional[ScalingProfile] = field(default=None, repr=False)
    slope_stderr: float = 0.0
    clipped: bool = False
    raw_value: Optional[float] = None
    pieces: int = 1

    def to_dict(self) -> Dict[str, object]:
        data: Dict[str, object] = {
            "value": self.value,
            "ci_halfwidth": self.ci_halfwidth,
            "method": self.method.value,
            "slope_stderr": self.slope_stderr,
            "clipped": self.clipped,
        }
        if self.raw_value is not None:
            data["raw_value"] = self.raw_value
        if self.pieces > 1:
            data["pieces"] = self.pieces
        if self.profile is not None:
            data["covering_class"] = self.profile.covering_class.value
            data["mode"] = self.profile.mode.value
            data["scales"] = [float(d) for d in self.profile.scales]
            data["fit_scales"] = [float(d) for d in self.profile.fit_scales]
            data["upper_bound"] = self.profile.upper_bound
            data["point_count"] = self.profile.point_count
        return data


@dataclass
class LocalDimensionField:
    """Per-point local dimension estimates."""
    values: np.ndarray
    ci: np.ndarray
    radii: List[List[float]]
    neighbor_counts: List[List[int]]
    chosen_radius: np.ndarray
    flagged: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def constant(cls, n: int, value: float) -> 'LocalDimensionField':
        """Field with the same value everywhere and no estimation record."""
        return cls(
            values=np.full(n, float(value)),
            ci=np.zeros(n),
            radii=[[] for _ in range(n)],
            neighbor_counts=[[] for _ in range(n)],
            chosen_radius=np.zeros(n),
            flagged=np.zeros(n, dtype=bool),
        )


@dataclass
class SemicontinuityRow:
    """Neighbourhood excess of one point over its scheduled radii."""
    index: int
    value: float
    radii: List[float]
    excess: List[float]
    violation: bool


@dataclass
class MeasureEstimate:
    """Premeasure value of a set under a local-dimension gauge."""
    set_mask: int
    value: float
    delta_used: float
    covering_class: CoveringClass
    spec: PremeasureSpec = field(repr=False)
    mode: SolveMode = SolveMode.EXACT

    def to_dict(self) -> Dict[str, object]:
        return {
            "set_size": self.set_mask.bit_count(),
            "value": self.value,
            "delta_used": self.delta_used,
            "covering_class": self.covering_class.value,
            "mode": self.mode.value,
            "gauge": self.spec.kind.value,
        }


@dataclass
class RatioRow:
    """One scale pair of a local equivalence check."""
    delta: float
    h_loc: float
    lambda_loc_same: float
    lambda_loc_4delta: float
    ratio: Optional[float]
    passed: bool


@dataclass
class EquivalenceReport:
    """Outcome of comparing spherical and subset local premeasures."""
    rows: List[RatioRow]
    bound: float
    dimension: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


@dataclass
class ProbeRow:
    """One subset examined by an absolute-continuity probe."""
    label: str
    set_size: int
    h_loc: float
    lambda_loc: float
    h_d0: float
    threshold: float
    passed: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "set": self.label,
            "size": self.set_size,
            "H_loc": self.h_loc,
            "lambda_loc": self.lambda_loc,
            "H_d0": self.h_d0,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass
class QField:
    """Pointwise exponents of a sampled measure."""
    values: np.ndarray
    stderr: np.ndarray
    window: Tuple[float, float]
    radii: np.ndarray
    flagged: np.ndarray

    @property
    def upper_bound(self) -> float:
        """R, the largest exponent."""
        return float(np.max(self.values)) if len(self.values) else 0.0


@dataclass
class RegularityCertificate:
    """Ahlfors constants of a measure on a radius window."""
    C: float
    C1: float
    C2: float
    window: Tuple[float, float]
    worst_upper: Tuple[int, float]
    worst_lower: Tuple[int, float]
    threshold: float
    passed: bool
    zero_mass_witness: Optional[Tuple[int, float]] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "C": self.C,
            "C1": self.C1,
            "C2": self.C2,
            "window": list(self.window),
            "worst_upper": {"index": self.worst_upper[0], "radius": self.worst_upper[1]},
            "worst_lower": {"index": self.worst_lower[0], "radius": self.worst_lower[1]},
            "threshold": self.threshold,
            "pass": self.passed,
            "zero_mass_witness": None if self.zero_mass_witness is None else {
                "index": self.zero_mass_witness[0], "radius": self.zero_mass_witness[1]},
        }


@dataclass
class LogHolderCertificate:
    """Smallest log-Hoelder constant over the tested pairs."""
    C_lh: float
    threshold: float
    passed: bool
    witness: Optional[Tuple[int, int]]
    scale: float
    pair_count: int
    regularity_bound: Optional[float] = None
    bound_passed: Optional[bool] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "C_lh": self.C_lh,
            "threshold": self.threshold,
            "pass": self.passed,
            "witness": None if self.witness is None else list(self.witness),
            "normalization": self.scale,
            "pairs": self.pair_count,
            "regularity_bound": self.regularity_bound,
            "regularity_bound_pass": self.bound_passed,
        }


@dataclass
class EquivalenceRow:
    """Ratio of the centred spherical premeasure to the measure on one set."""
    label: str
    set_size: int
    lambda_qc: float
    nu: float
    ratio: Optional[float]
    vitali_bound: Optional[float]
    passed: bool
    note: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "set": self.label,
            "size": self.set_size,
            "lambda_qc": self.lambda_qc,
            "nu": self.nu,
            "ratio": self.ratio,
            "vitali_bound": self.vitali_bound,
            "pass": self.passed,
            "note": self.note,
        }


@dataclass
class MeasureEquivalenceReport:
    """Outcome of comparing a sampled measure with the centred spherical premeasure."""
    rows: List[EquivalenceRow]
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def tested(self) -> int:
        return sum(1 for row in self.rows if row.ratio is not None)

    def to_dict(self) -> Dict[str, object]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "tested": self.tested,
            "pass": self.passed,
            "sets": [row.to_dict() for row in self.rows],
        }


@dataclass
class FieldComparison:
    """Pointwise comparison of two exponent fields."""
    max_difference: float
    witness: Optional[int]
    tolerance: float
    passed: bool
    failures: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "max_difference": self.max_difference,
            "witness": self.witness,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "failures": list(self.failures),
        }


@dataclass
class SandwichReport:
    """Per-candidate comparison of the lower and upper variable-exponent gauges."""
    checked: int
    violations: int
    max_log_ratio: float
    bound: float
    passed: bool
    witness: Optional[List[int]] = None

    def to_dict(self) -> Dict[str, object]:
        return {
            "checked": self.checked,
            "violations": self.violations,
            "max_log_ratio": self.max_log_ratio,
            "bound": self.bound,
            "pass": self.passed,
            "witness": self.witness,
        }


@dataclass
class AmenabilityReport:
    """Centred spherical premeasure of test balls."""
    values: List[Tuple[int, float, float]]
    passed: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "balls": [{"center": c, "radius": r, "lambda_qc": v} for c, r, v in self.values],
            "pass": self.passed,
        }


@dataclass
class PropertyRow:
    """One line of the verification suite."""
    name: str
    fixture: str
    passed: bool
    value: Optional[float] = None
    bound: Optional[float] = None
    detail: str = ""

    def to_dict(self) -> Dict[str, object]:
        return {
            "property": self.name,
            "fixture": self.fixture,
            "value": self.value,
            "bound": self.bound,
            "pass": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerifyReport:
    """Outcome of the verification suite."""
    rows: List[PropertyRow]
    quick: bool

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(row.passed for row in self.rows)

    def to_dict(self) -> Dict[str, object]:
        return {
            "quick": self.quick,
            "pass": self.passed,
            "rows": [row.to_dict() for row in self.rows],
        }
