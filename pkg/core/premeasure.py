"""Premeasure at a scale: candidate enumeration, gauge evaluation and cover optimisation."""

import logging
from typing import List, Optional

import numpy as np

from core.errors import CandidateExplosionError, GaugeError, SizeGuardError
from core.metric_core import diameter_of
from core.set_cover import EXACT_MAX_TARGET, exact_cover, greedy_cover
from models.metric_space import (
    BallRef,
    Candidate,
    FiniteMetricSpace,
    SubsetRef,
    indices_from_mask,
    iter_bits,
    mask_from_indices,
)
from models.premeasure import (
    DEFAULT_CLAMP,
    ClampRule,
    CoveringClass,
    GaugeKind,
    PremeasureSpec,
    SolveMode,
)
from models.results import CoverProblem, CoverSolution, SolutionQuality

logger = logging.getLogger(__name__)

ALL_SUBSETS_MAX_POINTS = 20
CLIQUE_CAP = 200_000


def _ball_candidates(space: FiniteMetricSpace, delta: float, keep_centers: bool) -> List[BallRef]:
    """Distinct open balls at sample centers with diameter at most delta."""
    n = space.n
    step = space.resolution_h if space.resolution_h > 0 else 1.0
    seen = set()
    out: List[BallRef] = []
    for c in range(n):
        order = np.argsort(space.dist[c], kind='stable')
        sd = space.dist[c][order]
        kmax = max(1, int(np.searchsorted(sd, delta, side='right')))
        sub = space.dist[np.ix_(order[:kmax], order[:kmax])]
        prefix_diam = np.maximum.accumulate(np.tril(sub).max(axis=1))
        for k in range(kmax):
            if k + 1 < n and sd[k] == sd[k + 1]:
                continue
            if k > 0 and prefix_diam[k] > delta:
                break
            members = np.sort(order[:k + 1])
            mask = mask_from_indices(members)
            if not keep_centers:
                if mask in seen:
                    continue
                seen.add(mask)
            radius = float(sd[k + 1]) if k + 1 < n else float(sd[k]) + step
            out.append(BallRef(center=c, radius=radius, mask=mask,
                               diameter=float(prefix_diam[k]), members=members))
    return out


def _adjacency(space: FiniteMetricSpace, t: float) -> List[int]:
    adj = []
    for i in range(space.n):
        adj.append(mask_from_indices(np.nonzero(space.dist[i] <= t)[0]) & ~(1 << i))
    return adj


def _maximal_cliques(adj: List[int], vertices: int) -> List[int]:
    """Bron-Kerbosch with pivoting on bitmask adjacency."""
    out: List[int] = []

    def expand(r: int, p: int, x: int) -> None:
        if p == 0:
            if x == 0:
                out.append(r)
            return
        pivot = max(iter_bits(p | x), key=lambda u: (p & adj[u]).bit_count())
        for v in list(iter_bits(p & ~adj[pivot])):
            bit = 1 << v
            expand(r | bit, p & adj[v], x & adj[v])
            p &= ~bit
            x |= bit

    expand(0, vertices, 0)
    return out


def _all_cliques(adj: List[int], n: int, cap: int) -> List[int]:
    """Every nonempty clique, each listed once by increasing members."""
    out: List[int] = []
    stack = [(1 << v, adj[v] & ~((1 << (v + 1)) - 1)) for v in reversed(range(n))]
    while stack:
        r, p = stack.pop()
        out.append(r)
        if len(out) > cap:
            raise CandidateExplosionError(f"more than {cap} candidate sets; use the balls class or a smaller delta")
        for v in reversed(list(iter_bits(p))):
            stack.append((r | (1 << v), p & adj[v] & ~((1 << (v + 1)) - 1)))
    return out


def _subset_candidates(space: FiniteMetricSpace, delta: float, maximal_only: bool) -> List[SubsetRef]:
    if space.n > ALL_SUBSETS_MAX_POINTS:
        raise SizeGuardError(
            f"all_subsets class needs n <= {ALL_SUBSETS_MAX_POINTS}, got {space.n}; use the balls class"
        )
    masks = {1 << i for i in range(space.n)}
    if maximal_only:
        levels = np.unique(space.dist[np.triu_indices(space.n, k=1)])
        for t in levels[levels <= delta]:
            masks.update(_maximal_cliques(_adjacency(space, float(t)), space.full_mask))
    else:
        masks.update(_all_cliques(_adjacency(space, delta), space.n, CLIQUE_CAP))
    out = []
    for mask in masks:
        members = indices_from_mask(mask)
        out.append(SubsetRef(mask=mask, diameter=diameter_of(space, members), members=members))
    out.sort(key=lambda c: (c.diameter, c.mask))
    return out


def enumerate_candidates(
    space: FiniteMetricSpace,
    delta: float,
    covering_class: CoveringClass,
    spec: Optional[PremeasureSpec] = None,
    keep_centers: bool = False,
) -> List[Candidate]:
    """
    Finite candidate family for delta-covers.

    Balls: open balls at every sample center with radii from the distance set,
    diameter at most ``delta``, deduplicated by mask unless ``keep_centers``.
    All subsets: for gauges that depend on the diameter only, the maximal
    cliques of every threshold graph at a pairwise distance ``t <= delta`` plus
    singletons; otherwise every subset of diameter at most ``delta``.
    Singletons are always present, so every point stays coverable.

    Args:
        space: Metric space
        delta: Scale, > 0
        covering_class: Candidate family
        spec: Gauge the candidates will be priced with
        keep_centers: Keep equal-mask balls with different centers

    Returns:
        Candidate list in deterministic order
    """
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    covering_class = CoveringClass(covering_class)
    if covering_class == CoveringClass.BALLS:
        out = _ball_candidates(space, delta, keep_centers)
    else:
        maximal_only = spec is None or spec.depends_on_diameter_only
        out = _subset_candidates(space, delta, maximal_only)
    logger.debug(f"{len(out)} {covering_class.value} candidates at delta={delta:.6g}")
    return out


def clamped_diameters(candidates: List[Candidate], resolution_h: float,
                      clamp: ClampRule = DEFAULT_CLAMP) -> np.ndarray:
    return np.array([clamp.apply(c.diameter, resolution_h) for c in candidates], dtype=float)


def tau_exponent(spec: PremeasureSpec, candidate: Candidate) -> float:
    """Exponent the gauge applies to a nonempty candidate."""
    kind = spec.kind
    if kind == GaugeKind.CONSTANT_S:
        return float(spec.s)
    if kind == GaugeKind.VARIABLE_CENTERED:
        if not isinstance(candidate, BallRef):
            raise GaugeError("variable_centered gauge needs ball candidates")
        return float(spec.q_field[candidate.center])
    values = [spec.point_field[i] for i in candidate.members]
    if kind == GaugeKind.VARIABLE_INF:
        return float(min(values))
    return float(max(values))


def eval_tau(spec: PremeasureSpec, candidate: Candidate, resolution_h: float,
             clamp: ClampRule = DEFAULT_CLAMP) -> float:
    """
    Gauge value ``clamped_diam ** exponent``; 0 for the empty set.

    Args:
        spec: Gauge
        candidate: Ball or subset
        resolution_h: Resolution of the space
        clamp: Resolution clamp

    Returns:
        Nonnegative gauge value
    """
    if candidate.mask == 0:
        return 0.0
    return clamp.apply(candidate.diameter, resolution_h) ** tau_exponent(spec, candidate)


def check_spec(space: FiniteMetricSpace, spec: PremeasureSpec) -> None:
    """Per-point fields must cover every point of the space."""
    values = spec.point_field
    if values is not None and len(values) != space.n:
        raise GaugeError(f"{spec.kind.value} field has {len(values)} values for {space.n} points")


def build_problem(space: FiniteMetricSpace, target_mask: int, delta: float,
                  covering_class: CoveringClass, spec: Optional[PremeasureSpec] = None,
                  clamp: ClampRule = DEFAULT_CLAMP) -> CoverProblem:
    covering_class = CoveringClass(covering_class)
    keep = spec is not None and spec.kind == GaugeKind.VARIABLE_CENTERED
    candidates = enumerate_candidates(space, delta, covering_class, spec, keep_centers=keep)
    return CoverProblem(
        target_mask=target_mask,
        delta=delta,
        candidates=candidates,
        covering_class=covering_class,
        resolution_h=space.resolution_h,
        clamp=clamp,
    )


def solve_costs(masks: List[int], costs: List[float], target: int, mode: SolveMode) -> CoverSolution:
    """Cover a target with priced masks in the requested mode."""
    mode = SolveMode(mode)
    if mode == SolveMode.EXACT:
        if target.bit_count() > EXACT_MAX_TARGET:
            raise SizeGuardError(f"exact mode needs |A| <= {EXACT_MAX_TARGET}, got {target.bit_count()}")
        upper, _ = greedy_cover(masks, costs, target)
        cost, chosen = exact_cover(masks, costs, target, upper=upper)
        return CoverSolution(chosen=chosen, cost=cost, quality=SolutionQuality.EXACT)
    cost, chosen = greedy_cover(masks, costs, target)
    return CoverSolution(chosen=chosen, cost=cost, quality=SolutionQuality.GREEDY)


def min_cover_cost(problem: CoverProblem, spec: PremeasureSpec, mode: SolveMode = SolveMode.EXACT) -> CoverSolution:
    """
    Cheapest delta-cover of the target.

    Exact mode is a best-first branch and bound (|A| <= 20); greedy mode
    picks the best cost per newly covered point each round. Infeasible
    problems cost +inf with an empty cover.
    """
    costs = [eval_tau(spec, c, problem.resolution_h, problem.clamp) for c in problem.candidates]
    masks = [c.mask for c in problem.candidates]
    solution = solve_costs(masks, costs, problem.target_mask, mode)
    logger.debug(f"cover at delta={problem.delta:.6g}: cost={solution.cost:.6g}, {len(solution.chosen)} sets")
    return solution


def premeasure_at_scale(
    space: FiniteMetricSpace,
    target_mask: int,
    spec: PremeasureSpec,
    delta: float,
    covering_class: CoveringClass = CoveringClass.BALLS,
    mode: SolveMode = SolveMode.EXACT,
    clamp: ClampRule = DEFAULT_CLAMP,
) -> float:
    """
    Delta-level premeasure of ``target_mask``.

    Args:
        space: Metric space
        target_mask: Set to cover
        spec: Gauge
        delta: Scale; values below the resolution leave singleton covers only
        covering_class: all_subsets or balls
        mode: exact or greedy
        clamp: Resolution clamp

    Returns:
        Minimum (or greedy) cover cost, +inf when no delta-cover exists
    """
    check_spec(space, spec)
    if target_mask == 0:
        return 0.0
    if delta < space.resolution_h:
        logger.debug(f"delta={delta:.6g} below resolution {space.resolution_h:.6g}: singleton covers only")
    problem = build_problem(space, target_mask, delta, covering_class, spec, clamp)
    return min_cover_cost(problem, spec, mode).cost

