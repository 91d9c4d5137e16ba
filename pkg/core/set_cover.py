"""Weighted set cover over bitmask universes: lazy greedy and best-first exact search."""

import heapq
import itertools
import logging
import math
from typing import Dict, List, Optional, Tuple

from core.errors import SizeGuardError
from models.metric_space import iter_bits

logger = logging.getLogger(__name__)

EXACT_MAX_TARGET = 20
INF = float("inf")


def greedy_cover(masks: List[int], costs: List[float], target: int) -> Tuple[float, List[int]]:
    """
    Greedy weighted set cover.

    Each round picks the set minimising ``cost / |set & uncovered|``, ties by
    lowest index. Heap keys are lower bounds refreshed on pop, which selects
    exactly what an eager scan would.

    Args:
        masks: Candidate bitmasks
        costs: Candidate costs, same order
        target: Bits to cover

    Returns:
        (total cost, chosen indices in selection order); (inf, []) when infeasible
    """
    if target == 0:
        return 0.0, []
    heap = []
    for i, mask in enumerate(masks):
        new = (mask & target).bit_count()
        if new:
            heap.append((costs[i] / new, i))
    heapq.heapify(heap)

    uncovered = target
    chosen: List[int] = []
    while uncovered and heap:
        key, i = heapq.heappop(heap)
        new = (masks[i] & uncovered).bit_count()
        if new == 0:
            continue
        ratio = costs[i] / new
        if ratio == key:
            chosen.append(i)
            uncovered &= ~masks[i]
        else:
            heapq.heappush(heap, (ratio, i))

    if uncovered:
        return INF, []
    return math.fsum(costs[i] for i in chosen), chosen


def _reduce(masks: List[int], costs: List[float], target: int) -> Tuple[List[int], List[float], List[int]]:
    """Restrict candidates to the target, keep the cheapest per mask, drop dominated ones."""
    best: Dict[int, int] = {}
    for i, mask in enumerate(masks):
        m = mask & target
        if not m:
            continue
        j = best.get(m)
        if j is None or costs[i] < costs[j]:
            best[m] = i
    items = sorted(best.items(), key=lambda kv: (-kv[0].bit_count(), kv[1]))
    kept: List[Tuple[int, int]] = []
    for m, i in items:
        if len(items) <= 2000 and any(
            (m & km) == m and costs[ki] <= costs[i] for km, ki in kept
        ):
            continue
        kept.append((m, i))
    kept.sort(key=lambda kv: kv[1])
    return [m for m, _ in kept], [costs[i] for _, i in kept], [i for _, i in kept]


def exact_cover(
    masks: List[int],
    costs: List[float],
    target: int,
    upper: Optional[float] = None,
    max_target: int = EXACT_MAX_TARGET,
) -> Tuple[float, List[int]]:
    """
    Minimum-cost set cover by best-first search over uncovered masks.

    Branches on the lowest uncovered element. The bound sums, over uncovered
    elements, the cheapest rate ``cost / |set & uncovered|`` of any set
    containing the element, which never exceeds the remaining optimum.

    Args:
        masks: Candidate bitmasks
        costs: Candidate costs
        target: Bits to cover
        upper: Known feasible cost used for pruning (a greedy cost)
        max_target: Size guard on the target

    Returns:
        (minimum cost, chosen indices); (inf, []) when infeasible
    """
    size = target.bit_count()
    if size > max_target:
        raise SizeGuardError(f"exact cover needs |target| <= {max_target}, got {size}")
    if target == 0:
        return 0.0, []

    r_masks, r_costs, r_index = _reduce(masks, costs, target)
    covering: Dict[int, List[int]] = {e: [] for e in iter_bits(target)}
    for k, m in enumerate(r_masks):
        for e in iter_bits(m):
            covering[e].append(k)
    if any(not ks for ks in covering.values()):
        return INF, []

    if upper is None:
        upper, _ = greedy_cover(r_masks, r_costs, target)
    limit = upper * (1 + 1e-9) + 1e-300

    h_cache: Dict[int, float] = {}

    def bound(uncovered: int) -> float:
        h = h_cache.get(uncovered)
        if h is None:
            rate = {}
            for e in iter_bits(uncovered):
                best = INF
                for k in covering[e]:
                    r = r_costs[k] / (r_masks[k] & uncovered).bit_count()
                    if r < best:
                        best = r
                rate[e] = best
            h = math.fsum(rate.values())
            h_cache[uncovered] = h
        return h

    counter = itertools.count()
    best_g: Dict[int, float] = {target: 0.0}
    parent: Dict[int, Tuple[int, int]] = {}
    heap = [(bound(target), next(counter), 0.0, target)]
    expanded = 0
    while heap:
        f, _, g, uncovered = heapq.heappop(heap)
        if g > best_g.get(uncovered, INF):
            continue
        if uncovered == 0:
            break
        expanded += 1
        low = uncovered & -uncovered
        e = low.bit_length() - 1
        for k in covering[e]:
            nxt = uncovered & ~r_masks[k]
            ng = g + r_costs[k]
            if ng >= best_g.get(nxt, INF):
                continue
            nf = ng + (bound(nxt) if nxt else 0.0)
            if nf > limit:
                continue
            best_g[nxt] = ng
            parent[nxt] = (uncovered, k)
            heapq.heappush(heap, (nf, next(counter), ng, nxt))
    else:
        logger.debug("exact search exhausted under the greedy bound; keeping greedy")
        return greedy_cover(masks, costs, target)

    chosen = []
    state = 0
    while state != target:
        prev, k = parent[state]
        chosen.append(r_index[k])
        state = prev
    chosen.reverse()
    logger.debug(f"exact cover: {expanded} states expanded, {len(chosen)} sets")
    return math.fsum(costs[i] for i in chosen), chosen
