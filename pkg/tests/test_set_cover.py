"""Tests for the greedy and exact weighted set cover solvers."""

import itertools
import math

import numpy as np
import pytest

from core.errors import SizeGuardError
from core.set_cover import exact_cover, greedy_cover


def brute_force(masks, costs, target):
    """Cheapest cover by trying every sub-family."""
    best = math.inf
    for r in range(1, len(masks) + 1):
        for combo in itertools.combinations(range(len(masks)), r):
            union = 0
            for k in combo:
                union |= masks[k]
            if union & target == target:
                best = min(best, math.fsum(costs[k] for k in combo))
    return best


def test_greedy_can_be_suboptimal():
    """Test the classic instance where the cheapest rate misleads greedy."""
    masks = [0b0011, 0b1100, 0b0110]
    costs = [1.0, 1.0, 0.9]

    greedy_cost, greedy_chosen = greedy_cover(masks, costs, 0b1111)
    exact_cost, exact_chosen = exact_cover(masks, costs, 0b1111)

    assert greedy_chosen == [2, 0, 1]
    assert greedy_cost == pytest.approx(2.9)
    assert exact_cost == 2.0
    assert sorted(exact_chosen) == [0, 1]


def test_empty_target():
    """Test that nothing needs covering."""
    assert greedy_cover([0b1], [1.0], 0) == (0.0, [])
    assert exact_cover([0b1], [1.0], 0) == (0.0, [])


def test_infeasible():
    """Test that an uncoverable element gives an infinite cost."""
    assert greedy_cover([0b01], [1.0], 0b11) == (math.inf, [])
    assert exact_cover([0b01], [1.0], 0b11) == (math.inf, [])


def test_greedy_ties_lowest_index():
    """Test deterministic tie-breaking."""
    cost, chosen = greedy_cover([0b11, 0b11], [1.0, 1.0], 0b11)
    assert chosen == [0]
    assert cost == 1.0


def test_exact_size_guard():
    """Test the target size guard."""
    target = (1 << 21) - 1
    with pytest.raises(SizeGuardError):
        exact_cover([target], [1.0], target)


def test_exact_matches_brute_force():
    """Test the exact solver against full enumeration on seeded instances."""
    rng = np.random.default_rng(3)
    for _ in range(60):
        n = int(rng.integers(3, 8))
        target = (1 << n) - 1
        masks = [1 << i for i in range(n)]
        masks += [int(rng.integers(1, 1 << n)) for _ in range(int(rng.integers(1, 7)))]
        costs = [float(c) for c in rng.uniform(0.1, 2.0, len(masks))]

        expected = brute_force(masks, costs, target)
        cost, chosen = exact_cover(masks, costs, target)
        greedy, _ = greedy_cover(masks, costs, target)

        assert cost == pytest.approx(expected, rel=1e-12)
        union = 0
        for k in chosen:
            union |= masks[k]
        assert union & target == target
        assert cost <= greedy * (1 + 1e-12)
        assert greedy <= (1 + math.log(n)) * cost * (1 + 1e-12)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
