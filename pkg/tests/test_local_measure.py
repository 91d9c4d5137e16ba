"""Tests for local Hausdorff premeasures and their probes."""

import numpy as np
import pytest

from core.local_measure import (
    absolute_continuity_probe,
    equivalence_ratio_local,
    local_hausdorff_measure,
    null_set_check,
)
from core.metric_core import load_space
from core.premeasure import premeasure_at_scale
from core.spaces import generate
from models.generator import GeneratorSpec
from models.metric_space import mask_from_indices
from models.premeasure import CoveringClass, PremeasureSpec, SolveMode
from models.results import LocalDimensionField


@pytest.fixture
def grid9():
    """Nine equally spaced points on [0, 1]."""
    return load_space(np.linspace(0.0, 1.0, 9)[:, None])


@pytest.fixture
def glued():
    """Small Cantor sample glued to a grid, with its truth as the field."""
    space, _, truth = generate(GeneratorSpec.glue([GeneratorSpec.cantor(depth=3), GeneratorSpec.grid(9)]))
    field = LocalDimensionField.constant(space.n, 0.0)
    field.values[:] = truth.q_expected
    return space, truth, field


def test_constant_field_matches_constant_gauge(grid9):
    """Test that a constant field reproduces the constant exponent premeasure."""
    field = LocalDimensionField.constant(9, 1.0)
    local = local_hausdorff_measure(grid9, grid9.full_mask, field, 0.5)
    plain = premeasure_at_scale(grid9, grid9.full_mask, PremeasureSpec.constant(1.0), 0.5,
                                CoveringClass.ALL_SUBSETS, SolveMode.EXACT)
    assert local.value == plain
    assert local.to_dict()["gauge"] == "local_dim"
    assert local.to_dict()["set_size"] == 9


def test_empty_set(grid9):
    """Test that the empty set has measure 0."""
    field = LocalDimensionField.constant(9, 1.0)
    assert local_hausdorff_measure(grid9, 0, field, 0.5).value == 0.0


def test_spherical_at_least_subset_measure(grid9):
    """Test that restricting to balls never lowers the premeasure."""
    field = LocalDimensionField.constant(9, 1.0)
    field.values[:4] = 0.6
    subsets = local_hausdorff_measure(grid9, grid9.full_mask, field, 0.3, CoveringClass.ALL_SUBSETS)
    balls = local_hausdorff_measure(grid9, grid9.full_mask, field, 0.3, CoveringClass.BALLS)
    assert subsets.value <= balls.value * (1 + 1e-12)


def test_equivalence_ratio_random_spaces():
    """Test the spherical comparison on seeded random spaces and fields."""
    rng = np.random.default_rng(8)
    for _ in range(5):
        space = load_space(rng.random((10, 2)))
        field = LocalDimensionField.constant(10, 0.0)
        field.values[:] = rng.uniform(0.5, 1.5, 10)
        report = equivalence_ratio_local(space, space.full_mask, field)
        assert report.passed
        assert report.bound == pytest.approx(4.0 ** field.values.max())
        assert len(report.rows) == 4


def test_equivalence_single_point(grid9):
    """Test that a singleton costs the same in both classes."""
    field = LocalDimensionField.constant(9, 1.0)
    report = equivalence_ratio_local(grid9, 0b1, field, deltas=[0.5])
    row = report.rows[0]
    assert row.h_loc == row.lambda_loc_same
    assert row.ratio == pytest.approx(1.0)


def test_absolute_continuity_probe(glued):
    """Test the probe on whole space, pieces and the empty set."""
    space, truth, field = glued
    (a, b), (c, d) = truth.piece_slices
    subsets = [
        ("all", space.full_mask),
        ("cantor", mask_from_indices(range(a, b))),
        ("grid", mask_from_indices(range(c, d))),
        ("empty", 0),
    ]
    rows = absolute_continuity_probe(space, subsets, 1.0, field)
    assert [r.label for r in rows] == ["all", "cantor", "grid", "empty"]
    assert all(r.passed for r in rows)
    assert rows[3].set_size == 0
    assert rows[1].h_d0 <= rows[1].threshold
    assert rows[0].to_dict()["pass"] is True


def test_null_set_check(glued):
    """Test that the lower-dimensional piece carries no top-dimensional mass."""
    space, truth, field = glued
    row = null_set_check(space, field, 1.0)
    assert row.set_size == 8
    assert row.passed


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
