"""Tests for input models and result types."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from models.config import AnalysisConfig, MetricChoice
from models.generator import GeneratorKind, GeneratorSpec
from models.measure import SampledMeasure
from models.metric_space import describe_mask, indices_from_mask, iter_bits, mask_from_indices
from models.premeasure import ClampMode, ClampRule, CoveringClass, GaugeKind, PremeasureSpec, SolveMode
from models.results import LocalDimensionField, PropertyRow, VerifyReport


def test_mask_helpers():
    """Test bitmask conversions."""
    mask = mask_from_indices([0, 3, 5])
    assert mask == 0b101001
    assert list(iter_bits(mask)) == [0, 3, 5]
    assert indices_from_mask(mask).tolist() == [0, 3, 5]
    assert mask_from_indices([]) == 0


def test_describe_mask_truncates():
    """Test that long masks are abbreviated."""
    ids = [f"p{i}" for i in range(20)]
    assert describe_mask(0b11, ids) == "{p0, p1}"
    assert "(20 points)" in describe_mask((1 << 20) - 1, ids)


def test_constant_spec():
    """Test constant exponent gauge."""
    spec = PremeasureSpec.constant(1.5)
    assert spec.kind == GaugeKind.CONSTANT_S
    assert spec.s == 1.5
    assert spec.depends_on_diameter_only


def test_spec_requires_matching_field():
    """Test that each kind takes exactly its own field."""
    with pytest.raises(ValidationError):
        PremeasureSpec(kind=GaugeKind.CONSTANT_S)
    with pytest.raises(ValidationError):
        PremeasureSpec(kind=GaugeKind.VARIABLE_INF, s=1.0)
    with pytest.raises(ValidationError):
        PremeasureSpec(kind=GaugeKind.LOCAL_DIM, q_field=[1.0])


def test_spec_rejects_negative_or_nonfinite():
    """Test exponent validation."""
    with pytest.raises(ValidationError):
        PremeasureSpec.constant(-0.1)
    with pytest.raises(ValidationError):
        PremeasureSpec.variable(GaugeKind.VARIABLE_SUP, [1.0, math.inf])


def test_diameter_only_gauges():
    """Test which variable gauges reduce to diameter-only pricing."""
    assert PremeasureSpec.local([0.7, 0.7, 0.7]).depends_on_diameter_only
    assert not PremeasureSpec.local([0.7, 1.0]).depends_on_diameter_only
    assert not PremeasureSpec.variable(GaugeKind.VARIABLE_CENTERED, [1.0, 1.0]).depends_on_diameter_only


def test_clamp_rules():
    """Test the max and cell clamps."""
    assert ClampRule().apply(0.0, 0.25) == 0.25
    assert ClampRule().apply(0.5, 0.25) == 0.5
    assert ClampRule(floor=1.0).apply(0.5, 0.25) == 1.0
    cell = ClampRule(mode=ClampMode.CELL)
    assert cell.apply(0.5, 0.25) == 0.75
    assert ClampRule(mode=ClampMode.CELL, floor=2.0).apply(0.5, 0.25) == 2.0


def test_generator_spec_defaults():
    """Test generator spec helpers."""
    spec = GeneratorSpec.cantor(depth=4)
    assert spec.kind == GeneratorKind.CANTOR
    assert spec.depth == 4
    assert GeneratorSpec.grid(9).n == 9


def test_generator_spec_validation():
    """Test invalid generator specs."""
    with pytest.raises(ValidationError):
        GeneratorSpec(kind=GeneratorKind.CANTOR, ratios=[0.6, 0.3])
    with pytest.raises(ValidationError):
        GeneratorSpec(kind=GeneratorKind.CANTOR, ratios=[0.3])
    with pytest.raises(ValidationError):
        GeneratorSpec(kind=GeneratorKind.CANTOR, depth=0)
    with pytest.raises(ValidationError):
        GeneratorSpec.glue([GeneratorSpec.grid(5)])
    with pytest.raises(ValidationError):
        GeneratorSpec.glue([GeneratorSpec.grid(5), GeneratorSpec.grid(5)], gap=0.0)
    with pytest.raises(ValidationError):
        GeneratorSpec(kind=GeneratorKind.GRID, pieces=[GeneratorSpec.grid(5)])


def test_nested_generator_spec_from_dict():
    """Test that nested pieces parse from plain data."""
    spec = GeneratorSpec(**{
        'kind': 'glue',
        'gap': 3.0,
        'pieces': [{'kind': 'cantor', 'depth': 3}, {'kind': 'grid', 'n': 9}],
    })
    assert spec.pieces[1].n == 9
    assert spec.pieces[0].kind == GeneratorKind.CANTOR


def test_analysis_config_defaults():
    """Test configuration defaults."""
    config = AnalysisConfig()
    assert config.metric == MetricChoice.EUCLIDEAN
    assert config.covering_class == CoveringClass.BALLS
    assert config.mode == SolveMode.GREEDY
    assert config.threads == 1
    assert config.k_min == 16


def test_analysis_config_sorts_grids():
    """Test that grids are sorted in their working order."""
    config = AnalysisConfig(s_grid=[2.0, 0.0, 1.0], deltas=[0.1, 0.4, 0.2, 0.3])
    assert config.s_grid == [0.0, 1.0, 2.0]
    assert config.deltas == [0.4, 0.3, 0.2, 0.1]


@pytest.mark.parametrize("bad", [
    {'threads': 0},
    {'s_grid': [1.0]},
    {'deltas': [0.1, 0.2, 0.3]},
    {'deltas': [0.1, 0.2, 0.3, -1.0]},
    {'window': (0.5, 0.1)},
    {'n_radii': 2},
    {'c_threshold': 1.0},
])
def test_analysis_config_rejects(bad):
    """Test configuration range checks."""
    with pytest.raises(ValidationError):
        AnalysisConfig(**bad)


def test_sampled_measure():
    """Test measure evaluation and scaling."""
    nu = SampledMeasure(np.array([0.25, 0.25, 0.5]))
    assert nu.total == 1.0
    assert nu.nu(0b101) == 0.75
    assert nu.nu(0) == 0.0
    assert nu.scaled(2.0).nu(0b100) == 1.0
    assert SampledMeasure.uniform(4).nu(0b11) == 0.5


@pytest.mark.parametrize("weights", [[0.0, 0.0], [1.0, -0.5], [1.0, math.nan], []])
def test_sampled_measure_rejects(weights):
    """Test invalid weight vectors."""
    with pytest.raises(ValueError):
        SampledMeasure(np.array(weights, dtype=float))


def test_constant_field():
    """Test the constant local dimension field helper."""
    field = LocalDimensionField.constant(3, 0.5)
    assert len(field) == 3
    assert field.values.tolist() == [0.5, 0.5, 0.5]
    assert not field.flagged.any()


def test_verify_report_pass_flag():
    """Test that a report passes only when every row passes."""
    rows = [PropertyRow(name="a", fixture="x", passed=True), PropertyRow(name="b", fixture="x", passed=False)]
    assert not VerifyReport(rows=rows, quick=True).passed
    assert VerifyReport(rows=rows[:1], quick=True).passed
    assert not VerifyReport(rows=[], quick=True).passed
    assert VerifyReport(rows=rows, quick=False).to_dict()["rows"][1]["pass"] is False


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
