"""Tests for exponent fields, Ahlfors constants and log-Hoelder certificates."""

import math

import numpy as np
import pytest

from core import ahlfors
from core.ahlfors import (
    ball_masses,
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
from core.dimension import radius_schedule
from core.errors import SizeGuardError
from core.metric_core import load_space, rescaled
from core.spaces import generate
from models.generator import GeneratorSpec
from models.measure import SampledMeasure
from models.results import LocalDimensionField, QField


@pytest.fixture(scope="module")
def grid65():
    """Uniform grid of 65 points with its counting measure."""
    space, measure, _ = generate(GeneratorSpec.grid(65))
    return space, measure


@pytest.fixture(scope="module")
def cantor6():
    """Middle-thirds Cantor sample of depth 6 with its natural measure."""
    return generate(GeneratorSpec.cantor(depth=6))


CANTOR_RADII = [3.0 ** -j for j in range(1, 6)]


def test_window_radii(grid65):
    """Test the default radius window."""
    space, _ = grid65
    radii = window_radii(space)
    assert len(radii) == 8
    assert radii[0] == pytest.approx(4 / 64)
    assert radii[-1] == pytest.approx(0.25)
    with pytest.raises(ValueError):
        window_radii(space, (0.5, 0.1))


def test_cantor_ball_masses(cantor6):
    """Test that balls of radius 3^-j carry mass 2^-j."""
    space, measure, _ = cantor6
    masses = ball_masses(space, measure, CANTOR_RADII)
    for j, row in enumerate(masses, start=1):
        assert np.allclose(row, 2.0 ** -j)


def test_cantor_exponents_and_constants(cantor6):
    """Test that the natural measure is exactly regular at triadic radii."""
    space, measure, truth = cantor6
    q = fit_q_field(space, measure, radii=CANTOR_RADII)
    assert np.allclose(q.values, truth.dimension, atol=1e-9)
    assert not q.flagged.any()

    cert = regularity_certificate(space, measure, truth.dimension, radii=CANTOR_RADII)
    assert cert.C == pytest.approx(1.0, rel=1e-9)
    assert cert.passed


def test_grid_exponents(grid65):
    """Test fitted exponents of the counting measure on a grid."""
    space, measure = grid65
    q = fit_q_field(space, measure, threads=2)
    # balls around these points stay inside the grid at every radius
    assert np.all(np.abs(q.values[16:49] - 1.0) < 0.1)
    assert q.values[0] == pytest.approx(1.0, abs=0.1)
    assert q.window == pytest.approx((4 / 64, 0.25))
    assert q.upper_bound == pytest.approx(q.values.max())


def test_fit_is_scale_invariant(grid65):
    """Test that doubling distances and radii leaves exponents unchanged."""
    space, measure = grid65
    radii = window_radii(space)
    base = fit_q_field(space, measure, radii=radii)
    double = fit_q_field(rescaled(space, 2.0), measure, radii=2 * radii)
    assert np.allclose(base.values, double.values, atol=1e-9)


def test_point_mass_has_zero_exponent(grid65):
    """Test a Dirac mass seen from its own support point."""
    space, _ = grid65
    weights = np.zeros(space.n)
    weights[32] = 1.0
    q = fit_q_field(space, SampledMeasure(weights))
    assert q.values[32] == 0.0
    assert q.flagged[0]


def test_grid_regularity(grid65):
    """Test Ahlfors constants of the grid with exponent 1."""
    space, measure = grid65
    cert = regularity_certificate(space, measure, 1.0)
    assert cert.passed
    assert cert.C <= 4.0
    assert cert.zero_mass_witness is None
    assert cert.to_dict()["pass"] is True


def test_wrong_exponent_fails(grid65):
    """Test that a too-large exponent blows up the upper constant."""
    space, measure = grid65
    cert = regularity_certificate(space, measure, 3.0)
    assert not cert.passed
    assert cert.C1 > 50.0
    assert cert.worst_upper[1] == pytest.approx(4 / 64)


def test_measure_scaling(grid65):
    """Test that C1 and C2 scale with the measure in opposite directions."""
    space, measure = grid65
    base = regularity_certificate(space, measure, 1.0)
    double = regularity_certificate(space, measure.scaled(2.0), 1.0)
    assert double.C1 == pytest.approx(2.0 * base.C1, rel=1e-12)
    assert double.C2 == pytest.approx(0.5 * base.C2, rel=1e-12)


def test_zero_mass_witness():
    """Test that an empty-mass ball fails with a witness."""
    space = load_space(np.linspace(0.0, 1.0, 9)[:, None])
    weights = np.ones(9)
    weights[0] = 0.0
    h = space.resolution_h
    cert = regularity_certificate(space, SampledMeasure(weights), 1.0, radii=[h / 2, h, 2 * h])
    assert not cert.passed
    assert cert.zero_mass_witness == (0, pytest.approx(h / 2))


def test_log_holder_constant_field(grid65):
    """Test that a constant exponent has constant 0 and meets the regularity bound."""
    space, measure = grid65
    regularity = regularity_certificate(space, measure, 1.0)
    cert = log_holder_certificate(space, 1.0, regularity=regularity)
    assert cert.C_lh == 0.0
    assert cert.passed
    assert cert.bound_passed
    assert cert.scale == 1.0


def test_log_holder_jump():
    """Test a single jump of 0.37 at distance 0.4."""
    space = load_space([[0.0], [0.4]])
    cert = log_holder_certificate(space, [0.63, 1.0])
    assert cert.C_lh == pytest.approx(0.37 * -math.log(0.4), rel=1e-12)
    assert cert.C_lh >= 0.339
    assert cert.witness == (0, 1)
    assert cert.pair_count == 1


def test_log_holder_threads_agree(grid65):
    """Test that the block scan does not depend on threading."""
    space, measure = grid65
    q = fit_q_field(space, measure)
    one = log_holder_certificate(space, q, block=16)
    many = log_holder_certificate(space, q, block=16, threads=3)
    assert one.C_lh == many.C_lh
    assert one.pair_count == many.pair_count


def test_log_holder_size_guard(monkeypatch):
    """Test the point limit of the pair scan."""
    monkeypatch.setattr(ahlfors, 'LOG_HOLDER_MAX_POINTS', 2)
    space = load_space([[0.0], [0.1], [0.2]])
    with pytest.raises(SizeGuardError):
        log_holder_certificate(space, 1.0)


def test_exponent_shape_checked(grid65):
    """Test that a field of the wrong length is refused."""
    space, measure = grid65
    with pytest.raises(ValueError):
        regularity_certificate(space, measure, [1.0, 1.0])


def test_q_equals_dimloc():
    """Test the pointwise field comparison."""
    field = LocalDimensionField.constant(5, 1.0)
    assert q_equals_dimloc_check(np.ones(5), field).passed

    shifted = np.array([1.0, 1.0, 1.0, 1.0, 1.5])
    report = q_equals_dimloc_check(shifted, field)
    assert not report.passed
    assert report.witness == 4
    assert report.failures == [4]
    assert report.max_difference == pytest.approx(0.5)

    q = QField(values=shifted, stderr=np.zeros(5), window=(0.1, 0.2),
               radii=np.array([0.1, 0.2]), flagged=np.array([False] * 4 + [True]))
    assert q_equals_dimloc_check(q, field).passed


def test_sandwich(grid65):
    """Test the two-sided comparison of inf and sup exponent gauges."""
    space, measure = grid65
    q = fit_q_field(space, measure)
    cert = log_holder_certificate(space, q)
    report = exponent_sandwich_check(space, q, cert.C_lh)
    assert report.passed
    assert report.checked > 0
    assert report.max_log_ratio <= cert.C_lh * (1 + 1e-12)


def test_amenability(grid65):
    """Test that test balls have positive finite premeasure."""
    space, _ = grid65
    report = q_amenability_check(space, 1.0)
    assert report.passed
    assert len(report.values) == 9


def test_nu_vs_lambda_on_grid(grid65):
    """Test the measure against the centred spherical premeasure."""
    space, measure = grid65
    regularity = regularity_certificate(space, measure, 1.0)
    sets = default_test_sets(space, window_radii(space), seed=0) + [("empty", 0)]
    report = nu_vs_lambda_qc(space, measure, 1.0, regularity, sets)

    assert report.passed
    assert report.tested == 24
    assert report.lower < 1.0 < report.upper
    assert report.rows[-1].note == "empty set skipped"
    assert report.to_dict()["tested"] == 24


def test_default_test_sets_are_seeded(grid65):
    """Test test-set reproducibility."""
    space, _ = grid65
    radii = window_radii(space)
    a = default_test_sets(space, radii, pieces=[("left", 0b111)], seed=3)
    b = default_test_sets(space, radii, pieces=[("left", 0b111)], seed=3)
    assert a == b
    assert a[0] == ("whole", space.full_mask)
    assert a[1] == ("left", 0b111)
    assert len(a) == 24


def test_scheduled_q_is_one_on_the_whole_grid(grid65):
    """Test that fitting on each point's own balls removes the edge bias."""
    space, measure = grid65
    schedule = [radius_schedule(space, i, k_min=16) for i in range(space.n)]
    q = fit_q_field(space, measure, schedule=schedule)
    assert not q.flagged.any()
    assert q.values[0] == pytest.approx(1.0, abs=1e-9)
    assert q.values[-1] == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(q.values, 1.0, atol=1e-9)
    assert q.window == (min(min(r) for r in schedule), max(max(r) for r in schedule))


def test_scheduled_q_flags_short_schedules(grid65):
    """Test that fewer than three radii flag the point."""
    space, measure = grid65
    schedule = [[0.1, 0.2]] * space.n
    schedule[10] = [0.1, 0.2, 0.4]
    q = fit_q_field(space, measure, schedule=schedule)
    assert q.flagged.sum() == space.n - 1
    assert not q.flagged[10]
    with pytest.raises(ValueError):
        fit_q_field(space, measure, schedule=schedule[:3])


def test_sandwich_includes_subsets():
    """Test that small spaces are checked on every bounded subset, not only balls."""
    coords = [[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2], [10.0, 0.0]]
    space = load_space(coords)
    report = exponent_sandwich_check(space, [0.5, 1.0, 1.5, 1.0], c_lh=3.0)
    # 4 singletons, 3 pairs and the triangle; no ball holds a pair of the triangle
    assert report.checked == 8
    assert report.passed
    assert report.max_log_ratio == pytest.approx(math.log(10.0), rel=1e-6)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
