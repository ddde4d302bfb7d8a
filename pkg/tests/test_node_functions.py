import math

import numpy as np
import pytest

from hetcover import (
    Metric2x2,
    NodeFunctionSpec,
    SingularityError,
    ValidationError,
    check_cutoff_equality,
    effectiveness,
    effectiveness_slope_sq,
    rim_shifted,
    validate_decreasing,
)

ORIGIN = (0.0, 0.0)


def at_r(r):
    return (float(r), 0.0)


class TestSpecValidation:
    def test_alpha_must_be_positive_finite(self):
        with pytest.raises(ValidationError):
            NodeFunctionSpec("quadratic", alpha=0.0)
        with pytest.raises(ValidationError):
            NodeFunctionSpec("quadratic", alpha=-1.0)
        with pytest.raises(ValidationError):
            NodeFunctionSpec("quadratic", alpha=math.inf)

    def test_unknown_family(self):
        with pytest.raises(ValidationError):
            NodeFunctionSpec("cubic")

    def test_family_specific_parameters(self):
        with pytest.raises(ValidationError):
            NodeFunctionSpec("quadratic", d_add=1.0)
        with pytest.raises(ValidationError):
            NodeFunctionSpec("standard", R_power=2.0)
        with pytest.raises(ValidationError):
            NodeFunctionSpec("power")  # R_power required
        with pytest.raises(ValidationError):
            NodeFunctionSpec("quadratic", poly_coeffs=(0.0, -1.0))

    def test_polynomial_monotonicity_constraints(self):
        NodeFunctionSpec("custom_polynomial", poly_coeffs=(0.5, -0.2, -0.05))
        with pytest.raises(ValidationError):
            NodeFunctionSpec("custom_polynomial", poly_coeffs=(0.5, 0.2))
        with pytest.raises(ValidationError):
            NodeFunctionSpec("custom_polynomial", poly_coeffs=(0.5, 0.0, 0.0))
        with pytest.raises(ValidationError):
            NodeFunctionSpec("custom_polynomial", poly_coeffs=(0.5,))

    def test_range_limit_positive(self):
        with pytest.raises(ValidationError):
            NodeFunctionSpec("quadratic", range_limit=0.0)

    def test_numeric_decrease_check(self):
        validate_decreasing(NodeFunctionSpec("quadratic", alpha=1.2), r_max=15.0)
        validate_decreasing(NodeFunctionSpec("power", R_power=2.0), r_max=15.0)
        with pytest.raises(ValidationError):
            validate_decreasing(NodeFunctionSpec("quadratic"), r_max=-1.0)


class TestMetric:
    def test_identity_reproduces_euclidean_exactly(self):
        plain = NodeFunctionSpec("quadratic", alpha=1.3)
        with_id = NodeFunctionSpec("quadratic", alpha=1.3, metric=Metric2x2.identity())
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = tuple(rng.uniform(0, 10, 2))
            q = tuple(rng.uniform(0, 10, 2))
            assert effectiveness(plain, p, q) == effectiveness(with_id, p, q)

    def test_from_axes_identity(self):
        m = Metric2x2.from_axes(1.0, 1.0, 1.0, 0.7)
        L = np.array(m.L)
        assert np.allclose(L, np.eye(2), atol=1e-15)

    def test_anisotropic_distance(self):
        # semi-axis a = 2 along x halves the x-distance
        m = Metric2x2.from_axes(2.0, 1.0, 1.0, 0.0)
        spec = NodeFunctionSpec("standard", metric=m)
        assert effectiveness(spec, ORIGIN, (2.0, 0.0)) == pytest.approx(-1.0)
        assert effectiveness(spec, ORIGIN, (0.0, 2.0)) == pytest.approx(-2.0)

    def test_rotation_moves_preferred_axis(self):
        m = Metric2x2.from_axes(2.0, 1.0, 1.0, math.pi / 2)
        spec = NodeFunctionSpec("standard", metric=m)
        assert effectiveness(spec, ORIGIN, (0.0, 2.0)) == pytest.approx(-1.0)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError):
            Metric2x2(((1.0, 0.5), (0.2, 1.0)))

    def test_not_positive_definite_rejected(self):
        with pytest.raises(ValidationError):
            Metric2x2(((1.0, 2.0), (2.0, 1.0)))
        with pytest.raises(ValidationError):
            Metric2x2(((-1.0, 0.0), (0.0, 1.0)))


class TestEffectiveness:
    def test_quadratic_value(self):
        spec = NodeFunctionSpec("quadratic", alpha=1.5)
        assert effectiveness(spec, ORIGIN, at_r(2.0)) == pytest.approx(-6.0)

    def test_standard_at_zero(self):
        assert effectiveness(NodeFunctionSpec("standard"), ORIGIN, ORIGIN) == 0.0

    def test_power_vanishes_at_footprint_rim(self):
        spec = NodeFunctionSpec("power", R_power=2.0)
        assert effectiveness(spec, ORIGIN, at_r(2.0)) == pytest.approx(0.0)
        assert effectiveness(spec, ORIGIN, at_r(1.0)) == pytest.approx(3.0)

    def test_weighted_linear(self):
        spec = NodeFunctionSpec("weighted_linear", alpha=2.0, d_add=1.0)
        assert effectiveness(spec, ORIGIN, at_r(4.0)) == pytest.approx(-9.0)

    def test_saturation_flat_beyond_cutoff(self):
        spec = NodeFunctionSpec("quadratic", range_limit=3.0)
        assert effectiveness(spec, ORIGIN, at_r(5.0)) == effectiveness(spec, ORIGIN, at_r(3.0))
        assert effectiveness(spec, ORIGIN, at_r(2.0)) == pytest.approx(-4.0)

    @pytest.mark.parametrize(
        "spec",
        [
            NodeFunctionSpec("standard"),
            NodeFunctionSpec("weighted_linear", alpha=2.0, d_add=1.0),
            NodeFunctionSpec("quadratic", alpha=1.3),
            NodeFunctionSpec("power", R_power=2.0),
            NodeFunctionSpec("custom_polynomial", poly_coeffs=(0.5, -0.2, -0.05)),
        ],
        ids=lambda s: s.family,
    )
    def test_strictly_decreasing_on_samples(self, spec):
        r = np.linspace(0.0, 14.0, 400)
        vals = np.array([effectiveness(spec, ORIGIN, at_r(x)) for x in r])
        assert np.all(np.diff(vals) < 0.0)

    def test_identical_specs_identical_values(self):
        a = NodeFunctionSpec("quadratic", alpha=1.25)
        b = NodeFunctionSpec("quadratic", alpha=1.25)
        assert a == b
        q = (3.3, 4.7)
        assert effectiveness(a, ORIGIN, q) == effectiveness(b, ORIGIN, q)


class TestSlope:
    def test_quadratic_constant(self):
        spec = NodeFunctionSpec("quadratic", alpha=1.25)
        for r in (0.0, 0.5, 4.0):
            assert effectiveness_slope_sq(spec, ORIGIN, at_r(r)) == pytest.approx(-1.25)

    def test_weighted_linear_value(self):
        spec = NodeFunctionSpec("weighted_linear", alpha=2.0, d_add=1.0)
        assert effectiveness_slope_sq(spec, ORIGIN, at_r(4.0)) == pytest.approx(-0.25)

    def test_saturated_region_flat(self):
        spec = NodeFunctionSpec("quadratic", range_limit=3.0)
        assert effectiveness_slope_sq(spec, ORIGIN, at_r(4.0)) == 0.0

    @pytest.mark.parametrize("family", ["standard", "weighted_linear"])
    def test_singular_at_zero(self, family):
        kwargs = {"d_add": 1.0} if family == "weighted_linear" else {}
        spec = NodeFunctionSpec(family, **kwargs)
        with pytest.raises(SingularityError):
            effectiveness_slope_sq(spec, ORIGIN, ORIGIN)

    @pytest.mark.parametrize(
        "spec",
        [
            NodeFunctionSpec("standard"),
            NodeFunctionSpec("weighted_linear", alpha=2.0, d_add=1.0),
            NodeFunctionSpec("quadratic", alpha=1.3),
            NodeFunctionSpec("power", R_power=2.0),
            NodeFunctionSpec("custom_polynomial", poly_coeffs=(0.5, -0.2, -0.05)),
        ],
        ids=lambda s: s.family,
    )
    @pytest.mark.parametrize("r", [0.5, 1.0, 3.0, 7.0])
    def test_matches_finite_differences_in_squared_distance(self, spec, r):
        s = r * r
        ds = 1e-5 * max(1.0, s)
        f_hi = effectiveness(spec, ORIGIN, at_r(math.sqrt(s + ds)))
        f_lo = effectiveness(spec, ORIGIN, at_r(math.sqrt(s - ds)))
        fd = (f_hi - f_lo) / (2.0 * ds)
        analytic = effectiveness_slope_sq(spec, ORIGIN, at_r(r))
        assert analytic == pytest.approx(fd, rel=1e-6)


class TestRimShift:
    def test_shift_values(self):
        spec = NodeFunctionSpec("quadratic", range_limit=6.0)
        hat = rim_shifted(spec)
        assert effectiveness(hat, ORIGIN, at_r(6.0)) == pytest.approx(0.0)
        assert effectiveness(hat, ORIGIN, at_r(0.0)) == pytest.approx(36.0)
        assert effectiveness(hat, ORIGIN, at_r(10.0)) == pytest.approx(0.0)

    def test_slope_unchanged(self):
        spec = NodeFunctionSpec("quadratic", alpha=1.3, range_limit=6.0)
        hat = rim_shifted(spec)
        for r in (0.5, 3.0, 5.9, 7.0):
            assert effectiveness_slope_sq(hat, ORIGIN, at_r(r)) == effectiveness_slope_sq(
                spec, ORIGIN, at_r(r)
            )

    def test_idempotent(self):
        spec = NodeFunctionSpec("quadratic", range_limit=6.0)
        assert rim_shifted(rim_shifted(spec)) == rim_shifted(spec)

    def test_requires_range_limit(self):
        with pytest.raises(ValidationError):
            rim_shifted(NodeFunctionSpec("quadratic"))


class TestCutoffEquality:
    def test_anchored_radii_pass(self):
        specs = [
            NodeFunctionSpec("quadratic", alpha=a, range_limit=4.0 / math.sqrt(a))
            for a in (1.0, 1.25, 0.8)
        ]
        assert check_cutoff_equality(specs) == pytest.approx(-16.0)

    def test_mismatch_rejected(self):
        specs = [
            NodeFunctionSpec("quadratic", alpha=1.0, range_limit=4.0),
            NodeFunctionSpec("quadratic", alpha=2.0, range_limit=4.0),
        ]
        with pytest.raises(ValidationError, match="cutoff"):
            check_cutoff_equality(specs)

    def test_missing_range_limit_rejected(self):
        with pytest.raises(ValidationError, match="range_limit"):
            check_cutoff_equality([NodeFunctionSpec("quadratic")])
