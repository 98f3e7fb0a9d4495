import math

import numpy as np
import pytest

from lorot.errors import NotCausalPair
from lorot.spacetime import (
    CausalClass,
    Cylinder,
    ExtendedCost,
    Minkowski,
    model_from_config,
)

MK1 = Minkowski(1)
MK2 = Minkowski(2)
CYL = Cylinder(5.0)


def pt(model, *coords):
    return model.make_point(coords[:-1], coords[-1])


def winding_cost_oracle(circumference, x, y):
    """Minimal cost over explicit winding representatives of the displacement."""
    dtau = y.time - x.time
    best = math.inf
    for k in range(-2, 3):
        dth = abs(y.spatial[0] - x.spatial[0] + k * circumference)
        if dtau >= dth:
            best = min(best, -math.sqrt(dtau * dtau - dth * dth))
    return best


class TestCost:
    def test_pure_time_displacement(self):
        assert MK1.cost(pt(MK1, 0, 0), pt(MK1, 0, 1)).value == -1.0

    def test_null_boundary(self):
        c = MK1.cost(pt(MK1, 0, 0), pt(MK1, 1, 1))
        assert c.is_finite and c.value == 0.0

    def test_cylinder_winding_minimal(self):
        x, y = pt(CYL, 4, 0), pt(CYL, 0, 3)
        expected = winding_cost_oracle(5.0, x, y)
        assert expected == -math.sqrt(8)
        assert CYL.cost(x, y).value == pytest.approx(expected, abs=1e-15)

    def test_cylinder_matches_winding_oracle_randomly(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            x = pt(CYL, rng.uniform(0, 5), rng.uniform(-1, 1))
            y = pt(CYL, rng.uniform(0, 5), x.time + rng.uniform(0, 4))
            expected = winding_cost_oracle(5.0, x, y)
            got = CYL.cost(x, y).value
            if math.isinf(expected):
                assert math.isinf(got)
            else:
                assert got == pytest.approx(expected, abs=1e-12)

    def test_self_cost_zero(self):
        for model, p in [(MK1, pt(MK1, 0.37, -1.2)), (CYL, pt(CYL, 4.9, 2.0))]:
            c = model.cost(p, p)
            assert c.is_finite and c.value == 0.0

    def test_spacelike_infinite(self):
        assert not MK1.cost(pt(MK1, 0, 0), pt(MK1, 2, 1)).is_finite
        assert not MK1.cost(pt(MK1, 0, 0), pt(MK1, 0, -1)).is_finite

    def test_extended_cost_validation(self):
        with pytest.raises(ValueError):
            ExtendedCost(0.5)
        with pytest.raises(ValueError):
            ExtendedCost(math.nan)
        assert ExtendedCost.infinite().is_finite is False


class TestCausalClass:
    def test_examples(self):
        assert MK1.causal_class(pt(MK1, 0, 0), pt(MK1, 0, 2)) is CausalClass.CHRONOLOGICAL
        assert MK1.causal_class(pt(MK1, 0, 0), pt(MK1, 2, 1)) is CausalClass.NOT_CAUSAL
        assert MK1.causal_class(pt(MK1, 0, 0), pt(MK1, 0, 0)) is CausalClass.IDENTICAL
        assert MK1.causal_class(pt(MK1, 0, 0), pt(MK1, 1, 1)) is CausalClass.NULL

    def test_consistent_with_cost(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            x = pt(MK2, *rng.uniform(-2, 2, 3))
            y = pt(MK2, *rng.uniform(-2, 2, 3))
            cls = MK2.causal_class(x, y)
            c = MK2.cost(x, y)
            if cls is CausalClass.NOT_CAUSAL:
                assert not c.is_finite
            elif cls is CausalClass.NULL:
                assert c.value == 0.0 and x != y
            elif cls is CausalClass.IDENTICAL:
                assert c.value == 0.0 and x == y
            else:
                assert c.is_finite and c.value < 0


class TestConeMargin:
    def test_examples(self):
        assert MK1.cone_margin(pt(MK1, 0, 0), pt(MK1, 0, 1)) == 1.0
        assert MK1.cone_margin(pt(MK1, 0, 0), pt(MK1, 1, 1)) == 0.0
        assert MK1.cone_margin(pt(MK1, 0, 0), pt(MK1, 3, 1)) == -2.0

    def test_sign_matches_class(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            x = pt(MK1, rng.uniform(-2, 2), rng.uniform(-2, 2))
            y = pt(MK1, rng.uniform(-2, 2), rng.uniform(-2, 2))
            margin = MK1.cone_margin(x, y)
            cls = MK1.causal_class(x, y)
            if margin > 1e-12:
                assert cls is CausalClass.CHRONOLOGICAL
            elif margin < -1e-12:
                assert cls is CausalClass.NOT_CAUSAL
            else:
                assert cls in (CausalClass.NULL, CausalClass.IDENTICAL)


class TestGeodesic:
    def test_midpoint(self):
        g = MK1.geodesic_point(pt(MK1, 0, 0), pt(MK1, 0, 2), 0.5)
        assert g == pt(MK1, 0, 1)

    def test_null_line(self):
        g = MK1.geodesic_point(pt(MK1, 0, 0), pt(MK1, 1, 1), 0.25)
        assert g == pt(MK1, 0.25, 0.25)

    def test_cylinder_winding_chord(self):
        g = CYL.geodesic_point(pt(CYL, 4, 0), pt(CYL, 0, 3), 1 / 3)
        assert g.time == 1.0
        assert g.spatial[0] == pytest.approx((4 + 1 / 3) % 5, abs=1e-12)

    def test_endpoints_exact(self):
        rng = np.random.default_rng(5)
        for model in (MK1, MK2, CYL):
            for _ in range(100):
                d = model.spatial_dim
                x = model.make_point(rng.uniform(-2, 2, d), rng.uniform(-1, 1))
                y = model.make_point(
                    np.asarray(x.spatial) + rng.uniform(-0.5, 0.5, d),
                    x.time + rng.uniform(1, 2),
                )
                assert model.geodesic_point(x, y, 0.0) == x
                assert model.geodesic_point(x, y, 1.0) == y

    def test_time_affine(self):
        x, y = pt(MK2, 0.3, -0.4, 0.1), pt(MK2, 0.7, 0.2, 1.7)
        for t in np.linspace(0, 1, 17):
            g = MK2.geodesic_point(x, y, t)
            assert g.time == (1 - t) * x.time + t * y.time

    def test_reverse_triangle_equality_on_segments(self):
        rng = np.random.default_rng(13)
        for model in (MK1, MK2, CYL):
            d = model.spatial_dim
            for _ in range(200):
                x = model.make_point(rng.uniform(-2, 2, d), rng.uniform(-1, 1))
                y = model.make_point(
                    np.asarray(x.spatial) + rng.uniform(-0.6, 0.6, d),
                    x.time + rng.uniform(1.0, 2.0),
                )
                t = rng.uniform(0, 1)
                g = model.geodesic_point(x, y, t)
                lhs = model.cost(x, g).value + model.cost(g, y).value
                assert lhs == pytest.approx(model.cost(x, y).value, abs=1e-12)

    def test_null_segment_additivity_exact(self):
        x, y = pt(MK1, 0, 0), pt(MK1, 2, 2)
        for t in (0.25, 0.5, 0.75):
            g = MK1.geodesic_point(x, y, t)
            assert MK1.cost(x, g).value + MK1.cost(g, y).value == 0.0

    def test_not_causal_raises(self):
        with pytest.raises(NotCausalPair):
            MK1.geodesic_point(pt(MK1, 0, 0), pt(MK1, 3, 1), 0.5)

    def test_parameter_range(self):
        with pytest.raises(ValueError):
            MK1.geodesic_point(pt(MK1, 0, 0), pt(MK1, 0, 1), 1.5)


def random_causal_pair(model, rng, base=None):
    d = model.spatial_dim
    if base is None:
        base = model.make_point(rng.uniform(-2, 2, d), rng.uniform(-1, 1))
    step = rng.uniform(-1, 1, d)
    dist = float(np.linalg.norm(step if model is not CYL else
                                [CYL.wrap_delta(step[0])]))
    # mix strictly timelike and exactly null displacements
    if rng.random() < 0.2:
        dt = dist
    else:
        dt = dist + rng.uniform(0, 1.5)
    target = model.make_point(np.asarray(base.spatial) + step, base.time + dt)
    return base, target


class TestReverseTriangleInequality:
    def test_random_triples(self):
        rng = np.random.default_rng(17)
        for model in (MK1, MK2, CYL):
            for _ in range(3400):
                x, y = random_causal_pair(model, rng)
                y, z = random_causal_pair(model, rng, base=y)
                cxz = model.cost(x, z)
                assert cxz.is_finite
                assert cxz.value <= model.cost(x, y).value + model.cost(y, z).value + 1e-12


class TestTauMonotonicity:
    def test_finite_cost_implies_time_increase(self):
        rng = np.random.default_rng(19)
        for model in (MK1, MK2, CYL):
            for _ in range(1000):
                d = model.spatial_dim
                x = model.make_point(rng.uniform(-2, 2, d), rng.uniform(-2, 2))
                y = model.make_point(rng.uniform(-2, 2, d), rng.uniform(-2, 2))
                if x != y and model.cost(x, y).is_finite:
                    assert y.time > x.time


class TestCylinderConventions:
    def test_shift_by_circumference_invariant(self):
        x = pt(CYL, 1.25, 0.0)
        x_shifted = CYL.make_point([1.25 + 5.0], 0.0)
        assert x == x_shifted
        y = pt(CYL, 3.5, 4.0)
        assert CYL.cost(x, y).value == CYL.cost(x_shifted, y).value

    def test_normalization_range(self):
        assert CYL.make_point([-0.5], 0.0).spatial[0] == 4.5
        assert 0.0 <= CYL.make_point([7.3], 0.0).spatial[0] < 5.0

    def test_antipodal_distance(self):
        assert CYL.cone_margin(pt(CYL, 0, 0), pt(CYL, 2.5, 2.5)) == 0.0


class TestModelConfig:
    def test_roundtrip(self):
        for model in (Minkowski(3), Cylinder(7.5)):
            assert model_from_config(model.to_config()) == model

    def test_bad_configs(self):
        from lorot.errors import SchemaError

        for obj in ({}, {"kind": "klein"}, {"kind": "minkowski", "d": 0},
                    {"kind": "cylinder", "circumference": -1}):
            with pytest.raises(SchemaError):
                model_from_config(obj)

    def test_make_point_validation(self):
        with pytest.raises(ValueError):
            MK2.make_point([1.0], 0.0)
        with pytest.raises(ValueError):
            MK1.make_point([math.nan], 0.0)
