import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omnicage.core import (
    FormationConfiguration,
    HeadingConfiguration,
    ModuleSpec,
    Pose2D,
    StructureTwist,
    recentre_formation,
    world_from_structure,
    wrap_to_2pi,
    wrap_to_pi,
)
from omnicage.docking import DockingSpec, hexagon_ring
from omnicage.errors import ConfigurationError, FormationSizeError, ParameterError

finite = st.floats(-1e3, 1e3, allow_nan=False)
angles = st.floats(-50.0, 50.0, allow_nan=False)


@pytest.mark.parametrize(
    "pose, point, expected",
    [
        ((0, 0, 0), (1, 0), (1, 0)),
        ((0, 0, math.pi / 2), (1, 0), (0, 1)),
        ((2, 3, math.pi), (1, 1), (1, 2)),
    ],
)
def test_world_from_structure_examples(pose, point, expected):
    assert world_from_structure(Pose2D(*pose), point) == pytest.approx(expected, abs=1e-12)


def test_recentre_line():
    f = recentre_formation([(1, 0), (2, 0), (3, 0)])
    np.testing.assert_allclose(f.positions, [(-1, 0), (0, 0), (1, 0)], atol=1e-15)


def test_recentre_square():
    f = recentre_formation([(0, 0), (0, 2), (2, 0), (2, 2)])
    np.testing.assert_allclose(f.positions, [(-1, -1), (-1, 1), (1, -1), (1, 1)], atol=1e-15)


def test_recentre_centred_hexagon_is_fixed_point():
    hexagon = hexagon_ring(DockingSpec())
    again = recentre_formation(hexagon.positions, hexagon.docking_edges)
    np.testing.assert_allclose(again.positions, hexagon.positions, atol=1e-15)


def test_recentre_needs_three_modules():
    with pytest.raises(FormationSizeError):
        recentre_formation([(0, 0), (1, 0)])


def test_formation_rejects_off_centre_and_small():
    with pytest.raises(ConfigurationError):
        FormationConfiguration(np.array([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]))
    with pytest.raises(FormationSizeError):
        FormationConfiguration(np.array([(-1.0, 0.0), (1.0, 0.0)]))


def test_formation_positions_are_read_only():
    f = recentre_formation([(1, 0), (2, 0), (3, 0)])
    with pytest.raises(ValueError):
        f.positions[0, 0] = 5.0


def test_pose_theta_normalised():
    assert Pose2D(0, 0, -math.pi / 2).theta == pytest.approx(1.5 * math.pi)
    assert Pose2D(0, 0, 4 * math.pi).theta == 0.0


def test_heading_configuration_wraps():
    h = HeadingConfiguration.from_degrees([0, 370, -90])
    np.testing.assert_allclose(h.angles, np.radians([0, 10, 270]), atol=1e-12)
    assert np.all((h.angles >= 0) & (h.angles < 2 * math.pi))


def test_module_spec_defaults_and_validation():
    spec = ModuleSpec()
    assert spec.max_wheel_speed == pytest.approx(0.073 / 0.028)
    assert spec.max_linear_speed == pytest.approx(0.073)
    with pytest.raises(ParameterError):
        ModuleSpec(wheel_radius=0.0)
    with pytest.raises(ParameterError):
        ModuleSpec(n_faces=23)


def test_structure_twist_rejects_nonfinite():
    with pytest.raises((ValueError, ParameterError)):
        StructureTwist.from_array([0.0, math.nan, 0.0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=10))
def test_recentre_idempotent(points):
    once = recentre_formation(points)
    twice = recentre_formation(once.positions)
    np.testing.assert_allclose(twice.positions, once.positions, rtol=0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(finite, finite, angles, st.lists(st.tuples(finite, finite), min_size=2, max_size=6))
def test_world_from_structure_isometry(x, y, theta, points):
    pose = Pose2D(x, y, theta)
    world = [np.array(world_from_structure(pose, p)) for p in points]
    for i in range(len(points)):
        for j in range(i):
            d_local = math.dist(points[i], points[j])
            d_world = float(np.linalg.norm(world[i] - world[j]))
            assert d_world == pytest.approx(d_local, rel=1e-12, abs=1e-12 * (1 + abs(x) + abs(y)))


@settings(max_examples=300, deadline=None)
@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_ranges(a):
    w = wrap_to_2pi(a)
    assert 0.0 <= w < 2 * math.pi
    p = wrap_to_pi(a)
    assert -math.pi < p <= math.pi
    assert math.cos(p) == pytest.approx(math.cos(a), abs=1e-9)
