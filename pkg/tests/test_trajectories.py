import math

import numpy as np
import pytest

from omnicage.core import wrap_to_pi
from omnicage.errors import ConfigurationError
from omnicage.trajectories import make_trajectory, quintic, reference_trajectory

CASES = [
    ("circle", {"radius": 0.25, "speed": 0.05}),
    ("circle", {"radius": 0.3, "speed": 0.02, "heading": "fixed", "heading0": 1.0}),
    ("line", {"velocity": [0.03, -0.01], "heading": 0.5}),
    ("point_to_point", {"goal": [0.4, 0.2, 0.5], "move_time": 20.0}),
    ("s_curve", {"bearing": 1.2, "amplitude": 0.12, "heading_amplitude": 0.5}),
    ("rounded_rectangle", {"heading_amplitude": 0.3}),
]


def test_circle_analytic():
    w = 0.05 / 0.25
    for t in (0.0, 3.0, 17.5):
        pose, twist = reference_trajectory("circle", {"radius": 0.25, "speed": 0.05}, t)
        assert (pose.x, pose.y) == pytest.approx((0.25 * math.cos(w * t), 0.25 * math.sin(w * t)))
        assert wrap_to_pi(pose.theta - (w * t + math.pi / 2)) == pytest.approx(0.0, abs=1e-12)
        assert math.hypot(twist[0], twist[1]) == pytest.approx(0.25 * w)


def test_line_constant_twist():
    params = {"velocity": [0.02, 0.01], "heading": 0.3}
    twists = {reference_trajectory("line", params, t)[1] for t in (0.0, 1.0, 50.0)}
    assert twists == {(0.02, 0.01, 0.0)}
    assert reference_trajectory("line", params, 7.0)[0].theta == pytest.approx(0.3)


@pytest.mark.parametrize("kind, params", CASES)
def test_finite_difference_matches_twist(kind, params):
    traj = make_trajectory(kind, params)
    h = 1e-6
    for t in np.linspace(0.5, 39.5, 23):
        p0, v = traj.sample(t)
        p1, _ = traj.sample(t + h)
        fd = np.array([(p1.x - p0.x) / h, (p1.y - p0.y) / h, wrap_to_pi(p1.theta - p0.theta) / h])
        np.testing.assert_allclose(fd, v, atol=1e-5)


def test_point_to_point_rests_at_goal():
    traj = make_trajectory("point_to_point", {"goal": [0.4, 0.2, 0.5], "move_time": 10.0})
    pose, twist = traj.sample(25.0)
    assert (pose.x, pose.y, pose.theta) == pytest.approx((0.4, 0.2, 0.5))
    assert twist == (0.0, 0.0, 0.0)


def test_quintic_endpoints():
    assert quintic(0.0) == (0.0, 0.0)
    assert quintic(1.0) == (1.0, 0.0)
    assert quintic(0.5)[0] == pytest.approx(0.5)


def test_unknown_kind_and_key():
    with pytest.raises(ConfigurationError):
        make_trajectory("spiral", {})
    with pytest.raises(ConfigurationError):
        make_trajectory("circle", {"radius": 0.2, "colour": "red"})


def test_describe_round_trip():
    for kind, params in CASES:
        traj = make_trajectory(kind, params)
        assert make_trajectory(kind, traj.describe()) == traj
