"""Reference trajectory generators.

Every generator returns a world-frame pose and its analytic time derivative
``(x_dot, y_dot, theta_dot)``. Finite-duration generators hold their final
pose with zero velocity afterwards.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .core import Pose2D, StructureTwist, wrap_to_pi
from .errors import ConfigurationError


def quintic(tau: float) -> tuple[float, float]:
    """Rest-to-rest time scaling ``s(tau)`` on ``[0, 1]`` and its derivative."""
    if tau <= 0.0:
        return 0.0, 0.0
    if tau >= 1.0:
        return 1.0, 0.0
    s = tau**3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)
    ds = 30.0 * tau * tau * (1.0 - tau) ** 2
    return s, ds


class Trajectory:
    kind = ""

    def sample(self, t: float) -> tuple[Pose2D, StructureTwist]:
        raise NotImplementedError

    @property
    def duration(self) -> float | None:
        return None

    def describe(self) -> dict:
        out = {"kind": self.kind}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class Circle(Trajectory):
    """Constant-speed circle; heading either tangent to the path or fixed."""

    radius: float = 0.25
    speed: float = 0.05
    center: tuple = (0.0, 0.0)
    phase: float = 0.0
    heading: str = "tangent"
    heading0: float = 0.0
    kind = "circle"

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError("circle radius must be positive")
        if self.heading not in ("tangent", "fixed"):
            raise ConfigurationError("circle heading must be 'tangent' or 'fixed'")

    @property
    def rate(self) -> float:
        return self.speed / self.radius

    def sample(self, t):
        w = self.rate
        phi = self.phase + w * t
        cx, cy = self.center
        x = cx + self.radius * math.cos(phi)
        y = cy + self.radius * math.sin(phi)
        vx = -self.radius * w * math.sin(phi)
        vy = self.radius * w * math.cos(phi)
        if self.heading == "tangent":
            theta = phi + math.copysign(math.pi / 2.0, w) if w else phi + math.pi / 2.0
            theta_dot = w
        else:
            theta, theta_dot = self.heading0, 0.0
        return Pose2D(x, y, theta), StructureTwist(vx, vy, theta_dot)


@dataclass(frozen=True)
class Line(Trajectory):
    start: tuple = (0.0, 0.0)
    velocity: tuple = (0.05, 0.0)
    heading: float = 0.0
    kind = "line"

    def sample(self, t):
        vx, vy = self.velocity
        return (
            Pose2D(self.start[0] + vx * t, self.start[1] + vy * t, self.heading),
            StructureTwist(float(vx), float(vy), 0.0),
        )


@dataclass(frozen=True)
class PointToPoint(Trajectory):
    """Straight rest-to-rest move with quintic timing; heading turns the short way."""

    start: tuple = (0.0, 0.0, 0.0)
    goal: tuple = (0.3, 0.0, 0.0)
    move_time: float = 10.0
    kind = "point_to_point"

    def __post_init__(self):
        if not self.move_time > 0:
            raise ConfigurationError("move_time must be positive")

    @property
    def duration(self):
        return self.move_time

    def sample(self, t):
        s, ds = quintic(t / self.move_time)
        ds /= self.move_time
        d = np.array(
            [
                self.goal[0] - self.start[0],
                self.goal[1] - self.start[1],
                wrap_to_pi(self.goal[2] - self.start[2]),
            ]
        )
        pose = Pose2D(self.start[0] + s * d[0], self.start[1] + s * d[1], self.start[2] + s * d[2])
        return pose, StructureTwist(ds * d[0], ds * d[1], ds * d[2])


@dataclass(frozen=True)
class SCurve(Trajectory):
    """Sinusoidal weave along ``bearing`` with a heading swing, rest to rest."""

    start: tuple = (0.0, 0.0)
    bearing: float = 0.0
    length: float = 0.6
    amplitude: float = 0.1
    cycles: float = 1.0
    heading0: float = 0.0
    heading_amplitude: float = 0.0
    move_time: float = 30.0
    kind = "s_curve"

    def __post_init__(self):
        if not (self.move_time > 0 and self.length > 0):
            raise ConfigurationError("s_curve needs positive length and move_time")

    @property
    def duration(self):
        return self.move_time

    def sample(self, t):
        s, ds = quintic(t / self.move_time)
        ds /= self.move_time
        ux, uy = math.cos(self.bearing), math.sin(self.bearing)
        nx, ny = -uy, ux
        k = 2.0 * math.pi * self.cycles
        along, d_along = self.length * s, self.length * ds
        lat = self.amplitude * math.sin(k * s)
        d_lat = self.amplitude * k * math.cos(k * s) * ds
        theta = self.heading0 + self.heading_amplitude * math.sin(math.pi * s)
        d_theta = self.heading_amplitude * math.pi * math.cos(math.pi * s) * ds
        pose = Pose2D(
            self.start[0] + along * ux + lat * nx, self.start[1] + along * uy + lat * ny, theta
        )
        return pose, StructureTwist(d_along * ux + d_lat * nx, d_along * uy + d_lat * ny, d_theta)


@dataclass(frozen=True)
class RoundedRectangle(Trajectory):
    """Constant-speed loop around a rectangle with filleted corners.

    Starts at the left end of the bottom edge heading +x, counter-clockwise.
    The heading oscillates sinusoidally about ``heading0``.
    """

    width: float = 0.6
    height: float = 0.4
    corner_radius: float = 0.1
    speed: float = 0.03
    center: tuple = (0.0, 0.0)
    heading0: float = 0.0
    heading_amplitude: float = 0.0
    heading_period: float = 40.0
    kind = "rounded_rectangle"

    def __post_init__(self):
        r = self.corner_radius
        if not (r > 0 and self.width >= 2 * r and self.height >= 2 * r and self.speed > 0):
            raise ConfigurationError("rounded_rectangle needs width, height >= 2 * corner_radius")
        if not self.heading_period > 0:
            raise ConfigurationError("heading_period must be positive")

    def _segments(self):
        r = self.corner_radius
        cx, cy = self.center
        hw, hh = self.width / 2.0, self.height / 2.0
        sx, sy = self.width - 2 * r, self.height - 2 * r
        return [
            ("line", (cx - hw + r, cy - hh), (1.0, 0.0), sx),
            ("arc", (cx + hw - r, cy - hh + r), -math.pi / 2, r * math.pi / 2),
            ("line", (cx + hw, cy - hh + r), (0.0, 1.0), sy),
            ("arc", (cx + hw - r, cy + hh - r), 0.0, r * math.pi / 2),
            ("line", (cx + hw - r, cy + hh), (-1.0, 0.0), sx),
            ("arc", (cx - hw + r, cy + hh - r), math.pi / 2, r * math.pi / 2),
            ("line", (cx - hw, cy + hh - r), (0.0, -1.0), sy),
            ("arc", (cx - hw + r, cy - hh + r), math.pi, r * math.pi / 2),
        ]

    @property
    def perimeter(self) -> float:
        return sum(seg[3] for seg in self._segments())

    def sample(self, t):
        s = math.fmod(self.speed * t, self.perimeter)
        if s < 0:
            s += self.perimeter
        r = self.corner_radius
        for kind, origin, param, length in self._segments():
            if s <= length or length == 0 and s == 0:
                break
            s -= length
        if kind == "line":
            dx, dy = param
            x, y = origin[0] + s * dx, origin[1] + s * dy
            vx, vy = self.speed * dx, self.speed * dy
        else:
            phi = param + s / r
            x, y = origin[0] + r * math.cos(phi), origin[1] + r * math.sin(phi)
            vx, vy = -self.speed * math.sin(phi), self.speed * math.cos(phi)
        w = 2.0 * math.pi / self.heading_period
        theta = self.heading0 + self.heading_amplitude * math.sin(w * t)
        theta_dot = self.heading_amplitude * w * math.cos(w * t)
        return Pose2D(x, y, theta), StructureTwist(vx, vy, theta_dot)


TRAJECTORIES: dict[str, type[Trajectory]] = {
    cls.kind: cls for cls in (Circle, Line, PointToPoint, SCurve, RoundedRectangle)
}


def make_trajectory(kind: str, params: dict | None = None) -> Trajectory:
    try:
        cls = TRAJECTORIES[kind]
    except KeyError:
        raise ConfigurationError(
            f"unknown trajectory kind {kind!r}; expected one of {sorted(TRAJECTORIES)}"
        ) from None
    params = dict(params or {})
    params.pop("kind", None)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(params) - names
    if unknown:
        raise ConfigurationError(f"unknown {kind} parameters: {sorted(unknown)}")
    clean = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
    return cls(**clean)


def reference_trajectory(kind: str, params: dict | None, t: float):
    """Reference pose and feedforward velocity of trajectory ``kind`` at time ``t``."""
    return make_trajectory(kind, params).sample(t)
