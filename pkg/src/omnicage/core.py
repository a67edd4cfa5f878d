"""Shared value types, frames and angle conventions.

All angles are radians. World-frame headings are kept in ``[0, 2*pi)``;
angular errors are kept in ``(-pi, pi]``. The structure frame has its
origin at the unweighted centroid of the module centres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, FormationSizeError, ParameterError

TWO_PI = 2.0 * math.pi

#: Centroid tolerance for a formation to count as recentred.
CENTROID_TOL = 1e-9


def wrap_to_2pi(angle: float) -> float:
    """Wrap an angle into ``[0, 2*pi)``."""
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if a >= TWO_PI:
        a = 0.0
    return a


def wrap_to_pi(angle: float) -> float:
    """Wrap an angle into ``(-pi, pi]``."""
    a = wrap_to_2pi(angle)
    if a > math.pi:
        a -= TWO_PI
    return a


def wrap_array_2pi(angles) -> np.ndarray:
    a = np.mod(np.asarray(angles, dtype=float), TWO_PI)
    a[a >= TWO_PI] = 0.0
    return a


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Pose2D:
    """Planar pose in the world frame. ``theta`` is normalised on construction."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_to_2pi(float(self.theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


class StructureTwist(NamedTuple):
    """Planar rigid-body velocity ``(v_sx, v_sy, omega_s)`` in m/s, m/s, rad/s."""

    v_sx: float
    v_sy: float
    omega_s: float

    def as_array(self) -> np.ndarray:
        return np.array([self.v_sx, self.v_sy, self.omega_s], dtype=float)

    @classmethod
    def from_array(cls, v) -> "StructureTwist":
        v = np.asarray(v, dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise ConfigurationError(f"twist must be 3 finite numbers, got {v!r}")
        return cls(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class ModuleSpec:
    """Physical parameters of one module. Defaults are the prototype values."""

    contour_circumradius: float = 0.050
    wheel_radius: float = 0.028
    max_wheel_speed: float = 0.073 / 0.028
    mass: float = 0.253
    n_faces: int = 24

    def __post_init__(self):
        for name in ("contour_circumradius", "wheel_radius", "max_wheel_speed", "mass"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be strictly positive, got {value}")
        if self.n_faces < 3 or self.n_faces % 2:
            raise ParameterError(f"n_faces must be even and >= 3, got {self.n_faces}")

    @property
    def max_linear_speed(self) -> float:
        return self.max_wheel_speed * self.wheel_radius

    @property
    def apothem(self) -> float:
        return self.contour_circumradius * math.cos(math.pi / self.n_faces)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FormationConfiguration:
    """Module centres in the structure frame plus the docking topology.

    ``docking_edges`` holds ``(module_a, face_a, module_b, face_b)`` tuples.
    Use :func:`recentre_formation` to build one from arbitrary points.
    """

    positions: np.ndarray
    docking_edges: tuple = field(default=())

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ConfigurationError(f"positions must be an (n, 2) array, got shape {pos.shape}")
        if pos.shape[0] < 3:
            raise FormationSizeError(f"a structure needs n >= 3 modules, got {pos.shape[0]}")
        if not np.all(np.isfinite(pos)):
            raise ConfigurationError("positions must be finite")
        centroid = pos.mean(axis=0)
        if np.max(np.abs(centroid)) > CENTROID_TOL:
            raise ConfigurationError(
                f"formation centroid {centroid} is not at the origin; use recentre_formation"
            )
        edges = tuple(tuple(int(v) for v in e) for e in self.docking_edges)
        for e in edges:
            if len(e) != 4:
                raise ConfigurationError(f"docking edge must have 4 entries, got {e}")
            if not (0 <= e[0] < len(pos) and 0 <= e[2] < len(pos)) or e[0] == e[2]:
                raise ConfigurationError(f"docking edge {e} references invalid modules")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "docking_edges", edges)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FormationConfiguration):
            return NotImplemented
        return (
            np.array_equal(self.positions, other.positions)
            and self.docking_edges == other.docking_edges
        )

    def __hash__(self):
        return hash((self.positions.tobytes(), self.docking_edges))

    def rotated(self, phi: float) -> "FormationConfiguration":
        """The same formation rigidly rotated by ``phi`` about its centroid."""
        return FormationConfiguration(self.positions @ rotation(phi).T, self.docking_edges)


@dataclass(frozen=True, eq=False)
class HeadingConfiguration:
    """Wheel heading of every module in the structure frame, wrapped to ``[0, 2*pi)``."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ConfigurationError("heading angles must be finite")
        object.__setattr__(self, "angles", _frozen(wrap_array_2pi(a)))

    @property
    def n(self) -> int:
        return self.angles.shape[0]

    def __eq__(self, other):
        if not isinstance(other, HeadingConfiguration):
            return NotImplemented
        return np.array_equal(self.angles, other.angles)

    def __hash__(self):
        return hash(self.angles.tobytes())

    @classmethod
    def from_degrees(cls, degrees: Sequence[float]) -> "HeadingConfiguration":
        return cls(np.radians(np.asarray(degrees, dtype=float)))


def world_from_structure(structure_pose: Pose2D, local_point) -> tuple[float, float]:
    """Map a structure-frame point into the world frame."""
    px, py = float(local_point[0]), float(local_point[1])
    c, s = math.cos(structure_pose.theta), math.sin(structure_pose.theta)
    return (structure_pose.x + c * px - s * py, structure_pose.y + s * px + c * py)


def recentre_formation(positions, docking_edges=()) -> FormationConfiguration:
    """Shift module centres so their centroid is exactly the origin."""
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ConfigurationError(f"positions must be an (n, 2) array, got shape {pos.shape}")
    if pos.shape[0] < 3:
        raise FormationSizeError(f"a structure needs n >= 3 modules, got {pos.shape[0]}")
    centred = pos - pos.mean(axis=0)
    # one extra pass removes the rounding residue of the first subtraction
    centred = centred - centred.mean(axis=0)
    return FormationConfiguration(centred, docking_edges)
