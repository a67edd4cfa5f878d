"""Hierarchical tracking control.

Before docking each module runs a nonholonomic kinematic tracking law with
errors expressed in its own body frame. After docking the structure runs a
per-axis PI law on world-frame errors with a feedforward reference twist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .core import Pose2D, StructureTwist, wrap_to_2pi, wrap_to_pi
from .errors import ParameterError


def _require_positive(obj, names):
    for name in names:
        value = getattr(obj, name)
        if not (math.isfinite(value) and value > 0):
            raise ParameterError(f"{name} must be strictly positive, got {value}")


@dataclass(frozen=True)
class ModuleGains:
    k_s1: float = 1.0
    k_s2: float = 8.0
    k_s3: float = 2.0

    def __post_init__(self):
        _require_positive(self, ("k_s1", "k_s2", "k_s3"))


@dataclass(frozen=True)
class StructureGains:
    k_x1: float = 1.5
    k_x2: float = 0.1
    k_y1: float = 1.5
    k_y2: float = 0.1
    k_theta1: float = 2.0
    k_theta2: float = 0.1
    integral_limit: float = 0.5

    def __post_init__(self):
        _require_positive(
            self, ("k_x1", "k_x2", "k_y1", "k_y2", "k_theta1", "k_theta2", "integral_limit")
        )


class TrackingError(NamedTuple):
    e_x: float
    e_y: float
    e_theta: float


@dataclass(frozen=True)
class IntegratorState:
    accumulated: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))


def tracking_error(pose: Pose2D, ref_pose: Pose2D) -> TrackingError:
    """World-frame error ``ref - pose`` with the heading error wrapped."""
    return TrackingError(
        ref_pose.x - pose.x, ref_pose.y - pose.y, wrap_to_pi(ref_pose.theta - pose.theta)
    )


def body_frame_error(pose: Pose2D, ref_pose: Pose2D) -> TrackingError:
    """Tracking error rotated into the module frame: ``e_x`` along the heading."""
    dx, dy, e_theta = tracking_error(pose, ref_pose)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return TrackingError(c * dx + s * dy, -s * dx + c * dy, e_theta)


def module_law(error: TrackingError, v_r: float, w_r: float, gains: ModuleGains):
    """Desired linear speed and turn rate for a body-frame error."""
    v_d = v_r * math.cos(error.e_theta) + gains.k_s1 * error.e_x
    w_d = w_r + gains.k_s2 * v_r * error.e_y + gains.k_s3 * v_r * math.sin(error.e_theta)
    return v_d, w_d


def module_control_step(
    pose: Pose2D,
    ref_pose: Pose2D,
    ref_vel,
    gains: ModuleGains,
    dt: float,
    heading_base: float | None = None,
) -> tuple[float, float, float]:
    """One module-controller update.

    Returns ``(v_d, theta_dot_d, theta_d)`` where ``theta_d`` is the next
    heading command obtained by one explicit integration step from
    ``heading_base`` (the measured heading unless given). Under command
    delay the caller passes its previous heading command instead, since the
    measured heading lags the commands still in flight.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    v_r, w_r = ref_vel
    v_d, w_d = module_law(body_frame_error(pose, ref_pose), float(v_r), float(w_r), gains)
    base = pose.theta if heading_base is None else heading_base
    return v_d, w_d, wrap_to_2pi(base + w_d * dt)


def structure_law(
    error: TrackingError,
    integral: tuple[float, float, float],
    ref_vel,
    gains: StructureGains,
) -> StructureTwist:
    ix, iy, it = integral
    e_theta = wrap_to_pi(error.e_theta)
    return StructureTwist(
        ref_vel[0] + gains.k_x1 * error.e_x + gains.k_x2 * ix,
        ref_vel[1] + gains.k_y1 * error.e_y + gains.k_y2 * iy,
        ref_vel[2] + gains.k_theta1 * e_theta + gains.k_theta2 * it,
    )


def integrate_error(
    integ: IntegratorState, error: TrackingError, dt: float, limit: float
) -> IntegratorState:
    e = np.array([error.e_x, error.e_y, wrap_to_pi(error.e_theta)])
    acc = np.clip(np.asarray(integ.accumulated) + e * dt, -limit, limit)
    return replace(integ, accumulated=(float(acc[0]), float(acc[1]), float(acc[2])))


def structure_control_step(
    pose: Pose2D,
    ref_pose: Pose2D,
    ref_vel: StructureTwist,
    gains: StructureGains,
    integ: IntegratorState,
    dt: float,
) -> tuple[StructureTwist, IntegratorState]:
    """PI tracking update in the world frame.

    The integral term uses the errors accumulated over previous steps; the
    current error is folded in afterwards and the result clamped.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    error = tracking_error(pose, ref_pose)
    twist = structure_law(error, integ.accumulated, ref_vel, gains)
    return twist, integrate_error(integ, error, dt, gains.integral_limit)


def saturate_wheels(omegas, omega_max: float) -> np.ndarray:
    """Scale every wheel speed by the same factor so none exceeds ``omega_max``."""
    if not omega_max > 0:
        raise ParameterError("omega_max must be positive")
    w = np.asarray(omegas, dtype=float)
    peak = float(np.max(np.abs(w))) if w.size else 0.0
    if peak <= omega_max:
        return w.copy()
    out = w * (omega_max / peak)
    # rounding can leave the peak one ulp above the limit
    return np.clip(out, -omega_max, omega_max)
