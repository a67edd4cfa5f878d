"""Velocity mapper between structure twist and wheel angular velocities.

Row ``i`` of the mapper is::

    (1/R) * [cos th_i, sin th_i, r_ix sin th_i - r_iy cos th_i]

so that ``omega = M @ V`` with ``V = (v_sx, v_sy, omega_s)`` expressed in the
structure frame. World-frame velocities must be rotated into the structure
frame before they are mapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FormationConfiguration, HeadingConfiguration, StructureTwist
from .errors import ConfigurationError, DegenerateMapperError, ParameterError

RANK_SAFETY = 16.0


@dataclass(frozen=True, eq=False)
class VelocityMapper:
    matrix: np.ndarray
    wheel_radius: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[1] != 3:
            raise ConfigurationError(f"mapper must be n x 3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ConfigurationError("mapper entries must be finite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MapperMetrics:
    rank: int
    condition_number: float
    sigma_max: float
    singular_values: tuple[float, ...] = ()


def _check_radius(R: float) -> None:
    if not (math.isfinite(R) and R > 0):
        raise ParameterError(f"wheel radius must be positive, got {R}")


def module_body_velocity(omega_i: float, theta_i: float, R: float) -> tuple[float, float]:
    """Planar velocity of a single module driven at ``omega_i`` along heading ``theta_i``."""
    _check_radius(R)
    return (omega_i * R * math.cos(theta_i), omega_i * R * math.sin(theta_i))


def module_velocity_in_structure(twist: StructureTwist, r_i, theta_i: float) -> float:
    """Speed a rigidly attached module must roll at along its heading."""
    v_sx, v_sy, w = twist
    rx, ry = float(r_i[0]), float(r_i[1])
    return (v_sx - w * ry) * math.cos(theta_i) + (v_sy + w * rx) * math.sin(theta_i)


def mapper_rows(positions: np.ndarray, angles: np.ndarray, R: float) -> np.ndarray:
    """Vectorised row construction; ``angles`` may carry leading batch axes."""
    c, s = np.cos(angles), np.sin(angles)
    lever = positions[:, 0] * s - positions[:, 1] * c
    return np.stack([c, s, lever], axis=-1) / R


def build_velocity_mapper(
    formation: FormationConfiguration, headings: HeadingConfiguration, R: float
) -> VelocityMapper:
    _check_radius(R)
    if not isinstance(formation, FormationConfiguration) or not isinstance(
        headings, HeadingConfiguration
    ):
        raise TypeError("expected a FormationConfiguration and a HeadingConfiguration")
    if formation.n != headings.n:
        raise ConfigurationError(
            f"formation has {formation.n} modules but {headings.n} headings were given"
        )
    return VelocityMapper(mapper_rows(formation.positions, headings.angles, R), float(R))


def wheels_from_twist(M: VelocityMapper, V) -> np.ndarray:
    """Wheel angular velocities ``M @ V`` (rad/s), unsaturated."""
    v = np.asarray(V, dtype=float)
    if v.shape != (3,):
        raise ConfigurationError(f"twist must have 3 components, got shape {v.shape}")
    return M.matrix @ v


def singular_values(matrix: np.ndarray) -> np.ndarray:
    return np.linalg.svd(matrix, compute_uv=False)


def numerical_rank(sv: np.ndarray, n_rows: int) -> int:
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    tol = sv[0] * n_rows * np.finfo(float).eps * RANK_SAFETY
    return int(np.count_nonzero(sv > tol))


def mapper_metrics(M: VelocityMapper | np.ndarray) -> MapperMetrics:
    m = M.matrix if isinstance(M, VelocityMapper) else np.asarray(M, dtype=float)
    sv = singular_values(m)
    rank = numerical_rank(sv, m.shape[0])
    sigma_max = float(sv[0]) if sv.size else 0.0
    cond = float(sv[0] / sv[2]) if rank >= 3 else math.inf
    return MapperMetrics(rank, cond, sigma_max, tuple(float(s) for s in sv))


def twist_from_wheels(M: VelocityMapper, omegas) -> StructureTwist:
    """Least-squares structure twist realising ``omegas`` (SVD pseudoinverse)."""
    w = np.asarray(omegas, dtype=float)
    if w.shape != (M.n,):
        raise ConfigurationError(f"expected {M.n} wheel speeds, got shape {w.shape}")
    u, sv, vt = np.linalg.svd(M.matrix, full_matrices=False)
    rank = numerical_rank(sv, M.n)
    if rank < 3:
        raise DegenerateMapperError(f"velocity mapper has rank {rank} < 3", rank=rank)
    v = vt.T @ ((u.T @ w) / sv)
    return StructureTwist(float(v[0]), float(v[1]), float(v[2]))
