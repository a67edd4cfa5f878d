"""Heading-configuration optimisation.

Minimises ``cond(M) + sigma_max(M)**2`` over the wheel headings of a fixed
formation; rank-deficient mappers score ``+inf``. Flipping one wheel by pi
negates a row of ``M`` and leaves ``M^T M`` unchanged, so the objective is
pi-periodic in every angle and both searches below work on ``[0, pi)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import FormationConfiguration, HeadingConfiguration
from .errors import ConfigurationError, OptimizerError, SearchCostError
from .kinematics import (
    MapperMetrics,
    RANK_SAFETY,
    VelocityMapper,
    build_velocity_mapper,
    mapper_metrics,
    mapper_rows,
)

PERIOD = math.pi
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerOptions:
    n_starts: int = 8
    max_iterations: int = 60
    objective_tolerance: float = 1e-12
    angle_tolerance: float = 1e-7
    rng_seed: int = 0
    scan_points: int = 36

    def __post_init__(self):
        if self.n_starts < 1:
            raise ConfigurationError("n_starts must be >= 1")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if not (self.objective_tolerance > 0 and self.angle_tolerance > 0):
            raise ConfigurationError("tolerances must be positive")
        if self.scan_points < 3:
            raise ConfigurationError("scan_points must be >= 3")


@dataclass(frozen=True)
class OptimizationResult:
    headings: HeadingConfiguration
    objective_value: float
    metrics: MapperMetrics
    starts_converged: int


def _metrics_objective(m: MapperMetrics) -> float:
    if m.rank < 3:
        return math.inf
    return m.condition_number + m.sigma_max**2


def mapper_objective(M: VelocityMapper) -> float:
    return _metrics_objective(mapper_metrics(M))


def objective(formation: FormationConfiguration, headings, R: float) -> float:
    """``cond(M) + sigma_max(M)**2``, or ``+inf`` when ``rank(M) < 3``."""
    if not isinstance(headings, HeadingConfiguration):
        headings = HeadingConfiguration(headings)
    return mapper_objective(build_velocity_mapper(formation, headings, R))


def energy_upper_bound(M: VelocityMapper | np.ndarray, V) -> float:
    """``(sigma_max(M) * ||V||)**2``, an upper bound on ``sum(omega**2)``."""
    m = M.matrix if isinstance(M, VelocityMapper) else np.asarray(M, dtype=float)
    sigma_max = float(np.linalg.svd(m, compute_uv=False)[0])
    return (sigma_max * float(np.linalg.norm(np.asarray(V, dtype=float)))) ** 2


def tangential_headings(formation: FormationConfiguration) -> np.ndarray:
    """Each wheel perpendicular to its radius from the centroid."""
    p = formation.positions
    return np.arctan2(p[:, 1], p[:, 0]) + math.pi / 2.0


def _reduce(angles: np.ndarray) -> np.ndarray:
    a = np.mod(angles, PERIOD)
    a[a >= PERIOD] = 0.0
    return a


class _Objective:
    """Objective on pi-reduced angles for a fixed formation, with batching."""

    def __init__(self, positions: np.ndarray, R: float):
        self.positions = positions
        self.R = R
        self.n = positions.shape[0]
        self.rank_tol = self.n * np.finfo(float).eps * RANK_SAFETY
        self.evaluations = 0

    def batch(self, angles: np.ndarray) -> np.ndarray:
        rows = mapper_rows(self.positions, angles, self.R)
        sv = np.linalg.svd(rows, compute_uv=False)
        self.evaluations += sv.shape[0]
        with np.errstate(divide="ignore"):
            cond = sv[:, 0] / sv[:, 2]
        full = sv[:, 2] > sv[:, 0] * self.rank_tol
        return np.where(full, cond + sv[:, 0] ** 2, math.inf)

    def __call__(self, angles: np.ndarray) -> float:
        return float(self.batch(angles[None, :])[0])


def _golden_coordinate(f, x: np.ndarray, i: int, lo: float, hi: float, tol: float):
    """Golden-section search on coordinate ``i`` over ``[lo, hi]``."""

    def at(t):
        y = x.copy()
        y[i] = t
        y = _reduce(y)
        return f(y), y

    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, yc = at(c)
    fd, yd = at(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd, yd = d, c, fc, yc
            c = hi - INV_PHI * (hi - lo)
            fc, yc = at(c)
        else:
            lo, c, fc, yc = c, d, fd, yd
            d = lo + INV_PHI * (hi - lo)
            fd, yd = at(d)
    return (fc, yc) if fc <= fd else (fd, yd)


def _local_search(f: _Objective, x0: np.ndarray, opts: OptimizerOptions):
    """Cyclic coordinate search: scan each angle over one period, then refine
    the best scan cell by golden section. Only strict improvements are kept,
    so the result never scores worse than the start."""
    x = _reduce(np.array(x0, dtype=float))
    fx = f(x)
    n = x.size
    cell = PERIOD / opts.scan_points
    offsets = cell * np.arange(opts.scan_points)
    converged = False
    for _ in range(opts.max_iterations):
        f_sweep = fx
        for i in range(n):
            trial = np.repeat(x[None, :], opts.scan_points, axis=0)
            trial[:, i] = x[i] + offsets
            trial = _reduce(trial)
            values = f.batch(trial)
            j = int(np.argmin(values))
            if not math.isfinite(values[j]):
                continue
            centre = x[i] + offsets[j]
            fg, yg = _golden_coordinate(
                f, x, i, centre - cell, centre + cell, opts.angle_tolerance
            )
            if values[j] < fg:
                fg, yg = float(values[j]), trial[j]
            if fg < fx:
                x, fx = yg, fg
        if math.isfinite(fx) and f_sweep - fx <= opts.objective_tolerance * max(1.0, abs(fx)):
            converged = True
            break
    return x, fx, converged


def _better(fa: float, xa: np.ndarray, fb: float, xb: np.ndarray | None) -> bool:
    """Strictly lower objective wins; exact ties go to the lexicographically
    smaller angle vector."""
    if xb is None or fa < fb:
        return True
    if fa > fb or not math.isfinite(fa):
        return False
    return tuple(xa) < tuple(xb)


def _result(formation, angles: np.ndarray, R: float, starts_converged: int) -> OptimizationResult:
    headings = HeadingConfiguration(angles)
    metrics = mapper_metrics(build_velocity_mapper(formation, headings, R))
    return OptimizationResult(headings, _metrics_objective(metrics), metrics, starts_converged)


def start_points(formation: FormationConfiguration, options: OptimizerOptions) -> list[np.ndarray]:
    """Tangential heuristic first, then ``n_starts`` seeded random points.

    The random stream is drawn in order, so the starts for ``k`` are a prefix
    of the starts for ``k + 1``.
    """
    rng = np.random.default_rng(options.rng_seed)
    starts = [_reduce(tangential_headings(formation))]
    for _ in range(options.n_starts):
        starts.append(rng.uniform(0.0, PERIOD, size=formation.n))
    return starts


def optimize_headings(
    formation: FormationConfiguration, R: float, options: OptimizerOptions | None = None
) -> OptimizationResult:
    """Multi-start derivative-free minimisation of the heading objective."""
    options = options or OptimizerOptions()
    f = _Objective(formation.positions, R)
    best_x, best_f = None, math.inf
    converged = 0
    for x0 in start_points(formation, options):
        x, fx, ok = _local_search(f, x0, options)
        converged += int(ok and math.isfinite(fx))
        if math.isfinite(fx) and _better(fx, x, best_f, best_x):
            best_x, best_f = x, fx
    if best_x is None:
        raise OptimizerError(
            f"no full-rank heading configuration found from {options.n_starts + 1} starts"
        )
    return _result(formation, best_x, R, converged)


# --- exhaustive oracle -------------------------------------------------------


def _sym3_eigen_extremes(a11, a22, a33, a12, a13, a23):
    """Largest and smallest eigenvalue of batched symmetric 3x3 matrices
    (trigonometric closed form)."""
    q = (a11 + a22 + a33) / 3.0
    p1 = a12 * a12 + a13 * a13 + a23 * a23
    b11, b22, b33 = a11 - q, a22 - q, a33 - q
    p2 = b11 * b11 + b22 * b22 + b33 * b33 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        det = (
            b11 * (b22 * b33 - a23 * a23)
            - a12 * (a12 * b33 - a23 * a13)
            + a13 * (a12 * a23 - b22 * a13)
        )
        r = np.where(p > 0, det / (2.0 * p**3), 0.0)
    phi = np.arccos(np.clip(r, -1.0, 1.0)) / 3.0
    lam_max = q + 2.0 * p * np.cos(phi)
    lam_min = q + 2.0 * p * np.cos(phi + 2.0 * math.pi / 3.0)
    return lam_max, lam_min


def grid_search_headings(
    formation: FormationConfiguration,
    R: float,
    resolution: float,
    max_evaluations: int = 200_000_000,
) -> OptimizationResult:
    """Brute-force minimiser over a uniform angle grid.

    Grid points are ``k * resolution`` in ``[0, pi)``; by the pi-periodicity
    this covers the same configurations as the ``[0, 2*pi)`` grid. Builds the
    Gram matrix ``M^T M`` as a sum of per-module outer products and scores it
    with a closed-form eigen solve, then rescores the winner by SVD.
    """
    if not resolution > 0:
        raise ConfigurationError("resolution must be positive")
    n = formation.n
    if n > 4:
        raise SearchCostError(f"grid search is limited to n <= 4 modules, got {n}")
    k = max(1, math.ceil(PERIOD / resolution - 1e-9))
    if k**n > max_evaluations:
        raise SearchCostError(f"grid of {k}^{n} points exceeds {max_evaluations} evaluations")
    grid = resolution * np.arange(k)

    # per-module Gram contributions, shape (n, k, 6)
    rows = mapper_rows(formation.positions, np.repeat(grid[None, :], n, axis=0).T, R)
    rows = np.transpose(rows, (1, 0, 2))  # (n, k, 3)
    idx = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]
    gram = np.stack([rows[..., a] * rows[..., b] for a, b in idx], axis=-1)

    rank_tol2 = (n * np.finfo(float).eps * RANK_SAFETY) ** 2
    best_val, best_idx = math.inf, (0,) * n
    finite = 0
    for head in itertools.product(range(k), repeat=n - 2):
        base = sum((gram[m, head[m]] for m in range(n - 2)), np.zeros(6))
        g = base + gram[n - 2][:, None, :] + gram[n - 1][None, :, :]
        lam_max, lam_min = _sym3_eigen_extremes(*(g[..., c] for c in range(6)))
        full = lam_min > lam_max * rank_tol2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(full, np.sqrt(lam_max / lam_min) + lam_max, math.inf)
        finite += int(np.count_nonzero(full))
        j = int(np.argmin(val))
        if val.flat[j] < best_val:
            best_val = float(val.flat[j])
            best_idx = head + tuple(int(v) for v in np.unravel_index(j, val.shape))
    angles = grid[list(best_idx)]
    return _result(formation, angles, R, finite)
