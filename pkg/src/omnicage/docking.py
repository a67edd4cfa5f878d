"""Polygonal contour, magnet docking sites and formation feasibility.

Each module base is a regular ``n_faces``-gon with one magnet per corner and
alternating magnet polarity around the contour. In its own body frame vertex
0 lies on +x. When docked, every base is mounted with the same orientation,
rotated so that face ``k`` (between vertices ``k`` and ``k+1``) has its
outward normal along ``2*pi*k/n_faces`` in the structure frame. Two modules
docked face to face then sit ``2 * apothem`` apart.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import FormationConfiguration, ModuleSpec, recentre_formation
from .errors import ParameterError


@dataclass(frozen=True)
class DockingSpec:
    n_faces: int = 24
    circumradius: float = 0.050
    magnet_tensile_force: float = 1.29
    align_range: float = 0.010
    magnet_inset: float = 0.001

    def __post_init__(self):
        if self.n_faces < 3 or self.n_faces % 2:
            raise ParameterError(f"n_faces must be even and >= 3, got {self.n_faces}")
        for name in ("circumradius", "magnet_tensile_force", "align_range", "magnet_inset"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")

    @classmethod
    def for_module(cls, module: ModuleSpec, **overrides) -> "DockingSpec":
        return cls(n_faces=module.n_faces, circumradius=module.contour_circumradius, **overrides)

    @property
    def apothem(self) -> float:
        return self.circumradius * math.cos(math.pi / self.n_faces)

    @property
    def edge_length(self) -> float:
        return 2.0 * self.circumradius * math.sin(math.pi / self.n_faces)

    @property
    def docked_distance(self) -> float:
        return 2.0 * self.apothem

    @property
    def normal_tolerance(self) -> float:
        """Angular misalignment the passive alignment can absorb."""
        return math.atan2(self.align_range, self.edge_length)


class DockingSite(NamedTuple):
    module_a: int
    face_a: int
    module_b: int
    face_b: int


@dataclass(frozen=True)
class FeasibilityReport:
    enough_modules: bool
    connected: bool
    non_overlapping: bool
    polarity_consistent: bool
    declared_edges_present: bool
    sites: tuple[DockingSite, ...] = field(default=())
    problems: tuple[str, ...] = field(default=())

    @property
    def feasible(self) -> bool:
        return (
            self.enough_modules
            and self.connected
            and self.non_overlapping
            and self.polarity_consistent
            and self.declared_edges_present
        )


def contour_vertices(spec: DockingSpec) -> np.ndarray:
    """Body-frame contour vertices, vertex 0 on the +x axis."""
    k = np.arange(spec.n_faces)
    phi = 2.0 * math.pi * k / spec.n_faces
    return spec.circumradius * np.column_stack([np.cos(phi), np.sin(phi)])


def shear_torque(F_tensile: float, edge_length: float) -> float:
    """Extra torque needed to slide a docked pair to the next face (N*m)."""
    if F_tensile < 0 or edge_length < 0:
        raise ParameterError("tensile force and edge length must be non-negative")
    return F_tensile * edge_length / 2.0


def face_normal_angles(spec: DockingSpec) -> np.ndarray:
    return 2.0 * math.pi * np.arange(spec.n_faces) / spec.n_faces


def face_midpoints(center, spec: DockingSpec) -> np.ndarray:
    phi = face_normal_angles(spec)
    c = np.asarray(center, dtype=float)
    return c + spec.apothem * np.column_stack([np.cos(phi), np.sin(phi)])


def faces_attract(face_a: int, face_b: int) -> bool:
    """Corner magnets alternate in polarity, so face ``a`` touches corner ``a``
    to corner ``b+1`` and corner ``a+1`` to corner ``b``. Both corner pairs
    are opposite poles exactly when the face indices share parity."""
    return (face_a - face_b) % 2 == 0


def _positions(formation) -> np.ndarray:
    if isinstance(formation, FormationConfiguration):
        return formation.positions
    pos = np.asarray(formation, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ParameterError(f"positions must be (n, 2), got {pos.shape}")
    return pos


def _angle_gap(a: float, b: float) -> float:
    d = math.fmod(abs(a - b), 2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def enumerate_docking_sites(formation, spec: DockingSpec) -> list[DockingSite]:
    """Every module pair with a mating face pair, stored once with ``a < b``."""
    pos = _positions(formation)
    n = pos.shape[0]
    normals = face_normal_angles(spec)
    reach = spec.docked_distance + spec.align_range
    sites: list[DockingSite] = []
    for a in range(n):
        mid_a = face_midpoints(pos[a], spec)
        for b in range(a + 1, n):
            if np.hypot(*(pos[b] - pos[a])) > reach:
                continue
            mid_b = face_midpoints(pos[b], spec)
            gaps = np.linalg.norm(mid_a[:, None, :] - mid_b[None, :, :], axis=-1)
            best = None
            for fa, fb in zip(*np.nonzero(gaps <= spec.align_range)):
                opposed = _angle_gap(normals[fa] + math.pi, normals[fb])
                if opposed > spec.normal_tolerance:
                    continue
                # best alignment first; rounding and the unordered face pair make
                # the choice independent of module numbering
                key = (
                    round(opposed, 9),
                    round(float(gaps[fa, fb]), 12),
                    min(fa, fb),
                    max(fa, fb),
                    int(fa),
                    int(fb),
                )
                if best is None or key < best:
                    best = key
            if best is not None:
                sites.append(DockingSite(a, best[4], b, best[5]))
    return sites


def _connected(n: int, sites) -> bool:
    if n == 0:
        return False
    adj = {i: set() for i in range(n)}
    for s in sites:
        adj[s.module_a].add(s.module_b)
        adj[s.module_b].add(s.module_a)
    seen = {0}
    queue = deque([0])
    while queue:
        for j in adj[queue.popleft()]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == n


def _canonical(edge) -> tuple[int, int, int, int]:
    a, fa, b, fb = (int(v) for v in edge)
    return (a, fa, b, fb) if a < b else (b, fb, a, fa)


def check_formation_feasible(formation, spec: DockingSpec) -> FeasibilityReport:
    pos = _positions(formation)
    n = pos.shape[0]
    problems = []

    enough = n >= 3
    if not enough:
        problems.append(f"a structure needs at least 3 modules, got {n}")

    min_gap = spec.docked_distance - spec.align_range
    non_overlapping = True
    for a in range(n):
        for b in range(a + 1, n):
            d = float(np.hypot(*(pos[b] - pos[a])))
            if d < min_gap:
                non_overlapping = False
                problems.append(f"modules {a} and {b} overlap (centre distance {d:.4g} m)")

    sites = enumerate_docking_sites(pos, spec)
    connected = _connected(n, sites)
    if not connected:
        problems.append("docking graph does not span all modules")

    polarity = all(faces_attract(s.face_a, s.face_b) for s in sites)
    if not polarity:
        problems.append("a docking site pairs like magnetic poles")

    declared_ok = True
    if isinstance(formation, FormationConfiguration) and formation.docking_edges:
        found = {tuple(s) for s in sites}
        for e in formation.docking_edges:
            if _canonical(e) not in found:
                declared_ok = False
                problems.append(f"declared docking edge {e} is not geometrically realised")

    return FeasibilityReport(
        enough_modules=enough,
        connected=connected,
        non_overlapping=non_overlapping,
        polarity_consistent=polarity,
        declared_edges_present=declared_ok,
        sites=tuple(sites),
        problems=tuple(problems),
    )


def _with_topology(points, spec: DockingSpec) -> FormationConfiguration:
    loose = recentre_formation(points)
    sites = enumerate_docking_sites(loose, spec)
    return FormationConfiguration(loose.positions, tuple(tuple(s) for s in sites))


def hexagon_ring(spec: DockingSpec) -> FormationConfiguration:
    """Six modules docked in a ring, leaving a caging hole in the middle."""
    d = spec.docked_distance
    phi = np.radians(np.arange(6) * 60.0)
    return _with_topology(d * np.column_stack([np.cos(phi), np.sin(phi)]), spec)


def rectangle_grid(spec: DockingSpec, rows: int = 2, cols: int = 3) -> FormationConfiguration:
    """``rows x cols`` modules docked on a square lattice, long side along x."""
    d = spec.docked_distance
    pts = [(d * j, d * i) for i in range(rows) for j in range(cols)]
    return _with_topology(pts, spec)


def triangle_cluster(spec: DockingSpec) -> FormationConfiguration:
    """Three mutually docked modules."""
    d = spec.docked_distance
    pts = [(0.0, 0.0), (d, 0.0), (d / 2.0, d * math.sqrt(3.0) / 2.0)]
    return _with_topology(pts, spec)


SHAPES = {
    "hexagon": hexagon_ring,
    "rectangle": rectangle_grid,
    "triangle": triangle_cluster,
}
