"""Shared builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from omnicage.core import FormationConfiguration, HeadingConfiguration, recentre_formation
from omnicage.kinematics import build_velocity_mapper, mapper_metrics

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
R_WHEEL = 0.028


def random_formation(rng: np.random.Generator, n: int, half_width: float = 0.3) -> FormationConfiguration:
    return recentre_formation(rng.uniform(-half_width, half_width, size=(n, 2)))


def random_full_rank(rng, n: int, R: float = R_WHEEL, half_width: float = 0.3):
    """A random formation with random headings whose mapper has rank 3."""
    while True:
        formation = random_formation(rng, n, half_width)
        headings = HeadingConfiguration(rng.uniform(0.0, 2.0 * np.pi, size=n))
        M = build_velocity_mapper(formation, headings, R)
        if mapper_metrics(M).rank == 3 and mapper_metrics(M).condition_number < 1e6:
            return formation, headings, M


def triangle(circumradius: float = 1.0) -> FormationConfiguration:
    phi = 2.0 * np.pi * np.arange(3) / 3.0
    return FormationConfiguration(circumradius * np.column_stack([np.cos(phi), np.sin(phi)]))
