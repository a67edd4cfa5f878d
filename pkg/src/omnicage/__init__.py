"""Single-omni-wheel modular robots: docking, heading optimisation and simulation."""

from .core import FormationConfiguration, HeadingConfiguration, ModuleSpec, Pose2D, StructureTwist
from .docking import DockingSpec, check_formation_feasible, shear_torque
from .kinematics import build_velocity_mapper, mapper_metrics, twist_from_wheels, wheels_from_twist
from .optimizer import OptimizerOptions, grid_search_headings, optimize_headings
from .simulator import ScenarioConfig, energy_of_trace, run_scenario

__version__ = "0.1.0"

__all__ = [
    "DockingSpec",
    "FormationConfiguration",
    "HeadingConfiguration",
    "ModuleSpec",
    "OptimizerOptions",
    "Pose2D",
    "ScenarioConfig",
    "StructureTwist",
    "build_velocity_mapper",
    "check_formation_feasible",
    "energy_of_trace",
    "grid_search_headings",
    "mapper_metrics",
    "optimize_headings",
    "run_scenario",
    "shear_torque",
    "twist_from_wheels",
    "wheels_from_twist",
]
