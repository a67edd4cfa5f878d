"""Scenario configuration files.

Configs are TOML. Lengths are metres, times seconds, angles radians. Any
key ending in ``_deg`` is read as degrees and stored under the key without
the suffix (the value must be an angle or a list of angles). Unknown keys
are rejected so typos surface as parse errors.

Example::

    seed = 3

    [scenario]
    kind = "structure_track"
    duration = 60.0

    [formation]
    shape = "rectangle"
    initial_headings_deg = [0, 0, 0, 0, 0, 0]

    [trajectory]
    kind = "rounded_rectangle"
    heading_amplitude_deg = 15
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import sys
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .controllers import ModuleGains, StructureGains
from .core import CENTROID_TOL, FormationConfiguration, HeadingConfiguration, ModuleSpec, recentre_formation
from .docking import SHAPES, DockingSpec
from .errors import ConfigurationError
from .optimizer import OptimizerOptions
from .simulator import NavigationOptions, PayloadSpec, ScenarioConfig
from .trajectories import make_trajectory

TOMLDecodeError = tomllib.TOMLDecodeError

_SCENARIO_KEYS = {"kind", "duration", "dt", "command_delay", "initial_offset"}
_FORMATION_KEYS = {
    "shape", "rows", "cols", "positions", "docking_edges",
    "headings", "initial_headings", "initial_positions",
}
_TOP_KEYS = {
    "seed", "scenario", "module", "docking", "formation", "trajectory",
    "gains", "optimizer", "navigation", "payload",
}


def _convert_degrees(table: dict, where: str) -> dict:
    out = {}
    for key, value in table.items():
        if key.endswith("_deg"):
            base = key[: -len("_deg")]
            if base in table:
                raise ConfigurationError(f"{where}: both {base!r} and {key!r} given")
            try:
                out[base] = (
                    [math.radians(float(v)) for v in value]
                    if isinstance(value, list)
                    else math.radians(float(value))
                )
            except (TypeError, ValueError):
                raise ConfigurationError(f"{where}.{key}: expected degrees") from None
        else:
            out[key] = value
    return out


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigurationError(f"[{name}] must be a table")
    return _convert_degrees(value, name)


def _build(cls, table: dict, where: str, **extra):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - names
    if unknown:
        raise ConfigurationError(f"[{where}] unknown keys: {sorted(unknown)}")
    try:
        return cls(**{**extra, **table})
    except TypeError as exc:
        raise ConfigurationError(f"[{where}] {exc}") from None


def _check_keys(table: dict, allowed: set, where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigurationError(f"[{where}] unknown keys: {sorted(unknown)}")


def _formation(table: dict, docking: DockingSpec) -> FormationConfiguration | None:
    if "shape" in table and "positions" in table:
        raise ConfigurationError("[formation] give either 'shape' or 'positions', not both")
    if "shape" in table:
        shape = table["shape"]
        if shape not in SHAPES:
            raise ConfigurationError(f"[formation] unknown shape {shape!r}; expected {sorted(SHAPES)}")
        if shape == "rectangle":
            return SHAPES[shape](docking, int(table.get("rows", 2)), int(table.get("cols", 3)))
        return SHAPES[shape](docking)
    if "positions" in table:
        try:
            pos = np.array(table["positions"], dtype=float)
        except (TypeError, ValueError):
            raise ConfigurationError("[formation] positions must be [[x, y], ...]") from None
        edges = table.get("docking_edges", ())
        if pos.ndim == 2 and pos.shape[1] == 2 and pos.shape[0] >= 3:
            if np.max(np.abs(pos.mean(axis=0))) <= CENTROID_TOL:
                # already centred: keep the exact values so files round-trip
                return FormationConfiguration(pos, edges)
        return recentre_formation(pos, edges)
    return None


def config_from_dict(doc: dict) -> ScenarioConfig:
    _check_keys(doc, _TOP_KEYS, "top level")
    seed = int(doc.get("seed", 0))
    scenario = _section(doc, "scenario")
    _check_keys(scenario, _SCENARIO_KEYS, "scenario")
    if "kind" not in scenario or "duration" not in scenario:
        raise ConfigurationError("[scenario] needs 'kind' and 'duration'")

    module = _build(ModuleSpec, _section(doc, "module"), "module")
    docking = _build(
        DockingSpec, _section(doc, "docking"), "docking",
        n_faces=module.n_faces, circumradius=module.contour_circumradius,
    )
    formation_table = _section(doc, "formation")
    _check_keys(formation_table, _FORMATION_KEYS, "formation")
    formation = _formation(formation_table, docking)

    def headings(key):
        if key not in formation_table:
            return None
        return HeadingConfiguration(np.asarray(formation_table[key], dtype=float))

    initial_positions = formation_table.get("initial_positions")
    if initial_positions is not None:
        initial_positions = tuple(tuple(float(v) for v in p) for p in initial_positions)

    trajectory = _section(doc, "trajectory")
    if "kind" not in trajectory:
        raise ConfigurationError("[trajectory] needs 'kind'")

    gains = doc.get("gains", {})
    if not isinstance(gains, dict):
        raise ConfigurationError("[gains] must be a table")
    _check_keys(gains, {"module", "structure"}, "gains")
    optimizer_table = _section(doc, "optimizer")
    optimizer_table.setdefault("rng_seed", seed)
    payload_table = doc.get("payload")

    return ScenarioConfig(
        kind=scenario["kind"],
        trajectory=trajectory,
        duration=float(scenario["duration"]),
        module=module,
        docking=docking,
        formation=formation,
        headings=headings("headings"),
        initial_headings=headings("initial_headings"),
        initial_positions=initial_positions,
        initial_offset=tuple(float(v) for v in scenario.get("initial_offset", (0.0, 0.0, 0.0))),
        module_gains=_build(ModuleGains, _convert_degrees(gains.get("module", {}), "gains.module"), "gains.module"),
        structure_gains=_build(StructureGains, _convert_degrees(gains.get("structure", {}), "gains.structure"), "gains.structure"),
        optimizer=_build(OptimizerOptions, optimizer_table, "optimizer"),
        navigation=_build(NavigationOptions, _section(doc, "navigation"), "navigation"),
        payload=None if payload_table is None else _build(PayloadSpec, _section(doc, "payload"), "payload"),
        dt=float(scenario.get("dt", 0.01)),
        command_delay=float(scenario.get("command_delay", 0.02)),
        rng_seed=seed,
    )


def parse_config(text: str) -> ScenarioConfig:
    """Parse TOML text. Syntax errors raise ``TOMLDecodeError`` (with line and
    column); semantic errors raise :class:`ConfigurationError`."""
    return config_from_dict(tomllib.loads(text))


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _fields(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical, fully explicit form of a config (radians, every default filled)."""
    doc: dict = {"seed": cfg.rng_seed}
    doc["scenario"] = {
        "kind": cfg.kind,
        "duration": cfg.duration,
        "dt": cfg.dt,
        "command_delay": cfg.command_delay,
        "initial_offset": [float(v) for v in cfg.initial_offset],
    }
    doc["module"] = _fields(cfg.module)
    docking = _fields(cfg.docking)
    docking.pop("n_faces")
    docking.pop("circumradius")
    doc["docking"] = docking
    formation: dict = {}
    if cfg.formation is not None:
        formation["positions"] = [[float(x), float(y)] for x, y in cfg.formation.positions]
        formation["docking_edges"] = [list(e) for e in cfg.formation.docking_edges]
    if cfg.headings is not None:
        formation["headings"] = [float(a) for a in cfg.headings.angles]
    if cfg.initial_headings is not None:
        formation["initial_headings"] = [float(a) for a in cfg.initial_headings.angles]
    if cfg.initial_positions is not None:
        formation["initial_positions"] = [list(p) for p in cfg.initial_positions]
    if formation:
        doc["formation"] = formation
    doc["trajectory"] = dict(cfg.trajectory)
    doc["gains"] = {
        "module": _fields(cfg.module_gains),
        "structure": _fields(cfg.structure_gains),
    }
    doc["optimizer"] = _fields(cfg.optimizer)
    doc["navigation"] = _fields(cfg.navigation)
    if cfg.payload is not None:
        doc["payload"] = _fields(cfg.payload)
    return doc


def dump_config(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(config_to_dict(cfg))


def config_digest(cfg: ScenarioConfig) -> str:
    """SHA-256 of the canonical serialisation."""
    return hashlib.sha256(dump_config(cfg).encode("utf-8")).hexdigest()


def canonical_trajectory(params: dict) -> dict:
    """Validate trajectory parameters and fill in every default."""
    params = dict(params)
    return make_trajectory(params.get("kind", ""), params).describe()
