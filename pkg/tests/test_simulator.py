import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import SCENARIOS
from omnicage.config import load_config
from omnicage.core import (
    HeadingConfiguration,
    ModuleSpec,
    Pose2D,
    StructureTwist,
    recentre_formation,
    world_from_structure,
)
from omnicage.docking import DockingSpec, hexagon_ring, rectangle_grid, triangle_cluster
from omnicage.errors import ConfigurationError, InfeasibleFormationError, ScenarioError
from omnicage.kinematics import build_velocity_mapper, wheels_from_twist
from omnicage.optimizer import tangential_headings
from omnicage.simulator import (
    STAGE_DOCK,
    STAGE_NAVIGATE,
    STAGE_REORIENT,
    STAGE_TRACK,
    PayloadSpec,
    ScenarioConfig,
    ScenarioTrace,
    cumulative_energy,
    energy_of_trace,
    payload_drag,
    run_scenario,
    step_module,
    step_structure,
    trace_metrics,
    with_overrides,
)

SPEC = ModuleSpec()
RECT = rectangle_grid(DockingSpec())


def _structure_config(**overrides):
    base = dict(
        kind="structure_track",
        trajectory={"kind": "circle", "radius": 0.2, "speed": 0.03},
        duration=6.0,
        formation=RECT,
        headings=HeadingConfiguration(tangential_headings(RECT)),
        initial_offset=(0.01, 0.0, 0.05),
    )
    base.update(overrides)
    return ScenarioConfig(**base)


@pytest.fixture(scope="module")
def case3_trace():
    return run_scenario(load_config(SCENARIOS / "case3_hexagon_transport.toml"))


def test_step_module_euler():
    pose = step_module(Pose2D(0, 0, 0), (1.0, 0.0), SPEC, 0.01)
    assert pose.x == pytest.approx(2.8e-4, rel=1e-12)
    assert pose.y == 0.0


def test_step_module_zero_speed_slews_only():
    pose = step_module(Pose2D(0.1, 0.2, 0.0), (0.0, 1.0), SPEC, 0.01, steering_rate=math.pi)
    assert (pose.x, pose.y) == (0.1, 0.2)
    assert pose.theta == pytest.approx(0.01 * math.pi)


def test_step_module_full_circle():
    dt, w, omega = 0.01, 0.2, 2.0
    v = omega * SPEC.wheel_radius
    steps = int(round(2 * math.pi / w / dt))
    pose, heading = Pose2D(0, 0, 0), 0.0
    for _ in range(steps):
        heading += w * dt
        pose = step_module(pose, (omega, heading), SPEC, dt)
    circumference = 2 * math.pi * v / w
    assert math.hypot(pose.x, pose.y) < 0.01 * circumference


def test_step_structure_translation():
    M = build_velocity_mapper(RECT, HeadingConfiguration(tangential_headings(RECT)), SPEC.wheel_radius)
    pose = Pose2D(1.0, 2.0, 0.7)
    new = step_structure(pose, wheels_from_twist(M, (0.05, 0, 0)), M, 0.01)
    body_x = (math.cos(0.7), math.sin(0.7))
    moved = np.subtract((new.x, new.y), (pose.x, pose.y))
    np.testing.assert_allclose(moved, 5e-4 * np.array(body_x), atol=1e-15)
    assert new.theta == pytest.approx(0.7, abs=1e-15)


def test_step_structure_zero():
    M = build_velocity_mapper(RECT, HeadingConfiguration(tangential_headings(RECT)), SPEC.wheel_radius)
    pose = Pose2D(0.3, -0.1, 2.0)
    assert step_structure(pose, np.zeros(6), M, 0.01) == pose


def test_step_structure_full_spin():
    M = build_velocity_mapper(RECT, HeadingConfiguration(tangential_headings(RECT)), SPEC.wheel_radius)
    steps, dt = 1000, 0.01
    rate = 2 * math.pi / (steps * dt)
    omegas = wheels_from_twist(M, (0, 0, rate))
    pose = Pose2D(0, 0, 0.3)
    for _ in range(steps):
        pose = step_structure(pose, omegas, M, dt)
    assert abs(math.remainder(pose.theta - 0.3, 2 * math.pi)) < 1e-3


def test_payload_drag():
    twist = StructureTwist(0.1, -0.2, 0.3)
    assert payload_drag(twist, PayloadSpec(mass=0.0)) == twist
    assert payload_drag(twist, None) == twist
    factors = [PayloadSpec(mass=m).drag_factor for m in (0.0, 0.3, 1.2, 5.0)]
    assert all(a > b for a, b in zip(factors, factors[1:]))


def test_case1_radial_error():
    trace = run_scenario(load_config(SCENARIOS / "case1_single_circle.toml"))
    late = trace.t >= 20.0
    radial = np.abs(np.hypot(trace.pose[late, 0], trace.pose[late, 1]) - 0.25)
    assert radial.max() < 0.05 * 0.25


def test_case3_reaches_goal(case3_trace):
    tr = case3_trace
    durations = tr.stage_durations()
    for key in ("1_navigate", "2_dock", "3_reorient", "4_track"):
        assert durations[key] > 0
    assert math.hypot(tr.pose[-1, 0] - 0.4, tr.pose[-1, 1] - 0.2) < 0.01
    # every module sits on its docking pose once docked
    formation = hexagon_ring(DockingSpec())
    last = tr.module_poses[-1]
    for i, r in enumerate(formation.positions):
        expected = world_from_structure(Pose2D(*tr.pose[-1]), r)
        assert last[i, :2] == pytest.approx(expected, abs=1e-12)


def test_case3_stage_order(case3_trace):
    stages = case3_trace.stage
    assert np.all(np.diff(stages) >= 0)
    assert list(np.unique(stages)) == [STAGE_NAVIGATE, STAGE_DOCK, STAGE_REORIENT, STAGE_TRACK]


def test_rank_deficient_headings_fail_at_reorient():
    cfg = _structure_config(headings=HeadingConfiguration(np.zeros(6)))
    with pytest.raises(ScenarioError) as info:
        run_scenario(cfg)
    assert info.value.stage.startswith("3")
    assert "degenerate" in str(info.value)


def test_infeasible_formation_rejected():
    loose = recentre_formation([(0, 0), (0.5, 0), (1.0, 0)])
    with pytest.raises(InfeasibleFormationError):
        run_scenario(_structure_config(formation=loose, headings=HeadingConfiguration([0, 1, 2])))


def test_step_regulation_settles():
    cfg = _structure_config(
        trajectory={"kind": "line", "velocity": [0.0, 0.0]},
        duration=20.0,
        initial_offset=(0.02, -0.01, 0.1),
    )
    tr = run_scenario(cfg)
    track = tr.stage == STAGE_TRACK
    t = tr.t[track] - tr.t[track][0]
    err = np.hypot(tr.error[track, 0], tr.error[track, 1])
    assert err[t >= 10.0].max() < 1e-3
    # no sustained oscillation: the error envelope keeps shrinking
    windows = [err[(t >= a) & (t < a + 2.5)].max() for a in (10.0, 12.5, 15.0, 17.5)]
    assert all(a > b for a, b in zip(windows, windows[1:]))


def _synthetic_trace(omegas, dt=0.1, stage=STAGE_TRACK):
    omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
    k, n = omegas.shape
    z = np.zeros((k, 3))
    return ScenarioTrace(
        dt=dt,
        t=dt * np.arange(k),
        stage=np.full(k, stage),
        pose=z,
        reference=z,
        error=z,
        module_poses=np.zeros((k, n, 3)),
        omegas=omegas,
        commanded=omegas,
        power=np.sum(omegas**2, axis=1),
    )


def test_energy_zero_and_constant():
    assert energy_of_trace(_synthetic_trace(np.zeros((50, 3)))) == 0.0
    omega = np.array([0.5, -1.0, 2.0])
    T, dt = 5.0, 0.01
    trace = _synthetic_trace(np.tile(omega, (int(round(T / dt)), 1)), dt)
    assert energy_of_trace(trace) == pytest.approx(T * float(omega @ omega), rel=1e-12)


def test_energy_ignores_non_tracking_stages():
    assert energy_of_trace(_synthetic_trace(np.ones((10, 3)), stage=STAGE_REORIENT)) == 0.0


def test_energy_consistency_with_power():
    tr = run_scenario(_structure_config())
    track = tr.stage == STAGE_TRACK
    assert energy_of_trace(tr) == pytest.approx(float(np.sum(tr.power[track]) * tr.dt), rel=1e-12)
    _, cumulative = cumulative_energy(tr)
    assert cumulative[-1] == pytest.approx(energy_of_trace(tr), rel=1e-12)
    np.testing.assert_allclose(tr.power, np.sum(tr.omegas**2, axis=1), rtol=1e-15)


def test_rigid_body_consistency():
    tr = run_scenario(_structure_config())
    for j in np.flatnonzero(tr.stage >= STAGE_REORIENT):
        pose = Pose2D(*tr.pose[j])
        for i, r in enumerate(RECT.positions):
            assert tr.module_poses[j, i, :2] == pytest.approx(world_from_structure(pose, r), abs=1e-12)


@pytest.mark.parametrize("delay", [0.0, 0.01, 0.05])
def test_delay_correctness(delay):
    tr = run_scenario(_structure_config(command_delay=delay))
    k = int(round(delay / 0.01))
    idx = np.flatnonzero(tr.stage == STAGE_TRACK)
    applied, commanded = tr.omegas[idx], tr.commanded[idx]
    np.testing.assert_array_equal(applied[k:], commanded[: len(idx) - k])
    np.testing.assert_array_equal(applied[:k], 0.0)


def test_delay_correctness_single_module():
    cfg = load_config(SCENARIOS / "case1_single_circle.toml")
    tr = run_scenario(with_overrides(cfg, duration=3.0, command_delay=0.03))
    np.testing.assert_array_equal(tr.omegas[3:], tr.commanded[:-3])


def test_saturation_respected():
    cfg = _structure_config(
        trajectory={"kind": "circle", "radius": 0.1, "speed": 0.2}, initial_offset=(0.1, 0.1, 1.0)
    )
    tr = run_scenario(cfg)
    assert np.max(np.abs(tr.omegas)) <= SPEC.max_wheel_speed
    assert np.max(np.abs(tr.omegas)) == pytest.approx(SPEC.max_wheel_speed)


@settings(max_examples=3, deadline=None)
@given(st.integers(0, 1000))
def test_determinism(seed):
    cfg = _structure_config(kind="transport", rng_seed=seed, duration=2.0,
                            formation=triangle_cluster(DockingSpec()), headings=None)
    a, b = run_scenario(cfg), run_scenario(cfg)
    for name in ("t", "stage", "pose", "reference", "error", "module_poses", "omegas", "commanded", "power"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        _structure_config(duration=0.0)
    with pytest.raises(ConfigurationError):
        _structure_config(command_delay=0.015)
    with pytest.raises(ConfigurationError):
        _structure_config(formation=None)
    with pytest.raises(ConfigurationError):
        _structure_config(kind="payload")
    with pytest.raises(ConfigurationError):
        _structure_config(kind="teleport")


def test_metrics_contents(case3_trace):
    m = trace_metrics(case3_trace)
    assert set(m["stage_durations"]) == {"1_navigate", "2_dock", "3_reorient", "4_track"}
    assert m["energy"] == pytest.approx(energy_of_trace(case3_trace))
    assert m["strength_ok"] is True
