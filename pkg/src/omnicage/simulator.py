"""Fixed-step kinematic simulation of modules and docked structures.

A run is staged like the physical experiments:

1. navigate  - each module drives to its docking pose with the module controller
2. dock      - captured modules are pulled onto their exact docking positions
3. reorient  - wheels steer to the heading configuration while the structure rests
4. track     - the rigid structure tracks the reference with the structure controller

``single_track`` runs only stage 4 with one module. ``structure_track`` and
``payload`` start already docked and run stages 3-4. ``transport`` runs all four.
Commands reach the plant ``command_delay`` seconds after they are computed.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .controllers import (
    IntegratorState,
    ModuleGains,
    StructureGains,
    module_control_step,
    saturate_wheels,
    structure_control_step,
    tracking_error,
)
from .core import (
    FormationConfiguration,
    HeadingConfiguration,
    ModuleSpec,
    Pose2D,
    StructureTwist,
    rotation,
    world_from_structure,
    wrap_to_2pi,
    wrap_to_pi,
)
from .docking import DockingSpec, check_formation_feasible
from .errors import (
    ConfigurationError,
    DegenerateMapperError,
    InfeasibleFormationError,
    ParameterError,
    ScenarioError,
    TraceError,
)
from .kinematics import VelocityMapper, build_velocity_mapper, mapper_metrics, twist_from_wheels
from .optimizer import OptimizerOptions, optimize_headings
from .trajectories import PointToPoint, Trajectory, make_trajectory

log = logging.getLogger(__name__)

SCENARIO_KINDS = ("single_track", "structure_track", "transport", "payload")
STAGE_NAVIGATE, STAGE_DOCK, STAGE_REORIENT, STAGE_TRACK = 1, 2, 3, 4
STAGE_NAMES = {1: "navigate", 2: "dock", 3: "reorient", 4: "track"}
GRAVITY = 9.81


@dataclass(frozen=True)
class PayloadSpec:
    mass: float = 0.0
    friction_coefficient: float = 0.3
    drag_per_kg: float = 0.3

    def __post_init__(self):
        if self.mass < 0 or self.friction_coefficient < 0 or self.drag_per_kg < 0:
            raise ParameterError("payload parameters must be non-negative")

    @property
    def drag_factor(self) -> float:
        return 1.0 / (1.0 + self.drag_per_kg * self.mass)


@dataclass(frozen=True)
class NavigationOptions:
    """Stage 1-3 plumbing: where modules spawn and how they approach."""

    cruise_speed: float = 0.04
    spawn_distance: float = 0.25
    spawn_jitter: float = 0.02
    stagger: float = 1.0
    dock_time: float = 0.2
    steering_rate: float = 2.0 * math.pi
    max_time: float = 120.0

    def __post_init__(self):
        for name in ("cruise_speed", "spawn_distance", "stagger", "dock_time",
                     "steering_rate", "max_time"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.spawn_jitter < 0:
            raise ParameterError("spawn_jitter must be non-negative")


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    trajectory: dict
    duration: float
    module: ModuleSpec = field(default_factory=ModuleSpec)
    docking: DockingSpec = field(default_factory=DockingSpec)
    formation: FormationConfiguration | None = None
    headings: HeadingConfiguration | None = None
    initial_headings: HeadingConfiguration | None = None
    initial_positions: tuple | None = None
    initial_offset: tuple = (0.0, 0.0, 0.0)
    module_gains: ModuleGains = field(default_factory=ModuleGains)
    structure_gains: StructureGains = field(default_factory=StructureGains)
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)
    navigation: NavigationOptions = field(default_factory=NavigationOptions)
    payload: PayloadSpec | None = None
    dt: float = 0.01
    command_delay: float = 0.02
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigurationError(f"unknown scenario kind {self.kind!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError("dt must be positive")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigurationError("duration must be positive; a zero-length run gives an empty trace")
        if self.command_delay < 0:
            raise ConfigurationError("command_delay must be non-negative")
        k = self.command_delay / self.dt
        if abs(k - round(k)) > 1e-9:
            raise ConfigurationError("command_delay must be an integer multiple of dt")
        if self.kind != "single_track" and self.formation is None:
            raise ConfigurationError(f"scenario kind {self.kind!r} needs a formation")
        if self.kind == "payload" and self.payload is None:
            raise ConfigurationError("payload scenario needs a payload table")
        if len(self.initial_offset) != 3:
            raise ConfigurationError("initial_offset must be (dx, dy, dtheta)")
        if not isinstance(self.trajectory, dict):
            raise ConfigurationError("trajectory must be a table of parameters")
        # store the validated trajectory with every default filled in
        traj = make_trajectory(self.trajectory.get("kind", ""), self.trajectory)
        object.__setattr__(self, "trajectory", traj.describe())
        object.__setattr__(self, "initial_offset", tuple(float(v) for v in self.initial_offset))
        if self.initial_positions is not None:
            object.__setattr__(
                self,
                "initial_positions",
                tuple(tuple(float(v) for v in p) for p in np.asarray(self.initial_positions)),
            )

    @property
    def delay_steps(self) -> int:
        return int(round(self.command_delay / self.dt))

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(eq=False)
class ScenarioTrace:
    """Per-step record; row ``j`` holds the state at ``t[j]`` and the wheel
    speeds applied over ``[t[j], t[j] + dt)``."""

    dt: float
    t: np.ndarray
    stage: np.ndarray
    pose: np.ndarray
    reference: np.ndarray
    error: np.ndarray
    module_poses: np.ndarray
    omegas: np.ndarray
    commanded: np.ndarray
    power: np.ndarray
    header: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def n_modules(self) -> int:
        return self.omegas.shape[1]

    def stage_mask(self, stage: int) -> np.ndarray:
        return self.stage == stage

    def stage_durations(self) -> dict[str, float]:
        return {
            f"{code}_{name}": float(np.count_nonzero(self.stage == code) * self.dt)
            for code, name in STAGE_NAMES.items()
        }


class _Recorder:
    def __init__(self, n: int):
        self.n = n
        self.rows: dict[str, list] = {
            k: [] for k in ("t", "stage", "pose", "reference", "error",
                            "module_poses", "omegas", "commanded")
        }

    def add(self, t, stage, pose, ref, modules, applied, commanded):
        r = self.rows
        r["t"].append(t)
        r["stage"].append(stage)
        r["pose"].append(pose.as_array())
        r["reference"].append(ref.as_array())
        r["error"].append(tuple(tracking_error(pose, ref)))
        r["module_poses"].append([m.as_array() for m in modules])
        r["omegas"].append(np.array(applied, dtype=float))
        r["commanded"].append(np.array(commanded, dtype=float))

    def finish(self, dt: float, header: dict) -> ScenarioTrace:
        r = self.rows
        if not r["t"]:
            raise TraceError("simulation produced no steps")
        omegas = np.array(r["omegas"], dtype=float).reshape(-1, self.n)
        return ScenarioTrace(
            dt=dt,
            t=np.array(r["t"], dtype=float),
            stage=np.array(r["stage"], dtype=int),
            pose=np.array(r["pose"], dtype=float),
            reference=np.array(r["reference"], dtype=float),
            error=np.array(r["error"], dtype=float),
            module_poses=np.array(r["module_poses"], dtype=float).reshape(-1, self.n, 3),
            omegas=omegas,
            commanded=np.array(r["commanded"], dtype=float).reshape(-1, self.n),
            power=np.sum(omegas**2, axis=1),
            header=header,
        )


class _DelayLine:
    """FIFO that releases each command ``k`` pushes after it entered."""

    def __init__(self, k: int, idle):
        self.queue = deque([idle] * k)

    def push(self, cmd):
        self.queue.append(cmd)
        return self.queue.popleft()


# --- plant models ------------------------------------------------------------


def _slew(current: float, target: float, max_step: float) -> float:
    delta = wrap_to_pi(target - current)
    if abs(delta) <= max_step:
        return wrap_to_2pi(target)
    return wrap_to_2pi(current + math.copysign(max_step, delta))


def step_module(
    pose: Pose2D,
    cmd: tuple[float, float | None],
    spec: ModuleSpec,
    dt: float,
    steering_rate: float = 2.0 * math.pi,
) -> Pose2D:
    """Advance one module by ``dt``.

    ``cmd`` is ``(omega_wheel, theta_d)``; ``theta_d=None`` holds the heading.
    Position uses the heading at the start of the step (explicit Euler); the
    heading then slews toward ``theta_d`` at most ``steering_rate * dt``.
    """
    if not dt > 0:
        raise ParameterError("dt must be positive")
    omega, theta_d = cmd
    omega = max(-spec.max_wheel_speed, min(spec.max_wheel_speed, float(omega)))
    v = omega * spec.wheel_radius
    x = pose.x + v * math.cos(pose.theta) * dt
    y = pose.y + v * math.sin(pose.theta) * dt
    theta = pose.theta if theta_d is None else _slew(pose.theta, theta_d, steering_rate * dt)
    return Pose2D(x, y, theta)


def payload_drag(twist: StructureTwist, payload: PayloadSpec | None) -> StructureTwist:
    """Scale the realised twist down by ``1 / (1 + c * m_payload)``."""
    if payload is None:
        return twist
    f = payload.drag_factor
    return StructureTwist(twist[0] * f, twist[1] * f, twist[2] * f)


def step_structure(
    pose: Pose2D,
    omegas,
    M: VelocityMapper,
    dt: float,
    omega_max: float | None = None,
    payload: PayloadSpec | None = None,
) -> Pose2D:
    """Advance a rigid structure driven by wheel speeds ``omegas``."""
    if not dt > 0:
        raise ParameterError("dt must be positive")
    w = np.asarray(omegas, dtype=float)
    if omega_max is not None:
        w = saturate_wheels(w, omega_max)
    body = payload_drag(twist_from_wheels(M, w), payload)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    vx = c * body.v_sx - s * body.v_sy
    vy = s * body.v_sx + c * body.v_sy
    return Pose2D(pose.x + vx * dt, pose.y + vy * dt, pose.theta + body.omega_s * dt)


def structure_frame_twist(world_twist, theta: float) -> np.ndarray:
    """Rotate a world-frame twist into the structure frame at heading ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    vx, vy, w = world_twist
    return np.array([c * vx + s * vy, -s * vx + c * vy, w])


# --- scenario runners --------------------------------------------------------


def _module_ref_vel(ref_pose: Pose2D, ref_twist: StructureTwist) -> tuple[float, float]:
    """Signed speed along the reference heading and the reference turn rate."""
    v_r = ref_twist[0] * math.cos(ref_pose.theta) + ref_twist[1] * math.sin(ref_pose.theta)
    return v_r, ref_twist[2]


def _offset_pose(pose: Pose2D, offset) -> Pose2D:
    return Pose2D(pose.x + offset[0], pose.y + offset[1], pose.theta + offset[2])


def _run_single(cfg: ScenarioConfig, traj: Trajectory) -> ScenarioTrace:
    spec, dt = cfg.module, cfg.dt
    ref0, _ = traj.sample(0.0)
    pose = _offset_pose(ref0, cfg.initial_offset)
    heading_cmd = pose.theta
    delay = _DelayLine(cfg.delay_steps, (0.0, None))
    rec = _Recorder(1)
    for j in range(cfg.n_steps):
        t = j * dt
        ref_pose, ref_twist = traj.sample(t)
        v_d, _, heading_cmd = module_control_step(
            pose, ref_pose, _module_ref_vel(ref_pose, ref_twist), cfg.module_gains, dt,
            heading_base=heading_cmd,
        )
        omega = float(saturate_wheels([v_d / spec.wheel_radius], spec.max_wheel_speed)[0])
        applied = delay.push((omega, heading_cmd))
        rec.add(t, STAGE_TRACK, pose, ref_pose, [pose], [applied[0]], [omega])
        pose = step_module(pose, applied, spec, dt, cfg.navigation.steering_rate)
    header = {"kind": cfg.kind, "trajectory": traj.describe(), "n_modules": 1}
    return rec.finish(dt, header)


class _StructureRun:
    """State machine for the multi-module scenario kinds."""

    def __init__(self, cfg: ScenarioConfig, traj: Trajectory):
        self.cfg = cfg
        self.traj = traj
        self.spec = cfg.module
        self.dt = cfg.dt
        self.formation = cfg.formation
        self.n = cfg.formation.n
        self.rec = _Recorder(self.n)
        self.t = 0.0
        self.step = 0
        self.target = traj.sample(0.0)[0]
        self.header: dict = {"kind": cfg.kind, "trajectory": traj.describe(), "n_modules": self.n}
        self.metrics: dict = {}

    # helpers

    def _tick(self):
        self.step += 1
        self.t = self.step * self.dt

    def _docking_poses(self, structure_pose: Pose2D) -> np.ndarray:
        return np.array(
            [world_from_structure(structure_pose, r) for r in self.formation.positions]
        )

    def _resolve_headings(self) -> HeadingConfiguration:
        cfg = self.cfg
        if cfg.headings is not None:
            if cfg.headings.n != self.n:
                raise ConfigurationError(
                    f"{cfg.headings.n} headings given for {self.n} modules"
                )
            self.header["headings_source"] = "config"
            return cfg.headings
        result = optimize_headings(self.formation, self.spec.wheel_radius, cfg.optimizer)
        self.header["headings_source"] = "optimizer"
        self.header["objective"] = result.objective_value
        return result.headings

    # stage 1 and 2

    def _spawn(self) -> list[Pose2D]:
        cfg, nav = self.cfg, self.cfg.navigation
        rng = np.random.default_rng(cfg.rng_seed)
        targets = self._docking_poses(self.target)
        if cfg.initial_positions is not None:
            start = np.asarray(cfg.initial_positions, dtype=float)
            if start.shape != (self.n, 2):
                raise ConfigurationError(f"initial_positions must be ({self.n}, 2)")
        else:
            start = np.empty((self.n, 2))
            for i, r in enumerate(self.formation.positions):
                norm = math.hypot(*r)
                phi = math.atan2(r[1], r[0]) if norm > 1e-12 else 2 * math.pi * i / self.n
                phi += self.target.theta
                jitter = rng.normal(0.0, nav.spawn_jitter, size=2)
                start[i] = targets[i] + nav.spawn_distance * np.array(
                    [math.cos(phi), math.sin(phi)]
                ) + jitter
        headings = rng.uniform(0.0, 2 * math.pi, size=self.n)
        return [Pose2D(start[i, 0], start[i, 1], headings[i]) for i in range(self.n)]

    def _navigate(self, poses: list[Pose2D]) -> list[Pose2D]:
        cfg, nav, spec, dt = self.cfg, self.cfg.navigation, self.spec, self.dt
        targets = self._docking_poses(self.target)
        dist = [math.dist(p.position, targets[i]) for i, p in enumerate(poses)]
        order = sorted(range(self.n), key=lambda i: (dist[i], i))
        depart = {i: rank * nav.stagger for rank, i in enumerate(order)}
        phase = ["wait"] * self.n
        plans: list[PointToPoint | None] = [None] * self.n
        plan_start = [0.0] * self.n
        heading_cmd = [p.theta for p in poses]
        lines = [_DelayLine(cfg.delay_steps, (0.0, None)) for _ in range(self.n)]
        t0 = self.t
        while not all(ph == "captured" for ph in phase):
            if self.t - t0 > nav.max_time:
                raise ScenarioError("1 (navigate)", "modules did not reach their docking poses in time")
            commands = []
            for i, pose in enumerate(poses):
                goal = targets[i]
                if phase[i] == "wait" and self.t - t0 >= depart[i] - 1e-12:
                    phase[i] = "align"
                if phase[i] == "align":
                    bearing = math.atan2(goal[1] - pose.y, goal[0] - pose.x)
                    if abs(wrap_to_pi(bearing - pose.theta)) < 1e-9:
                        phase[i] = "drive"
                        length = math.dist(pose.position, goal)
                        plans[i] = PointToPoint(
                            (pose.x, pose.y, bearing),
                            (float(goal[0]), float(goal[1]), bearing),
                            max(1.875 * length / nav.cruise_speed, dt),
                        )
                        plan_start[i] = self.t
                        heading_cmd[i] = bearing
                    else:
                        heading_cmd[i] = bearing
                        commands.append((0.0, bearing))
                        continue
                if phase[i] == "drive" and math.dist(pose.position, goal) <= cfg.docking.align_range:
                    phase[i] = "captured"
                if phase[i] == "drive":
                    ref_pose, ref_twist = plans[i].sample(self.t - plan_start[i])
                    v_d, _, heading_cmd[i] = module_control_step(
                        pose, ref_pose, _module_ref_vel(ref_pose, ref_twist),
                        cfg.module_gains, dt, heading_base=heading_cmd[i],
                    )
                    omega = float(saturate_wheels([v_d / spec.wheel_radius],
                                                  spec.max_wheel_speed)[0])
                    commands.append((omega, heading_cmd[i]))
                else:
                    commands.append((0.0, None))
            # a captured module stops at once: the magnets hold it
            applied = [
                (0.0, None) if phase[i] == "captured" else lines[i].push(commands[i])
                for i in range(self.n)
            ]
            self._record_loose(STAGE_NAVIGATE, poses, [a[0] for a in applied],
                               [c[0] for c in commands])
            poses = [
                step_module(p, applied[i], spec, dt, nav.steering_rate)
                for i, p in enumerate(poses)
            ]
            self._tick()
        self.metrics["capture_offsets"] = [
            math.dist(p.position, targets[i]) for i, p in enumerate(poses)
        ]
        return poses

    def _dock(self, poses: list[Pose2D]) -> None:
        """Passive magnetic pull of captured modules onto their docking positions."""
        nav = self.cfg.navigation
        targets = self._docking_poses(self.target)
        start = np.array([p.position for p in poses])
        steps = max(1, int(round(nav.dock_time / self.dt)))
        zeros = [0.0] * self.n
        for k in range(steps):
            frac = k / steps
            current = [
                Pose2D(*(start[i] + frac * (targets[i] - start[i])), poses[i].theta)
                for i in range(self.n)
            ]
            self._record_loose(STAGE_DOCK, current, zeros, zeros)
            self._tick()
        report = check_formation_feasible(
            FormationConfiguration(self.formation.positions, self.formation.docking_edges),
            self.cfg.docking,
        )
        if not report.connected:
            raise ScenarioError("2 (dock)", "docked modules do not form a connected structure")

    def _record_loose(self, stage, poses, applied, commanded):
        centroid = np.mean([p.position for p in poses], axis=0)
        pose = Pose2D(centroid[0], centroid[1], self.target.theta)
        self.rec.add(self.t, stage, pose, self.target, poses, applied, commanded)

    # stage 3 and 4

    def _modules_rigid(self, pose: Pose2D, wheel_headings) -> list[Pose2D]:
        return [
            Pose2D(*world_from_structure(pose, r), wheel_headings[i])
            for i, r in enumerate(self.formation.positions)
        ]

    def _reorient(self, pose: Pose2D, wheel_world: list[float], headings) -> list[float]:
        nav = self.cfg.navigation
        goal = [pose.theta + a for a in headings.angles]
        max_step = nav.steering_rate * self.dt
        zeros = [0.0] * self.n
        t0 = self.t
        while any(abs(wrap_to_pi(g - w)) > 1e-12 for g, w in zip(goal, wheel_world)):
            if self.t - t0 > nav.max_time:
                raise ScenarioError("3 (reorient)", "wheels failed to reach the heading configuration")
            self.rec.add(self.t, STAGE_REORIENT, pose, self.target,
                         self._modules_rigid(pose, wheel_world), zeros, zeros)
            wheel_world = [_slew(w, g, max_step) for w, g in zip(wheel_world, goal)]
            self._tick()
        return [wrap_to_2pi(g) for g in goal]

    def _track(self, pose: Pose2D, M: VelocityMapper, headings) -> Pose2D:
        cfg, spec, dt = self.cfg, self.spec, self.dt
        integ = IntegratorState()
        line = _DelayLine(cfg.delay_steps, np.zeros(self.n))
        t0 = self.t
        module_mass = spec.mass
        friction_share = 0.0
        if cfg.payload is not None:
            friction_share = (
                cfg.payload.friction_coefficient * cfg.payload.mass * GRAVITY / self.n
            )
        prev_vel = None
        peak_force = 0.0
        for j in range(cfg.n_steps):
            ref_pose, ref_twist = self.traj.sample(j * dt)
            twist_d, integ = structure_control_step(
                pose, ref_pose, ref_twist, cfg.structure_gains, integ, dt
            )
            body = structure_frame_twist(twist_d, pose.theta)
            omega = saturate_wheels(M.matrix @ body, spec.max_wheel_speed)
            applied = line.push(omega)
            wheels = [pose.theta + a for a in headings.angles]
            self.rec.add(self.t, STAGE_TRACK, pose, ref_pose,
                         self._modules_rigid(pose, wheels), applied, omega)
            new_pose = step_structure(pose, applied, M, dt, spec.max_wheel_speed, cfg.payload)
            vel = np.array(
                [
                    np.subtract(world_from_structure(new_pose, r), world_from_structure(pose, r))
                    / dt
                    for r in self.formation.positions
                ]
            )
            if prev_vel is not None:
                accel = np.linalg.norm(vel - prev_vel, axis=1) / dt
                peak_force = max(peak_force, float(np.max(accel)) * module_mass + friction_share)
            prev_vel = vel
            pose = new_pose
            self._tick()
        budget = cfg.docking.magnet_tensile_force
        self.metrics["peak_module_load"] = peak_force
        self.metrics["tensile_budget"] = budget
        self.metrics["strength_ok"] = peak_force <= budget
        if peak_force > budget:
            log.warning(
                "peak module load %.3g N exceeds the magnet tensile budget %.3g N",
                peak_force, budget,
            )
        return pose

    def run(self) -> ScenarioTrace:
        cfg = self.cfg
        report = check_formation_feasible(self.formation, cfg.docking)
        if not report.feasible:
            raise InfeasibleFormationError(
                "formation is infeasible: " + "; ".join(report.problems), report
            )
        headings = self._resolve_headings()
        self.header["headings"] = [float(a) for a in headings.angles]

        if cfg.kind == "transport":
            poses = self._navigate(self._spawn())
            self._dock(poses)
            structure_pose = self.target
            wheel_world = [p.theta for p in poses]
        else:
            structure_pose = _offset_pose(self.target, cfg.initial_offset)
            initial = cfg.initial_headings or HeadingConfiguration(np.zeros(self.n))
            if initial.n != self.n:
                raise ConfigurationError("initial_headings length does not match formation")
            wheel_world = [structure_pose.theta + a for a in initial.angles]

        try:
            M = build_velocity_mapper(self.formation, headings, self.spec.wheel_radius)
            metrics = mapper_metrics(M)
            if metrics.rank < 3:
                raise DegenerateMapperError(
                    f"degenerate velocity mapper: rank {metrics.rank} < 3, the structure "
                    "cannot move omnidirectionally with these headings",
                    rank=metrics.rank,
                )
        except DegenerateMapperError as exc:
            raise ScenarioError("3 (reorient)", str(exc)) from exc
        self.header["condition_number"] = metrics.condition_number
        self.header["sigma_max"] = metrics.sigma_max

        self._reorient(structure_pose, wheel_world, headings)
        self._track(structure_pose, M, headings)
        self.header["metrics"] = self.metrics
        return self.rec.finish(self.dt, self.header)


def run_scenario(config: ScenarioConfig) -> ScenarioTrace:
    """Run one scenario deterministically and return its trace."""
    traj = make_trajectory(config.trajectory.get("kind", ""), config.trajectory)
    if config.kind == "single_track":
        return _run_single(config, traj)
    return _StructureRun(config, traj).run()


def energy_of_trace(trace: ScenarioTrace) -> float:
    """Sum of squared wheel speeds integrated over the tracking stage."""
    if len(trace) == 0:
        raise TraceError("energy of an empty trace is undefined")
    mask = trace.stage_mask(STAGE_TRACK)
    return float(np.sum(trace.power[mask]) * trace.dt)


def cumulative_energy(trace: ScenarioTrace) -> tuple[np.ndarray, np.ndarray]:
    mask = trace.stage_mask(STAGE_TRACK)
    t = trace.t[mask]
    return t - (t[0] if t.size else 0.0), np.cumsum(trace.power[mask]) * trace.dt


def trace_metrics(trace: ScenarioTrace) -> dict:
    """Summary numbers for a finished run."""
    track = trace.stage_mask(STAGE_TRACK)
    err = trace.error[track]
    pos_err = np.hypot(err[:, 0], err[:, 1])
    half = pos_err.shape[0] // 2
    out = {
        "kind": trace.header.get("kind"),
        "n_modules": trace.n_modules,
        "steps": len(trace),
        "energy": energy_of_trace(trace),
        "stage_durations": trace.stage_durations(),
        "final_position_error": float(pos_err[-1]) if pos_err.size else math.nan,
        "final_heading_error": float(abs(err[-1, 2])) if pos_err.size else math.nan,
        "rms_position_error": float(np.sqrt(np.mean(pos_err**2))) if pos_err.size else math.nan,
        "steady_position_error": float(np.max(pos_err[half:])) if pos_err.size else math.nan,
        "steady_heading_error": float(np.max(np.abs(err[half:, 2]))) if pos_err.size else math.nan,
        "peak_wheel_speed": float(np.max(np.abs(trace.omegas))),
        "final_pose": [float(v) for v in trace.pose[-1]],
    }
    extra = trace.header.get("metrics")
    if extra:
        out.update(extra)
    return out


def with_overrides(config: ScenarioConfig, **changes) -> ScenarioConfig:
    return replace(config, **changes)
