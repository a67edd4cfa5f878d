"""Command-line entry point.

Exit codes: 0 success, 2 bad input (config, trace or arguments), 3 infeasible
formation, 4 optimizer failure, 5 a simulation stage failed.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import TOMLDecodeError, config_digest, dump_config, load_config, tomllib
from .core import HeadingConfiguration
from .docking import check_formation_feasible
from .errors import (
    ConfigurationError,
    FormationSizeError,
    InfeasibleFormationError,
    OptimizerError,
    ParameterError,
    ScenarioError,
    TraceError,
)
from .kinematics import build_velocity_mapper, mapper_metrics
from .optimizer import optimize_headings, tangential_headings
from .plotting import plot_energy_comparison, plot_trace
from .simulator import ScenarioConfig, energy_of_trace, run_scenario, trace_metrics
from .traceio import json_safe, read_trace, write_trace

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_OPTIMIZER, EXIT_STAGE = 0, 2, 3, 4, 5


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, CommandError):
        return exc.code
    if isinstance(exc, (FormationSizeError, InfeasibleFormationError)):
        return EXIT_INFEASIBLE
    if isinstance(exc, OptimizerError):
        return EXIT_OPTIMIZER
    if isinstance(exc, ScenarioError):
        return EXIT_STAGE
    if isinstance(exc, (TOMLDecodeError, ConfigurationError, ParameterError, TraceError, OSError)):
        return EXIT_INPUT
    raise exc


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write_json(path: Path, data) -> Path:
    text = json.dumps(json_safe(data), sort_keys=True, indent=2) + "\n"
    path.write_bytes(text.encode("utf-8"))
    return path


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["rng_seed"] = args.seed
        changes["optimizer"] = replace(cfg.optimizer, rng_seed=args.seed)
    if getattr(args, "dt", None) is not None:
        changes["dt"] = args.dt
    return replace(cfg, **changes) if changes else cfg


def _require_feasible(cfg: ScenarioConfig) -> None:
    if cfg.formation is None:
        raise ConfigurationError("config has no [formation]")
    report = check_formation_feasible(cfg.formation, cfg.docking)
    if not report.feasible:
        raise InfeasibleFormationError("formation is infeasible: " + "; ".join(report.problems), report)


def _metrics_dict(metrics) -> dict:
    return {
        "rank": metrics.rank,
        "condition_number": metrics.condition_number,
        "sigma_max": metrics.sigma_max,
        "singular_values": [float(s) for s in metrics.singular_values],
    }


def cmd_optimize(args) -> int:
    cfg = _load(args)
    _require_feasible(cfg)
    result = optimize_headings(cfg.formation, cfg.module.wheel_radius, cfg.optimizer)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    angles = [float(a) for a in result.headings.angles]
    path = _write_json(
        out / "headings.json",
        {
            "headings": angles,
            "headings_deg": [math.degrees(a) for a in angles],
            "objective": result.objective_value,
            "metrics": _metrics_dict(result.metrics),
            "starts_converged": result.starts_converged,
            "config_digest": config_digest(cfg),
        },
    )
    print(f"objective {result.objective_value:.6g} -> {path}")
    return EXIT_OK


def _run_into(cfg: ScenarioConfig, out: Path) -> tuple[object, dict, list[Path]]:
    trace = run_scenario(cfg)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    metrics = trace_metrics(trace)
    written = [
        write_trace(trace, out / "trace.csv", {"config_digest": digest, "rng_seed": cfg.rng_seed}),
        _write_json(out / "metrics.json", metrics),
    ]
    (out / "config.toml").write_bytes(dump_config(cfg).encode("utf-8"))
    written.append(out / "config.toml")
    return trace, metrics, written


def _manifest(out: Path, cfg: ScenarioConfig, started: str, outputs: list[Path]) -> Path:
    return _write_json(
        out / "manifest.json",
        {
            "tool": "omnicage",
            "version": __version__,
            "config_digest": config_digest(cfg),
            "rng_seed": cfg.rng_seed,
            "started": started,
            "finished": _now(),
            "outputs": [str(p.relative_to(out)) for p in outputs],
        },
    )


def cmd_run(args) -> int:
    started = _now()
    cfg = _load(args)
    out = Path(args.out)
    _, metrics, written = _run_into(cfg, out)
    _manifest(out, cfg, started, written)
    print(f"energy {metrics['energy']:.6g}, final position error {metrics['final_position_error']:.3g} m")
    return EXIT_OK


def load_headings_list(path: str | Path) -> list[dict]:
    """Read ``[[configurations]]`` entries: ``name`` plus one of ``angles``,
    ``angles_deg`` or ``rule`` (``"optimized"`` or ``"tangential"``)."""
    doc = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    entries = doc.get("configurations")
    if not isinstance(entries, list) or len(entries) < 2:
        raise ConfigurationError("headings list needs at least two [[configurations]] entries")
    out = []
    for k, entry in enumerate(entries):
        name = entry.get("name", f"config{k + 1}")
        given = [key for key in ("angles", "angles_deg", "rule") if key in entry]
        if len(given) != 1:
            raise ConfigurationError(f"configuration {name!r}: give exactly one of angles, angles_deg, rule")
        if "angles_deg" in entry:
            spec = np.radians(np.asarray(entry["angles_deg"], dtype=float))
        elif "angles" in entry:
            spec = np.asarray(entry["angles"], dtype=float)
        else:
            spec = entry["rule"]
            if spec not in ("optimized", "tangential"):
                raise ConfigurationError(f"configuration {name!r}: unknown rule {spec!r}")
        out.append({"name": str(name), "spec": spec})
    return out


def _resolve(entry: dict, cfg: ScenarioConfig) -> HeadingConfiguration:
    spec = entry["spec"]
    if isinstance(spec, str):
        if spec == "optimized":
            return optimize_headings(cfg.formation, cfg.module.wheel_radius, cfg.optimizer).headings
        return HeadingConfiguration(tangential_headings(cfg.formation))
    if spec.shape != (cfg.formation.n,):
        raise ConfigurationError(f"configuration {entry['name']!r} has {spec.size} angles, formation has {cfg.formation.n}")
    return HeadingConfiguration(spec)


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name)


def cmd_compare(args) -> int:
    started = _now()
    cfg = _load(args)
    _require_feasible(cfg)
    entries = load_headings_list(args.headings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, written = [], []
    for entry in entries:
        headings = _resolve(entry, cfg)
        row = {"name": entry["name"], "headings": [float(a) for a in headings.angles]}
        m = mapper_metrics(build_velocity_mapper(cfg.formation, headings, cfg.module.wheel_radius))
        if m.rank < 3:
            row.update(status=f"infeasible: mapper rank {m.rank} < 3", energy=None, rank=None)
            rows.append(row)
            continue
        run_dir = out / "runs" / _safe_name(entry["name"])
        try:
            trace, _, files = _run_into(replace(cfg, headings=headings), run_dir)
        except Exception as exc:
            code = exit_code_for(exc)
            raise CommandError(code, f"configuration {entry['name']!r}: {exc}") from exc
        written += files
        row.update(status="ok", energy=energy_of_trace(trace), trace=trace)
        rows.append(row)
    ranked = sorted((r for r in rows if r["energy"] is not None), key=lambda r: r["energy"])
    for k, row in enumerate(ranked, start=1):
        row["rank"] = k
    order = ranked + [r for r in rows if r["energy"] is None]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "name", "energy", "status", "headings_deg"])
    for row in order:
        writer.writerow(
            [
                "" if row["rank"] is None else row["rank"],
                row["name"],
                "" if row["energy"] is None else repr(row["energy"]),
                row["status"],
                " ".join(f"{math.degrees(a):.4f}" for a in row["headings"]),
            ]
        )
    table = out / "energy_table.csv"
    table.write_bytes(buf.getvalue().encode("utf-8"))
    written += [table, plot_energy_comparison(order, out / "energy.svg")]
    _manifest(out, cfg, started, written)
    for row in order:
        rank = "-" if row["rank"] is None else row["rank"]
        energy = "infeasible" if row["energy"] is None else f"{row['energy']:.6g}"
        print(f"{rank}\t{row['name']}\t{energy}")
    return EXIT_OK


def cmd_plot(args) -> int:
    trace = read_trace(args.trace)
    path = plot_trace(trace, args.out)
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omnicage", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("config", help="scenario TOML file")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--dt", type=float, help="override the simulation step [s]")

    p = sub.add_parser("optimize", help="optimise the wheel headings of a formation")
    common(p, ".")
    p.set_defaults(func=cmd_optimize)
    p = sub.add_parser("run", help="simulate a scenario and write trace, metrics and manifest")
    common(p, "run_out")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("compare", help="rank heading configurations by tracking energy")
    common(p, "compare_out")
    p.add_argument("headings", help="TOML list of [[configurations]]")
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("plot", help="render a trace CSV to SVG")
    p.add_argument("trace", help="trace CSV written by 'run'")
    p.add_argument("--out", default="trace.svg", help="SVG file to write")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except Exception as exc:
        code = exit_code_for(exc)
        print(f"omnicage: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
