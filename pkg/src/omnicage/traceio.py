"""CSV serialisation of scenario traces.

The file starts with ``#`` comment lines holding run metadata (one
``key: json`` pair per line), followed by a header row and one row per step.
Floats are written with ``repr`` so equal traces give equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import TraceError
from .simulator import ScenarioTrace

FORMAT = "omnicage-trace/1"
UNITS = "t[s] x,y[m] theta[rad] omega[rad/s] power[rad^2/s^2]"


def trace_columns(n: int) -> list[str]:
    cols = ["t", "stage", "x", "y", "theta", "ref_x", "ref_y", "ref_theta", "e_x", "e_y", "e_theta"]
    cols += [f"omega_{i + 1}" for i in range(n)]
    for i in range(n):
        cols += [f"x_{i + 1}", f"y_{i + 1}", f"heading_{i + 1}"]
    cols.append("power")
    return cols


def json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return json_safe(value.item())
    return value


def format_trace(trace: ScenarioTrace, meta: dict | None = None) -> str:
    if len(trace) == 0:
        raise TraceError("cannot write an empty trace")
    header = {"format": FORMAT, "units": UNITS, "dt": trace.dt}
    header.update(trace.header)
    header.update(meta or {})
    out = io.StringIO()
    for key in sorted(header):
        out.write(f"# {key}: {json.dumps(json_safe(header[key]), sort_keys=True)}\n")
    n = trace.n_modules
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(trace_columns(n))
    for j in range(len(trace)):
        row = [repr(float(trace.t[j])), str(int(trace.stage[j]))]
        row += [repr(float(v)) for v in trace.pose[j]]
        row += [repr(float(v)) for v in trace.reference[j]]
        row += [repr(float(v)) for v in trace.error[j]]
        row += [repr(float(v)) for v in trace.omegas[j]]
        row += [repr(float(v)) for v in trace.module_poses[j].ravel()]
        row.append(repr(float(trace.power[j])))
        writer.writerow(row)
    return out.getvalue()


def write_trace(trace: ScenarioTrace, path: str | Path, meta: dict | None = None) -> Path:
    path = Path(path)
    path.write_bytes(format_trace(trace, meta).encode("utf-8"))
    return path


def parse_trace(text: str) -> ScenarioTrace:
    """Rebuild a trace from CSV text. The commanded (pre-delay) wheel speeds
    are not stored, so they come back equal to the applied ones."""
    header: dict = {}
    lines = text.splitlines()
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("#"):
            break
        key, sep, value = line[1:].partition(":")
        if not sep:
            raise TraceError(f"line {body_start + 1}: malformed header line")
        try:
            header[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            raise TraceError(f"line {body_start + 1}: header value is not JSON") from None
    else:
        body_start = len(lines)
    rows = list(csv.reader(lines[body_start:]))
    if not rows:
        raise TraceError("trace has no column header")
    columns, data = rows[0], [r for r in rows[1:] if r]
    if not data:
        raise TraceError("trace has no data rows")
    n = sum(1 for c in columns if c.startswith("omega_"))
    if columns != trace_columns(n):
        raise TraceError("unexpected trace columns")
    try:
        arr = np.array(data, dtype=float)
    except ValueError:
        raise TraceError("trace contains non-numeric values or ragged rows") from None
    bad = np.flatnonzero(~np.all(np.isfinite(arr), axis=1))
    if bad.size:
        raise TraceError(f"data row {int(bad[0])} contains non-finite values")
    omegas = arr[:, 11 : 11 + n]
    dt = header.pop("dt", None)
    if dt is None:
        dt = float(arr[1, 0] - arr[0, 0]) if len(arr) > 1 else 0.0
    return ScenarioTrace(
        dt=float(dt),
        t=arr[:, 0],
        stage=arr[:, 1].astype(int),
        pose=arr[:, 2:5],
        reference=arr[:, 5:8],
        error=arr[:, 8:11],
        module_poses=arr[:, 11 + n : 11 + 4 * n].reshape(-1, n, 3),
        omegas=omegas,
        commanded=omegas.copy(),
        power=arr[:, -1],
        header=header,
    )


def read_trace(path: str | Path) -> ScenarioTrace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))
