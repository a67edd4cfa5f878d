"""SVG figures for traces and energy comparisons.

Figures are written as SVG with a fixed hash salt and
no date stamp, so the same data always produces the same file.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .simulator import STAGE_TRACK, ScenarioTrace, cumulative_energy  # noqa: E402

REFERENCE_GID = "trajectory-reference"
ACTUAL_GID = "trajectory-actual"
_RC = {"svg.hashsalt": "omnicage", "svg.fonttype": "none"}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_trace(trace: ScenarioTrace, path: str | Path) -> Path:
    """Path plot (reference dashed, actual solid) beside per-axis errors."""
    path = Path(path)
    track = trace.stage_mask(STAGE_TRACK)
    if not np.any(track):
        track = np.ones(len(trace), dtype=bool)
    t = trace.t[track]
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=(10, 5))
        grid = fig.add_gridspec(3, 2, width_ratios=(1.2, 1.0))
        ax = fig.add_subplot(grid[:, 0])
        ref, pose = trace.reference[track], trace.pose[track]
        (line,) = ax.plot(ref[:, 0], ref[:, 1], "--", color="0.4", label="reference")
        line.set_gid(REFERENCE_GID)
        (line,) = ax.plot(pose[:, 0], pose[:, 1], "-", color="C0", label="actual")
        line.set_gid(ACTUAL_GID)
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.legend(loc="best")
        labels = ("e_x [m]", "e_y [m]", "e_theta [rad]")
        for k in range(3):
            sub = fig.add_subplot(grid[k, 1])
            sub.plot(t, trace.error[track, k], color=f"C{k + 1}")
            sub.set_ylabel(labels[k])
            if k == 2:
                sub.set_xlabel("t [s]")
        fig.tight_layout()
        return _save(fig, path)


def plot_energy_comparison(rows: list[dict], path: str | Path) -> Path:
    """Cumulative energy of each ranked run; rank 1 is annotated.

    Each row needs ``name`` and ``rank`` (``None`` when infeasible) and,
    when ranked, ``trace``.
    """
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for row in rows:
            if row.get("rank") is None:
                continue
            t, e = cumulative_energy(row["trace"])
            style = "-" if row["rank"] == 1 else "--"
            ax.plot(t, e, style, label=f"{row['rank']}. {row['name']}")
            if row["rank"] == 1 and t.size:
                ax.annotate(
                    "rank 1",
                    xy=(t[-1], e[-1]),
                    xytext=(-60, 20),
                    textcoords="offset points",
                    arrowprops={"arrowstyle": "->"},
                )
        ax.set_xlabel("tracking time [s]")
        ax.set_ylabel("cumulative sum of squared wheel speeds [rad^2/s]")
        ax.legend(loc="upper left")
        fig.tight_layout()
        return _save(fig, path)
