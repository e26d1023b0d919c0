"""CSV tables, SVG plots and JSON summaries.

Numbers are written with :func:`repr` of Python floats: the shortest
string that round-trips exactly, independent of locale.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .dynamics import Trajectory


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def trajectory_header(traj: Trajectory) -> list[str]:
    return (
        ["t"]
        + [f"pop|{lbl}>" for lbl in traj.labels]
        + ["target_population", "V"]
        + [f"f|{lbl}" for lbl in traj.field_labels]
    )


def sample_rows(traj: Trajectory, every: int = 1) -> np.ndarray:
    """Indices of recorded rows: every ``every``-th step plus the last."""
    n = len(traj)
    idx = np.arange(0, n, max(1, int(every)))
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def emit_csv(traj: Trajectory, path: str | Path, every: int = 1) -> Path:
    """Write one row per recorded time.

    The field columns hold the amplitude applied on the step that starts
    at that time; the last row repeats the final step's amplitude.
    """
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise OSError(f"directory {path.parent} does not exist")
    n_steps = len(traj.fields)
    tp = traj.target_population if traj.target_population is not None else np.full(len(traj), np.nan)
    lv = traj.lyapunov if traj.lyapunov is not None else np.full(len(traj), np.nan)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trajectory_header(traj))
        for i in sample_rows(traj, every):
            step = min(i, n_steps - 1)
            fields = traj.fields[step] if n_steps else np.zeros(len(traj.field_labels))
            row = [traj.times[i], *traj.populations[i], tp[i], lv[i], *fields]
            writer.writerow([_fmt(x) for x in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and float matrix of a CSV written by this module."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(x) if x != "" else np.nan for x in row] for row in reader]
    return header, np.asarray(data, dtype=float).reshape(len(data), len(header))


def emit_table(rows: Sequence[dict[str, Any]], path: str | Path) -> Path:
    """Write a list of homogeneous-ish dicts; columns in first-seen order."""
    path = Path(path)
    columns: list[str] = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(r.get(c)) for c in columns])
    return path


def write_json(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    if hasattr(obj, "__dataclass_fields__"):
        obj = asdict(obj)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False, default=_jsonable) + "\n", encoding="utf-8")
    return path


def _jsonable(x: Any) -> Any:
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def emit_svg(
    traj: Trajectory,
    path: str | Path,
    columns: Iterable[str] | None = None,
    title: str = "",
) -> Path:
    """Line plot of populations (top) and control fields (bottom).

    ``columns`` selects basis labels to draw; by default every basis state
    whose population exceeds 0.05 at some time.  The target population is
    always drawn.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    if columns is None:
        keep = [lbl for k, lbl in enumerate(traj.labels) if traj.populations[:, k].max() > 0.05]
    else:
        keep = list(columns)
    plt.rcParams["svg.hashsalt"] = "majorana-bell"
    fig, (ax_pop, ax_f) = plt.subplots(2, 1, figsize=(6.4, 5.6), sharex=True, height_ratios=[2, 1])
    t = traj.times
    for lbl in keep:
        ax_pop.plot(t, traj.population_of(lbl), lw=1.2, label=f"|{lbl}⟩")
    if traj.target_population is not None:
        ax_pop.plot(t, traj.target_population, "k--", lw=1.5, label="target")
    ax_pop.set_ylabel("population")
    ax_pop.set_ylim(-0.02, 1.02)
    ax_pop.legend(fontsize=7, ncol=2, loc="best")
    if title:
        ax_pop.set_title(title, fontsize=9)
    tf = t[:-1] if len(traj.fields) else t[:0]
    for k, lbl in enumerate(traj.field_labels):
        if np.any(traj.fields[:, k] != 0):
            ax_f.plot(tf, traj.fields[:, k], lw=1.0, label=lbl)
    ax_f.set_xlabel("t")
    ax_f.set_ylabel("field")
    if ax_f.lines:
        ax_f.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_eigen_svg(rows: Sequence[dict[str, Any]], path: str | Path, labels: Sequence[str], title: str = "") -> Path:
    """Squared amplitudes of the two lowest eigenvectors versus the swept value."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    plt.rcParams["svg.hashsalt"] = "majorana-bell"
    levels = sorted({r["level"] for r in rows})
    fig, axes = plt.subplots(len(levels), 1, figsize=(6.4, 2.6 * len(levels)), sharex=True, squeeze=False)
    for ax, level in zip(axes[:, 0], levels):
        sub = [r for r in rows if r["level"] == level]
        x = [r["value"] for r in sub]
        for lbl in labels:
            y = [r[f"amp|{lbl}>"] ** 2 for r in sub]
            if max(y, default=0) > 0.05:
                ax.plot(x, y, lw=1.2, label=f"|{lbl}⟩")
        ax.set_ylabel(f"level {level} weight")
        ax.legend(fontsize=7, ncol=2)
    axes[-1, 0].set_xlabel("swept value")
    if title:
        axes[0, 0].set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
