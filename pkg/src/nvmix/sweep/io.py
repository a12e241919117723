"""CSV and heatmap output for polarization maps."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .config import SweepAxis
from .grid import Overlay, SweepGrid

COLUMNS = "x,y,P,dominance_ratio,l_star"


class EmitError(OSError):
    pass


def fmt(v: float) -> str:
    """Positional decimal with 9 significant digits."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return np.format_float_positional(v, precision=9, unique=False, fractional=False, trim="-")


def csv_text(grid: SweepGrid) -> str:
    lines = []
    for name, ax in (("x", grid.x_axis), ("y", grid.y_axis)):
        lines.append(f"# axis {name} {ax.parameter} {ax.unit} {fmt(ax.start)} {fmt(ax.stop)} {ax.points}")
    n_flag = int(np.count_nonzero(grid.flags))
    if n_flag:
        lines.append(f"# flagged {n_flag}")
    for ov in grid.overlays:
        lines.append(f"# overlay {ov.kind} {ov.l} {ov.axis} {fmt(ov.coordinate)}")
    lines.append(COLUMNS)
    xs, ys = grid.x, grid.y
    fx = [fmt(v) for v in xs]
    for iy, y in enumerate(ys):
        fy = fmt(y)
        p_row, r_row, l_row = grid.P[iy], grid.ratio[iy], grid.l_star[iy]
        for ix in range(len(xs)):
            lines.append(f"{fx[ix]},{fy},{fmt(p_row[ix])},{fmt(r_row[ix])},{int(l_row[ix])}")
    return "\n".join(lines) + "\n"


def write_csv(grid: SweepGrid, path) -> None:
    path = Path(path)
    try:
        path.write_text(csv_text(grid), encoding="ascii")
    except OSError as exc:
        raise EmitError(f"cannot write CSV {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> SweepGrid:
    """Parse a CSV written by :func:`write_csv` back into a grid."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise EmitError(f"cannot read CSV {path}: {exc.strerror or exc}") from exc
    axes = {}
    overlays = []
    rows = []
    for line in text.splitlines():
        if line.startswith("# axis "):
            _, _, name, param, _unit, start, stop, points = line.split()
            axes[name] = SweepAxis(param, float(start), float(stop), int(points))
        elif line.startswith("# overlay "):
            _, _, kind, l, axis, coord = line.split()
            overlays.append(Overlay(kind, int(l), axis, float(coord)))
        elif line.startswith("#") or line == COLUMNS or not line:
            continue
        else:
            rows.append(line.split(","))
    if set(axes) != {"x", "y"}:
        raise ValueError(f"{path}: missing axis header lines")
    ny, nx = axes["y"].points, axes["x"].points
    if len(rows) != ny * nx:
        raise ValueError(f"{path}: expected {ny * nx} rows, found {len(rows)}")
    data = np.array([[float(r[2]), float(r[3])] for r in rows]).reshape(ny, nx, 2)
    ls = np.array([int(r[4]) for r in rows], dtype=np.int64).reshape(ny, nx)
    return SweepGrid(
        x_axis=axes["x"],
        y_axis=axes["y"],
        P=data[..., 0],
        ratio=data[..., 1],
        l_star=ls,
        flags=np.zeros((ny, nx), dtype=bool),
        overlays=tuple(overlays),
    )


_STYLE = {
    "superharmonic": dict(color="white", linestyle="--", linewidth=0.7),
    "second_larmor": dict(color="red", linestyle=":", linewidth=1.0),
    "two_tone": dict(color="cyan", linestyle="-.", linewidth=0.7),
}


def _label(ax: SweepAxis) -> str:
    if ax.unit == "rad/s":
        return f"{ax.parameter} [rad/s]"
    return f"{ax.parameter} [{ax.unit}]"


def write_png(grid: SweepGrid, path, title: str | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=120)
    xa, ya = grid.x_axis, grid.y_axis
    extent = [
        xa.start - 0.5 * xa.step,
        xa.stop + 0.5 * xa.step,
        ya.start - 0.5 * ya.step,
        ya.stop + 0.5 * ya.step,
    ]
    im = ax.imshow(grid.P, origin="lower", aspect="auto", extent=extent, vmin=0.0, vmax=1.0, cmap="viridis")
    fig.colorbar(im, ax=ax, label="P")
    seen = set()
    for ov in grid.overlays:
        style = _STYLE.get(ov.kind, dict(color="black", linestyle="-", linewidth=0.7))
        label = ov.kind if ov.kind not in seen else None
        seen.add(ov.kind)
        if ov.axis == "x":
            ax.axvline(ov.coordinate, label=label, **style)
        else:
            ax.axhline(ov.coordinate, label=label, **style)
    if seen:
        ax.legend(loc="upper right", fontsize="small")
    ax.set_xlabel(_label(xa))
    ax.set_ylabel(_label(ya))
    if title:
        ax.set_title(title)
    try:
        fig.savefig(path)
    except OSError as exc:
        raise EmitError(f"cannot write image {path}: {exc.strerror or exc}") from exc
    finally:
        plt.close(fig)


def emit(grid: SweepGrid, csv_path=None, png_path=None, title: str | None = None) -> None:
    if csv_path is not None:
        write_csv(grid, csv_path)
    if png_path is not None:
        write_png(grid, png_path, title)
