"""
SVG rendering of result tables. Plots are a view of the CSV, never a source.
"""

from __future__ import annotations

from pathlib import Path

from .results import ResultTable


def plot_table(table: ResultTable, path, x: str, y: str, series: str | None = None,
               title: str = "") -> Path:
    """Line plot of column y against x, one curve per value of ``series``.

    Axis columns other than x and series that take several values are folded
    into the curve label so no curve mixes grid points.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "phasedistill"
    names = table.names
    xi, yi = table.index(x), table.index(y)
    group_cols = [i for i, n in enumerate(names[:-1])
                  if i != xi and len({r[i] for r in table.rows}) > 1]
    if series is not None:
        si = table.index(series)
        group_cols = [si] + [i for i in group_cols if i != si]
    curves: dict[tuple, list] = {}
    for r in table.rows:
        key = tuple(r[i] for i in group_cols)
        curves.setdefault(key, []).append((r[xi], r[yi]))
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for key, pts in curves.items():
        label = ", ".join(f"{names[i]}={v}" for i, v in zip(group_cols, key)) or None
        xs, ys = zip(*pts)
        ax.plot([float(v) for v in xs], [float(v) for v in ys], marker=".", label=label)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    if title:
        ax.set_title(title)
    if len(curves) > 1 and len(curves) <= 12:
        ax.legend(fontsize="small")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
