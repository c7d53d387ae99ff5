"""
CSV output and seed aggregates

Fixed column order and float format so that identical runs produce
byte-identical files.
"""

from pathlib import Path
from typing import Iterable, Sequence

import pandas as pd
from rich.table import Table

FLOAT_FORMAT = "%.12g"


def write_csv(frame: pd.DataFrame, path: Path, columns: Sequence[str]) -> Path:
    """Write `columns` of `frame` (header included) to `path`"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.loc[:, list(columns)].to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    return path


def aggregate(frame: pd.DataFrame, by: str, metrics: Iterable[str]) -> pd.DataFrame:
    """
    Mean and sample standard deviation of each metric across seeds

    One row per value of `by`, kept in first-appearance order. The standard
    deviation of a single seed is reported as 0.
    """
    metrics = list(metrics)
    grouped = frame.groupby(by, sort=False)[metrics]
    means = grouped.mean().add_suffix("_mean")
    stds = grouped.std(ddof=1).fillna(0.0).add_suffix("_std")
    counts = grouped.size().rename("seeds")
    out = pd.concat([means, stds, counts], axis=1).reset_index()
    ordered = [by, "seeds"] + [f"{m}_{s}" for m in metrics for s in ("mean", "std")]
    return out.loc[:, ordered]


def summary_table(summary: pd.DataFrame, by: str, metrics: Sequence[str], title: str) -> Table:
    """Rich table rendering each metric as `mean ± std`"""
    table = Table(title=title)
    table.add_column(by, style="cyan")
    table.add_column("seeds", justify="right")
    for metric in metrics:
        table.add_column(metric, justify="right", style="green")
    for _, row in summary.iterrows():
        cells = [str(row[by]), str(int(row["seeds"]))]
        cells += [f"{row[f'{m}_mean']:.6g} ± {row[f'{m}_std']:.3g}" for m in metrics]
        table.add_row(*cells)
    return table
