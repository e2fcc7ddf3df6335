"""Plot-data emission: per-radio cluster summaries, scree data, and
component-plot coordinates (variables positioned by their loadings)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .harness import PerformanceMatrix


class AxisSelectionError(ValueError):
    """A requested component-plot factor axis exceeds the retained count."""


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_clusters(out_dir: Path, pm: PerformanceMatrix) -> Path:
    """Per-radio aggregate metrics with spec fields for cluster grouping.

    Aggregate throughput is the sum of the per-scenario mean throughputs,
    the same quantity the per-radio bar charts stack up.
    """
    y1 = pm.columns_for_metric("y1")
    y2 = pm.columns_for_metric("y2")
    y3 = pm.columns_for_metric("y3")
    path = out_dir / "clusters.csv"
    lines = ["radio_id,policy,m,accuracy,hw_delay,"
             "aggregate_throughput,mean_delay,mean_violation"]
    for i, spec in enumerate(pm.specs):
        lines.append(
            f"{spec.radio_id},{spec.policy.value},{spec.m},"
            f"{spec.accuracy:.12g},{spec.hw_delay:.12g},"
            f"{_fmt(y1[i].sum())},{_fmt(y2[i].mean())},{_fmt(y3[i].mean())}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_scree(out_dir: Path, eigenvalues: np.ndarray) -> Path:
    path = out_dir / "scree.csv"
    lines = ["factor_index,eigenvalue"]
    lines += [f"{i + 1},{_fmt(v)}" for i, v in enumerate(eigenvalues)]
    path.write_text("\n".join(lines) + "\n")
    return path


def default_axis_triples(retained: int) -> list[tuple[int, ...]]:
    """Fix the first two factors, vary the third axis over the rest."""
    if retained < 2:
        return []
    if retained == 2:
        return [(1, 2)]
    return [(1, 2, k) for k in range(3, retained + 1)]


def write_components(out_dir: Path, labels: list[str], loadings: np.ndarray,
                     axes: list[tuple[int, ...]]) -> list[Path]:
    """One coordinates file per requested axis tuple (1-based factor indices)."""
    retained = loadings.shape[1]
    written = []
    for axis_tuple in axes:
        bad = [a for a in axis_tuple if not 1 <= a <= retained]
        if bad:
            raise AxisSelectionError(
                f"factor axes {bad} exceed the retained count {retained}")
        name = "components_" + "_".join(str(a) for a in axis_tuple) + ".csv"
        path = out_dir / name
        header = "variable," + ",".join(f"f{a}" for a in axis_tuple)
        lines = [header]
        for p, label in enumerate(labels):
            coords = ",".join(_fmt(loadings[p, a - 1]) for a in axis_tuple)
            lines.append(f"{label},{coords}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written
