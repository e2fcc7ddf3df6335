"""Factor-analysis pipeline over a performance matrix, with file outputs.

Ties the numeric pieces together: correlation of the standardized columns,
extraction (principal-factor or principal-component), optional varimax
rotation, regression factor scores, and the single-common-factor score.
Outputs are CSV/JSON with fixed 12-significant-digit formatting so repeated
runs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .factors import (
    CorrelationMatrix,
    FactorModel,
    correlation,
    extract,
    factor_scores,
    offdiag_rmsr,
    pca,
    varimax,
)
from .harness import PerformanceMatrix

ROTATIONS = ("none", "varimax")
METHODS = ("fa", "pca")


@dataclass(frozen=True)
class AnalysisOptions:
    retention: float = 1.0
    rotate: str = "varimax"
    method: str = "fa"
    force_factors: int | None = None

    def __post_init__(self) -> None:
        if self.rotate not in ROTATIONS:
            raise ConfigurationError(f"rotate must be one of {ROTATIONS}")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}")


@dataclass
class AnalysisResult:
    corr: CorrelationMatrix
    model: FactorModel
    radio_ids: list[int]
    report: dict = field(default_factory=dict)


def analyze_performance(pm: PerformanceMatrix,
                        options: AnalysisOptions | None = None) -> AnalysisResult:
    """Full pipeline: correlation -> extraction -> rotation -> scores."""
    options = options or AnalysisOptions()
    labels = pm.label_strings()
    corr = correlation(pm.values, labels)
    if options.method == "pca":
        model = pca(corr, retention=options.retention)
    else:
        model = extract(corr, retention=options.retention,
                        force_factors=options.force_factors)
    if options.rotate == "varimax" and model.retained >= 2:
        rotated, _ = varimax(model.loadings)
        model.loadings = rotated
        model.rotation = "varimax"
        model.residual = (corr.sigma - rotated @ rotated.T
                          - np.diag(model.uniquenesses))

    kept = set(corr.labels)
    keep_idx = [j for j, l in enumerate(labels) if l in kept]
    y_std = (pm.values[:, keep_idx] - corr.means) / corr.stds
    if model.retained:
        model.scores = factor_scores(y_std, corr.sigma, model.loadings)
    else:
        model.scores = np.zeros((pm.values.shape[0], 0))
    model.g_scores = factor_scores(y_std, corr.sigma,
                                   model.g_loadings[:, None])[:, 0]

    sigma_evals = np.sort(np.linalg.eigvalsh(corr.sigma))[::-1]
    explained = float(np.maximum(sigma_evals[:model.retained], 0.0).sum()
                      / corr.sigma.shape[0]) if model.retained else 0.0
    report = {
        "method": model.method,
        "retained_I": model.retained,
        "converged": model.converged,
        "iterations": model.iterations,
        "rmsr": offdiag_rmsr(model.residual),
        "dropped_columns": corr.dropped,
        "rotation": model.rotation,
        "retention": options.retention,
        "explained_variance": explained,
    }
    return AnalysisResult(corr=corr, model=model,
                          radio_ids=pm.radio_ids, report=report)


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_analysis(out_dir: str | Path, result: AnalysisResult) -> list[Path]:
    """Write loadings.csv, eigenvalues.csv, scores.csv, residuals.csv, and
    fa_report.json into ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = result.model
    I = model.retained
    fcols = [f"f{i}" for i in range(1, I + 1)]
    written = []

    path = out / "loadings.csv"
    lines = ["variable," + ",".join(fcols + ["g"])]
    for p, label in enumerate(model.labels):
        row = [_fmt(model.loadings[p, i]) for i in range(I)] + [_fmt(model.g_loadings[p])]
        lines.append(label + "," + ",".join(row))
    path.write_text("\n".join(lines) + "\n")
    written.append(path)

    path = out / "eigenvalues.csv"
    lines = ["index,eigenvalue"]
    lines += [f"{i + 1},{_fmt(v)}" for i, v in enumerate(model.eigenvalues)]
    path.write_text("\n".join(lines) + "\n")
    written.append(path)

    path = out / "scores.csv"
    lines = ["radio_id," + ",".join(fcols + ["g"])]
    for n, rid in enumerate(result.radio_ids):
        row = [_fmt(model.scores[n, i]) for i in range(I)] + [_fmt(model.g_scores[n])]
        lines.append(f"{rid}," + ",".join(row))
    path.write_text("\n".join(lines) + "\n")
    written.append(path)

    path = out / "residuals.csv"
    lines = ["variable," + ",".join(model.labels)]
    for p, label in enumerate(model.labels):
        lines.append(label + "," + ",".join(_fmt(v) for v in model.residual[p]))
    path.write_text("\n".join(lines) + "\n")
    written.append(path)

    path = out / "fa_report.json"
    path.write_text(json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


def read_loadings(path: str | Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Read loadings.csv back: (labels, (P, I) loadings, (P,) g column)."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    if header[0] != "variable" or header[-1] != "g":
        raise ConfigurationError(f"{path}: not a loadings file")
    labels, rows = [], []
    for line in lines[1:]:
        parts = line.split(",")
        labels.append(parts[0])
        rows.append([float(v) for v in parts[1:]])
    arr = np.array(rows) if rows else np.zeros((0, len(header) - 1))
    return labels, arr[:, :-1], arr[:, -1]


def read_eigenvalues(path: str | Path) -> np.ndarray:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "index,eigenvalue":
        raise ConfigurationError(f"{path}: not an eigenvalues file")
    return np.array([float(line.split(",")[1]) for line in lines[1:]])
