"""Experiment harness: run every radio on every scenario, average metrics.

One cell = (radio spec, scenario) run for R repetitions of T slots.  Each
repetition owns its own environment/policy stream pair keyed by
(master_seed, radio_id, scenario_id, rep), so results are bit-identical
regardless of execution order, batching, or worker count.  Cells are
independent and may run in a process pool; COGBENCH_THREADS caps the pool.

Metrics per repetition are per-slot means: throughput (normalized rate
units), delay (fraction of the slot), and violation ratio (violations /
slots).  The assembled performance matrix has one row per radio and
3 x n_scenarios columns ordered scenario-major, metric-minor (y1, y2, y3).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import spectrum
from .errors import AssemblyError, ConfigurationError
from .policies import PolicyKind, PolicyParams, algorithmic_cost, make_policy
from .radio import RadioSpec, slot_core
from .rng import ENV_STREAM, POLICY_STREAM, stream
from .spectrum import Scenario

METRIC_NAMES = ("y1", "y2", "y3")

# cap on reps simulated simultaneously; keeps the pre-drawn uniform blocks
# around a couple hundred MB at T = 2000
REP_BLOCK = 256


@dataclass(frozen=True)
class MetricsTriple:
    """Rep-averaged per-slot means for one (radio, scenario) cell."""

    throughput_y1: float
    delay_y2: float
    violation_y3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.throughput_y1, self.delay_y2, self.violation_y3)


@dataclass
class PerformanceMatrix:
    """N radios x (3 x K scenarios) matrix of averaged metrics."""

    values: np.ndarray                     # (N, 3K)
    specs: list[RadioSpec]                 # row order
    column_labels: list[tuple[int, str]]   # (scenario_id, metric) per column

    @property
    def radio_ids(self) -> list[int]:
        return [s.radio_id for s in self.specs]

    def columns_for_metric(self, metric: str) -> np.ndarray:
        idx = [j for j, (_, m) in enumerate(self.column_labels) if m == metric]
        return self.values[:, idx]

    def label_strings(self) -> list[str]:
        return [f"s{sid}_{metric}" for sid, metric in self.column_labels]


def _rep_block_metrics(spec: RadioSpec, scenario: Scenario, T: int,
                       master_seed: int, rep_ids: np.ndarray,
                       params: PolicyParams) -> np.ndarray:
    """Simulate a block of repetitions in lock step; returns (B, 3)."""
    B = len(rep_ids)
    C = scenario.n_channels
    tables = spectrum.compile_tables(scenario)
    cost = algorithmic_cost(spec.policy, params.cost_table)
    policy = make_policy(spec.policy, C, spec.m, T, R=B, params=params)
    k = policy.draws_per_slot

    env_draws = np.empty((B, T, 2 * C + 1))
    pol_draws = np.empty((B, T, k)) if k else np.zeros((B, T, 0))
    for i, rep in enumerate(rep_ids):
        env_draws[i] = stream(master_seed, spec.radio_id, scenario.scenario_id,
                              int(rep), ENV_STREAM).random((T, 2 * C + 1))
        if k:
            pol_draws[i] = stream(master_seed, spec.radio_id, scenario.scenario_id,
                                  int(rep), POLICY_STREAM).random((T, k))

    occupied: np.ndarray | None = None
    prev_action = np.full(B, -1, dtype=np.int64)
    thr = np.zeros(B)
    dly = np.zeros(B)
    vio = np.zeros(B)
    for t in range(T):
        occupied = spectrum.occupancy_step_batch(
            tables, occupied, env_draws[:, t, :C], t)
        batch = slot_core(policy, spec, tables, occupied,
                          env_draws[:, t, C:2 * C], env_draws[:, t, 2 * C],
                          pol_draws[:, t, :], prev_action, cost)
        thr += batch.throughput
        dly += batch.delay
        vio += batch.violation
        prev_action = batch.prev_action
    return np.stack([thr / T, dly / T, vio / T], axis=1)


def run_cell_reps(spec: RadioSpec, scenario: Scenario, reps: int,
                  master_seed: int, T: int | None = None,
                  params: PolicyParams | None = None) -> np.ndarray:
    """Per-repetition metric triples for one cell, shape (reps, 3)."""
    if reps < 1:
        raise ConfigurationError(f"reps must be >= 1, got {reps}")
    T = scenario.horizon_T if T is None else T
    params = params or PolicyParams()
    blocks = [
        _rep_block_metrics(spec, scenario, T, master_seed,
                           np.arange(start, min(start + REP_BLOCK, reps)), params)
        for start in range(0, reps, REP_BLOCK)
    ]
    return np.concatenate(blocks, axis=0)


def run_cell(spec: RadioSpec, scenario: Scenario, reps: int, master_seed: int,
             T: int | None = None,
             params: PolicyParams | None = None) -> MetricsTriple:
    """Rep-averaged metrics for one (radio, scenario) cell."""
    per_rep = run_cell_reps(spec, scenario, reps, master_seed, T, params)
    y1, y2, y3 = per_rep.mean(axis=0)
    return MetricsTriple(throughput_y1=float(y1), delay_y2=float(y2),
                         violation_y3=float(y3))


def resolve_workers(requested: int | None = None) -> int:
    """Worker count for the cell pool, capped by COGBENCH_THREADS."""
    cap = os.environ.get("COGBENCH_THREADS")
    if requested is None:
        requested = os.cpu_count() or 1
    if cap is not None:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            raise ConfigurationError(
                f"COGBENCH_THREADS must be an integer, got {cap!r}") from None
    return max(1, requested)


def _grid_task(args):
    spec, scenario, reps, master_seed, T, params, keep_reps = args
    per_rep = run_cell_reps(spec, scenario, reps, master_seed, T, params)
    y1, y2, y3 = per_rep.mean(axis=0)
    triple = MetricsTriple(float(y1), float(y2), float(y3))
    key = (spec.radio_id, scenario.scenario_id)
    return key, triple, per_rep if keep_reps else None


def run_grid(specs: list[RadioSpec], scenarios: list[Scenario], reps: int,
             master_seed: int, T: int | None = None,
             params: PolicyParams | None = None, workers: int | None = None,
             keep_reps: bool = False):
    """Run the full specs x scenarios grid and assemble the matrix.

    Returns the PerformanceMatrix, or (matrix, reps_tensor) with
    ``keep_reps`` where reps_tensor has shape (N, K, reps, 3) in row/column
    order of the matrix.
    """
    params = params or PolicyParams()
    tasks = [(spec, scen, reps, master_seed, T, params, keep_reps)
             for spec in specs for scen in scenarios]
    n_workers = resolve_workers(workers)
    results = {}
    rep_store = {}
    if n_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for key, triple, per_rep in pool.map(_grid_task, tasks, chunksize=8):
                results[key] = triple
                if keep_reps:
                    rep_store[key] = per_rep
    else:
        for task in tasks:
            key, triple, per_rep = _grid_task(task)
            results[key] = triple
            if keep_reps:
                rep_store[key] = per_rep
    matrix = assemble(results, specs, scenarios)
    if not keep_reps:
        return matrix
    ordered_scen = sorted(scenarios, key=lambda s: s.scenario_id)
    tensor = np.stack([
        np.stack([rep_store[(spec.radio_id, scen.scenario_id)]
                  for scen in ordered_scen])
        for spec in specs
    ])
    return matrix, tensor


def assemble(cells: dict[tuple[int, int], MetricsTriple],
             specs: list[RadioSpec],
             scenarios: list[Scenario]) -> PerformanceMatrix:
    """Deterministic reduction of cell results into the data matrix."""
    ordered_scen = sorted(scenarios, key=lambda s: s.scenario_id)
    missing = [(spec.radio_id, scen.scenario_id)
               for spec in specs for scen in ordered_scen
               if (spec.radio_id, scen.scenario_id) not in cells]
    if missing:
        shown = ", ".join(f"(radio {r}, scenario {s})" for r, s in missing[:10])
        more = "" if len(missing) <= 10 else f" and {len(missing) - 10} more"
        raise AssemblyError(f"missing cells: {shown}{more}")
    values = np.array([
        [v for scen in ordered_scen
         for v in cells[(spec.radio_id, scen.scenario_id)].as_tuple()]
        for spec in specs
    ])
    labels = [(scen.scenario_id, metric)
              for scen in ordered_scen for metric in METRIC_NAMES]
    return PerformanceMatrix(values=values, specs=list(specs), column_labels=labels)


def write_performance_csv(path: str | Path, pm: PerformanceMatrix) -> None:
    """Write the matrix with spec-prefixed rows and 12-significant-digit
    decimal formatting (stable bytes for golden-file comparison)."""
    lines = ["radio_id,policy,m,accuracy,hw_delay," + ",".join(pm.label_strings())]
    for spec, row in zip(pm.specs, pm.values):
        prefix = (f"{spec.radio_id},{spec.policy.value},{spec.m},"
                  f"{spec.accuracy:.12g},{spec.hw_delay:.12g}")
        lines.append(prefix + "," + ",".join(f"{v:.12g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_label(label: str) -> tuple[int, str]:
    scen_part, metric = label.split("_")
    if not scen_part.startswith("s") or metric not in METRIC_NAMES:
        raise ConfigurationError(f"unrecognized performance column '{label}'")
    return int(scen_part[1:]), metric


def read_performance_csv(path: str | Path) -> PerformanceMatrix:
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ConfigurationError(f"{path}: empty performance file")
    header = text[0].split(",")
    if header[:5] != ["radio_id", "policy", "m", "accuracy", "hw_delay"]:
        raise ConfigurationError(
            f"{path}: expected spec prefix columns radio_id,policy,m,accuracy,hw_delay")
    labels = [_parse_label(h) for h in header[5:]]
    specs = []
    rows = []
    for i, line in enumerate(text[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ConfigurationError(f"{path}:{i}: expected {len(header)} fields")
        specs.append(RadioSpec(
            radio_id=int(parts[0]), policy=PolicyKind(parts[1]), m=int(parts[2]),
            accuracy=float(parts[3]), hw_delay=float(parts[4])))
        rows.append([float(v) for v in parts[5:]])
    return PerformanceMatrix(values=np.array(rows), specs=specs, column_labels=labels)
