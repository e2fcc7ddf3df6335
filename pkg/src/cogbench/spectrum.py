"""Slotted spectrum environment: primary-user occupancy, noisy sensing, delivery.

Ground truth is generated per slot for C channels under one of three
activity families (independent draws, two-state Markov chains, or a
piecewise-constant "arbitrary" schedule).  Sensing answers are correct with
a per-radio accuracy probability, symmetrically for busy and idle truth.

Stream layout (fixed so batched and scalar execution consume identical
draws): each slot takes C occupancy uniforms, then C sensing uniforms, then
one delivery uniform from the environment stream.  Sensing draws exist for
every channel regardless of which subset a radio actually senses, so a
channel's sensed value this slot does not depend on the queried subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError


class ActivityKind(str, Enum):
    IID = "iid"
    MARKOV = "markov"
    ARBITRARY = "arbitrary"


@dataclass(frozen=True)
class ChannelParams:
    """Static parameters of one channel: raw data rate, frame-delivery
    probability, and primary-user load (stationary busy probability)."""

    rate: float
    fdr: float
    load: float

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ConfigurationError(f"rate must be > 0, got {self.rate}")
        if not 0.0 <= self.fdr <= 1.0:
            raise ConfigurationError(f"fdr must be in [0, 1], got {self.fdr}")
        if not 0.0 <= self.load <= 1.0:
            raise ConfigurationError(f"load must be in [0, 1], got {self.load}")


@dataclass(frozen=True)
class PuActivityModel:
    """Primary-user activity family plus its per-channel parameters.

    MARKOV uses per-channel transition probabilities (idle->busy,
    busy->idle); slot 0 is drawn from the stationary distribution.
    ARBITRARY uses a per-channel piecewise-constant schedule of
    (start_slot, load) change-points; the first change-point of every
    channel must sit at slot 0 and start slots must increase strictly.
    """

    kind: ActivityKind
    p_idle_busy: tuple[float, ...] | None = None
    p_busy_idle: tuple[float, ...] | None = None
    schedule: tuple[tuple[tuple[int, float], ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == ActivityKind.MARKOV:
            if self.p_idle_busy is None or self.p_busy_idle is None:
                raise ConfigurationError("markov activity needs p_idle_busy and p_busy_idle")
            for name, probs in (("p_idle_busy", self.p_idle_busy),
                                ("p_busy_idle", self.p_busy_idle)):
                if any(not 0.0 <= p <= 1.0 for p in probs):
                    raise ConfigurationError(f"{name} entries must be in [0, 1]")
        elif self.kind == ActivityKind.ARBITRARY:
            if self.schedule is None:
                raise ConfigurationError("arbitrary activity needs a change-point schedule")
            for c, points in enumerate(self.schedule):
                if not points or points[0][0] != 0:
                    raise ConfigurationError(
                        f"schedule[{c}]: first change-point must start at slot 0")
                starts = [s for s, _ in points]
                if any(b <= a for a, b in zip(starts, starts[1:])):
                    raise ConfigurationError(
                        f"schedule[{c}]: change-point slots must increase strictly")
                if any(not 0.0 <= load <= 1.0 for _, load in points):
                    raise ConfigurationError(f"schedule[{c}]: loads must be in [0, 1]")


@dataclass(frozen=True)
class Scenario:
    """One test environment: channel set, activity model, horizon, slot split."""

    scenario_id: int
    channels: tuple[ChannelParams, ...]
    activity: PuActivityModel
    horizon_T: int
    slot_fractions: tuple[float, float, float] = (0.1, 0.05, 0.05)

    def __post_init__(self) -> None:
        if len(self.channels) < 1:
            raise ConfigurationError("scenario needs at least one channel")
        if self.horizon_T < 1:
            raise ConfigurationError("horizon_T must be >= 1")
        if sum(self.slot_fractions) >= 1.0:
            raise ConfigurationError("slot fractions must sum to < 1")
        if any(f < 0 for f in self.slot_fractions):
            raise ConfigurationError("slot fractions must be nonnegative")
        C = len(self.channels)
        act = self.activity
        if act.kind == ActivityKind.MARKOV:
            if len(act.p_idle_busy) != C or len(act.p_busy_idle) != C:
                raise ConfigurationError("markov transition lists must match channel count")
        if act.kind == ActivityKind.ARBITRARY and len(act.schedule) != C:
            raise ConfigurationError("arbitrary schedule must cover every channel")

    @property
    def n_channels(self) -> int:
        return len(self.channels)


@dataclass
class ChannelState:
    """Ground-truth occupancy (PU present) for one slot."""

    occupied: np.ndarray  # (C,) bool
    slot_index: int


@dataclass(frozen=True)
class ScenarioTables:
    """Array view of a scenario for the vectorized simulation loop."""

    kind: ActivityKind
    n_channels: int
    loads: np.ndarray
    rates: np.ndarray
    norm_rates: np.ndarray  # rates / max(rates), learner rewards live in [0, 1]
    fdr: np.ndarray
    p_idle_busy: np.ndarray | None
    p_busy_idle: np.ndarray | None
    stationary_busy: np.ndarray | None
    schedule_starts: tuple[np.ndarray, ...] | None
    schedule_loads: tuple[np.ndarray, ...] | None
    tau_sense: float
    tau_learn: float
    tau_switch: float


def compile_tables(scenario: Scenario) -> ScenarioTables:
    loads = np.array([ch.load for ch in scenario.channels])
    rates = np.array([ch.rate for ch in scenario.channels])
    fdr = np.array([ch.fdr for ch in scenario.channels])
    act = scenario.activity
    p_ib = p_bi = stat = None
    starts = seg_loads = None
    if act.kind == ActivityKind.MARKOV:
        p_ib = np.array(act.p_idle_busy)
        p_bi = np.array(act.p_busy_idle)
        denom = p_ib + p_bi
        # 0/0 convention: a frozen chain is pinned idle
        stat = np.divide(p_ib, denom, out=np.zeros_like(p_ib), where=denom > 0)
    elif act.kind == ActivityKind.ARBITRARY:
        starts = tuple(np.array([s for s, _ in pts], dtype=np.int64) for pts in act.schedule)
        seg_loads = tuple(np.array([l for _, l in pts]) for pts in act.schedule)
    return ScenarioTables(
        kind=act.kind,
        n_channels=scenario.n_channels,
        loads=loads,
        rates=rates,
        norm_rates=rates / rates.max(),
        fdr=fdr,
        p_idle_busy=p_ib,
        p_busy_idle=p_bi,
        stationary_busy=stat,
        schedule_starts=starts,
        schedule_loads=seg_loads,
        tau_sense=scenario.slot_fractions[0],
        tau_learn=scenario.slot_fractions[1],
        tau_switch=scenario.slot_fractions[2],
    )


def loads_at(tables: ScenarioTables, slot: int) -> np.ndarray:
    """Per-channel busy probability for one slot of an ARBITRARY schedule."""
    out = np.empty(tables.n_channels)
    for c, (starts, seg) in enumerate(zip(tables.schedule_starts, tables.schedule_loads)):
        idx = int(np.searchsorted(starts, slot, side="right")) - 1
        if idx < 0:
            raise ConfigurationError(f"schedule[{c}] has no segment covering slot {slot}")
        out[c] = seg[idx]
    return out


def occupancy_step_batch(tables: ScenarioTables, prev: np.ndarray | None,
                         u: np.ndarray, slot: int) -> np.ndarray:
    """Advance PU occupancy for a block of independent runs.

    ``prev`` is the previous slot's (R, C) occupancy, or None at slot 0;
    ``u`` is the (R, C) block of occupancy uniforms for this slot.
    """
    if tables.kind == ActivityKind.IID:
        return u < tables.loads
    if tables.kind == ActivityKind.ARBITRARY:
        return u < loads_at(tables, slot)
    if prev is None:
        return u < tables.stationary_busy
    busy_prob = np.where(prev, 1.0 - tables.p_busy_idle, tables.p_idle_busy)
    return u < busy_prob


def sense_batch(occupied: np.ndarray, u: np.ndarray, accuracy: float) -> np.ndarray:
    """Noisy sensed-busy values for all channels; correct w.p. ``accuracy``."""
    return occupied ^ (u >= accuracy)


def step(scenario: Scenario, prev: ChannelState | None,
         rng: np.random.Generator) -> ChannelState:
    """Generate the next slot's ground-truth occupancy.

    Consumes exactly C uniforms from the environment stream.
    """
    tables = compile_tables(scenario)
    slot = 0 if prev is None else prev.slot_index + 1
    u = rng.random((1, scenario.n_channels))
    prev_occ = None if prev is None else prev.occupied.reshape(1, -1)
    occ = occupancy_step_batch(tables, prev_occ, u, slot)
    return ChannelState(occupied=occ[0], slot_index=slot)


def sense(state: ChannelState, channels, accuracy: float,
          rng: np.random.Generator) -> dict[int, bool]:
    """Sense a subset of channels; returns sensed-busy per queried channel.

    Consumes exactly C uniforms regardless of the subset size, so the
    sensed value of a channel never depends on what else was queried.
    """
    C = state.occupied.shape[0]
    chans = sorted(set(int(c) for c in channels))
    if not chans:
        raise ValueError("sense requires a non-empty channel set")
    if chans[0] < 0 or chans[-1] >= C:
        raise ValueError(f"channel indices must lie in [0, {C})")
    if not 0.5 <= accuracy <= 1.0:
        raise ConfigurationError(f"sensing accuracy must be in [0.5, 1], got {accuracy}")
    u = rng.random(C)
    sensed = sense_batch(state.occupied, u, accuracy)
    return {c: bool(sensed[c]) for c in chans}


def deliver(ch: ChannelParams, rng: np.random.Generator) -> bool:
    """Frame delivery outcome for one transmitted slot; one uniform."""
    return bool(rng.random() < ch.fdr)
