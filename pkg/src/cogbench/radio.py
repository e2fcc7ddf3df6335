"""Radio model: a policy plus hardware capabilities, executed slot by slot.

Each slot runs sense -> access -> learn: the policy picks a channel (or an
observe-only slot), sensing estimates occupancy at the radio's accuracy,
transmission happens only on a sensed-idle channel, and the policy is fed
the realized reward on the played channel plus sensed-idle x rate on side
channels.  Transmitting over a present primary user (a sensing miss) is a
violation: the frame is blocked and throughput is zero, but the policy
still sees the zero reward and can learn from it.

The transmission time left in a slot is
1 - tau_sense - tau_learn - hw_delay - algorithmic_cost - switch * tau_switch,
clipped at zero; per-slot delay is one minus that.  A switch is counted
whenever the played channel differs from the previously played one
(observe-only slots keep the previous channel; the first slot never counts
as a switch).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectrum
from .errors import ConfigurationError
from .policies import Policy, PolicyKind, PolicyParams, algorithmic_cost
from .rng import Streams
from .spectrum import ChannelState, Scenario, ScenarioTables

GRID_M = (1, 2, 6)
GRID_ACCURACY = (1.0, 0.9, 0.8)
GRID_HW_DELAY = (0.0, 0.1, 0.3)
GRID_POLICIES = (PolicyKind.UCB1, PolicyKind.EXP3, PolicyKind.POLA,
                 PolicyKind.PROLA, PolicyKind.QLEARN, PolicyKind.RANDOM)


@dataclass(frozen=True)
class RadioSpec:
    """One cognitive radio's capability bundle."""

    radio_id: int
    policy: PolicyKind
    m: int
    accuracy: float
    hw_delay: float

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigurationError(f"sensor count must be >= 1, got {self.m}")
        if not 0.5 <= self.accuracy <= 1.0:
            raise ConfigurationError(
                f"sensing accuracy must be in [0.5, 1], got {self.accuracy}")
        if self.hw_delay < 0:
            raise ConfigurationError(f"hw_delay must be >= 0, got {self.hw_delay}")


@dataclass(frozen=True)
class SlotOutcome:
    """Everything that happened to one radio in one slot."""

    slot: int
    action: int | None
    sensed_idle: bool | None
    transmitted: bool
    delivered: bool
    throughput: float
    delay: float
    violation: bool
    switched: bool


@dataclass
class SlotBatch:
    """Per-slot results for R parallel runs (internal engine type)."""

    action: np.ndarray       # (R,) int64, -1 for observe-only
    sensed_idle: np.ndarray  # (R,) bool (meaningful only where played)
    transmitted: np.ndarray  # (R,) bool
    delivered: np.ndarray    # (R,) bool
    throughput: np.ndarray   # (R,) float
    delay: np.ndarray        # (R,) float
    violation: np.ndarray    # (R,) bool
    switched: np.ndarray     # (R,) bool
    prev_action: np.ndarray  # (R,) int64, updated for the next slot


def enumerate_grid(policies=GRID_POLICIES, m_set=GRID_M,
                   accuracy_set=GRID_ACCURACY, hw_delay_set=GRID_HW_DELAY
                   ) -> list[RadioSpec]:
    """Cartesian capability grid with redundant random-access combos removed.

    Random access never uses its observations, so it appears once per
    (hw_delay, accuracy) pair with m pinned to 1.  Ordering is stable:
    policy in the given order, then m ascending, hw_delay ascending,
    accuracy descending.
    """
    specs: list[RadioSpec] = []
    for policy in policies:
        ms = (1,) if policy == PolicyKind.RANDOM else tuple(sorted(m_set))
        for m in ms:
            for hw in sorted(hw_delay_set):
                for acc in sorted(accuracy_set, reverse=True):
                    specs.append(RadioSpec(
                        radio_id=len(specs), policy=policy, m=m,
                        accuracy=acc, hw_delay=hw))
    return specs


def slot_core(policy: Policy, spec: RadioSpec, tables: ScenarioTables,
              occupied: np.ndarray, sense_u: np.ndarray, deliver_u: np.ndarray,
              pol_u: np.ndarray, prev_action: np.ndarray,
              cost: float) -> SlotBatch:
    """Advance R parallel runs by one slot and update the policy in place.

    ``occupied`` is this slot's (R, C) ground truth; ``sense_u`` (R, C),
    ``deliver_u`` (R,) and ``pol_u`` (R, draws_per_slot) are the slot's
    uniform draws.
    """
    R = occupied.shape[0]
    rows = np.arange(R)
    dec = policy.decide_batch(pol_u)
    action = dec.action
    played = action >= 0
    a_safe = np.where(played, action, 0)

    sensed_busy = spectrum.sense_batch(occupied, sense_u, spec.accuracy)
    sensed_idle_at_a = ~sensed_busy[rows, a_safe] & played
    truly_busy_at_a = occupied[rows, a_safe]

    transmitted = sensed_idle_at_a
    violation = transmitted & truly_busy_at_a
    clear = transmitted & ~truly_busy_at_a
    delivered = clear & (deliver_u < tables.fdr[a_safe])

    switched = played & (prev_action >= 0) & (action != prev_action)
    usable = np.maximum(
        0.0,
        1.0 - tables.tau_sense - tables.tau_learn - spec.hw_delay - cost
        - switched * tables.tau_switch)
    throughput = tables.norm_rates[a_safe] * usable * delivered
    delay = 1.0 - usable
    new_prev = np.where(played, action, prev_action)

    # feedback: realized reward on the played channel, sensed-idle x rate on
    # side channels; PROLA/POLA never see the played reward
    est = (~sensed_busy[rows[:, None], dec.observe]) * tables.norm_rates[dec.observe]
    if policy.includes_action:
        est[:, 0] = tables.norm_rates[a_safe] * delivered
    policy.update_batch(dec, est)

    return SlotBatch(
        action=action,
        sensed_idle=sensed_idle_at_a,
        transmitted=transmitted,
        delivered=delivered,
        throughput=throughput,
        delay=delay,
        violation=violation,
        switched=switched,
        prev_action=new_prev,
    )


def run_slot(spec: RadioSpec, policy: Policy, scenario: Scenario,
             truth: ChannelState, prev_action: int | None,
             streams: Streams,
             params: PolicyParams | None = None) -> tuple[SlotOutcome, Policy]:
    """Execute one slot for a single radio run.

    Consumes C sensing uniforms plus one delivery uniform from the
    environment stream (the delivery draw is taken every slot, used only on
    clear transmissions, to keep the stream layout fixed) and the policy's
    per-slot block from the policy stream.
    """
    if policy.R != 1:
        raise ValueError("run_slot drives a single-run policy (R=1)")
    params = params or policy.params
    tables = spectrum.compile_tables(scenario)
    cost = algorithmic_cost(spec.policy, params.cost_table)
    sense_u = streams.env.random((1, scenario.n_channels))
    deliver_u = streams.env.random(1)
    k = policy.draws_per_slot
    pol_u = streams.policy.random((1, k)) if k else np.zeros((1, 0))
    batch = slot_core(policy, spec, tables, truth.occupied.reshape(1, -1),
                      sense_u, deliver_u, pol_u,
                      np.array([-1 if prev_action is None else prev_action]),
                      cost)
    played = int(batch.action[0]) >= 0
    outcome = SlotOutcome(
        slot=truth.slot_index,
        action=int(batch.action[0]) if played else None,
        sensed_idle=bool(batch.sensed_idle[0]) if played else None,
        transmitted=bool(batch.transmitted[0]),
        delivered=bool(batch.delivered[0]),
        throughput=float(batch.throughput[0]),
        delay=float(batch.delay[0]),
        violation=bool(batch.violation[0]),
        switched=bool(batch.switched[0]),
    )
    return outcome, policy
