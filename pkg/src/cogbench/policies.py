"""Channel-access strategies: random, UCB1, EXP3, POLA, PROLA, Q-learning.

All six policies pick one channel per slot and consume up to m per-slot
observations.  The learning policies generalize their one-observation
originals to an m-wide observation model:

* UCB1, EXP3, Q-learning observe the played channel plus the m-1 circularly
  subsequent ones (indices a, a+1 mod C, ..., a+m-1 mod C).
* PROLA cannot observe its own action; it observes m channels drawn
  uniformly without replacement from the other C-1.
* POLA either plays (no observation at all) or, with a probability that
  decays as t^(-1/3), spends the slot observing m channels drawn uniformly
  from all C.

Policy state is stored as (R, C) arrays so R independent runs advance in
lock step; the scalar single-run API is the R = 1 case of the same kernels.
Per-slot uniform draws arrive as a fixed-width block per policy (see
``draws_per_slot``) so that batched and one-slot-at-a-time execution
consume identical random streams.

Each slot must go through ``decide`` then ``update`` exactly once, in that
order; ``update`` advances the slot counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import ConfigurationError


class PolicyKind(str, Enum):
    RANDOM = "random"
    UCB1 = "ucb1"
    EXP3 = "exp3"
    POLA = "pola"
    PROLA = "prola"
    QLEARN = "qlearn"


# Per-slot decision cost as a fraction of the slot duration.  Magnitudes
# are repository defaults; the intended ordering is that the policy solving
# an optimization program each slot pays the most and blind random access
# pays nothing.
DEFAULT_COST_TABLE: Mapping[PolicyKind, float] = {
    PolicyKind.RANDOM: 0.0,
    PolicyKind.UCB1: 0.005,
    PolicyKind.EXP3: 0.008,
    PolicyKind.POLA: 0.008,
    PolicyKind.PROLA: 0.008,
    PolicyKind.QLEARN: 0.05,
}


@dataclass(frozen=True)
class PolicyParams:
    """Tunable hyper-parameters shared by a simulation run.

    ``ew_gamma`` overrides the horizon-aware default learning rate of the
    exponential-weights family (EXP3, PROLA, POLA) when set.
    """

    ew_gamma: float | None = None
    pola_eps0: float = 1.0
    qlearn_alpha: float = 0.1
    qlearn_eps: float = 0.1
    cost_table: Mapping[PolicyKind, float] = field(
        default_factory=lambda: dict(DEFAULT_COST_TABLE))


@dataclass(frozen=True)
class Observation:
    """One per-slot feedback item consumed by a policy update."""

    channel: int
    est_reward: float
    slot: int
    was_played: bool


@dataclass(frozen=True)
class Decision:
    """A single-run decision: the channel to play (None when the slot is
    spent purely on observation) and the side-observation set."""

    action: int | None
    observe_set: tuple[int, ...]


@dataclass
class BatchDecision:
    """Vectorized decision for R runs; action -1 marks an observe-only slot.

    ``observe`` holds the observation channels per run; for runs where the
    slot is played without side observations (POLA play slots) the row is
    present but masked out by ``observing``.
    """

    action: np.ndarray           # (R,) int64
    observe: np.ndarray          # (R, n_obs) int64
    observing: np.ndarray | None = None  # (R,) bool, POLA only


def _sample_rows(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sample one index per row of a (R, C) distribution."""
    cdf = np.cumsum(p, axis=1)
    return np.minimum((cdf <= u[:, None]).sum(axis=1), p.shape[1] - 1)


def _softmax(logw: np.ndarray) -> np.ndarray:
    z = logw - logw.max(axis=1, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=1, keepdims=True)


def ew_gamma_default(C: int, T: int, m: float) -> float:
    """Horizon-aware exponential-weights rate sqrt(m C ln C / ((e-1) T)).

    The classic single-observation rate, scaled up by sqrt(m): every slot
    delivers m independent feedback items, which cuts estimator variance by
    m and supports a proportionally faster (sqrt(m)) learning rate.
    """
    return min(1.0, np.sqrt(m * C * np.log(C) / ((np.e - 1.0) * T)))


def qlearn_distribution(q_values: np.ndarray, eps: float) -> np.ndarray:
    """Exploration-floored greedy distribution over channels.

    Solves max_p sum_c p_c q_c over the simplex with p_c >= eps/C: the
    floor goes everywhere and the remaining mass sits on the best channel
    (ties to the lowest index).  Accepts (C,) or (R, C) input.
    """
    q = np.atleast_2d(np.asarray(q_values, dtype=float))
    R, C = q.shape
    dist = np.full((R, C), eps / C)
    best = q.argmax(axis=1)
    dist[np.arange(R), best] = 1.0 - eps * (C - 1) / C
    return dist if np.asarray(q_values).ndim == 2 else dist[0]


def algorithmic_cost(kind: PolicyKind,
                     cost_table: Mapping[PolicyKind, float] | None = None) -> float:
    """Per-slot decision-cost fraction of the slot duration."""
    table = DEFAULT_COST_TABLE if cost_table is None else cost_table
    return float(table[kind])


class Policy:
    """Base class holding the common (R runs, C channels) bookkeeping."""

    kind: PolicyKind
    draws_per_slot: int
    includes_action: bool  # whether the observation window contains the action
    consumes_feedback: bool = True

    def __init__(self, C: int, m: int, T: int, R: int = 1,
                 params: PolicyParams | None = None) -> None:
        if not 1 <= m <= C:
            raise ConfigurationError(f"observation width m={m} must satisfy 1 <= m <= C={C}")
        if T < C:
            raise ConfigurationError(f"horizon T={T} must be at least C={C}")
        self.C = C
        self.m = m
        self.T = T
        self.R = R
        self.params = params or PolicyParams()
        self.t = 0  # completed slots
        self._rows = np.arange(R)
        self._pending: BatchDecision | None = None

    # -- batched interface used by the simulation engine ------------------

    def decide_batch(self, u: np.ndarray) -> BatchDecision:
        raise NotImplementedError

    def update_batch(self, dec: BatchDecision, est: np.ndarray) -> None:
        raise NotImplementedError

    def _window(self, action: np.ndarray) -> np.ndarray:
        """Circular m-wide observation window starting at the action."""
        return (action[:, None] + np.arange(self.m)) % self.C

    # -- single-run convenience interface ----------------------------------

    def decide(self, rng: np.random.Generator) -> Decision:
        if self.R != 1:
            raise ValueError("scalar decide() requires a single-run policy (R=1)")
        u = rng.random((1, self.draws_per_slot)) if self.draws_per_slot else \
            np.zeros((1, 0))
        dec = self.decide_batch(u)
        self._pending = dec
        action = int(dec.action[0])
        if dec.observing is not None and bool(dec.observing[0]):
            return Decision(action=None, observe_set=tuple(int(c) for c in dec.observe[0]))
        if dec.observing is not None:  # POLA play slot: no side observations
            return Decision(action=action, observe_set=())
        return Decision(action=action, observe_set=tuple(int(c) for c in dec.observe[0]))

    def update(self, decision: Decision, observations: list[Observation]) -> None:
        if self.R != 1:
            raise ValueError("scalar update() requires a single-run policy (R=1)")
        dec = self._pending
        if dec is None:
            raise ValueError("update() must follow a decide() call")
        est = np.zeros((1, dec.observe.shape[1]))
        play_slot_without_feedback = dec.observing is not None and not bool(dec.observing[0])
        if self.consumes_feedback and not play_slot_without_feedback:
            by_channel = {o.channel: o.est_reward for o in observations}
            expected = [int(c) for c in dec.observe[0]]
            missing = [c for c in expected if c not in by_channel]
            if missing:
                raise ValueError(f"missing observations for channels {missing}")
            est[0] = [by_channel[c] for c in expected]
        self.update_batch(dec, est)
        self._pending = None


class RandomPolicy(Policy):
    """Uniform channel choice, never learns; the observation width is 1."""

    kind = PolicyKind.RANDOM
    draws_per_slot = 1
    includes_action = True
    consumes_feedback = False

    def __init__(self, C, m, T, R=1, params=None):
        super().__init__(C, 1, T, R, params)  # extra sensors are dead weight

    def decide_batch(self, u):
        action = (u[:, 0] * self.C).astype(np.int64)
        return BatchDecision(action=action, observe=action[:, None].copy())

    def update_batch(self, dec, est):
        self.t += 1


class Ucb1Policy(Policy):
    """Deterministic optimism: play every channel once, then maximize
    mean + sqrt(2 ln t / n), crediting all windowed observations."""

    kind = PolicyKind.UCB1
    draws_per_slot = 0
    includes_action = True

    def __init__(self, C, m, T, R=1, params=None):
        super().__init__(C, m, T, R, params)
        self.counts = np.zeros((R, C))
        self.means = np.zeros((R, C))

    def decide_batch(self, u):
        if self.t < self.C:
            action = np.full(self.R, self.t, dtype=np.int64)
        else:
            bonus = np.sqrt(2.0 * np.log(self.t + 1) / self.counts)
            action = (self.means + bonus).argmax(axis=1)
        return BatchDecision(action=action, observe=self._window(action))

    def update_batch(self, dec, est):
        rows = self._rows[:, None]
        self.counts[rows, dec.observe] += 1.0
        self.means[rows, dec.observe] += (
            (est - self.means[rows, dec.observe]) / self.counts[rows, dec.observe])
        self.t += 1


class Exp3Policy(Policy):
    """Exponential weights with explicit exploration mixing; observed
    rewards are importance-weighted by the exact window probability."""

    kind = PolicyKind.EXP3
    draws_per_slot = 1
    includes_action = True

    def __init__(self, C, m, T, R=1, params=None):
        super().__init__(C, m, T, R, params)
        self.gamma = self.params.ew_gamma if self.params.ew_gamma is not None \
            else ew_gamma_default(C, T, m)
        self.logw = np.zeros((R, C))
        self._last_p: np.ndarray | None = None

    def action_distribution(self) -> np.ndarray:
        return (1.0 - self.gamma) * _softmax(self.logw) + self.gamma / self.C

    def decide_batch(self, u):
        p = self.action_distribution()
        self._last_p = p
        action = _sample_rows(p, u[:, 0])
        return BatchDecision(action=action, observe=self._window(action))

    def update_batch(self, dec, est):
        p = self._last_p
        # q_c = P(c falls in the observation window) = sum of p over the m
        # actions whose window covers c
        q = np.zeros_like(p)
        cols = np.arange(self.C)
        for j in range(self.m):
            q += p[:, (cols - j) % self.C]
        rows = self._rows[:, None]
        xhat = est / q[rows, dec.observe]
        self.logw[rows, dec.observe] += self.gamma * xhat / self.C
        self.t += 1


class ProlaPolicy(Policy):
    """Exponential weights when the played channel's reward is invisible:
    m side observations are drawn uniformly from the other C-1 channels."""

    kind = PolicyKind.PROLA
    includes_action = False

    def __init__(self, C, m, T, R=1, params=None):
        super().__init__(C, m, T, R, params)
        if m > C - 1:
            raise ConfigurationError(
                f"side observations need m <= C-1 (got m={m}, C={C})")
        self.gamma = self.params.ew_gamma if self.params.ew_gamma is not None \
            else ew_gamma_default(C, T, m)
        self.logw = np.zeros((R, C))
        self.draws_per_slot = C  # 1 action draw + C-1 subset keys

    def decide_batch(self, u):
        action = _sample_rows(_softmax(self.logw), u[:, 0])
        # uniform m-subset of the other C-1 channels via random-key selection
        keys = u[:, 1:self.C]
        offsets = np.argpartition(keys, self.m - 1, axis=1)[:, :self.m]
        observe = (action[:, None] + 1 + offsets) % self.C
        return BatchDecision(action=action, observe=observe)

    def update_batch(self, dec, est):
        q = self.m / (self.C - 1)
        rows = self._rows[:, None]
        self.logw[rows, dec.observe] += self.gamma * (est / q) / self.C
        self.t += 1


class PolaPolicy(Policy):
    """Act or observe, never both: with probability eps0 * t^(-1/3) the slot
    is spent observing m uniformly chosen channels; otherwise a channel is
    played with no learning feedback at all.

    The learning rate uses the shared horizon-aware form but with this
    policy's own observation rate: feedback arrives only on observe slots,
    so the effective observation width is m times the horizon-averaged
    observe probability.
    """

    kind = PolicyKind.POLA
    includes_action = False

    def __init__(self, C, m, T, R=1, params=None):
        super().__init__(C, m, T, R, params)
        self.eps0 = self.params.pola_eps0
        if self.params.ew_gamma is not None:
            self.gamma = self.params.ew_gamma
        else:
            t = np.arange(1, T + 1)
            mean_eps = float(np.minimum(1.0, self.eps0 * t ** (-1.0 / 3.0)).mean())
            self.gamma = ew_gamma_default(C, T, mean_eps * m)
        self.logw = np.zeros((R, C))
        self.draws_per_slot = C + 2  # branch draw + action draw + C subset keys
        self._last_eps: float | None = None

    def observe_probability(self, slot_number: int) -> float:
        return min(1.0, self.eps0 * slot_number ** (-1.0 / 3.0))

    def decide_batch(self, u):
        eps_t = self.observe_probability(self.t + 1)
        self._last_eps = eps_t
        observing = u[:, 0] < eps_t
        action = _sample_rows(_softmax(self.logw), u[:, 1])
        action = np.where(observing, -1, action)
        keys = u[:, 2:2 + self.C]
        observe = np.argpartition(keys, self.m - 1, axis=1)[:, :self.m].astype(np.int64)
        return BatchDecision(action=action, observe=observe, observing=observing)

    def update_batch(self, dec, est):
        q = self._last_eps * self.m / self.C
        rows = self._rows[:, None]
        bump = np.where(dec.observing[:, None], self.gamma * (est / q) / self.C, 0.0)
        self.logw[rows, dec.observe] += bump
        self.t += 1


class QLearnPolicy(Policy):
    """Per-channel value tracking with an exploration-floored greedy
    distribution re-optimized every slot."""

    kind = PolicyKind.QLEARN
    draws_per_slot = 2
    includes_action = True

    def __init__(self, C, m, T, R=1, params=None):
        super().__init__(C, m, T, R, params)
        self.alpha = self.params.qlearn_alpha
        self.eps = self.params.qlearn_eps
        self.q = np.zeros((R, C))

    def decide_batch(self, u):
        uniform = u[:, 0] < self.eps
        dist = qlearn_distribution(self.q, self.eps)
        action = np.where(uniform,
                          (u[:, 1] * self.C).astype(np.int64),
                          _sample_rows(dist, u[:, 1]))
        return BatchDecision(action=action, observe=self._window(action))

    def update_batch(self, dec, est):
        rows = self._rows[:, None]
        self.q[rows, dec.observe] = (
            (1.0 - self.alpha) * self.q[rows, dec.observe] + self.alpha * est)
        self.t += 1


_POLICY_CLASSES = {
    PolicyKind.RANDOM: RandomPolicy,
    PolicyKind.UCB1: Ucb1Policy,
    PolicyKind.EXP3: Exp3Policy,
    PolicyKind.POLA: PolaPolicy,
    PolicyKind.PROLA: ProlaPolicy,
    PolicyKind.QLEARN: QLearnPolicy,
}


def make_policy(kind: PolicyKind, C: int, m: int, T: int, R: int = 1,
                params: PolicyParams | None = None) -> Policy:
    """Instantiate a fresh policy state for R parallel runs."""
    return _POLICY_CLASSES[kind](C, m, T, R, params)
