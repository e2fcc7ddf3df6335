"""Scenario schema I/O and the default 18-scenario test set.

A scenario file is a JSON array of objects:

    {"scenario_id": 1,
     "channels": [{"rate": 2.0, "fdr": 1.0, "load": 0.1}, ...],
     "activity": {"kind": "iid" | "markov" | "arbitrary", "params": {...}},
     "horizon_T": 2000,
     "slot_fractions": [0.1, 0.05, 0.05]}

MARKOV params carry per-channel ``p_idle_busy``/``p_busy_idle`` lists;
ARBITRARY params carry a per-channel ``schedule`` of [start_slot, load]
change-points.

The shipped default set spans three activity families x three load
patterns x two rate/quality profiles over 10 channels.  The exact numeric
grid (raw rates {1, 2, 5} Mbit/s, FDRs {1.0, 0.9, 0.7}, the load patterns,
and the Markov/arbitrary parameters) is this repository's reconstruction
of a plausible test set, not an externally mandated one.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError
from .spectrum import ActivityKind, ChannelParams, PuActivityModel, Scenario

N_CHANNELS = 10
DEFAULT_HORIZON = 2000
DEFAULT_SLOT_FRACTIONS = (0.1, 0.05, 0.05)

# stickiness of the default Markov chains; stationary load matches the
# channel's load field for any value in (0, 1]
MARKOV_CHURN = 0.25

LOAD_PATTERNS = {
    "gap": (0.1, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95, 0.95),
    "graded": (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.85, 0.9),
    # exactly flat: with uniform rates there is nothing to learn, so these
    # scenarios isolate the non-learning capabilities (sensing accuracy,
    # hardware speed, decision cost, switching discipline)
    "high": (0.8,) * N_CHANNELS,
}

RATE_VALUES = (1.0, 2.0, 5.0)
FDR_VALUES = (1.0, 0.9, 0.7)

# frame-delivery ratio is uniform within a scenario (it models the
# scenario's channel quality/noise level); the mixed profiles sweep the
# three default values across load patterns
MIXED_FDR_BY_PATTERN = {"gap": 0.9, "graded": 1.0, "high": 0.7}

# mixed-profile rate layouts: gap and high cycle through the three rates;
# graded gets rates rising with load so rate and availability trade off
# instead of compounding into one runaway channel
MIXED_RATES_BY_PATTERN = {
    "gap": tuple(RATE_VALUES[i % 3] for i in range(N_CHANNELS)),
    "graded": (1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 5.0, 5.0, 5.0),
    "high": tuple(RATE_VALUES[i % 3] for i in range(N_CHANNELS)),
}

# channel-switch overhead differs per scenario family: cheap retuning on
# the graded band, moderate on the gap band, expensive on the flat band,
# so switching discipline and raw hardware speed are separately observable
SWITCH_COST_BY_PATTERN = {"gap": 0.05, "graded": 0.02, "high": 0.15}


def _profile(name: str, pattern_name: str) -> tuple[tuple[float, ...], tuple[float, ...]]:
    if name == "uniform":
        return (2.0,) * N_CHANNELS, (1.0,) * N_CHANNELS
    rates = MIXED_RATES_BY_PATTERN[pattern_name]
    fdrs = (MIXED_FDR_BY_PATTERN[pattern_name],) * N_CHANNELS
    return rates, fdrs


def _arbitrary_schedule(pattern: tuple[float, ...],
                        pattern_name: str) -> tuple[tuple[tuple[int, float], ...], ...]:
    """Piecewise-constant load schedules with the attractive channels moving
    over time.

    Structured patterns (gap, graded) hop by one channel index at mid-run:
    enough drift to reward continuous trackers over learners that front-load
    their exploration, without inverting the whole landscape.  The flat high
    pattern has no spatial structure to move, so its load breathes in time
    instead (quarters alternating between light and heavy).
    """
    C = len(pattern)
    quarter = DEFAULT_HORIZON // 4
    if pattern_name == "high":
        return tuple(
            tuple((k * quarter, 0.7 if k % 2 == 0 else 0.9) for k in range(4))
            for _ in range(C)
        )
    segments = [(0, 0), (DEFAULT_HORIZON // 2, 1)]
    return tuple(
        tuple((start, pattern[(c - shift) % C]) for start, shift in segments)
        for c in range(C)
    )


def build_default_scenarios() -> list[Scenario]:
    """Construct the 18 default scenarios (deterministic, no RNG)."""
    scenarios = []
    sid = 1
    for kind in (ActivityKind.IID, ActivityKind.MARKOV, ActivityKind.ARBITRARY):
        for pattern_name in ("gap", "graded", "high"):
            pattern = LOAD_PATTERNS[pattern_name]
            for profile_name in ("uniform", "mixed"):
                rates, fdrs = _profile(profile_name, pattern_name)
                channels = tuple(
                    ChannelParams(rate=rates[c], fdr=fdrs[c], load=pattern[c])
                    for c in range(N_CHANNELS)
                )
                if kind == ActivityKind.MARKOV:
                    activity = PuActivityModel(
                        kind=kind,
                        p_idle_busy=tuple(MARKOV_CHURN * l for l in pattern),
                        p_busy_idle=tuple(MARKOV_CHURN * (1.0 - l) for l in pattern),
                    )
                elif kind == ActivityKind.ARBITRARY:
                    activity = PuActivityModel(
                        kind=kind, schedule=_arbitrary_schedule(pattern, pattern_name))
                else:
                    activity = PuActivityModel(kind=kind)
                scenarios.append(Scenario(
                    scenario_id=sid,
                    channels=channels,
                    activity=activity,
                    horizon_T=DEFAULT_HORIZON,
                    slot_fractions=(DEFAULT_SLOT_FRACTIONS[0],
                                    DEFAULT_SLOT_FRACTIONS[1],
                                    SWITCH_COST_BY_PATTERN[pattern_name]),
                ))
                sid += 1
    return scenarios


def scenario_to_obj(s: Scenario) -> dict:
    params: dict = {}
    if s.activity.kind == ActivityKind.MARKOV:
        params = {"p_idle_busy": list(s.activity.p_idle_busy),
                  "p_busy_idle": list(s.activity.p_busy_idle)}
    elif s.activity.kind == ActivityKind.ARBITRARY:
        params = {"schedule": [[[start, load] for start, load in pts]
                               for pts in s.activity.schedule]}
    return {
        "scenario_id": s.scenario_id,
        "channels": [{"rate": c.rate, "fdr": c.fdr, "load": c.load} for c in s.channels],
        "activity": {"kind": s.activity.kind.value, "params": params},
        "horizon_T": s.horizon_T,
        "slot_fractions": list(s.slot_fractions),
    }


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigurationError(f"{where}: missing required key '{key}'")
    return obj[key]


def scenario_from_obj(obj: dict, where: str = "scenario") -> Scenario:
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{where}: expected an object, got {type(obj).__name__}")
    sid = _require(obj, "scenario_id", where)
    if not isinstance(sid, int):
        raise ConfigurationError(f"{where}.scenario_id: expected an integer")
    raw_channels = _require(obj, "channels", where)
    if not isinstance(raw_channels, list) or not raw_channels:
        raise ConfigurationError(f"{where}.channels: expected a non-empty array")
    channels = []
    for i, ch in enumerate(raw_channels):
        chw = f"{where}.channels[{i}]"
        if not isinstance(ch, dict):
            raise ConfigurationError(f"{chw}: expected an object")
        try:
            channels.append(ChannelParams(
                rate=float(_require(ch, "rate", chw)),
                fdr=float(_require(ch, "fdr", chw)),
                load=float(_require(ch, "load", chw)),
            ))
        except ConfigurationError as e:
            raise ConfigurationError(f"{chw}: {e}") from None
    raw_act = _require(obj, "activity", where)
    kind_str = _require(raw_act, "kind", f"{where}.activity")
    try:
        kind = ActivityKind(kind_str)
    except ValueError:
        raise ConfigurationError(
            f"{where}.activity.kind: '{kind_str}' is not one of "
            f"{[k.value for k in ActivityKind]}") from None
    params = raw_act.get("params", {})
    try:
        if kind == ActivityKind.MARKOV:
            activity = PuActivityModel(
                kind=kind,
                p_idle_busy=tuple(float(x) for x in _require(params, "p_idle_busy",
                                                             f"{where}.activity.params")),
                p_busy_idle=tuple(float(x) for x in _require(params, "p_busy_idle",
                                                             f"{where}.activity.params")),
            )
        elif kind == ActivityKind.ARBITRARY:
            sched = _require(params, "schedule", f"{where}.activity.params")
            activity = PuActivityModel(
                kind=kind,
                schedule=tuple(tuple((int(s), float(l)) for s, l in pts) for pts in sched),
            )
        else:
            activity = PuActivityModel(kind=kind)
        fractions = obj.get("slot_fractions", list(DEFAULT_SLOT_FRACTIONS))
        if not isinstance(fractions, list) or len(fractions) != 3:
            raise ConfigurationError(
                f"{where}.slot_fractions: expected [tau_sense, tau_learn, tau_switch]")
        return Scenario(
            scenario_id=sid,
            channels=tuple(channels),
            activity=activity,
            horizon_T=int(_require(obj, "horizon_T", where)),
            slot_fractions=tuple(float(f) for f in fractions),
        )
    except ConfigurationError as e:
        msg = str(e)
        raise ConfigurationError(msg if msg.startswith(where) else f"{where}: {msg}") from None


def load_scenarios(path: str | Path) -> list[Scenario]:
    """Load and validate a scenario file; raises ConfigurationError with a
    position-tagged message on any defect."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read scenario file {path}: {e}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(data, list) or not data:
        raise ConfigurationError(f"{path}: expected a non-empty JSON array of scenarios")
    scenarios = [scenario_from_obj(obj, where=f"scenario[{i}]") for i, obj in enumerate(data)]
    ids = [s.scenario_id for s in scenarios]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ConfigurationError(f"{path}: duplicate scenario_id values {dupes}")
    return scenarios


def dump_scenarios(scenarios: list[Scenario], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps([scenario_to_obj(s) for s in scenarios], indent=2) + "\n")


def default_scenarios_path() -> Path:
    """Path of the scenario file shipped inside the package."""
    return Path(str(resources.files("cogbench").joinpath("data/default18.json")))


def load_default_scenarios() -> list[Scenario]:
    return load_scenarios(default_scenarios_path())
