import json

import pytest

from cogbench import scenarios
from cogbench.errors import ConfigurationError
from cogbench.spectrum import ActivityKind


def test_default_set_has_18_scenarios_of_10_channels():
    ss = scenarios.build_default_scenarios()
    assert len(ss) == 18
    assert all(s.n_channels == 10 for s in ss)
    assert [s.scenario_id for s in ss] == list(range(1, 19))


def test_default_set_covers_all_activity_families():
    ss = scenarios.build_default_scenarios()
    kinds = [s.activity.kind for s in ss]
    assert kinds.count(ActivityKind.IID) == 6
    assert kinds.count(ActivityKind.MARKOV) == 6
    assert kinds.count(ActivityKind.ARBITRARY) == 6


def test_default_set_spans_rate_and_fdr_grids():
    ss = scenarios.build_default_scenarios()
    rates = {ch.rate for s in ss for ch in s.channels}
    fdrs = {ch.fdr for s in ss for ch in s.channels}
    assert rates == set(scenarios.RATE_VALUES)
    assert fdrs == set(scenarios.FDR_VALUES)


def test_markov_parameters_match_stationary_loads():
    ss = scenarios.build_default_scenarios()
    for s in ss:
        if s.activity.kind != ActivityKind.MARKOV:
            continue
        for c, ch in enumerate(s.channels):
            ib = s.activity.p_idle_busy[c]
            bi = s.activity.p_busy_idle[c]
            assert ib / (ib + bi) == pytest.approx(ch.load, abs=1e-12)


def test_packaged_file_matches_builder():
    built = scenarios.build_default_scenarios()
    shipped = scenarios.load_default_scenarios()
    assert [scenarios.scenario_to_obj(a) for a in built] == \
           [scenarios.scenario_to_obj(b) for b in shipped]


def test_roundtrip_through_file(tmp_path):
    ss = scenarios.build_default_scenarios()
    path = tmp_path / "scen.json"
    scenarios.dump_scenarios(ss, path)
    back = scenarios.load_scenarios(path)
    assert [scenarios.scenario_to_obj(a) for a in ss] == \
           [scenarios.scenario_to_obj(b) for b in back]


def test_load_reports_json_syntax_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('[\n  {"scenario_id": 1,}\n]\n')
    with pytest.raises(ConfigurationError, match=r"line 2"):
        scenarios.load_scenarios(path)


def test_load_reports_semantic_path(tmp_path):
    obj = scenarios.scenario_to_obj(scenarios.build_default_scenarios()[0])
    obj["channels"][3]["fdr"] = 1.7
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([obj]))
    with pytest.raises(ConfigurationError, match=r"scenario\[0\].channels\[3\]"):
        scenarios.load_scenarios(path)


def test_load_rejects_duplicate_ids(tmp_path):
    objs = [scenarios.scenario_to_obj(s) for s in scenarios.build_default_scenarios()[:2]]
    objs[1]["scenario_id"] = objs[0]["scenario_id"]
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(objs))
    with pytest.raises(ConfigurationError, match="duplicate"):
        scenarios.load_scenarios(path)


def test_load_rejects_unknown_activity(tmp_path):
    obj = scenarios.scenario_to_obj(scenarios.build_default_scenarios()[0])
    obj["activity"]["kind"] = "periodic"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([obj]))
    with pytest.raises(ConfigurationError, match="periodic"):
        scenarios.load_scenarios(path)


def test_missing_key_is_reported_with_location(tmp_path):
    obj = scenarios.scenario_to_obj(scenarios.build_default_scenarios()[0])
    del obj["horizon_T"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([obj]))
    with pytest.raises(ConfigurationError, match="horizon_T"):
        scenarios.load_scenarios(path)
