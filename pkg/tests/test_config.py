import json
import math

import pytest
from hypothesis import given, strategies as st

from manhattan_workbench import fixtures
from manhattan_workbench.config import DEFAULTS, RunConfig, finite, fixture_config, rep_to_dict
from manhattan_workbench.errors import ConfigError, UnknownLabel
from manhattan_workbench.schottky import GroupWord


def explicit(name="F1F3"):
    pair = fixtures.pair(name)
    return {"pair": {"rho1": rep_to_dict(pair.rho1), "rho2": rep_to_dict(pair.rho2)}}


def test_defaults_filled():
    cfg = fixture_config("F1")
    assert cfg.params.n_max == DEFAULTS["truncation"]["n_max"]
    assert cfg.rays == DEFAULTS["solver"]["rays"]
    assert cfg.words == []


def test_round_trip(tmp_path):
    cfg = RunConfig.from_dict({**explicit(), "words": [[["h1", 2], ["p1", -1]]], "seed": 7})
    path = tmp_path / "c.json"
    cfg.save(path)
    again = RunConfig.load(path)
    assert again == cfg
    assert again.to_json() == cfg.to_json()
    assert again.config_hash == cfg.config_hash


def test_explicit_pair_reproduces_fixture():
    cfg = RunConfig.from_dict(explicit())
    pair, ref = cfg.pair, fixtures.pair("F1F3")
    for a, b in zip(pair.reps(), ref.reps()):
        assert a.labels == b.labels
        for ga, gb in zip(a.generators, b.generators):
            assert ga.matrix.matrix.ravel().tolist() == pytest.approx(gb.matrix.matrix.ravel().tolist(), abs=1e-15)
        for k in b.arcs:
            assert a.arcs[k].start == pytest.approx(b.arcs[k].start, abs=1e-12)
            assert a.arcs[k].length == pytest.approx(b.arcs[k].length, abs=1e-12)


def test_missing_arcs_are_built():
    data = explicit()
    for rep in data["pair"].values():
        del rep["arcs"]
    assert RunConfig.from_dict(data).pair.rho1.arcs is not None


def test_hash_ignores_key_order_and_output():
    a = RunConfig.from_dict({"pair": {"fixture": "F1"}, "solver": {"rays": 9, "tol_root": 1e-5},
                             "output": {"dir": "x"}})
    text = json.dumps({"output": {"dir": "y"}, "solver": {"tol_root": 1e-5, "rays": 9},
                       "pair": {"fixture": "F1"}})
    b = RunConfig.from_json(text)
    assert a.config_hash == b.config_hash
    assert a != b
    assert a.config_hash != a.replace(seed=1).config_hash


def test_int_and_float_hash_alike():
    a = fixture_config("F1", pressure={"a": 1, "b": 0, "t": 1})
    b = fixture_config("F1", pressure={"a": 1.0, "b": 0.0, "t": 1.0})
    assert a.config_hash == b.config_hash


@given(st.dictionaries(st.sampled_from(["n_max", "max_power"]), st.integers(2, 40)),
       st.integers(0, 1000))
def test_round_trip_property(trunc, seed):
    cfg = fixture_config("F4", truncation=trunc, seed=seed)
    again = RunConfig.from_json(cfg.to_json())
    assert again == cfg and again.config_hash == cfg.config_hash


@pytest.mark.parametrize("data", [
    {},
    {"pair": {"fixture": "nope"}},
    {"pair": {"fixture": "F1"}, "solver": {"rays": 1}},
    {"pair": {"fixture": "F1"}, "truncation": {"n_max": "big"}},
    {"pair": {"fixture": "F1"}, "colour": "blue"},
])
def test_schema_errors(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_bad_json():
    with pytest.raises(ConfigError):
        RunConfig.from_json("{not json")
    with pytest.raises(ConfigError):
        RunConfig.from_json("[1, 2]")


def test_bad_matrix():
    data = explicit()
    data["pair"]["rho1"]["generators"][0]["matrix"] = [1.0, 2.0, 3.0, 4.0]
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_unknown_label():
    with pytest.raises(UnknownLabel):
        fixture_config("F1", words=[[["q7", 1]]])


def test_words_are_reduced():
    cfg = fixture_config("F1", words=[[["h1", 2], ["h1", -2], ["p1", 1]]])
    assert cfg.words == [GroupWord((("p1", 1),))]


def test_unreadable(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")


def test_finite():
    assert finite(math.inf) == "Infinite"
    assert finite(-math.inf) == "-Infinite"
    assert finite(1.5) == 1.5
