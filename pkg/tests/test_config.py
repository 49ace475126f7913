"""
Tests of configuration files, overrides and presets.
"""
import json

import pytest

from message_estimator.config import (
    CLASSIFICATION_TEST_ROWS,
    PRESETS,
    BenchConfig,
    DataConfig,
    Scale,
    SimulationConfig,
    apply_overrides,
    load_json,
    parse_override,
    preset_document,
)
from message_estimator.dataset import Case, Task
from message_estimator.exceptions import ConfigError
from message_estimator.pipeline import MethodName
from message_estimator.solvers import GicPenalty


def test_load_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"reps": 3}), encoding="utf-8")
    assert load_json(path) == {"reps": 3}

    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_json(path)
    path.write_text("{reps: 3", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_json(path)
    with pytest.raises(ConfigError):
        load_json(tmp_path / "missing.json")


def test_parse_override():
    assert parse_override("reps=5") == (["reps"], 5)
    assert parse_override("selector.gic.penalty=bic") == (["selector", "gic", "penalty"], "bic")
    assert parse_override("n_values=[100, 200]") == (["n_values"], [100, 200])
    assert parse_override("subset_size=null") == (["subset_size"], None)
    for bad in ("reps", "=5"):
        with pytest.raises(ConfigError):
            parse_override(bad)


def test_apply_overrides():
    document = {"reps": 2, "selector": {"kind": "lasso_gic"}}
    res = apply_overrides(document, ["reps=4", "selector.gic.penalty=ebic", "reps=6"])
    assert res == {"reps": 6, "selector": {"kind": "lasso_gic", "gic": {"penalty": "ebic"}}}
    assert document == {"reps": 2, "selector": {"kind": "lasso_gic"}}
    with pytest.raises(ConfigError):
        apply_overrides(document, ["reps.inner=1"])


def test_simulation_defaults():
    cfg = SimulationConfig.from_dict({})
    assert cfg == SimulationConfig()
    assert [g.n for g in cfg.grid()] == [1000, 2000, 4000]
    assert [c.method for c in cfg.method_configs()] == list(cfg.methods)


def test_simulation_round_trip():
    cfg = SimulationConfig(
        case=Case.CASE2,
        rho=0.3,
        p=20,
        s=2,
        n_values=(400, 800),
        subset_size=None,
        m=4,
        reps=5,
        base_seed=11,
        methods=(MethodName.MESSAGE, MethodName.BOLASSO),
        bolasso_B=8,
        diagnose=False,
    )
    assert SimulationConfig.from_dict(cfg.to_dict()) == cfg
    assert all(c.m == 4 and c.bolasso_B == 8 for c in cfg.method_configs())
    assert cfg.replace(reps=1).reps == 1


@pytest.mark.parametrize(
    "document",
    [
        {"reps": 0},
        {"n_values": []},
        {"methods": ["ridge"]},
        {"subset_size": 0},
        {"rho": 1.0},
        {"s": 200},
        {"case": "case4"},
        {"p": "many"},
    ],
)
def test_simulation_invalid(document):
    with pytest.raises(ConfigError):
        SimulationConfig.from_dict(document)


@pytest.mark.parametrize("scale", list(Scale))
def test_presets(scale):
    cfg = SimulationConfig.from_dict(preset_document(scale))
    preset = PRESETS[scale]
    assert cfg.p == preset["p"]
    assert list(cfg.n_values) == preset["n_values"]
    assert cfg.selector.lasso.max_active == preset["max_active"]
    assert cfg.n_test == 0


def test_logistic_preset_holds_out_rows():
    cfg = SimulationConfig.from_dict(preset_document(Scale.DESK, Case.CASE3, rho=0.5))
    assert cfg.n_test == CLASSIFICATION_TEST_ROWS
    assert cfg.rho == 0.5


def test_preset_overrides():
    document = apply_overrides(preset_document(Scale.DESK), ["reps=2", "selector.gic.penalty=bic"])
    cfg = SimulationConfig.from_dict(document)
    assert cfg.reps == 2
    assert cfg.selector.gic.penalty == GicPenalty.BIC


def test_data_config():
    cfg = DataConfig.from_dict({"response": "label", "categorical": ["color"], "task": "classification"})
    assert cfg.task == Task.CLASSIFICATION
    assert DataConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        DataConfig.from_dict({"task": "ranking"})


def test_bench_config():
    cfg = BenchConfig.from_dict({"m_values": [2, 4], "n_train": 100, "data": {"response": "t"}})
    assert cfg.m_values == (2, 4)
    assert BenchConfig.from_dict(cfg.to_dict()) == cfg
    for bad in ({"m_values": []}, {"m_values": [0]}, {"n_train": 0}, {"methods": []}):
        with pytest.raises(ConfigError):
            BenchConfig.from_dict(bad)
