import json

import pytest

from thinloop.config import CONFIG_FORMAT, RunConfig, load_config


def test_defaults_and_update():
    cfg = RunConfig()
    assert cfg.eps_geo == 0.01 and cfg.group == "SU2" and cfg.grid is None
    new = cfg.updated(seed=4, group=None)
    assert new.seed == 4 and new.group == "SU2"
    with pytest.raises(ValueError):
        cfg.updated(colour="red")


@pytest.mark.parametrize("kw", [{"eps_geo": 0}, {"samples_per_arc": 8}, {"grid": 2}, {"connections": 0},
                                {"signature_level": 9}, {"emit": ("png",)}])
def test_validation(kw):
    with pytest.raises(ValueError):
        RunConfig(**kw)


def test_file_round_trip(tmp_path):
    cfg = RunConfig(seed=3, emit=("svg",), grid=300)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert load_config(p) == cfg
    p.write_text(json.dumps({"format": CONFIG_FORMAT, "connections": 7}))
    assert load_config(p, RunConfig(seed=2)) == RunConfig(seed=2, connections=7)
    p.write_text(json.dumps({"format": "nope"}))
    with pytest.raises(ValueError):
        load_config(p)
