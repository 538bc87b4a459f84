import pytest

from fanetsim.config import ConfigError, ScenarioConfig, from_mapping, load


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_file_yields_paper_defaults(tmp_path):
    cfg, sweep = load(write(tmp_path, "empty.cfg", ""))
    assert sweep is None
    assert cfg.max_range == 250.0
    assert cfg.rssi_threshold_dbm == -64.0
    assert cfg.energy_threshold == 10.0
    assert cfg.hello_interval == 1.0
    assert (cfg.area_width, cfg.area_height) == (1000.0, 1000.0)
    assert cfg.packet_size_bytes == 512
    assert cfg.carrier_freq_hz == 2.4e9
    assert cfg.speed_min == pytest.approx(10 / 3.6)
    assert cfg.speed_max == pytest.approx(25 / 3.6)
    assert cfg.cw_min == 15
    assert cfg.slot_time_us == 20.0
    assert cfg.queue_limit == 10


def test_source_count_must_leave_room_for_destination():
    with pytest.raises(ConfigError, match="source_count"):
        ScenarioConfig(node_count=5, source_count=5).validate()


def test_unknown_key_named_in_error(tmp_path):
    with pytest.raises(ConfigError, match="antena"):
        load(write(tmp_path, "bad.cfg", "antena = omni\n"))


def test_malformed_line_rejected(tmp_path):
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        load(write(tmp_path, "bad.cfg", "just some words\n"))


def test_include_applies_base_then_overrides(tmp_path):
    write(tmp_path, "base.cfg", "node_count = 12\nsim_duration = 100\n")
    cfg, _ = load(write(tmp_path, "top.cfg", "include = base.cfg\nsim_duration = 55\n"))
    assert cfg.node_count == 12
    assert cfg.sim_duration == 55.0


def test_comments_and_blank_lines_ignored(tmp_path):
    cfg, _ = load(write(tmp_path, "c.cfg", "# header\n\nnode_count = 9  # inline\n"))
    assert cfg.node_count == 9


def test_sweep_block_parsed(tmp_path):
    text = (
        "recipe_name = demo\nsweep_axis = node_count\nsweep_values = 10,20,30\n"
        "protocols = rlpr,aodv\nseed_count = 4\nseed_base = 2\n"
    )
    cfg, sweep = load(write(tmp_path, "r.cfg", text))
    assert sweep.recipe_name == "demo"
    assert sweep.sweep_values == [10, 20, 30]
    assert sweep.protocols == ["rlpr", "aodv"]
    assert sweep.seed_count == 4 and sweep.seed_base == 2


def test_sweep_missing_values_rejected():
    with pytest.raises(ConfigError, match="sweep"):
        from_mapping({"sweep_axis": "node_count"})


def test_bad_protocol_rejected():
    with pytest.raises(ConfigError, match="protocol"):
        ScenarioConfig(protocol="olsr").validate()


def test_cw_min_floor():
    with pytest.raises(ConfigError, match="cw_min"):
        ScenarioConfig(cw_min=0).validate()


def test_scripted_positions_length_checked():
    with pytest.raises(ConfigError, match="node_positions"):
        ScenarioConfig(node_count=3, node_positions=[(0.0, 0.0)]).validate()


def test_positions_parse(tmp_path):
    cfg, _ = load(
        write(tmp_path, "p.cfg", "node_count = 2\nnode_positions = 0,0; 100,50\nspeed_min = 0\nspeed_max = 0\n")
    )
    assert cfg.node_positions == [(0.0, 0.0), (100.0, 50.0)]


def test_bundled_recipes_load():
    from pathlib import Path

    import fanetsim

    recipes = Path(fanetsim.__file__).parent / "recipes"
    names = sorted(p.name for p in recipes.glob("figure*.cfg"))
    assert names == [f"figure{i}.cfg" for i in (10, 11, 12, 13, 14, 9)]
    for p in recipes.glob("figure*.cfg"):
        cfg, sweep = load(p)
        assert sweep is not None
        assert sweep.recipe_name == p.stem
        cfg.validate()
        sweep.validate()
