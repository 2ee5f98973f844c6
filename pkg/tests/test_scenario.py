import math

import numpy as np
import pytest

from admaiora.airtime import ParameterError
from admaiora.allocation import adr_mgw
from admaiora.radio import Position
from admaiora.scenario import (
    ScenarioConfig,
    ScenarioError,
    build_scenario,
    centroid,
    config_from_dict,
    gen_balanced,
    gen_single_gw,
    gen_unbalanced,
    load_config,
    load_scenario,
    place_gateways,
    save_config,
)


def coords(ps):
    return sorted((round(p.x, 9), round(p.y, 9)) for p in ps)


def test_place_gateways_examples():
    assert coords(place_gateways(1, 200)) == [(0.0, 0.0)]
    assert coords(place_gateways(2, 200)) == [(-100.0, 0.0), (100.0, 0.0)]
    assert coords(place_gateways(4, 200)) == [(-100, -100), (-100, 100), (100, -100), (100, 100)]
    eight = place_gateways(8, 150)
    assert len({(p.x, p.y) for p in eight}) == 8
    c = centroid(eight)
    assert abs(c.x) < 1e-9 and abs(c.y) < 1e-9
    with pytest.raises(ParameterError):
        place_gateways(0)


@pytest.mark.parametrize("n,central", [(500, 300), (1, 1), (10, 6), (3, 2)])
def test_sixty_forty_split(n, central):
    gws = place_gateways(4, 150)
    nodes = gen_balanced(n, gws, rng=np.random.default_rng(0))
    assert len(nodes) == n
    assert sum(p.distance(Position(0, 0)) <= 50 + 1e-9 for p in nodes[:central]) == central


def test_spread_nodes_inside_box():
    gws = place_gateways(4, 150)
    nodes = gen_balanced(500, gws, rng=np.random.default_rng(1))
    for p in nodes[300:]:
        assert -175 <= p.x <= 175 and -175 <= p.y <= 175


def test_placement_deterministic():
    gws = place_gateways(4)
    a = gen_balanced(50, gws, rng=np.random.default_rng(5))
    b = gen_balanced(50, gws, rng=np.random.default_rng(5))
    assert a == b
    cfg = ScenarioConfig(n_nodes=50, n_gateways=4, seed=3)
    assert build_scenario(cfg).nodes == build_scenario(cfg).nodes
    assert build_scenario(cfg).nodes != build_scenario(ScenarioConfig(n_nodes=50, n_gateways=4, seed=4)).nodes


def test_unbalanced_hot_disc_and_rssi():
    gws = place_gateways(4, 150)
    nodes = gen_unbalanced(500, gws, hot_gw_index=2, rng=np.random.default_rng(0))
    hot = gws[2]
    assert sum(p.distance(hot) <= 50 + 1e-9 for p in nodes) >= 300
    cfg = ScenarioConfig(n_nodes=500, n_gateways=4, topology="unbalanced", hot_gateway=2)
    sc = build_scenario(cfg)
    r = sc.rssi_matrix().r
    # every central node sees the hot gateway at least as strongly as 50 m away
    floor = 14 - (127.41 + 20.8 * math.log10(50 / 40))
    assert np.all(r[2, :300] >= floor - 1e-9)
    with pytest.raises(ParameterError):
        gen_unbalanced(10, gws, hot_gw_index=4)


def test_single_gateway_generator():
    sc = gen_single_gw(1000, rng=np.random.default_rng(0))
    assert sc.n_gateways == 1
    assert max(p.distance(sc.gateways[0]) for p in sc.nodes) <= 50
    a = adr_mgw(sc.rssi_matrix(), sc.sensitivity)
    assert np.all(a.sf == 7)
    with pytest.raises(ParameterError):
        gen_single_gw(0)


def test_default_config_values(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    cfg = load_config(path)
    assert cfg == ScenarioConfig()
    assert (cfg.l0, cfg.d0, cfg.gamma, cfg.sigma2) == (127.41, 40.0, 2.08, 0.0)
    assert (cfg.tx_power_dbm, cfg.carrier_mhz, cfg.bw, cfg.cr) == (14.0, 869.5, 125_000, 1)
    assert (cfg.message_period, cfg.payload_bytes, cfg.duty_cycle_limit) == (10.0, 20, 0.1)


def test_sectioned_config(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(
        "topology:\n  n_nodes: 40\n  n_gateways: 4\n  topology: unbalanced\n"
        "traffic:\n  message_period: 100\n"
    )
    sc = load_scenario(path)
    assert sc.n_nodes == 40 and sc.n_gateways == 4
    assert sc.traffic.message_period == 100


@pytest.mark.parametrize(
    "data",
    [
        {"radio": {"sensitivity_dbm": [-123, -126, -126, -132, -134.5, -137]}},
        {"topology": {"n_nodes": 0}},
        {"topology": {"topology": "ring"}},
        {"topology": {"n_gateways": 2, "topology": "unbalanced", "hot_gateway": 3}},
        {"traffic": {"duty_cycle_limit": 0}},
        {"bogus": 1},
    ],
)
def test_invalid_config_rejected(data):
    with pytest.raises(ScenarioError, match="invariant violated|unknown"):
        config_from_dict(data)


def test_unparsable_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("topology: [1, 2\n")
    with pytest.raises(ScenarioError):
        load_config(path)


def test_config_round_trip(tmp_path):
    cfg = ScenarioConfig(n_nodes=77, n_gateways=8, topology="unbalanced", hot_gateway=5,
                         message_period=900.0, sigma2=4.0, seed=11)
    save_config(cfg, tmp_path / "c.yaml")
    assert load_config(tmp_path / "c.yaml") == cfg


def test_shadowing_seeded():
    cfg = ScenarioConfig(n_nodes=20, n_gateways=2, sigma2=9.0, seed=2)
    a = build_scenario(cfg).rssi_matrix().r
    b = build_scenario(cfg).rssi_matrix().r
    flat = build_scenario(ScenarioConfig(n_nodes=20, n_gateways=2, seed=2)).rssi_matrix().r
    assert np.array_equal(a, b)
    assert not np.allclose(a, flat)


def test_scenario_csv(tmp_path):
    sc = build_scenario(ScenarioConfig(n_nodes=5, n_gateways=2))
    sc.to_csv(tmp_path / "pos.csv")
    lines = (tmp_path / "pos.csv").read_text().splitlines()
    assert lines[0] == "kind,id,x,y"
    assert len(lines) == 1 + 2 + 5
    assert lines[1].startswith("gateway,0,")
