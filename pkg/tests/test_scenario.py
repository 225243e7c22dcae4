import json

import numpy as np
import pytest

from coopgrid.errors import ScenarioError
from coopgrid.scenario import (MIN_PRICE_MARGIN, generate_synthetic_scenario,
                               load_scenario, serialize_scenario, slice_horizon,
                               validate_scenario)

MINIMAL_DOC = json.dumps({
    "step_hours": 1.0,
    "start_hour": 7.0,
    "nodes": [{
        "id": 0,
        "position": {"x_km": 0.0, "y_km": 0.0},
        "s_max_kwh": 2.0,
        "s0_kwh": 0.0,
        "demand_kwh": [1.0, 2.0],
        "generation_kwh": [0.0, 0.5],
        "buy_price": [0.08, 0.08],
        "sell_price": [0.05, 0.05],
    }],
})


def test_load_minimal_document():
    scenario = load_scenario(MINIMAL_DOC)
    assert scenario.n_nodes == 1
    assert scenario.n_steps == 2
    assert scenario.nodes[0].buy_price[0] == 0.08


def test_bad_tariff_names_node_and_step():
    scenario = generate_synthetic_scenario(5, n_nodes=4, n_steps=8)
    doc = json.loads(serialize_scenario(scenario))
    doc["nodes"][3]["buy_price"][5] = 0.08
    doc["nodes"][3]["sell_price"][5] = 0.09
    with pytest.raises(ScenarioError) as err:
        load_scenario(json.dumps(doc))
    assert "node 3" in str(err.value)
    assert "step 5" in str(err.value)


def test_unknown_field_rejected():
    doc = json.loads(MINIMAL_DOC)
    doc["nodes"][0]["color"] = "red"
    with pytest.raises(ScenarioError, match="unknown field"):
        load_scenario(json.dumps(doc))
    doc = json.loads(MINIMAL_DOC)
    doc["comment"] = "hi"
    with pytest.raises(ScenarioError, match="unknown top-level field"):
        load_scenario(json.dumps(doc))


def test_missing_field_rejected():
    doc = json.loads(MINIMAL_DOC)
    del doc["nodes"][0]["s0_kwh"]
    with pytest.raises(ScenarioError, match="missing field"):
        load_scenario(json.dumps(doc))


def test_malformed_text_rejected():
    with pytest.raises(ScenarioError, match="malformed"):
        load_scenario("{not json")


def test_crossed_storage_rejected():
    doc = json.loads(MINIMAL_DOC)
    doc["nodes"][0]["s0_kwh"] = 5.0
    with pytest.raises(ScenarioError, match="s0_kwh"):
        load_scenario(json.dumps(doc))


def test_round_trip():
    scenario = generate_synthetic_scenario(9, n_nodes=5, n_steps=12)
    again = load_scenario(serialize_scenario(scenario))
    assert again == scenario


def test_generator_deterministic_in_seed():
    a = generate_synthetic_scenario(1, 8, 17)
    b = generate_synthetic_scenario(1, 8, 17)
    assert a == b
    c = generate_synthetic_scenario(2, 8, 17)
    assert not np.array_equal(a.nodes[0].demand, c.nodes[0].demand)


def test_generator_margin_and_validity():
    for seed in range(6):
        scenario = generate_synthetic_scenario(seed, n_nodes=6, n_steps=20)
        assert validate_scenario(scenario) == []
        for node in scenario.nodes:
            assert np.all(node.buy_price - node.sell_price >= MIN_PRICE_MARGIN)


def test_generator_every_node_net_buyer():
    # keeps the Table-3 style price comparison defined for every agent
    for seed in range(4):
        scenario = generate_synthetic_scenario(seed)
        for node in scenario.nodes:
            assert node.demand.sum() > node.generation.sum()


def test_reference_scenario_shape(ref_scenario):
    assert ref_scenario.n_nodes == 8
    assert ref_scenario.n_steps == 17
    assert ref_scenario.start_hour == 7.0
    assert validate_scenario(ref_scenario) == []


def test_slice_copies_within_range(ref_scenario):
    hs = slice_horizon(ref_scenario, 0, 5)
    assert hs.horizon == 5
    assert np.array_equal(hs.demand[2], ref_scenario.nodes[2].demand[0:5])


def test_slice_pads_with_last_value(ref_scenario):
    hs = slice_horizon(ref_scenario, 15, 5)
    node = ref_scenario.nodes[0]
    assert hs.demand[0, 0] == node.demand[15]
    assert hs.demand[0, 1] == node.demand[16]
    assert np.all(hs.demand[0, 2:] == node.demand[16])
    hs = slice_horizon(ref_scenario, 16, 5)
    assert np.all(hs.buy_price[0] == node.buy_price[16])


def test_slice_rejects_out_of_range(ref_scenario):
    with pytest.raises(IndexError):
        slice_horizon(ref_scenario, 17, 5)
    with pytest.raises(IndexError):
        slice_horizon(ref_scenario, -1, 5)


def test_slice_select_subset(ref_scenario):
    hs = slice_horizon(ref_scenario, 3, 4)
    sub = hs.select((2, 5))
    assert sub.node_ids == (2, 5)
    assert np.array_equal(sub.demand[1], hs.demand[5])
