"""Shared construction helpers for the test suite."""

import numpy as np

from coopgrid.scenario import NodeProfile, Scenario


def make_node(node_id, demand, generation, buy, sell, cap=0.0, s0=0.0,
              position=None):
    if position is None:
        position = (0.5 * node_id, 0.0)
    return NodeProfile(
        node_id=node_id,
        position=position,
        storage_capacity=cap,
        storage_init=s0,
        demand=np.asarray(demand, dtype=float),
        generation=np.asarray(generation, dtype=float),
        buy_price=np.asarray(buy, dtype=float),
        sell_price=np.asarray(sell, dtype=float),
    )


def make_scenario(nodes, step_hours=1.0, start_hour=7.0):
    return Scenario(nodes=list(nodes), step_hours=step_hours, start_hour=start_hour)


def surplus_deficit_pair(steps=1):
    """Node 0 has a 3 kWh surplus, node 1 a 3 kWh deficit, 0.5 km apart."""
    a = make_node(0, demand=[0.0] * steps, generation=[3.0] * steps,
                  buy=[0.1] * steps, sell=[0.05] * steps, position=(0.0, 0.0))
    b = make_node(1, demand=[3.0] * steps, generation=[0.0] * steps,
                  buy=[0.1] * steps, sell=[0.05] * steps, position=(0.5, 0.0))
    return make_scenario([a, b])


def traces_equal(a, b) -> bool:
    """Bitwise comparison of the applied flows, partitions and charges."""
    if a.n_agents != b.n_agents or len(a.steps) != len(b.steps):
        return False
    if not (np.array_equal(a.cumulative_costs, b.cumulative_costs)
            and np.array_equal(a.final_storage, b.final_storage)):
        return False
    for ra, rb in zip(a.steps, b.steps):
        if ra.partition.blocks != rb.partition.blocks:
            return False
        for field in ("grid_buy", "grid_sell", "coal_buy", "coal_sell",
                      "storage_delta", "storage_after", "charges"):
            if not np.array_equal(getattr(ra, field), getattr(rb, field)):
                return False
    return True
