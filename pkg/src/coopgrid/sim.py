"""Rolling-horizon closed loop: price coalitions, form a partition,
dispatch, apply the first-step inputs, settle charges, advance storage.

Per step in coalitional mode: every nonempty coalition is priced over the
prediction horizon, Shapley shares build the payoff map, the partition is
formed (or retained between re-formation steps), each block's planned
dispatch is applied for one step, and realized money is settled inside
each block with a one-step Shapley allocation built from the first-step
costs already cached by the sweep.  Grid-only and grid-with-storage modes
run the same loop degenerated to singleton blocks (grid-only additionally
clamps storage to zero).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dispatch import (CoalitionValueBreakdown, DispatchSolution, coalition_value,
                       mean_pairwise_distance, solve_individual_dispatch)
from .errors import DispatchError, ScenarioError
from .formation import Partition, form_partition
from .game import (CharacteristicFunction, CoalitionEntry, PayoffMap, PriceRecord,
                   characteristic_function, coalition_mask, coalition_members,
                   equivalent_price, payoff_map, shapley_value)
from .scenario import Scenario, slice_horizon, validate_scenario

STORAGE_DRIFT_TOL = 1e-8


class SimMode(Enum):
    GRID_ONLY = "grid-only"
    GRID_STORAGE = "grid-storage"
    COALITIONAL = "coalitional"


@dataclass(frozen=True)
class SimConfig:
    mode: SimMode = SimMode.COALITIONAL
    horizon: int = 5
    loss_weight: float = 1e-5
    transfer_reg: float = 1e-9
    reform_period: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.loss_weight < 0:
            raise ValueError("loss_weight must be nonnegative")
        if self.transfer_reg < 0:
            raise ValueError("transfer_reg must be nonnegative")
        if self.reform_period < 1:
            raise ValueError("reform_period must be at least 1")


@dataclass
class SystemState:
    step: int
    storage: np.ndarray


@dataclass
class StepResult:
    """Everything applied and settled at one step.

    Flow arrays are per agent (length N) at the applied step.
    ``coalition_values`` holds the full sweep's coalition costs when one
    was computed this step (None in the grid modes), ``payoffs`` the
    matching Shapley map when the partition was re-formed.
    """

    step: int
    partition: Partition
    grid_buy: np.ndarray
    grid_sell: np.ndarray
    coal_buy: np.ndarray
    coal_sell: np.ndarray
    storage_delta: np.ndarray
    storage_after: np.ndarray
    charges: np.ndarray
    prices: list[PriceRecord]
    block_plans: dict[int, CoalitionValueBreakdown]
    coalition_values: dict[int, float] | None
    payoffs: PayoffMap | None


@dataclass
class SimulationTrace:
    config: SimConfig
    steps: list[StepResult]
    cumulative_costs: np.ndarray
    final_storage: np.ndarray
    n_agents: int


def settle_step(partition: Partition, first_step_values: dict[int, float],
                n_agents: int | None = None) -> np.ndarray:
    """Split each block's realized one-step cost among its members.

    ``first_step_values`` maps coalition masks to one-step costs and must
    cover every nonempty subset of every block; the block's own entry is
    its realized cost, so by Shapley efficiency the returned charges sum
    to it within rounding.
    """
    if n_agents is None:
        n_agents = len(partition.agents)
    charges = np.zeros(n_agents)
    for block in partition.blocks:
        shares = shapley_value(first_step_values, block)
        for pos, agent in enumerate(block):
            charges[agent] = shares[pos]
    return charges


def _one_step_cost(sol: DispatchSolution, scenario: Scenario, hs,
                   loss_weight: float) -> float:
    """Realized cost of a dispatch at its first step: grid money plus the
    transfer-loss charge on the applied coalition purchases."""
    cost = 0.0
    for row, agent in enumerate(sol.members):
        cost += float(hs.buy_price[agent, 0] * sol.grid_buy[row, 0]
                      - hs.sell_price[agent, 0] * sol.grid_sell[row, 0])
    if loss_weight:
        r_hat = mean_pairwise_distance(scenario.positions[list(sol.members)])
        cost += loss_weight * r_hat * float(np.sum(sol.coal_buy[:, 0] ** 2))
    return cost


def step(state: SystemState, scenario: Scenario, config: SimConfig,
         prev_partition: Partition | None = None) -> tuple[StepResult, SystemState]:
    """Execute one closed-loop step and advance the storage state.

    ``prev_partition`` is reused on steps where the partition is not due
    for re-formation (``step % reform_period != 0``); block dispatches are
    still re-solved against the current storage state.
    """
    k = state.step
    n = scenario.n_nodes
    hs = slice_horizon(scenario, k, config.horizon)
    caps = scenario.storage_capacities

    cf: CharacteristicFunction | None = None
    pm: PayoffMap | None = None
    records: dict[int, CoalitionEntry] = {}
    if config.mode is SimMode.COALITIONAL:
        reform = prev_partition is None or k % config.reform_period == 0
        if reform:
            cf = characteristic_function(state.storage, scenario, k, config.horizon,
                                         config.loss_weight, config.transfer_reg)
            pm = payoff_map(cf)
            partition = form_partition(pm)
            records = cf.entries
        else:
            partition = prev_partition
            for block in partition.blocks:
                block_mask = coalition_mask(block)
                sub = block_mask
                while sub:
                    members = coalition_members(sub)
                    try:
                        breakdown, sol = coalition_value(
                            members, state.storage, scenario, k, config.horizon,
                            config.loss_weight, config.transfer_reg)
                    except DispatchError as exc:
                        raise DispatchError(f"step {k}, coalition {members}: {exc}") from exc
                    records[sub] = CoalitionEntry(breakdown, sol)
                    sub = (sub - 1) & block_mask
    else:
        partition = Partition.from_blocks([(i,) for i in range(n)])

    grid_buy = np.zeros(n)
    grid_sell = np.zeros(n)
    coal_buy = np.zeros(n)
    coal_sell = np.zeros(n)
    storage_delta = np.zeros(n)
    block_plans: dict[int, CoalitionValueBreakdown] = {}
    first_step_values = {mask: _one_step_cost(entry.solution, scenario, hs,
                                              config.loss_weight)
                         for mask, entry in records.items()}

    for block in partition.blocks:
        block_mask = coalition_mask(block)
        if len(block) == 1:
            # singleton blocks dispatch through the grid-only program so the
            # coalitional loop degenerates exactly to the storage baseline
            agent = block[0]
            if config.mode is SimMode.GRID_ONLY:
                s0, cap = 0.0, 0.0
            else:
                s0, cap = float(state.storage[agent]), float(caps[agent])
            try:
                sol = solve_individual_dispatch(hs.select(block), s0, cap)
            except DispatchError as exc:
                raise DispatchError(f"step {k}, node {agent}: {exc}") from exc
            plan = CoalitionValueBreakdown(sol.market_cost, 0.0, sol.market_cost, 0.0)
        else:
            entry = records[block_mask]
            sol = entry.solution
            plan = entry.breakdown
        block_plans[block_mask] = plan
        idx = list(block)
        grid_buy[idx] = sol.grid_buy[:, 0]
        grid_sell[idx] = sol.grid_sell[:, 0]
        coal_buy[idx] = sol.coal_buy[:, 0]
        coal_sell[idx] = sol.coal_sell[:, 0]
        storage_delta[idx] = sol.storage_delta[:, 0]
        first_step_values[block_mask] = _one_step_cost(sol, scenario, hs,
                                                       config.loss_weight)

    charges = settle_step(partition, first_step_values, n)

    net = grid_buy - grid_sell + coal_buy - coal_sell
    prices = [PriceRecord(agent=i, step=k, charge=float(charges[i]),
                          net_energy=float(net[i]),
                          price=equivalent_price(float(charges[i]), float(net[i])))
              for i in range(n)]

    new_storage = state.storage + storage_delta
    drift = float(np.max(np.maximum(-new_storage, new_storage - caps), initial=0.0))
    if drift > STORAGE_DRIFT_TOL:
        raise DispatchError(f"step {k}: storage bounds violated by {drift}")
    new_storage = np.clip(new_storage, 0.0, caps)

    result = StepResult(
        step=k,
        partition=partition,
        grid_buy=grid_buy,
        grid_sell=grid_sell,
        coal_buy=coal_buy,
        coal_sell=coal_sell,
        storage_delta=storage_delta,
        storage_after=new_storage.copy(),
        charges=charges,
        prices=prices,
        block_plans=block_plans,
        coalition_values={m: e.value for m, e in records.items()} if records else None,
        payoffs=pm,
    )
    return result, SystemState(step=k + 1, storage=new_storage)


def run(scenario: Scenario, config: SimConfig) -> SimulationTrace:
    """Run the closed loop over the whole scenario; fully deterministic."""
    issues = validate_scenario(scenario)
    if issues:
        raise ScenarioError("; ".join(issues))
    n = scenario.n_nodes
    if config.mode is SimMode.GRID_ONLY:
        storage0 = np.zeros(n)
    else:
        storage0 = scenario.storage_init.copy()
    state = SystemState(step=0, storage=storage0)
    results: list[StepResult] = []
    prev: Partition | None = None
    cumulative = np.zeros(n)
    for _ in range(scenario.n_steps):
        result, state = step(state, scenario, config, prev)
        prev = result.partition
        results.append(result)
        cumulative += result.charges
    return SimulationTrace(
        config=config,
        steps=results,
        cumulative_costs=cumulative,
        final_storage=state.storage,
        n_agents=n,
    )
