"""Independent brute-force checkers for the numerical core.

These deliberately share no code with the implementations they audit: the
LP oracle enumerates candidate vertices directly, the Shapley oracle
averages marginal contributions over every join order, and the structure
oracle enumerates partitions by recursive insertion rather than growth
strings.  They only scale to toy sizes, which is the point.
"""

import itertools
import math

import numpy as np

from .lp import LinearProgram, LpSolution, LpStatus

_ORACLE_FEAS_TOL = 1e-9


def brute_force_lp(problem: LinearProgram) -> LpSolution:
    """Minimize by enumerating basic points of a fully box-bounded program.

    Every candidate point is the solution of ``n`` active constraints
    chosen among the equality rows (always active), the <= rows, and the
    variable bounds.  Requires finite bounds on every variable so the
    feasible set is a polytope and the optimum sits on a vertex.
    """
    c = np.asarray(problem.objective, dtype=float)
    n = c.size
    lo = np.asarray(problem.lower, dtype=float)
    hi = np.asarray(problem.upper, dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("vertex enumeration needs finite bounds on all variables")
    aeq = np.asarray(problem.eq_matrix, dtype=float)
    beq = np.asarray(problem.eq_rhs, dtype=float)
    aub = np.asarray(problem.ub_matrix, dtype=float)
    bub = np.asarray(problem.ub_rhs, dtype=float)
    me = aeq.shape[0]

    candidates: list[tuple[np.ndarray, float]] = []
    for i in range(aub.shape[0]):
        candidates.append((aub[i], float(bub[i])))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        candidates.append((e, float(lo[j])))
        candidates.append((e.copy(), float(hi[j])))

    def feasible(x: np.ndarray) -> bool:
        if np.any(x < lo - _ORACLE_FEAS_TOL) or np.any(x > hi + _ORACLE_FEAS_TOL):
            return False
        if me and np.max(np.abs(aeq @ x - beq)) > _ORACLE_FEAS_TOL:
            return False
        if aub.shape[0] and np.max(aub @ x - bub) > _ORACLE_FEAS_TOL:
            return False
        return True

    need = n - me
    best_obj = None
    best_x = None
    if need < 0:
        return LpSolution(LpStatus.INFEASIBLE, None, None)
    for chosen in itertools.combinations(range(len(candidates)), need):
        rows = [aeq[i] for i in range(me)] + [candidates[i][0] for i in chosen]
        rhs = [beq[i] for i in range(me)] + [candidates[i][1] for i in chosen]
        mat = np.array(rows, dtype=float).reshape(n, n)
        try:
            x = np.linalg.solve(mat, np.array(rhs, dtype=float))
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(x)) or not feasible(x):
            continue
        obj = float(c @ x)
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_x = x
    if best_obj is None:
        return LpSolution(LpStatus.INFEASIBLE, None, None)
    return LpSolution(LpStatus.OPTIMAL, best_x, best_obj)


def permutation_shapley(values, members) -> np.ndarray:
    """Shapley shares as the plain average of marginal costs over all join
    orders; the empty coalition is worth 0."""
    members = tuple(sorted(members))
    m = len(members)
    shares = {i: 0.0 for i in members}
    for order in itertools.permutations(members):
        mask = 0
        prev = 0.0
        for agent in order:
            mask |= 1 << agent
            cur = values[mask]
            shares[agent] += cur - prev
            prev = cur
    total = math.factorial(m)
    return np.array([shares[i] / total for i in members])


def _partitions_by_insertion(items: list[int]):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _partitions_by_insertion(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def best_partition_by_enumeration(values, n: int) -> tuple[tuple[tuple[int, ...], ...], float]:
    """Cheapest coalition structure by direct enumeration (insertion method).

    Returns the canonical block tuple and its aggregate cost.
    """
    best_value = None
    best_blocks = None
    for part in _partitions_by_insertion(list(range(n))):
        total = 0.0
        for block in part:
            mask = 0
            for i in block:
                mask |= 1 << i
            total += values[mask]
        if best_value is None or total < best_value:
            best_value = total
            blocks = tuple(sorted(tuple(sorted(b)) for b in part))
            best_blocks = blocks
    return best_blocks, best_value


def random_box_lp(rng: np.random.Generator, max_vars: int = 4,
                  max_eq: int = 2, max_ub: int = 4) -> LinearProgram:
    """Random fully-bounded program for oracle comparisons.

    Constraints are anchored on a random interior point so most instances
    are feasible, with a fraction left intentionally infeasible.
    """
    n = int(rng.integers(1, max_vars + 1))
    lo = rng.uniform(-3.0, 0.0, n)
    hi = lo + rng.uniform(0.5, 4.0, n)
    c = rng.uniform(-2.0, 2.0, n)
    anchor = rng.uniform(lo, hi)

    me = int(rng.integers(0, min(max_eq, n - 1) + 1)) if n > 1 else 0
    aeq = rng.uniform(-1.0, 1.0, (me, n))
    if rng.uniform() < 0.85:
        beq = aeq @ anchor
    else:
        beq = rng.uniform(-3.0, 3.0, me)

    mu = int(rng.integers(0, max_ub + 1))
    aub = rng.uniform(-1.0, 1.0, (mu, n))
    slack = rng.uniform(0.0, 2.0, mu)
    if rng.uniform() < 0.9:
        bub = aub @ anchor + slack
    else:
        bub = aub @ anchor - rng.uniform(0.5, 2.0, mu)

    from .lp import make_program
    return make_program(c, aeq, beq, aub, bub, lower=lo, upper=hi)


def random_cost_game(rng: np.random.Generator, n: int) -> dict[int, float]:
    """Random characteristic cost function over all nonempty subsets of n agents."""
    return {mask: float(rng.uniform(-5.0, 5.0)) for mask in range(1, 1 << n)}
