"""Reference solvers the greedy mechanism is benchmarked against.

* exact welfare maximization by depth-first branch-and-bound over per-user
  choices, pruned by a capacity-free bound and the LP relaxation of the
  residual subproblem;
* the LP relaxation itself, solved by the in-repo simplex;
* the welfare lower bound implied by the approximation ratio;
* a first-come-first-served fixed-price scheme with linear, sublinear and
  superlinear posted price vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simplex
from .auction import AuctionInstance, approx_bound, bid_value, greedy_allocate
from .bidding import Bid

PRICE_EXPONENTS = {"linear": 1.0, "sublinear": 0.85, "superlinear": 1.15}
DEFAULT_NODE_BUDGET = 10_000_000
# Margin protecting against float noise in bounds; pruning only discards
# nodes that provably cannot beat the incumbent.
PRUNE_MARGIN = 1e-9


class ExactSolverBudgetError(Exception):
    """Branch-and-bound exceeded its node budget (instance too large for exact)."""


@dataclass(frozen=True)
class FixedPriceConfig:
    """Posted-price baseline: prices proportional to the resource weights.

    The per-resource prices are ``f_b = f_o * eta_b**exponent`` and
    ``f_a = f_o * eta_a**exponent``; the exponent selects the linear,
    sublinear or superlinear price family.
    """

    f_o: float
    exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.f_o < 0:
            raise ValueError("basic price must be nonnegative")
        if self.exponent not in PRICE_EXPONENTS.values():
            raise ValueError(f"exponent must be one of {sorted(PRICE_EXPONENTS.values())}")

    def prices(self, eta_b: float, eta_a: float) -> tuple[float, float]:
        return self.f_o * eta_b**self.exponent, self.f_o * eta_a**self.exponent


@dataclass(frozen=True)
class ExactResult:
    welfare: float
    assignment: tuple[int | None, ...]
    nodes: int


@dataclass(frozen=True)
class FixedPriceOutcome:
    welfare: float
    assignment: tuple[int | None, ...]
    payments: tuple[float, ...]
    used_B: int
    used_A: int

    @property
    def total_payment(self) -> float:
        return sum(self.payments)


def _positive_menus(instance: AuctionInstance) -> list[list[Bid]]:
    """Per-user bids with positive value, sorted by decreasing value.

    Nonpositive-value bids can never appear in a welfare-maximizing
    assignment, so dropping them preserves the optimum.
    """
    config = instance.config
    menus = []
    for menu in instance.bids:
        keep = [bid for bid in menu if bid_value(bid, config) > 0.0]
        keep.sort(key=lambda bid: -bid_value(bid, config))
        menus.append(keep)
    return menus


def _relaxation_bound(
    menus: list[list[Bid]],
    config,
    start: int,
    b_left: int,
    a_left: int,
) -> float:
    """LP-relaxation optimum of the residual subproblem from ``start`` on."""
    columns: list[tuple[int, Bid]] = [
        (k, bid) for k in range(start, len(menus)) for bid in menus[k]
    ]
    if not columns:
        return 0.0
    users = sorted({k for k, _ in columns})
    row_of = {k: i + 2 for i, k in enumerate(users)}
    n = len(columns)
    A = np.zeros((2 + len(users), n))
    c = np.zeros(n)
    for j, (k, bid) in enumerate(columns):
        c[j] = bid_value(bid, config)
        A[0, j] = bid.b
        A[1, j] = bid.A
        A[row_of[k], j] = 1.0
    b = np.concatenate(([b_left, a_left], np.ones(len(users))))
    value, _ = simplex.maximize(c, A, b)
    return value


def exact_optimal(
    instance: AuctionInstance,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ExactResult:
    """Provably optimal winner set by depth-first branch-and-bound.

    Per user the choices are one of its positive-value bids or none. Nodes
    are pruned when even the capacity-free bound (then the LP bound of the
    residual subproblem) cannot beat the incumbent, which is seeded with
    the greedy allocation.

    Raises:
        ExactSolverBudgetError: when the node budget is exhausted.
    """
    config = instance.config
    menus = _positive_menus(instance)
    n_users = len(menus)

    # Capacity-free bound: sum of best values from user k onward.
    suffix_best = [0.0] * (n_users + 1)
    for k in range(n_users - 1, -1, -1):
        best = menus[k][0] if menus[k] else None
        suffix_best[k] = suffix_best[k + 1] + (bid_value(best, config) if best else 0.0)

    seed = greedy_allocate(instance)
    best_value = seed.welfare
    best_assignment: list[int | None] = list(seed.assignment)
    nodes = 0
    assignment: list[int | None] = [None] * n_users

    def descend(k: int, b_left: int, a_left: int, value: float) -> None:
        nonlocal nodes, best_value, best_assignment
        nodes += 1
        if nodes > node_budget:
            raise ExactSolverBudgetError(
                f"instance too large for exact solve (budget {node_budget} nodes)"
            )
        if k == n_users:
            if value > best_value:
                best_value = value
                best_assignment = assignment.copy()
            return
        if value + suffix_best[k] < best_value - PRUNE_MARGIN:
            return
        if n_users - k >= 3 and value + _relaxation_bound(
            menus, config, k, b_left, a_left
        ) < best_value - PRUNE_MARGIN:
            return
        for bid in menus[k]:
            if bid.b <= b_left and bid.A <= a_left:
                assignment[k] = bid.index
                descend(k + 1, b_left - bid.b, a_left - bid.A, value + bid_value(bid, config))
                assignment[k] = None
        descend(k + 1, b_left, a_left, value)

    descend(0, config.B_max, config.A_max, 0.0)
    return ExactResult(
        welfare=best_value, assignment=tuple(best_assignment), nodes=nodes
    )


def lp_relaxation(instance: AuctionInstance) -> tuple[float, list[list[float]]]:
    """Optimal value and fractional solution of the LP relaxation.

    Every submitted bid is a column; besides the two capacity rows there is
    one row per user limiting its total fractional award to one (which also
    implies x <= 1). Always feasible: x = 0.
    """
    config = instance.config
    columns: list[tuple[int, int]] = []
    for position, menu in enumerate(instance.bids):
        for j, bid in enumerate(menu):
            columns.append((position, j))
    x_by_user: list[list[float]] = [[0.0] * len(menu) for menu in instance.bids]
    if not columns:
        return 0.0, x_by_user

    users_with_bids = sorted({position for position, _ in columns})
    row_of = {position: i + 2 for i, position in enumerate(users_with_bids)}
    n = len(columns)
    A = np.zeros((2 + len(users_with_bids), n))
    c = np.zeros(n)
    for col, (position, j) in enumerate(columns):
        bid = instance.bids[position][j]
        c[col] = bid_value(bid, config)
        A[0, col] = bid.b
        A[1, col] = bid.A
        A[row_of[position], col] = 1.0
    b = np.concatenate(
        ([config.B_max, config.A_max], np.ones(len(users_with_bids)))
    )
    value, x = simplex.maximize(c, A, b)
    for col, (position, j) in enumerate(columns):
        x_by_user[position][j] = float(x[col])
    return value, x_by_user


def welfare_lower_bound(instance: AuctionInstance, allocation) -> float:
    """Fractional optimum divided by the approximation ratio."""
    bound = approx_bound(instance, allocation)
    fractional, _ = lp_relaxation(instance)
    return fractional / bound


def fixed_price_allocate(
    instance: AuctionInstance,
    fp: FixedPriceConfig,
) -> FixedPriceOutcome:
    """First-come-first-served allocation against a posted price vector.

    Users are served in instance order. Each user is awarded the first bid
    (in index order) whose value covers the posted bundle price and whose
    resources still fit; the winner pays that posted price.
    """
    config = instance.config
    price_b, price_a = fp.prices(config.eta_b, config.eta_a)
    assignment: list[int | None] = [None] * instance.n_users
    payments = [0.0] * instance.n_users
    welfare = 0.0
    used_B = 0
    used_A = 0
    for position, menu in enumerate(instance.bids):
        for bid in sorted(menu, key=lambda item: item.index):
            posted = bid.b * price_b + bid.A * price_a
            value = bid_value(bid, config)
            if value < posted:
                continue
            if used_B + bid.b > config.B_max or used_A + bid.A > config.A_max:
                continue
            assignment[position] = bid.index
            payments[position] = posted
            welfare += value
            used_B += bid.b
            used_A += bid.A
            break
    return FixedPriceOutcome(
        welfare=welfare,
        assignment=tuple(assignment),
        payments=tuple(payments),
        used_B=used_B,
        used_A=used_A,
    )
