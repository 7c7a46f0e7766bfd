"""Buyer-side mechanism: greedy winner determination and critical-value payments.

The base station collects bid menus, keeps each user's highest-value bid,
and admits users in decreasing order of value per unit of weighted
resource size until a capacity check fails. The same pass constructs a
feasible solution to the dual of the LP relaxation, which certifies the
approximation bound. Payments are critical values: each winner is paid its
satisfaction minus the best losing ratio that would emerge were the winner
absent, which makes truthful cost reporting a dominant strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bidding import Bid
from .model import SystemConfig, UserProfile


@dataclass(frozen=True)
class AuctionInstance:
    """One auction: the system constants, the sellers, and their bid menus.

    ``bids[k]`` is the menu submitted by ``users[k]``; menus may be empty.
    """

    config: SystemConfig
    users: tuple[UserProfile, ...]
    bids: tuple[tuple[Bid, ...], ...]

    def __post_init__(self) -> None:
        if len(self.users) != len(self.bids):
            raise ValueError("one bid list per user required")
        seen_ids = set()
        for user, menu in zip(self.users, self.bids):
            if user.id in seen_ids:
                raise ValueError(f"duplicate user id {user.id}")
            seen_ids.add(user.id)
            if user.b_cap > self.config.B_max or user.A_cap > self.config.A_max:
                raise ValueError(f"user {user.id} ceilings exceed system capacity")
            indices = [bid.index for bid in menu]
            if len(set(indices)) != len(indices):
                raise ValueError(f"user {user.id} has duplicate bid indices")
            for bid in menu:
                if bid.user != user.id:
                    raise ValueError(f"bid owner {bid.user} does not match user {user.id}")
                if bid.b > user.b_cap or bid.A > user.A_cap:
                    raise ValueError(f"bid ({bid.b}, {bid.A}) exceeds user {user.id} ceilings")

    @property
    def n_users(self) -> int:
        return len(self.users)

    def without_user(self, position: int) -> "AuctionInstance":
        """Copy of the instance with all bids of one user removed."""
        menus = tuple(
            () if k == position else menu for k, menu in enumerate(self.bids)
        )
        return AuctionInstance(config=self.config, users=self.users, bids=menus)


@dataclass
class Allocation:
    """Winner set with the dual variables built alongside it.

    ``assignment[k]`` is the winning bid index of ``users[k]`` or None.
    ``order`` lists winner positions in admission order. ``y`` holds one
    dual value per user (the winning bid's value, else 0); ``z`` and ``t``
    are the per-subchannel and per-antenna duals.
    """

    assignment: list[int | None]
    order: list[int]
    welfare: float
    y: list[float]
    z: float
    t: float
    psi_bar: float
    kappa: float
    used_B: int
    used_A: int

    @property
    def winners(self) -> list[int]:
        return [k for k, choice in enumerate(self.assignment) if choice is not None]


@dataclass(frozen=True)
class WinnerPayment:
    """Payment and utility of one winning user."""

    user: int
    position: int
    bid_index: int
    payment: float
    utility: float
    threshold: float


@dataclass
class PaymentResult:
    """Critical-value payments for every winner of an allocation."""

    payments: list[WinnerPayment]
    reruns: int

    @property
    def total_payment(self) -> float:
        return sum(p.payment for p in self.payments)


@dataclass(frozen=True)
class DualCertificate:
    """Outcome of checking an allocation's duals against the LP dual constraints."""

    feasible: bool
    worst_violation: float
    violator: tuple[int, int] | None


@dataclass(frozen=True)
class AllocationSummary:
    """Aggregate view of an allocation for reporting."""

    welfare: float
    total_payment: float
    utilities: tuple[float, ...]
    used_B: int
    used_A: int
    utilization_B: float
    utilization_A: float
    winner_fraction: float


def weighted_size(bid: Bid, config: SystemConfig) -> float:
    """Weighted resource footprint of a bid: eta_b * b + eta_a * A."""
    return config.eta_b * bid.b + config.eta_a * bid.A


def bid_value(bid: Bid, config: SystemConfig) -> float:
    """Buyer value of a bid: satisfaction tau * eps minus the claimed cost."""
    return config.tau * bid.eps - bid.v


def _candidate(menu: tuple[Bid, ...], config: SystemConfig) -> Bid | None:
    """The user's representative bid: highest positive value, earliest index on ties.

    Bids with nonpositive value can never improve welfare and are dropped
    before allocation (and identically inside payment re-runs).
    """
    best: Bid | None = None
    best_value = 0.0
    for bid in sorted(menu, key=lambda item: item.index):
        value = bid_value(bid, config)
        if value > 0.0 and (best is None or value > best_value):
            best = bid
            best_value = value
    return best


def _size_ratio_bound(instance: AuctionInstance) -> float:
    """Largest same-user ratio of weighted bid sizes (at least 1)."""
    kappa = 1.0
    for menu in instance.bids:
        sizes = [
            weighted_size(bid, instance.config)
            for bid in menu
            if bid_value(bid, instance.config) > 0.0
        ]
        if sizes:
            kappa = max(kappa, max(sizes) / min(sizes))
    return kappa


def greedy_allocate(instance: AuctionInstance) -> Allocation:
    """Admit users by decreasing normalized value until capacity fails.

    Each user is represented by its highest-value bid. Admission stops at
    the first capacity violation (no skip-and-continue), which is what the
    dual-feasibility argument relies on. Ties in the normalized value are
    broken by instance position, then bid index, so runs are reproducible.
    """
    config = instance.config
    candidates: list[tuple[float, int, int, Bid, float, float]] = []
    for position, menu in enumerate(instance.bids):
        bid = _candidate(menu, config)
        if bid is None:
            continue
        value = bid_value(bid, config)
        size = weighted_size(bid, config)
        candidates.append((value / size, position, bid.index, bid, value, size))
    candidates.sort(key=lambda item: (-item[0], item[1], item[2]))

    kappa = _size_ratio_bound(instance)
    assignment: list[int | None] = [None] * instance.n_users
    y = [0.0] * instance.n_users
    order: list[int] = []
    welfare = 0.0
    size_total = 0.0
    used_B = 0
    used_A = 0
    for _ratio, position, bid_index, bid, value, size in candidates:
        if used_B + bid.b > config.B_max or used_A + bid.A > config.A_max:
            break
        assignment[position] = bid_index
        y[position] = value
        order.append(position)
        welfare += value
        size_total += size
        used_B += bid.b
        used_A += bid.A

    psi = welfare / size_total if size_total > 0.0 else 0.0
    psi_bar = kappa * psi
    return Allocation(
        assignment=assignment,
        order=order,
        welfare=welfare,
        y=y,
        z=config.eta_b * psi_bar,
        t=config.eta_a * psi_bar,
        psi_bar=psi_bar,
        kappa=kappa,
        used_B=used_B,
        used_A=used_A,
    )


def _bid_of(instance: AuctionInstance, position: int, bid_index: int) -> Bid:
    for bid in instance.bids[position]:
        if bid.index == bid_index:
            return bid
    raise KeyError(f"user at position {position} has no bid with index {bid_index}")


def critical_payments(instance: AuctionInstance, allocation: Allocation) -> PaymentResult:
    """Pay each winner its satisfaction minus the critical value of its bid.

    For winner n, the greedy pass is re-run without any of n's bids; the
    critical ratio is the highest normalized value among users that lose in
    that re-run (zero when everyone wins). Exactly one re-run per winner.
    """
    config = instance.config
    payments: list[WinnerPayment] = []
    reruns = 0
    for position in allocation.winners:
        reduced = instance.without_user(position)
        rerun = greedy_allocate(reduced)
        reruns += 1
        threshold = 0.0
        for other, menu in enumerate(reduced.bids):
            if rerun.assignment[other] is not None:
                continue
            bid = _candidate(menu, config)
            if bid is None:
                continue
            ratio = bid_value(bid, config) / weighted_size(bid, config)
            threshold = max(threshold, ratio)
        winning = _bid_of(instance, position, allocation.assignment[position])
        payment = config.tau * winning.eps - threshold * weighted_size(winning, config)
        payments.append(
            WinnerPayment(
                user=winning.user,
                position=position,
                bid_index=winning.index,
                payment=payment,
                utility=payment - winning.v,
                threshold=threshold,
            )
        )
    return PaymentResult(payments=payments, reruns=reruns)


def dual_feasible(
    instance: AuctionInstance,
    allocation: Allocation,
    tol: float = 1e-9,
) -> DualCertificate:
    """Check the allocation's duals against every dual constraint.

    Requires ``y_n + z*b_ni + t*A_ni >= q_ni - tol`` for every bid of every
    user, plus nonnegativity of all duals. Returns the worst violation and
    the bid attaining it when infeasible.
    """
    config = instance.config
    worst = 0.0
    violator: tuple[int, int] | None = None
    for dual in (allocation.z, allocation.t, *allocation.y):
        if dual < -tol:
            worst = max(worst, -dual)
    for position, menu in enumerate(instance.bids):
        for bid in menu:
            covered = (
                allocation.y[position]
                + allocation.z * bid.b
                + allocation.t * bid.A
            )
            shortfall = bid_value(bid, config) - covered
            if shortfall > worst:
                worst = shortfall
                violator = (position, bid.index)
    feasible = worst <= tol
    return DualCertificate(
        feasible=feasible,
        worst_violation=worst,
        violator=None if feasible else violator,
    )


def approx_bound(instance: AuctionInstance, allocation: Allocation) -> float:
    """Approximation ratio 1 + kappa * Y / (Y - S) with Y the weighted capacity.

    ``S`` is the largest weighted size over all submitted bids. Undefined
    (raises) when S reaches the capacity measure Y.
    """
    config = instance.config
    capacity_measure = config.eta_b * config.B_max + config.eta_a * config.A_max
    largest = 0.0
    for menu in instance.bids:
        for bid in menu:
            largest = max(largest, weighted_size(bid, config))
    if capacity_measure <= largest:
        raise ValueError(
            f"approximation bound undefined: max bid size {largest} reaches "
            f"capacity measure {capacity_measure}"
        )
    return 1.0 + allocation.kappa * capacity_measure / (capacity_measure - largest)


def allocation_report(
    instance: AuctionInstance,
    allocation: Allocation,
    payments: PaymentResult | None = None,
) -> AllocationSummary:
    """Aggregate welfare, payments, utilities and utilization for reporting."""
    config = instance.config
    utilities = [0.0] * instance.n_users
    total_payment = 0.0
    if payments is not None:
        total_payment = payments.total_payment
        for entry in payments.payments:
            utilities[entry.position] = entry.utility
    n = instance.n_users
    return AllocationSummary(
        welfare=allocation.welfare,
        total_payment=total_payment,
        utilities=tuple(utilities),
        used_B=allocation.used_B,
        used_A=allocation.used_A,
        utilization_B=allocation.used_B / config.B_max,
        utilization_A=allocation.used_A / config.A_max,
        winner_fraction=len(allocation.order) / n if n else 0.0,
    )
