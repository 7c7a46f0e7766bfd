"""Per-user bid formation.

A user who is offered a resource bundle (b subchannels, A antennas) picks
its transmit power, CPU frequency and local accuracy to minimize total
training energy subject to the task deadline, then reports that minimal
energy as the claimed cost of the bid. The solver alternates between

* a power step: communication energy is strictly increasing in p, so the
  optimum is the smallest deadline-feasible power (bisection on the
  monotone rate function);
* a frequency step: computation energy is increasing in f, so the optimum
  is the smallest frequency that still meets the deadline (closed form);
* an accuracy step: at fixed (p, f) the deadline reduces to a box
  constraint on eps, and the fractional energy objective is minimized by
  Dinkelbach iteration.

Each step solves its subproblem exactly, so the objective is nonincreasing
across outer iterations and the alternation converges to a local optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    LN2,
    SystemConfig,
    UserProfile,
    global_iterations,
    local_iterations,
    round_metrics,
    uplink_rate,
)

POWER_REL_TOL = 1e-9        # bisection width on p, relative
ACCURACY_ROOT_TOL = 1e-10   # bisection width on eps roots, absolute
ACCURACY_FLOOR = 1e-12      # smallest accuracy the interval search distinguishes
DINKELBACH_TOL = 1e-8       # residual scale for the Dinkelbach loop
DINKELBACH_MAX_ITER = 200
OUTER_REL_TOL = 1e-6        # relative objective change across outer iterations
OUTER_MAX_ITER = 100


class InfeasibleBidError(Exception):
    """The user cannot meet the task deadline with the offered bundle."""


class NoFeasibleAccuracyError(InfeasibleBidError):
    """No local accuracy satisfies the deadline at the given (p, f)."""


@dataclass(frozen=True)
class BidSolution:
    """Operating point and cost of one solved bid.

    ``total_energy`` is the minimized objective (global iterations times
    per-round energy) and becomes the user's true cost for the bundle.
    ``objective_trace`` records the objective after initialization and
    after each outer iteration, for convergence diagnostics.
    """

    p: float
    f: float
    eps: float
    I0: float
    total_energy: float
    total_time: float
    iterations_used: int
    converged: bool
    objective_trace: tuple[float, ...] = ()


@dataclass(frozen=True)
class Bid:
    """One offer: a resource bundle, the promised accuracy and a claimed cost."""

    user: int
    index: int
    b: int
    A: int
    eps: float
    v: float
    solution: BidSolution

    def __post_init__(self) -> None:
        if self.b < 1 or self.A < 1:
            raise ValueError("bundle counts must be at least 1")
        if self.v < 0:
            raise ValueError("claimed cost must be nonnegative")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")


def min_power_for_deadline(
    config: SystemConfig,
    user: UserProfile,
    A: int,
    b: int,
    f: float,
    eps: float,
    time_budget: float,
) -> float:
    """Smallest transmit power that fits one round into ``time_budget`` seconds.

    The budget covers both the local iterations at frequency ``f`` and the
    model upload; only the upload depends on p. Since the rate is monotone
    in p the threshold power is found by bisection, clamped up to p_min.

    Raises:
        InfeasibleBidError: if even p_max cannot meet the budget.
    """
    if A < 2:
        raise InfeasibleBidError(f"bundle with A={A} has zero uplink rate")
    comm_budget = time_budget - local_iterations(eps) * user.cycles_per_update / f
    if comm_budget <= 0.0:
        raise InfeasibleBidError(
            "compute time alone exceeds the per-round budget at this bundle"
        )
    required_rate = config.sigma / comm_budget
    if uplink_rate(config, user, user.p_min, A, b) >= required_rate:
        return user.p_min
    if uplink_rate(config, user, user.p_max, A, b) < required_rate:
        raise InfeasibleBidError(
            "even maximum power cannot meet the per-round budget at this bundle"
        )
    lo, hi = user.p_min, user.p_max
    while hi - lo > POWER_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if uplink_rate(config, user, mid, A, b) >= required_rate:
            hi = mid
        else:
            lo = mid
    return hi  # upper end of the bracket is always feasible


def min_frequency_for_deadline(
    config: SystemConfig,
    user: UserProfile,
    eps: float,
    comm_time: float,
) -> float:
    """Smallest CPU frequency that meets the task deadline at fixed (eps, comm_time).

    Computation energy grows with f, so the optimum is the frequency that
    makes the deadline tight, clamped up to f_min.

    Raises:
        InfeasibleBidError: if the residual time budget is nonpositive or
            the required frequency exceeds f_max.
    """
    rounds = global_iterations(config, eps)
    residual = config.T_max - rounds * comm_time
    if residual <= 0.0:
        raise InfeasibleBidError("communication alone exceeds the task deadline")
    f_star = rounds * local_iterations(eps) * user.cycles_per_update / residual
    if f_star <= user.f_min:
        return user.f_min
    if f_star > user.f_max * (1 + 1e-12):
        raise InfeasibleBidError("required CPU frequency exceeds f_max")
    return min(f_star, user.f_max)


def _deadline_slack(config: SystemConfig, user: UserProfile, f: float, eps: float) -> float:
    """Communication time the deadline leaves for one round at (f, eps).

    This is the concave function of eps whose superlevel set {slack >= comm_time}
    is the feasible accuracy interval.
    """
    scale = config.iteration_scale
    return (1.0 - eps) / scale * config.T_max + user.cycles_per_update * math.log2(eps) / f


def accuracy_feasible_interval(
    config: SystemConfig,
    user: UserProfile,
    p: float,
    f: float,
    A: int,
    b: int,
) -> tuple[float, float]:
    """Interval of local accuracies that keep the task within its deadline.

    The deadline constraint at fixed (p, f) is ``comm_time <= slack(eps)``
    with ``slack`` concave on (0, 1), so the feasible set is a closed
    interval. Its endpoints are located by finding the maximizer of
    ``slack`` analytically and bisecting on each side. The returned
    endpoints always satisfy the constraint (inner rounding).

    Raises:
        NoFeasibleAccuracyError: if no accuracy is feasible.
    """
    rate = uplink_rate(config, user, p, A, b)
    if rate <= 0.0:
        raise NoFeasibleAccuracyError(f"bundle with A={A} has zero uplink rate")
    comm_time = config.sigma / rate
    scale = config.iteration_scale
    peak = scale * user.cycles_per_update / (f * LN2 * config.T_max)
    if peak >= 1.0:
        # slack is increasing on (0,1) with sup slack = 0 < comm_time
        raise NoFeasibleAccuracyError("no feasible accuracy: compute load too high")
    slack_at_peak = _deadline_slack(config, user, f, peak)
    if slack_at_peak < comm_time:
        if slack_at_peak >= comm_time * (1.0 - 1e-12):
            return peak, peak  # tangency within rounding noise
        raise NoFeasibleAccuracyError("no feasible accuracy at this operating point")

    def slack(e: float) -> float:
        return _deadline_slack(config, user, f, e)

    # Left root: slack increases from -inf to the peak value. The root can
    # sit far below any useful accuracy, so the search is floored.
    lo = peak
    while lo > ACCURACY_FLOOR and slack(lo) >= comm_time:
        lo *= 0.5
    if slack(lo) >= comm_time:
        eps_min = lo
    else:
        hi = peak
        while hi - lo > ACCURACY_ROOT_TOL:
            mid = 0.5 * (lo + hi)
            if slack(mid) >= comm_time:
                hi = mid
            else:
                lo = mid
        eps_min = hi

    # Right root: slack decreases from the peak value to slack(1) = 0.
    lo, hi = peak, 1.0
    while hi - lo > ACCURACY_ROOT_TOL:
        mid = 0.5 * (lo + hi)
        if slack(mid) >= comm_time:
            lo = mid
        else:
            hi = mid
    eps_max = lo

    return eps_min, eps_max


def dinkelbach_accuracy(
    gamma1: float,
    gamma2: float,
    eps_min: float,
    eps_max: float,
) -> float:
    """Minimize ``(gamma1*log2(1/eps) + gamma2) / (1 - eps)`` on [eps_min, eps_max].

    Classic Dinkelbach iteration: for the current ratio estimate xi, the
    parametric subproblem is convex with stationary point
    ``eps = gamma1 / (ln2 * xi)`` (clamped to the box); xi is then updated
    to the objective value at that point. Stops when the parametric
    residual H(xi) is negligible relative to gamma1 + gamma2.
    """
    if not 0.0 < eps_min <= eps_max < 1.0:
        raise ValueError("need 0 < eps_min <= eps_max < 1")
    if gamma1 <= 0.0 or gamma2 < 0.0:
        raise ValueError("need gamma1 > 0 and gamma2 >= 0")
    if eps_min == eps_max:
        return eps_min

    def numerator(e: float) -> float:
        return gamma1 * math.log2(1.0 / e) + gamma2

    residual_scale = gamma1 + gamma2
    eps = 0.5 * (eps_min + eps_max)
    xi = numerator(eps) / (1.0 - eps)
    for _ in range(DINKELBACH_MAX_ITER):
        eps = min(max(gamma1 / (LN2 * xi), eps_min), eps_max)
        residual = numerator(eps) - xi * (1.0 - eps)
        if abs(residual) <= DINKELBACH_TOL * residual_scale:
            break
        xi = numerator(eps) / (1.0 - eps)
    return eps


def dinkelbach_residual(
    gamma1: float,
    gamma2: float,
    eps_min: float,
    eps_max: float,
    eps: float,
) -> float:
    """Parametric residual H(xi) at the ratio induced by ``eps``.

    Zero exactly at the constrained minimizer; used as the optimality
    certificate for :func:`dinkelbach_accuracy`.
    """
    xi = (gamma1 * math.log2(1.0 / eps) + gamma2) / (1.0 - eps)
    e_star = min(max(gamma1 / (LN2 * xi), eps_min), eps_max)
    return gamma1 * math.log2(1.0 / e_star) + gamma2 - xi * (1.0 - e_star)


def _objective(
    config: SystemConfig, user: UserProfile, p: float, f: float, A: int, b: int, eps: float
) -> float:
    """Total training energy at an operating point (the quantity being minimized)."""
    metrics = round_metrics(config, user, p, f, A, b, eps)
    return global_iterations(config, eps) * metrics.round_energy


def solve_bid(config: SystemConfig, user: UserProfile, A: int, b: int) -> BidSolution:
    """Energy-minimal (p, f, eps) for a fixed resource bundle.

    Initializes at (p_max, f_max) with the midpoint of the feasible
    accuracy interval, then alternates the power/frequency steps with the
    Dinkelbach accuracy step until the objective stalls.

    Raises:
        InfeasibleBidError: if no feasible operating point exists for this
            bundle (including A < 2, which yields zero uplink rate).
    """
    if b < 1 or A < 1:
        raise ValueError("bundle counts must be at least 1")
    if A < 2:
        raise InfeasibleBidError(f"bundle with A={A} has zero uplink rate")

    p, f = user.p_max, user.f_max
    try:
        eps_lo, eps_hi = accuracy_feasible_interval(config, user, p, f, A, b)
    except NoFeasibleAccuracyError as exc:
        raise InfeasibleBidError(
            f"user {user.id} cannot meet deadline with bundle (A={A}, b={b})"
        ) from exc
    eps = 0.5 * (eps_lo + eps_hi)

    scale = config.iteration_scale
    objective = _objective(config, user, p, f, A, b, eps)
    trace = [objective]
    converged = False
    iterations = 0
    for iterations in range(1, OUTER_MAX_ITER + 1):
        rounds = global_iterations(config, eps)
        p = min_power_for_deadline(config, user, A, b, f, eps, config.T_max / rounds)
        rate = uplink_rate(config, user, p, A, b)
        comm_time = config.sigma / rate
        f = min_frequency_for_deadline(config, user, eps, comm_time)

        eps_lo, eps_hi = accuracy_feasible_interval(config, user, p, f, A, b)
        gamma1 = scale * user.zeta * user.cycles_per_update * f * f
        gamma2 = scale * p * config.sigma / rate
        eps = dinkelbach_accuracy(gamma1, gamma2, eps_lo, eps_hi)

        new_objective = _objective(config, user, p, f, A, b, eps)
        trace.append(new_objective)
        if abs(new_objective - objective) <= OUTER_REL_TOL * max(abs(objective), 1e-300):
            objective = new_objective
            converged = True
            break
        objective = new_objective

    metrics = round_metrics(config, user, p, f, A, b, eps)
    rounds = global_iterations(config, eps)
    total_time = rounds * metrics.round_time
    if total_time > config.T_max * (1 + 1e-9):
        raise InfeasibleBidError(
            f"solver left the feasible region (total_time={total_time}, T_max={config.T_max})"
        )
    return BidSolution(
        p=p,
        f=f,
        eps=eps,
        I0=rounds,
        total_energy=rounds * metrics.round_energy,
        total_time=total_time,
        iterations_used=iterations,
        converged=converged,
        objective_trace=tuple(trace),
    )


def build_bid_menu(
    config: SystemConfig,
    user: UserProfile,
    bundles: list[tuple[int, int]],
    honest: bool = True,
    misreport_factor: float = 1.0,
) -> list[Bid]:
    """Solve one bid per requested (b, A) bundle and assemble the menu.

    Infeasible bundles (including A=1, which has zero uplink rate) are
    skipped, not errors. When ``honest`` is false every claimed cost is the
    true cost scaled by ``misreport_factor``; this path exists only for
    truthfulness experiments.
    """
    bids: list[Bid] = []
    for b, A in bundles:
        if not 1 <= b <= user.b_cap or not 1 <= A <= user.A_cap:
            raise ValueError(
                f"bundle (b={b}, A={A}) outside user {user.id} ceilings "
                f"(b_cap={user.b_cap}, A_cap={user.A_cap})"
            )
        if A < 2:
            continue
        try:
            solution = solve_bid(config, user, A, b)
        except InfeasibleBidError:
            continue
        cost = solution.total_energy
        bids.append(
            Bid(
                user=user.id,
                index=len(bids),
                b=b,
                A=A,
                eps=solution.eps,
                v=cost if honest else misreport_factor * cost,
                solution=solution,
            )
        )
    return bids
