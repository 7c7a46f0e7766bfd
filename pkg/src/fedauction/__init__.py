"""Auction-based incentive simulator for federated learning over a cellular uplink."""

from .auction import (
    Allocation,
    AllocationSummary,
    AuctionInstance,
    DualCertificate,
    PaymentResult,
    WinnerPayment,
    allocation_report,
    approx_bound,
    bid_value,
    critical_payments,
    dual_feasible,
    greedy_allocate,
    weighted_size,
)
from .baselines import (
    ExactResult,
    ExactSolverBudgetError,
    FixedPriceConfig,
    FixedPriceOutcome,
    exact_optimal,
    fixed_price_allocate,
    lp_relaxation,
    welfare_lower_bound,
)
from .bidding import (
    Bid,
    BidSolution,
    InfeasibleBidError,
    NoFeasibleAccuracyError,
    accuracy_feasible_interval,
    build_bid_menu,
    dinkelbach_accuracy,
    dinkelbach_residual,
    min_frequency_for_deadline,
    min_power_for_deadline,
    solve_bid,
)
from .experiments import (
    ExperimentConfig,
    check_dual_feasibility,
    check_individual_rationality,
    check_sandwich,
    check_truthfulness,
    default_experiment_config,
    default_system_config,
    generate_instance,
    run_sweep,
    summarize_rows,
    verify_all,
)
from .model import (
    RoundMetrics,
    SystemConfig,
    UnreachableUplinkError,
    UserProfile,
    db_to_linear,
    dbm_per_hz_to_watts_per_hz,
    global_iterations,
    local_iterations,
    round_metrics,
    uplink_rate,
)

__version__ = "0.1.0"
