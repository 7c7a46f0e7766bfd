"""Seeded experiment harness: instance generation, sweeps and property checks.

Instances are deterministic functions of (experiment config, seed): user n
of an instance draws its physical profile from an RNG keyed by
``[seed, n]``, so the same seed reproduces the same population on any
platform, and populations are nested across user counts. Sweep rows are
emitted in sweep order, one row per (sweep point, repetition, scheme).
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .auction import (
    AuctionInstance,
    allocation_report,
    approx_bound,
    bid_value,
    critical_payments,
    dual_feasible,
    greedy_allocate,
)
from .baselines import (
    PRICE_EXPONENTS,
    ExactSolverBudgetError,
    FixedPriceConfig,
    exact_optimal,
    fixed_price_allocate,
    lp_relaxation,
    welfare_lower_bound,
)
from .bidding import build_bid_menu
from .model import SystemConfig, UserProfile, dbm_per_hz_to_watts_per_hz
from .storage import CSV_SCHEMA, CSV_SUMMARY_SCHEMA, write_csv_rows

# Largest instance the sweep hands to the exact solver.
EXACT_USER_LIMIT = 12
# Stride separating per-trial seeds in the property-check suites.
TRIAL_SEED_STRIDE = 7919

# Physical distributions of the simulated population. Channel gain and the
# noise density are specified in dB/dBm and converted to linear units at
# generation time; everything downstream is linear.
C_RANGE = (10.0, 50.0)               # CPU cycles per sample
SAMPLES_PER_USER = 800e3
SWITCHED_CAPACITANCE = 1e-26
CHANNEL_GAIN_DB_RANGE = (-95.0, -90.0)
P_MIN_RANGE = (1e-3, 2e-3)           # W
P_MAX_RANGE = (3e-3, 6e-3)           # W
F_MIN_RANGE = (0.1e9, 0.2e9)         # Hz
F_MAX_RANGE = (3e9, 5e9)             # Hz


def default_system_config(**overrides: Any) -> SystemConfig:
    """System constants used unless a config file says otherwise."""
    values: dict[str, Any] = dict(
        W=15e3,
        N0=dbm_per_hz_to_watts_per_hz(-174.0),
        B_max=100,
        A_max=100,
        C1=1.0,
        gamma=0.1,
        sigma=4e7,
        tau=2.0,
        eta_b=1.0,
        eta_a=1.0,
        T_max=300.0,
    )
    values.update(overrides)
    return SystemConfig(**values)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description: which instances to build and which knobs to vary.

    ``system`` carries the task constants; its eta weights and deadline are
    overridden by the corresponding sweep entries for each sweep point.
    """

    seed: int
    N: tuple[int, ...]
    bundle_grid: tuple[tuple[int, int], ...]
    f_o_sweep: tuple[float, ...]
    eta_settings: tuple[tuple[float, float], ...]
    T_max_sweep: tuple[float, ...]
    repetitions: int
    system: SystemConfig
    output_path: str | None = None

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative 64-bit integer")
        for name in ("N", "bundle_grid", "f_o_sweep", "eta_settings", "T_max_sweep"):
            if not getattr(self, name):
                raise ValueError(f"sweep list {name} must be nonempty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")


def default_experiment_config(seed: int = 0, **overrides: Any) -> ExperimentConfig:
    values: dict[str, Any] = dict(
        seed=seed,
        N=(10,),
        bundle_grid=((10, 10), (30, 30), (50, 50)),
        f_o_sweep=(0.01,),
        eta_settings=((1.0, 1.0),),
        T_max_sweep=(300.0,),
        repetitions=1,
        system=default_system_config(),
        output_path=None,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def experiment_config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    from .storage import _strict_kwargs, system_config_from_dict

    payload = dict(data)
    known = _strict_kwargs(ExperimentConfig, payload, "experiment config")
    return ExperimentConfig(
        seed=known["seed"],
        N=tuple(known["N"]),
        bundle_grid=tuple((int(b), int(a)) for b, a in known["bundle_grid"]),
        f_o_sweep=tuple(known["f_o_sweep"]),
        eta_settings=tuple((float(ea), float(eb)) for ea, eb in known["eta_settings"]),
        T_max_sweep=tuple(known["T_max_sweep"]),
        repetitions=known["repetitions"],
        system=system_config_from_dict(known["system"]),
        output_path=known["output_path"],
    )


def experiment_config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    data = dataclasses.asdict(config)
    data["N"] = list(config.N)
    data["bundle_grid"] = [list(pair) for pair in config.bundle_grid]
    data["f_o_sweep"] = list(config.f_o_sweep)
    data["eta_settings"] = [list(pair) for pair in config.eta_settings]
    data["T_max_sweep"] = list(config.T_max_sweep)
    return data


def _draw_profile(seed: int, n: int, bundle_grid: tuple[tuple[int, int], ...]) -> UserProfile:
    rng = np.random.default_rng([seed, n])
    c = rng.uniform(*C_RANGE)
    gain_db = rng.uniform(*CHANNEL_GAIN_DB_RANGE)
    p_min = rng.uniform(*P_MIN_RANGE)
    p_max = rng.uniform(*P_MAX_RANGE)
    f_min = rng.uniform(*F_MIN_RANGE)
    f_max = rng.uniform(*F_MAX_RANGE)
    return UserProfile(
        id=n,
        c=float(c),
        s=SAMPLES_PER_USER,
        zeta=SWITCHED_CAPACITANCE,
        h=10.0 ** (gain_db / 10.0),
        p_min=float(p_min),
        p_max=float(p_max),
        f_min=float(f_min),
        f_max=float(f_max),
        b_cap=max(b for b, _ in bundle_grid),
        A_cap=max(a for _, a in bundle_grid),
    )


def generate_instance(
    config: ExperimentConfig,
    seed: int,
    n_users: int | None = None,
    T_max: float | None = None,
    eta: tuple[float, float] | None = None,
) -> AuctionInstance:
    """Deterministic auction instance for (config, seed).

    Defaults come from the first entry of each sweep list; the sweep loop
    passes explicit values. Users that cannot meet the deadline at any
    bundle are retained with an empty menu (they simply cannot win).
    """
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    n = n_users if n_users is not None else config.N[0]
    deadline = T_max if T_max is not None else config.T_max_sweep[0]
    eta_a, eta_b = eta if eta is not None else config.eta_settings[0]
    system = dataclasses.replace(config.system, eta_a=eta_a, eta_b=eta_b, T_max=deadline)
    bundles = list(config.bundle_grid)
    users = []
    menus = []
    for k in range(n):
        user = _draw_profile(seed, k, config.bundle_grid)
        users.append(user)
        menus.append(tuple(build_bid_menu(system, user, bundles)))
    return AuctionInstance(config=system, users=tuple(users), bids=tuple(menus))


def _base_row(
    seed: int,
    sweep_key: str,
    scheme: str,
    n_users: int,
    eta: tuple[float, float],
    T_max: float,
) -> dict[str, Any]:
    return {
        "schema": CSV_SCHEMA,
        "seed": seed,
        "sweep_key": sweep_key,
        "scheme": scheme,
        "N": n_users,
        "eta_a": eta[0],
        "eta_b": eta[1],
        "f_o": "",
        "T_max": T_max,
        "welfare": "",
        "payments": "",
        "util_B": "",
        "util_A": "",
        "winner_frac": "",
        "alpha": "",
        "runtime_ms": "",
    }


def _instance_rows(
    instance: AuctionInstance,
    seed: int,
    sweep_key: str,
    n_users: int,
    eta: tuple[float, float],
    T_max: float,
    f_o_sweep: tuple[float, ...],
    exact_user_limit: int = EXACT_USER_LIMIT,
) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    config = instance.config

    start = time.perf_counter()
    allocation = greedy_allocate(instance)
    payments = critical_payments(instance, allocation)
    greedy_ms = 1e3 * (time.perf_counter() - start)
    try:
        alpha: float | str = approx_bound(instance, allocation)
    except ValueError:
        alpha = ""
    summary = allocation_report(instance, allocation, payments)
    row = _base_row(seed, sweep_key, "greedy", n_users, eta, T_max)
    row.update(
        welfare=allocation.welfare,
        payments=summary.total_payment,
        util_B=summary.utilization_B,
        util_A=summary.utilization_A,
        winner_frac=summary.winner_fraction,
        alpha=alpha,
        runtime_ms=greedy_ms,
    )
    rows.append(row)

    if n_users <= exact_user_limit:
        row = _base_row(seed, sweep_key, "exact", n_users, eta, T_max)
        start = time.perf_counter()
        try:
            exact = exact_optimal(instance)
        except ExactSolverBudgetError:
            row["runtime_ms"] = 1e3 * (time.perf_counter() - start)
        else:
            used_b = used_a = 0
            winners = 0
            for menu, choice in zip(instance.bids, exact.assignment):
                if choice is None:
                    continue
                winners += 1
                bid = next(b for b in menu if b.index == choice)
                used_b += bid.b
                used_a += bid.A
            row.update(
                welfare=exact.welfare,
                util_B=used_b / config.B_max,
                util_A=used_a / config.A_max,
                winner_frac=winners / n_users if n_users else 0.0,
                alpha=alpha,
                runtime_ms=1e3 * (time.perf_counter() - start),
            )
        rows.append(row)

    start = time.perf_counter()
    fractional, x = lp_relaxation(instance)
    lpr_ms = 1e3 * (time.perf_counter() - start)
    frac_b = sum(
        bid.b * weight
        for menu, weights in zip(instance.bids, x)
        for bid, weight in zip(menu, weights)
    )
    frac_a = sum(
        bid.A * weight
        for menu, weights in zip(instance.bids, x)
        for bid, weight in zip(menu, weights)
    )
    winner_mass = sum(min(1.0, sum(weights)) for weights in x)
    row = _base_row(seed, sweep_key, "lpr", n_users, eta, T_max)
    row.update(
        welfare=fractional,
        util_B=frac_b / config.B_max,
        util_A=frac_a / config.A_max,
        winner_frac=winner_mass / n_users if n_users else 0.0,
        alpha=alpha,
        runtime_ms=lpr_ms,
    )
    rows.append(row)

    row = _base_row(seed, sweep_key, "lower_bound", n_users, eta, T_max)
    if alpha != "":
        row.update(welfare=fractional / alpha, alpha=alpha, runtime_ms=0.0)
    rows.append(row)

    for f_o in f_o_sweep:
        for name, exponent in PRICE_EXPONENTS.items():
            start = time.perf_counter()
            outcome = fixed_price_allocate(instance, FixedPriceConfig(f_o, exponent))
            elapsed_ms = 1e3 * (time.perf_counter() - start)
            winners = sum(1 for choice in outcome.assignment if choice is not None)
            row = _base_row(seed, f"{sweep_key},f_o={f_o:g}", f"fixed_{name}", n_users, eta, T_max)
            row.update(
                f_o=f_o,
                welfare=outcome.welfare,
                payments=outcome.total_payment,
                util_B=outcome.used_B / config.B_max,
                util_A=outcome.used_A / config.A_max,
                winner_frac=winners / n_users if n_users else 0.0,
                alpha=alpha,
                runtime_ms=elapsed_ms,
            )
            rows.append(row)
    return rows


def run_sweep(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Run every sweep point and return one CSV row per scheme evaluation.

    Repetition r of every sweep point uses instance seed ``config.seed + r``,
    so the same user population is paired across sweep points. Rows for
    schemes that do not depend on the posted price carry an empty ``f_o``.
    """
    rows: list[dict[str, Any]] = []
    for n_users in config.N:
        for T_max in config.T_max_sweep:
            for eta in config.eta_settings:
                for rep in range(config.repetitions):
                    seed = config.seed + rep
                    instance = generate_instance(
                        config, seed, n_users=n_users, T_max=T_max, eta=eta
                    )
                    sweep_key = (
                        f"N={n_users},T_max={T_max:g},"
                        f"eta_a={eta[0]:g},eta_b={eta[1]:g}"
                    )
                    rows.extend(
                        _instance_rows(
                            instance, seed, sweep_key, n_users, eta, T_max,
                            config.f_o_sweep,
                        )
                    )
    if config.output_path:
        write_csv_rows(rows, config.output_path)
    return rows


def summarize_rows(rows: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Mean over seeds for every (sweep_key, scheme) group.

    The ``seed`` column of a summary row holds the number of rows
    aggregated; empty cells are skipped, and a column with no data stays
    empty.
    """
    numeric = ["welfare", "payments", "util_B", "util_A", "winner_frac", "alpha", "runtime_ms"]
    groups: dict[tuple[str, str], list[dict[str, Any]]] = {}
    order: list[tuple[str, str]] = []
    for row in rows:
        key = (str(row["sweep_key"]), str(row["scheme"]))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    summaries = []
    for key in order:
        members = groups[key]
        first = members[0]
        summary: dict[str, Any] = {
            "schema": CSV_SUMMARY_SCHEMA,
            "seed": len(members),
            "sweep_key": key[0],
            "scheme": key[1],
            "N": first["N"],
            "eta_a": first["eta_a"],
            "eta_b": first["eta_b"],
            "f_o": first["f_o"],
            "T_max": first["T_max"],
        }
        for column in numeric:
            values = [float(row[column]) for row in members if row[column] != ""]
            summary[column] = sum(values) / len(values) if values else ""
        summaries.append(summary)
    return summaries


@dataclass
class CheckReport:
    """Outcome of one property-check suite."""

    name: str
    trials: int
    ok: bool
    worst: float
    detail: str = ""
    failures: list[str] = field(default_factory=list)


def _truthful_utilities(instance: AuctionInstance) -> dict[int, float]:
    allocation = greedy_allocate(instance)
    payments = critical_payments(instance, allocation)
    return {entry.position: entry.utility for entry in payments.payments}


def check_truthfulness(config: ExperimentConfig, trials: int) -> CheckReport:
    """Random single-bid misreports must never raise the deviator's utility.

    Utilities are always evaluated at the true cost (the solver energy kept
    in the bid diagnostics), so overstating or understating the claimed
    cost only moves the allocation, never the valuation.
    """
    worst = -np.inf
    failures: list[str] = []
    for t in range(trials):
        seed = config.seed + TRIAL_SEED_STRIDE * (t + 1)
        instance = generate_instance(config, seed)
        rng = np.random.default_rng([config.seed, 90001, t])
        with_bids = [k for k, menu in enumerate(instance.bids) if menu]
        if not with_bids:
            continue
        position = with_bids[int(rng.integers(len(with_bids)))]
        menu = instance.bids[position]
        bid = menu[int(rng.integers(len(menu)))]
        factor = float(rng.uniform(0.5, 2.0))

        truthful = _truthful_utilities(instance).get(position, 0.0)
        tampered_menu = tuple(
            dataclasses.replace(item, v=factor * item.v) if item.index == bid.index else item
            for item in menu
        )
        tampered = AuctionInstance(
            config=instance.config,
            users=instance.users,
            bids=tuple(
                tampered_menu if k == position else m for k, m in enumerate(instance.bids)
            ),
        )
        allocation = greedy_allocate(tampered)
        deviated = 0.0
        if allocation.assignment[position] is not None:
            payments = critical_payments(tampered, allocation)
            entry = next(e for e in payments.payments if e.position == position)
            winning = next(
                b for b in tampered.bids[position] if b.index == allocation.assignment[position]
            )
            deviated = entry.payment - winning.solution.total_energy
        advantage = deviated - truthful
        worst = max(worst, advantage)
        if advantage > 1e-9:
            failures.append(
                f"trial {t}: user {position} gains {advantage:.3e} with factor {factor:.3f}"
            )
    return CheckReport(
        name="truthfulness",
        trials=trials,
        ok=not failures,
        worst=worst if worst > -np.inf else 0.0,
        detail="max utility advantage from a misreport",
        failures=failures,
    )


def check_individual_rationality(config: ExperimentConfig, trials: int) -> CheckReport:
    """Truthful winners never end with negative utility."""
    worst = np.inf
    failures: list[str] = []
    for t in range(trials):
        seed = config.seed + TRIAL_SEED_STRIDE * (t + 1)
        instance = generate_instance(config, seed)
        for position, utility in _truthful_utilities(instance).items():
            worst = min(worst, utility)
            if utility < -1e-9:
                failures.append(f"trial {t}: user {position} utility {utility:.3e}")
    return CheckReport(
        name="individual-rationality",
        trials=trials,
        ok=not failures,
        worst=worst if worst < np.inf else 0.0,
        detail="min truthful winner utility",
        failures=failures,
    )


def check_dual_feasibility(config: ExperimentConfig, trials: int) -> CheckReport:
    """Every greedy allocation must carry duals feasible for the LP dual."""
    worst = 0.0
    failures: list[str] = []
    for t in range(trials):
        seed = config.seed + TRIAL_SEED_STRIDE * (t + 1)
        instance = generate_instance(config, seed)
        certificate = dual_feasible(instance, greedy_allocate(instance), tol=1e-9)
        worst = max(worst, certificate.worst_violation)
        if not certificate.feasible:
            failures.append(
                f"trial {t}: violation {certificate.worst_violation:.3e} at {certificate.violator}"
            )
    return CheckReport(
        name="dual-feasibility",
        trials=trials,
        ok=not failures,
        worst=worst,
        detail="max dual constraint violation",
        failures=failures,
    )


def check_sandwich(config: ExperimentConfig, trials: int) -> CheckReport:
    """OP_f >= OP >= greedy >= OP_f / alpha on exact-tractable instances."""
    failures: list[str] = []
    worst = 0.0
    n_users = min(config.N[0], EXACT_USER_LIMIT)
    for t in range(trials):
        seed = config.seed + TRIAL_SEED_STRIDE * (t + 1)
        instance = generate_instance(config, seed, n_users=n_users)
        allocation = greedy_allocate(instance)
        fractional, _ = lp_relaxation(instance)
        try:
            exact = exact_optimal(instance)
        except ExactSolverBudgetError:
            failures.append(f"trial {t}: exact solver budget exhausted")
            continue
        alpha = approx_bound(instance, allocation)
        slack = 1e-6 * max(1.0, abs(fractional))
        chain = (
            fractional >= exact.welfare - slack
            and exact.welfare >= allocation.welfare - slack
            and allocation.welfare >= fractional / alpha - slack
        )
        gap = max(
            exact.welfare - fractional,
            allocation.welfare - exact.welfare,
            fractional / alpha - allocation.welfare,
        )
        worst = max(worst, gap)
        if not chain:
            failures.append(
                f"trial {t}: chain broken (OPf={fractional:.6g}, OP={exact.welfare:.6g}, "
                f"greedy={allocation.welfare:.6g}, alpha={alpha:.6g})"
            )
    return CheckReport(
        name="sandwich",
        trials=trials,
        ok=not failures,
        worst=worst,
        detail="max violation of the welfare chain",
        failures=failures,
    )


def verify_all(config: ExperimentConfig, trials: int) -> list[CheckReport]:
    """The four property suites the `verify` subcommand runs."""
    return [
        check_truthfulness(config, trials),
        check_individual_rationality(config, trials),
        check_dual_feasibility(config, trials),
        check_sandwich(config, trials),
    ]
