"""File formats: strict JSON for configs, instances and results, CSV for sweeps.

JSON writing is deterministic (sorted keys, fixed indentation) so that the
same (config, seed) pair always produces byte-identical files. Config
parsing rejects unknown fields.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any

from .auction import Allocation, AuctionInstance, PaymentResult
from .bidding import Bid, BidSolution
from .model import SystemConfig, UserProfile

INSTANCE_SCHEMA = "fedauction-instance-v1"
RESULT_SCHEMA = "fedauction-result-v1"
CSV_SCHEMA = "fedauction-rows-v1"
CSV_SUMMARY_SCHEMA = "fedauction-summary-v1"

CSV_COLUMNS = [
    "schema",
    "seed",
    "sweep_key",
    "scheme",
    "N",
    "eta_a",
    "eta_b",
    "f_o",
    "T_max",
    "welfare",
    "payments",
    "util_B",
    "util_A",
    "winner_frac",
    "alpha",
    "runtime_ms",
]


def _strict_kwargs(cls, data: dict[str, Any], context: str) -> dict[str, Any]:
    """Match a JSON object against a dataclass, rejecting unknown fields."""
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown fields in {context}: {sorted(unknown)}")
    missing = allowed - set(data)
    if missing:
        raise ValueError(f"missing fields in {context}: {sorted(missing)}")
    return data


def system_config_from_dict(data: dict[str, Any]) -> SystemConfig:
    return SystemConfig(**_strict_kwargs(SystemConfig, dict(data), "system config"))


def user_profile_from_dict(data: dict[str, Any]) -> UserProfile:
    return UserProfile(**_strict_kwargs(UserProfile, dict(data), "user profile"))


def _bid_from_dict(data: dict[str, Any]) -> Bid:
    payload = dict(data)
    solution = payload.pop("solution")
    solution = dict(solution)
    solution["objective_trace"] = tuple(solution.get("objective_trace", ()))
    bid_kwargs = _strict_kwargs(Bid, {**payload, "solution": None}, "bid")
    bid_kwargs["solution"] = BidSolution(
        **_strict_kwargs(BidSolution, solution, "bid solution")
    )
    return Bid(**bid_kwargs)


def instance_to_dict(instance: AuctionInstance) -> dict[str, Any]:
    return {
        "schema": INSTANCE_SCHEMA,
        "config": asdict(instance.config),
        "users": [asdict(user) for user in instance.users],
        "bids": [
            [
                {**asdict(bid), "solution": {**asdict(bid.solution),
                                             "objective_trace": list(bid.solution.objective_trace)}}
                for bid in menu
            ]
            for menu in instance.bids
        ],
    }


def instance_from_dict(data: dict[str, Any]) -> AuctionInstance:
    if data.get("schema") != INSTANCE_SCHEMA:
        raise ValueError(f"unsupported instance schema: {data.get('schema')!r}")
    return AuctionInstance(
        config=system_config_from_dict(data["config"]),
        users=tuple(user_profile_from_dict(user) for user in data["users"]),
        bids=tuple(tuple(_bid_from_dict(bid) for bid in menu) for menu in data["bids"]),
    )


def result_to_dict(
    instance: AuctionInstance,
    allocation: Allocation,
    payments: PaymentResult,
    alpha: float | None,
    dual_ok: bool,
) -> dict[str, Any]:
    return {
        "schema": RESULT_SCHEMA,
        "welfare": allocation.welfare,
        "assignment": [
            {"user": user.id, "bid_index": choice}
            for user, choice in zip(instance.users, allocation.assignment)
        ],
        "order": [instance.users[pos].id for pos in allocation.order],
        "duals": {"y": list(allocation.y), "z": allocation.z, "t": allocation.t},
        "psi_bar": allocation.psi_bar,
        "kappa": allocation.kappa,
        "used_B": allocation.used_B,
        "used_A": allocation.used_A,
        "alpha": alpha,
        "dual_feasible": dual_ok,
        "payments": [
            {
                "user": entry.user,
                "bid_index": entry.bid_index,
                "payment": entry.payment,
                "utility": entry.utility,
                "threshold": entry.threshold,
            }
            for entry in payments.payments
        ],
        "total_payment": payments.total_payment,
    }


def dump_json(data: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(to_json(data), encoding="utf-8")


def to_json(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load_json(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv_rows(rows: list[dict[str, Any]], path: str | Path) -> None:
    """Write sweep rows with the fixed, versioned column set."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def rows_to_csv(rows: list[dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def read_csv_rows(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(
                f"unexpected CSV columns: {reader.fieldnames} (want {CSV_COLUMNS})"
            )
        return list(reader)
