"""Cost model for one federated-learning participant on a cellular uplink.

Closed-form evaluators for the per-round economy of a training task:
iteration counts as a function of the local/global accuracy targets,
achievable uplink rate over an OFDMA multi-antenna link, and the time and
energy a user spends per global round (local gradient steps plus one model
upload).

All quantities are in linear SI units (W, Hz, J, s, bit). Decibel inputs
must be converted at the boundary; see :func:`db_to_linear` and
:func:`dbm_per_hz_to_watts_per_hz`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)


class UnreachableUplinkError(ValueError):
    """Raised when a configuration yields zero uplink rate (upload never completes)."""


def db_to_linear(value_db: float) -> float:
    """Convert a dB quantity (e.g. channel gain) to linear scale."""
    return 10.0 ** (value_db / 10.0)


def dbm_per_hz_to_watts_per_hz(value_dbm: float) -> float:
    """Convert a noise power spectral density from dBm/Hz to W/Hz."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Task-level constants shared by every participant.

    Attributes:
        W: per-subchannel bandwidth (Hz).
        N0: noise power spectral density (W/Hz, linear).
        B_max: total subchannels at the base station.
        A_max: total antennas at the base station.
        C1: global-iteration constant (dimensionless).
        gamma: target global accuracy, in (0, 1).
        sigma: size of one local model update (bits).
        tau: buyer satisfaction per unit of local accuracy (value units).
        eta_b: weight of one subchannel in the resource size measure.
        eta_a: weight of one antenna in the resource size measure.
        T_max: deadline for the whole training task (s).
    """

    W: float
    N0: float
    B_max: int
    A_max: int
    C1: float
    gamma: float
    sigma: float
    tau: float
    eta_b: float
    eta_a: float
    T_max: float

    def __post_init__(self) -> None:
        if self.W <= 0:
            raise ValueError("W must be positive")
        if self.N0 <= 0:
            raise ValueError("N0 must be positive")
        if self.B_max < 1 or self.A_max < 1:
            raise ValueError("B_max and A_max must be at least 1")
        if self.C1 <= 0:
            raise ValueError("C1 must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.eta_b <= 0 or self.eta_a <= 0:
            raise ValueError("resource weights eta_b, eta_a must be positive")
        if self.T_max <= 0:
            raise ValueError("T_max must be positive")

    @property
    def iteration_scale(self) -> float:
        """Numerator of the global-iteration count: C1 * ln(1/gamma)."""
        return self.C1 * math.log(1.0 / self.gamma)


@dataclass(frozen=True)
class UserProfile:
    """Physical parameters of one mobile user (the seller side).

    Attributes:
        id: opaque identifier, unique within an instance.
        c: CPU cycles needed per data sample (cycles/sample).
        s: local dataset size (samples).
        zeta: effective switched capacitance of the CPU.
        h: uplink channel gain (linear).
        p_min: minimum transmit power (W).
        p_max: maximum transmit power (W).
        f_min: minimum CPU frequency (Hz).
        f_max: maximum CPU frequency (Hz).
        b_cap: most subchannels this user will request in one bid.
        A_cap: most antennas this user will request in one bid.
    """

    id: int
    c: float
    s: float
    zeta: float
    h: float
    p_min: float
    p_max: float
    f_min: float
    f_max: float
    b_cap: int
    A_cap: int

    def __post_init__(self) -> None:
        if not 0 < self.p_min <= self.p_max:
            raise ValueError("need 0 < p_min <= p_max")
        if not 0 < self.f_min <= self.f_max:
            raise ValueError("need 0 < f_min <= f_max")
        if min(self.c, self.s, self.zeta, self.h) <= 0:
            raise ValueError("c, s, zeta, h must all be positive")
        if self.b_cap < 1 or self.A_cap < 1:
            raise ValueError("per-bid ceilings must be at least 1")

    @property
    def cycles_per_update(self) -> float:
        """CPU cycles for one pass over the local dataset: c * s."""
        return self.c * self.s


@dataclass(frozen=True)
class RoundMetrics:
    """Time and energy breakdown of one global iteration for one user."""

    comp_time_per_local_iter: float
    comp_energy_per_local_iter: float
    rate: float
    comm_time: float
    comm_energy: float
    round_time: float
    round_energy: float


def global_iterations(config: SystemConfig, eps: float) -> float:
    """Number of global rounds needed to reach the target global accuracy.

    Evaluates ``C1 * ln(1/gamma) / (1 - eps)``; strictly increasing in the
    local accuracy ``eps``. For a population of users, callers pass the worst
    (largest) local accuracy among the participants.

    Raises:
        ValueError: if ``eps`` is not in [0, 1).
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    return config.iteration_scale / (1.0 - eps)


def local_iterations(eps: float) -> float:
    """Number of local gradient iterations to reach local accuracy ``eps``.

    Evaluates ``log2(1/eps)`` (the per-user iteration parameter is
    normalized to one). ``eps = 1`` means no local work.

    Raises:
        ValueError: if ``eps`` is not in (0, 1].
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    return math.log2(1.0 / eps)


def uplink_rate(config: SystemConfig, user: UserProfile, p: float, A: int, b: int) -> float:
    """Achievable uplink rate (bit/s) over ``b`` subchannels and ``A`` antennas.

    ``r = b * W * log2(1 + (A - 1) * p * h / (b * W * N0))``. Monotone
    nondecreasing in ``p`` and ``A``; exactly zero when ``A == 1``.
    """
    if p <= 0:
        raise ValueError("transmit power must be positive")
    if A < 1 or b < 1:
        raise ValueError("antenna and subchannel counts must be at least 1")
    bandwidth = b * config.W
    snr = (A - 1) * p * user.h / (bandwidth * config.N0)
    return bandwidth * math.log2(1.0 + snr)


def round_metrics(
    config: SystemConfig,
    user: UserProfile,
    p: float,
    f: float,
    A: int,
    b: int,
    eps: float,
) -> RoundMetrics:
    """Time and energy of one global iteration at operating point (p, f, eps).

    Computation: one local iteration takes ``c*s/f`` seconds and
    ``zeta*c*s*f^2`` joules; there are ``log2(1/eps)`` local iterations.
    Communication: one model upload of ``sigma`` bits at the uplink rate.

    Raises:
        UnreachableUplinkError: if the rate is zero (A == 1), since the
            upload would never complete.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if not user.f_min <= f <= user.f_max * (1 + 1e-12):
        raise ValueError(f"f={f} outside [{user.f_min}, {user.f_max}]")
    rate = uplink_rate(config, user, p, A, b)
    if rate <= 0.0:
        raise UnreachableUplinkError(
            f"uplink rate is zero for user {user.id} (A={A}); upload cannot complete"
        )
    iters = local_iterations(eps)
    comp_time = user.cycles_per_update / f
    comp_energy = user.zeta * user.cycles_per_update * f * f
    comm_time = config.sigma / rate
    comm_energy = p * config.sigma / rate
    return RoundMetrics(
        comp_time_per_local_iter=comp_time,
        comp_energy_per_local_iter=comp_energy,
        rate=rate,
        comm_time=comm_time,
        comm_energy=comm_energy,
        round_time=iters * comp_time + comm_time,
        round_energy=iters * comp_energy + comm_energy,
    )
