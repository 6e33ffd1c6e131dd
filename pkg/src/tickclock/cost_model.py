"""Closed-form communication costs and uncertainties for the protocols.

All formulas count *expected one-way qubit sends* and are evaluated
independently of the simulator so the two can cross-validate.  For k bits of
precision at failure budget ε over a channel with survival probability η:

* one-way repetition:          (32/π²)·ln(2/ε)·2^{2k}
* two-way (bounced) repetition:(16/π²)·ln(2/ε)·2^{2k}
* bitwise coherent protocol:   64·ln(2k/ε)·(2^k − 1)
* lossy one-way repetition:    the one-way cost divided by η
* lossy bitwise protocol:      32·ln(2k/ε)·2·Σ_{j<k} E_B(2^j, η)
* hybrid (k₁ coherent bits, then an effective-frequency two-way stage):
      lossy_bitwise(k₁, ε/2, η) + S·2·E_B(2^{k₁}, η),
      S = ⌈(8/π²)·ln(4/ε)·2^{2(k−k₁)}⌉  (S = 0 when k₁ = k).

The hybrid's second stage is a two-way repetition protocol run at effective
frequency 2^{k₁}·ω, so each of its S shots costs one m = 2^{k₁} coherent
streak; the model books 2·E_B sends per shot (two sends per attempted
bounce), matching the lossless identity 2m per shot at η = 1.  The per-shot
coefficient 8/π² is the per-*shot* form of the two-way cost above (whose
16/π² counts the two sends each shot makes), evaluated at budget ε/2 for the
residual k − k₁ bits.

Results whose natural log exceeds ~700 are reported as +inf; ``math.isinf``
is the overflow flag.
"""

from __future__ import annotations

import math

from .channel import LOG_HUGE, expected_bounces

__all__ = [
    "sql_one_way_cost",
    "sql_two_way_cost",
    "improved_cost",
    "lossy_sql_cost",
    "lossy_improved_cost",
    "hybrid_cost",
    "hybrid_phase2_shots",
    "uncertainty_mixture",
    "sql_uncertainty",
    "crossover_bits",
]

_LN2 = math.log(2.0)


def _validate(k: int, eps: float, eta: float = 1.0) -> None:
    if k < 1:
        raise ValueError(f"bit count k must be >= 1, got {k}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"failure budget eps={eps!r} outside (0, 1)")
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"survival probability eta={eta!r} outside (0, 1]")


def _exp_or_inf(log_value: float) -> float:
    return math.inf if log_value > LOG_HUGE else math.exp(log_value)


def sql_one_way_cost(k: int, eps: float) -> float:
    """Sends for k bits at budget ε by independent one-way repetitions."""
    _validate(k, eps)
    coeff = (32.0 / math.pi**2) * math.log(2.0 / eps)
    return coeff * _exp_or_inf(2.0 * k * _LN2)


def sql_two_way_cost(k: int, eps: float) -> float:
    """Sends for the bounced (doubled-phase) repetition variant: half the
    one-way cost."""
    _validate(k, eps)
    coeff = (16.0 / math.pi**2) * math.log(2.0 / eps)
    return coeff * _exp_or_inf(2.0 * k * _LN2)


def improved_cost(k: int, eps: float) -> float:
    """Sends for the bitwise coherent protocol: 64·ln(2k/ε)·(2^k − 1)."""
    _validate(k, eps)
    lead = 64.0 * math.log(2.0 * k / eps)
    if k * _LN2 > LOG_HUGE:
        return math.inf
    return lead * (2.0**k - 1.0)


def lossy_sql_cost(k: int, eps: float, eta: float) -> float:
    """One-way repetition cost with lost qubits re-sent: cost/η."""
    _validate(k, eps, eta)
    return sql_one_way_cost(k, eps) / eta


def lossy_improved_cost(k: int, eps: float, eta: float) -> float:
    """Bitwise coherent cost over a lossy channel.

    Each bit level j needs 32·ln(2k/ε) successful m = 2^j streaks; every
    attempted bounce is booked at two sends, so the total is
    32·ln(2k/ε)·2·Σ_{j=0}^{k−1} E_B(2^j, η).  Reduces to ``improved_cost``
    exactly at η = 1.
    """
    _validate(k, eps, eta)
    lead = 32.0 * math.log(2.0 * k / eps)
    total = 0.0
    for j in range(k):
        eb = expected_bounces(2**j, eta)
        if math.isinf(eb):
            return math.inf
        total += eb
    return lead * 2.0 * total


def hybrid_phase2_shots(k1: int, k: int, eps: float) -> int:
    """Second-stage shot count ⌈(8/π²)·ln(4/ε)·2^{2(k−k₁)}⌉; 0 when k₁ = k."""
    if not 1 <= k1 <= k:
        raise ValueError(f"need 1 <= k1 <= k, got k1={k1}, k={k}")
    _validate(k, eps)
    if k1 == k:
        return 0
    raw = (8.0 / math.pi**2) * math.log(4.0 / eps) * 4.0 ** (k - k1)
    return math.ceil(raw)


def hybrid_cost(k1: int, k: int, eps: float, eta: float) -> float:
    """Expected sends of the two-stage protocol splitting the budget ε/2–ε/2.

    Stage 1 resolves k₁ bits coherently; stage 2 measures the residual at
    effective frequency 2^{k₁}ω with S two-way shots of m = 2^{k₁} bounces
    each.  When k₁ = k the second stage is empty.
    """
    if not 1 <= k1 <= k:
        raise ValueError(f"need 1 <= k1 <= k, got k1={k1}, k={k}")
    _validate(k, eps, eta)
    phase1 = lossy_improved_cost(k1, eps / 2.0, eta)
    shots = hybrid_phase2_shots(k1, k, eps)
    if shots == 0:
        return phase1
    eb = expected_bounces(2**k1, eta)
    phase2 = shots * 2.0 * eb
    return phase1 + phase2


def uncertainty_mixture(k: int, eps: float, omega: float) -> float:
    """RMS timing error mixing a success branch of width (π/ω)2^{−k} with a
    failure branch (probability ε) of width π/ω."""
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    if k < 1:
        raise ValueError(f"bit count k must be >= 1, got {k}")
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps={eps!r} outside [0, 1]")
    good = (1.0 - eps) ** 2 * 4.0 ** (-k)
    bad = eps**2
    return math.pi / omega * math.sqrt(good + bad)


def sql_uncertainty(n_c: float, omega: float, protocol: str = "one-way") -> float:
    """Repetition-protocol timing uncertainty after n_c one-way sends:
    2/(ω√n_c) one-way, √2/(ω√n_c) two-way."""
    if n_c < 1:
        raise ValueError(f"communication count must be >= 1, got {n_c!r}")
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    if protocol == "one-way":
        return 2.0 / (omega * math.sqrt(n_c))
    if protocol == "two-way":
        return math.sqrt(2.0) / (omega * math.sqrt(n_c))
    raise ValueError(f"unknown protocol {protocol!r}")


def crossover_bits(eta: float, k_max: int = 40) -> int | None:
    """Precision threshold where coherent reuse stops paying off.

    Scans k = 1..k_max at the budget rule ε = 2^{−k} and returns the first k
    at which lossy_improved_cost exceeds lossy_sql_cost after having been
    cheaper for some smaller k.  Returns 1 if the coherent protocol is never
    cheaper (the advantage window is empty), and None if the window has not
    closed by k_max.
    """
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"survival probability eta={eta!r} outside (0, 1]")
    seen_advantage = False
    for k in range(1, k_max + 1):
        eps = 2.0**-k
        ratio_num = lossy_improved_cost(k, eps, eta)
        ratio_den = lossy_sql_cost(k, eps, eta)
        if ratio_num < ratio_den:
            seen_advantage = True
        elif seen_advantage:
            return k
    if not seen_advantage:
        return 1
    return None
