"""Erasure-loss channel: stochastic transmission and coherent-bounce retries.

Each one-way transmission survives independently with probability η.  A
*bounce* is a round trip (two transmissions, both must survive, success
probability η²).  Protocols that amplify phase by m coherent bounces must
restart the whole streak whenever any leg is lost, because the in-flight
qubit carries the accumulated phase.  The expected number of attempted
bounces until m consecutive successes is

    E_B(m, η) = (η^{−2m} − 1) / (1 − η²),        E_B(m, 1) = m,

which follows from the recurrence E_B(j+1) = (E_B(j) + 1)/η².

Counting conventions (also see ``TransmissionLog``):
* an attempted bounce consumes 2 sends if its first leg survives, else 1;
* a lost qubit still counts as a send by default (it was transmitted);
  constructing the log with ``count_lost_sends=False`` restricts the counter
  to qubits that arrived, for sensitivity checks;
* ``restarts`` counts failed attempts, so attempted = completed + restarts
  and, with lost sends counted, sends = 2·completed + restarts + (number of
  failed attempts whose first leg survived).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .simulator import RngStream

__all__ = [
    "LossyChannel",
    "TransmissionLog",
    "transmit",
    "expected_bounces",
    "log_expected_bounces",
    "run_coherent_bounces",
    "sample_bounce_attempts",
]

# exp(LOG_HUGE) is the largest comfortably representable double scale; any
# expectation with a larger natural log is reported as +inf.
LOG_HUGE = 700.0


@dataclass(frozen=True)
class LossyChannel:
    """One-way erasure channel with survival probability η ∈ (0, 1]."""

    eta: float

    def __post_init__(self) -> None:
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"survival probability eta={self.eta!r} outside (0, 1]")


@dataclass
class TransmissionLog:
    """Monotone counters for a protocol run's channel usage."""

    one_way_sends: int = 0
    completed_bounces: int = 0
    restarts: int = 0
    count_lost_sends: bool = True

    @property
    def attempted_bounces(self) -> int:
        return self.completed_bounces + self.restarts

    def record_send(self, survived: bool) -> None:
        if survived or self.count_lost_sends:
            self.one_way_sends += 1

    def add_counts(
        self, sends: int, completed: int, restarts: int
    ) -> None:
        self.one_way_sends += int(sends)
        self.completed_bounces += int(completed)
        self.restarts += int(restarts)


def transmit(
    ch: LossyChannel, rng: RngStream, log: TransmissionLog | None = None
) -> bool:
    """Send one qubit; True if it survives (probability η).  Consumes one
    uniform unless η = 1."""
    survived = True if ch.eta >= 1.0 else rng.uniform() < ch.eta
    if log is not None:
        log.record_send(survived)
    return survived


def expected_bounces(m: int, eta: float) -> float:
    """Expected attempted bounces until m consecutive round trips succeed.

    Returns (η^{−2m} − 1)/(1 − η²); the lossless limit is m.  Values whose
    natural log exceeds ~700 are reported as +inf (see ``log_expected_bounces``
    for the always-finite log-domain form).
    """
    if m < 1:
        raise ValueError(f"bounce count m must be >= 1, got {m}")
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"survival probability eta={eta!r} outside (0, 1]")
    if eta == 1.0:
        return float(m)
    if m == 1:
        # a single bounce is a plain geometric retry with success η², and
        # returning 1/η² directly keeps that identity exact in floating point
        return 1.0 / (eta * eta)
    log_growth = -2.0 * m * math.log(eta)
    if log_growth > LOG_HUGE:
        return math.inf
    return math.expm1(log_growth) / (1.0 - eta * eta)


def log_expected_bounces(m: int, eta: float) -> float:
    """ln E_B(m, η), finite even where the expectation itself overflows."""
    if m < 1:
        raise ValueError(f"bounce count m must be >= 1, got {m}")
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"survival probability eta={eta!r} outside (0, 1]")
    if eta == 1.0:
        return math.log(m)
    log_growth = -2.0 * m * math.log(eta)
    if log_growth > LOG_HUGE:
        # expm1(x) ~ e^x for large x, so ln E_B ~ x - ln(1 - eta^2)
        return log_growth - math.log(1.0 - eta * eta)
    return math.log(math.expm1(log_growth)) - math.log(1.0 - eta * eta)


def run_coherent_bounces(
    m: int, ch: LossyChannel, rng: RngStream, log: TransmissionLog
) -> bool:
    """Bounce one qubit until m *consecutive* round trips succeed.

    Any lost leg resets the streak to zero.  All sends, completed bounces and
    restarts are recorded in ``log``.  Always returns True (termination is
    almost sure for η > 0); the return value exists so callers can assert
    completion.
    """
    if m < 1:
        raise ValueError(f"bounce count m must be >= 1, got {m}")
    streak = 0
    while streak < m:
        if transmit(ch, rng, log):  # outbound leg
            if transmit(ch, rng, log):  # return leg
                streak += 1
                log.completed_bounces += 1
                continue
        streak = 0
        log.restarts += 1
    return True


def sample_bounce_attempts(
    m: int,
    eta: float,
    runs: int,
    rng: RngStream,
    max_block_elems: int = 1 << 22,
) -> tuple[np.ndarray, np.ndarray]:
    """Attempted-bounce and failure counts for many independent streak runs.

    Vectorized equivalent of calling :func:`run_coherent_bounces` ``runs``
    times: each attempt succeeds independently with probability η², and a run
    ends when m consecutive successes occur.  One uniform is consumed per
    attempt (success needs only the joint survival of both legs, so the pair
    of per-leg draws collapses to a single comparison without changing the
    distribution).  Returns (attempts, failures) arrays of shape (runs,);
    completed bounces are attempts − failures.
    """
    if m < 1:
        raise ValueError(f"bounce count m must be >= 1, got {m}")
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"survival probability eta={eta!r} outside (0, 1]")
    runs = int(runs)
    if runs < 0:
        raise ValueError("runs must be non-negative")
    attempts = np.zeros(runs, dtype=np.int64)
    failures = np.zeros(runs, dtype=np.int64)
    if runs == 0:
        return attempts, failures
    if eta == 1.0:
        attempts[:] = m
        return attempts, failures

    p = eta * eta
    gen = rng.generator
    active = np.arange(runs)
    carry = np.zeros(runs, dtype=np.int64)  # streak carried into the next block
    block = max(4 * m, 256)
    while active.size:
        block = min(block, max(256, max_block_elems // active.size))
        succ = gen.random((active.size, block)) < p
        fail = ~succ
        cols = np.arange(block, dtype=np.int32)
        last_fail = np.maximum.accumulate(np.where(fail, cols, -1), axis=1)
        streak = cols - last_fail + np.where(
            last_fail < 0, carry[active, None].astype(np.int32), 0
        )
        done_mask = succ & (streak >= m)
        any_done = done_mask.any(axis=1)
        first_done = np.where(any_done, done_mask.argmax(axis=1), block - 1)

        upto = first_done + 1  # attempts consumed inside this block
        cum_fail = np.cumsum(fail, axis=1)
        rows = np.arange(active.size)
        fails_upto = cum_fail[rows, first_done]
        attempts[active] += np.where(any_done, upto, block)
        failures[active] += np.where(any_done, fails_upto, cum_fail[:, -1])

        still = ~any_done
        carry_next = block - 1 - last_fail[:, -1] + np.where(
            last_fail[:, -1] < 0, carry[active], 0
        )
        carry[active[still]] = carry_next[still]
        active = active[still]
        block = min(block * 2, 1 << 15)
    return attempts, failures
