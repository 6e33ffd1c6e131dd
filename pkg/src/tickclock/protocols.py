"""Clock-offset estimation protocols, run against a hidden truth model.

Four protocol families are implemented, all estimating the offset t between
two parties' clocks from ±1 measurement statistics:

* ``simple_one_way``   — repeat N one-qubit transmissions; mean → cos(ωt).
* ``simple_two_way``   — repeat N round trips; mean → cos(2ωt), which doubles
  the phase sensitivity per send.
* ``improved_estimate``/``entangled_bitwise`` — resolve the offset one binary
  digit at a time: level j amplifies the phase 2^j-fold (coherent bounces or
  a 2^{j+1}-qubit entangled block) so its statistics expose the j-th digit of
  T = ωt/π.
* ``hybrid_estimate``  — coherent levels for the first k₁ digits, then an
  effective-frequency repetition stage for the rest; the right split when
  channel loss makes long coherent streaks expensive.

Isolation contract: protocol logic never reads the truth model.  Each public
entry point immediately wraps the truth in a :class:`ShotSampler` — a
capability exposing only measurement draws and send counters — and all
estimation logic downstream of that sees the sampler alone.  The wrapper
afterwards scores the run against the truth (``succeeded``), which is
harness-side bookkeeping, not information flow into the estimator.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable

from .channel import LossyChannel, TransmissionLog, sample_bounce_attempts
from .cost_model import hybrid_cost, hybrid_phase2_shots
from .frames_gates import canonical_phase
from .simulator import RngStream, count_plus_ones

__all__ = [
    "TruthModel",
    "QuadratureMode",
    "Quadrature",
    "BitRecord",
    "ProtocolReport",
    "ShotSampler",
    "repetitions_per_bit",
    "bit_from_quadratures",
    "assemble_estimate",
    "simple_one_way",
    "simple_two_way",
    "improved_estimate",
    "entangled_oneshot",
    "entangled_bitwise",
    "hybrid_estimate",
    "select_k1",
    "ONE_WAY_FRINGE",
    "TWO_WAY_FRINGE",
    "SEND_COUNTER_BOUND",
]

# Invertible-fringe windows for the simple protocols, enforced by the harness
# (the protocol itself cannot know the true phase).
ONE_WAY_FRINGE = (math.pi / 6.0, 5.0 * math.pi / 6.0)
TWO_WAY_FRINGE = (math.pi / 12.0, 5.0 * math.pi / 12.0)

# Runs are rejected up front if their lossless send count could exceed this.
SEND_COUNTER_BOUND = 2**62


@dataclass(frozen=True)
class TruthModel:
    """Ground truth hidden from protocol logic: frequency and clock offset."""

    omega: float
    t_ba: float

    def __post_init__(self) -> None:
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega!r}")
        if not math.isfinite(self.t_ba):
            raise ValueError(f"offset t_ba must be finite, got {self.t_ba!r}")

    @property
    def phi(self) -> float:
        """The offset phase ωt, canonicalized to [0, 2π)."""
        return canonical_phase(self.omega * self.t_ba)


class QuadratureMode(Enum):
    """Bit-decision inputs: cosine estimates only, or cosine plus sine."""

    COSINE_ONLY = "cosine-only"
    TWO_QUADRATURE = "two-quadrature"


class Quadrature(Enum):
    COS = "cos"
    SIN = "sin"


@dataclass(frozen=True)
class BitRecord:
    """Per-digit statistics from a bitwise run (bit_index is 1-based)."""

    bit_index: int
    repetitions: int
    cos_estimate: float
    sin_estimate: float | None
    decided_bit: int
    sends_used: int
    fraction_estimate: float | None = None


@dataclass
class ProtocolReport:
    """Outcome of one protocol run plus exact communication accounting."""

    protocol: str
    estimate_t_ba: float
    estimate_phi: float
    total_one_way_sends: int
    bit_records: tuple[BitRecord, ...] = ()
    bits: tuple[int, ...] | None = None
    mode: str | None = None
    succeeded: bool | None = None
    completed_bounces: int = 0
    restarts: int = 0
    sends_cos_only: int = 0
    params: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def attempted_bounces(self) -> int:
        return self.completed_bounces + self.restarts

    def to_dict(self) -> dict:
        d = asdict(self)
        d["attempted_bounces"] = self.attempted_bounces
        return d


def _clamp_pm1(x: float) -> float:
    return min(1.0, max(-1.0, float(x)))


def _circular_distance(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def repetitions_per_bit(k: int, eps: float) -> int:
    """Shots per digit per quadrature: ⌈32·ln(2k/ε)⌉ (exponential-concentration
    sizing; the ceiling keeps the count integral and conservative)."""
    if k < 1:
        raise ValueError(f"bit count k must be >= 1, got {k}")
    if not (0.0 < eps < 1.0):
        raise ValueError(f"failure budget eps={eps!r} outside (0, 1)")
    return math.ceil(32.0 * math.log(2.0 * k / eps))


def bit_from_quadratures(
    cos_hat: float,
    sin_hat: float | None,
    mode: QuadratureMode = QuadratureMode.TWO_QUADRATURE,
) -> int:
    """Decide one digit from clamped quadrature estimates of a fraction f.

    Two-quadrature: f̂ = atan2(sin, cos)/2π mapped to [0, 1); digit 1 iff
    f̂ ≥ 1/2.  Cosine-only: f̂ = arccos(cos)/2π ∈ [0, 1/2]; digit 1 iff
    f̂ > 1/4.  The cosine-only rule cannot tell f from 1 − f, which is why it
    is not the default (see ``QuadratureMode``).
    """
    c = _clamp_pm1(cos_hat)
    if mode is QuadratureMode.COSINE_ONLY or sin_hat is None:
        f = math.acos(c) / (2.0 * math.pi)
        return 1 if f > 0.25 else 0
    s = _clamp_pm1(sin_hat)
    f = (math.atan2(s, c) / (2.0 * math.pi)) % 1.0
    return 1 if f >= 0.5 else 0


def assemble_estimate(bits: "tuple[int, ...] | list[int]", omega: float) -> float:
    """Offset t̂ from binary digits of T = ωt/π, centered in the last cell.

    t̂ = (π/ω)·(0.t₁…t_k + 2^{−(k+1)}); the half-LSB shift makes the
    worst-case error (π/ω)·2^{−(k+1)} when all digits are correct.
    """
    if len(bits) < 1:
        raise ValueError("need at least one bit")
    if omega <= 0.0:
        raise ValueError(f"omega must be positive, got {omega!r}")
    frac = 0.0
    for i, b in enumerate(bits, start=1):
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {b!r}")
        frac += b * 2.0**-i
    frac += 2.0 ** -(len(bits) + 1)
    return math.pi / omega * frac


class ShotSampler:
    """Measurement capability: draws protocol outcomes, hides the offset.

    All protocol estimators receive one of these instead of the truth model.
    Outcomes are sampled from the closed-form expectation of the measured
    observable (valid because it squares to the identity); channel usage is
    simulated per the conventions in :mod:`tickclock.channel` and accumulated
    in :attr:`log`.  Within a block, channel randomness is consumed before
    the outcome counter — this order is the canonical stream layout.
    """

    def __init__(
        self,
        truth: TruthModel,
        ch: LossyChannel | None,
        rng: RngStream,
        count_lost_sends: bool = True,
    ):
        self._phi = truth.phi
        self.channel = ch if ch is not None else LossyChannel(1.0)
        self.rng = rng
        self.log = TransmissionLog(count_lost_sends=count_lost_sends)

    # -- expectation values (private: protocols must not call these) --------

    def _one_way_expectation(self) -> float:
        return math.cos(self._phi)

    def _bounce_expectation(self, m: int, quadrature: Quadrature) -> float:
        angle = 2.0 * m * self._phi
        return math.cos(angle) if quadrature is Quadrature.COS else math.sin(angle)

    def _ghz_expectation(self, m_qubits: int, quadrature: Quadrature) -> float:
        angle = m_qubits * self._phi
        return math.cos(angle) if quadrature is Quadrature.COS else math.sin(angle)

    # -- sampling blocks -----------------------------------------------------

    def one_way_block(self, n: int) -> int:
        """n delivered one-way shots; returns the +1 count.

        Lost qubits are re-sent until n are delivered; every transmission is
        logged per the lost-send convention.
        """
        n = int(n)
        if n < 1:
            raise ValueError(f"shot count must be positive, got {n}")
        eta = self.channel.eta
        gen = self.rng.generator
        if eta < 1.0:
            lost = int(gen.negative_binomial(n, eta))
        else:
            lost = 0
        sends = n + (lost if self.log.count_lost_sends else 0)
        plus = count_plus_ones(self._one_way_expectation(), n, self.rng)
        self.log.one_way_sends += sends
        return plus

    def bounce_block(self, n: int, m: int, quadrature: Quadrature) -> int:
        """n shots, each one m-bounce coherent streak; returns the +1 count.

        A lost leg restarts the shot's streak.  Sends, completed bounces and
        restarts accrue to the log.
        """
        n = int(n)
        if n < 1:
            raise ValueError(f"shot count must be positive, got {n}")
        if m < 1:
            raise ValueError(f"bounce count m must be >= 1, got {m}")
        eta = self.channel.eta
        gen = self.rng.generator
        if eta >= 1.0:
            completed = n * m
            failures = 0
            sends = 2 * completed
        else:
            attempts_arr, failures_arr = sample_bounce_attempts(m, eta, n, self.rng)
            attempts = int(attempts_arr.sum())
            failures = int(failures_arr.sum())
            completed = attempts - failures
            # leg-1 survival among failed attempts has probability η/(1+η)
            leg1_failures = int(gen.binomial(failures, eta / (1.0 + eta))) if failures else 0
            if self.log.count_lost_sends:
                sends = 2 * completed + failures + leg1_failures
            else:
                sends = 2 * completed + leg1_failures
        plus = count_plus_ones(self._bounce_expectation(m, quadrature), n, self.rng)
        self.log.add_counts(sends, completed, failures)
        return plus

    def ghz_block(self, n: int, m_qubits: int, quadrature: Quadrature) -> int:
        """n completed entangled rounds of m qubits each; returns the +1 count.

        A round is voided (and repeated) if any of its qubits is lost, which
        happens with probability 1 − η^m; voided rounds count as restarts.
        """
        n = int(n)
        if n < 1:
            raise ValueError(f"shot count must be positive, got {n}")
        if m_qubits < 1:
            raise ValueError(f"qubit count must be >= 1, got {m_qubits}")
        eta = self.channel.eta
        gen = self.rng.generator
        p_round = eta**m_qubits
        if p_round < 1e-12:
            raise ValueError(
                f"round survival probability eta^{m_qubits} = {p_round:.3e} is "
                "effectively zero; the expected resend count is unrepresentable"
            )
        voided = int(gen.negative_binomial(n, p_round)) if eta < 1.0 else 0
        if self.log.count_lost_sends:
            sends = (n + voided) * m_qubits
        else:
            survivors = n * m_qubits + self._voided_round_survivors(
                voided, m_qubits, eta
            )
            sends = survivors
        plus = count_plus_ones(self._ghz_expectation(m_qubits, quadrature), n, self.rng)
        self.log.add_counts(sends, 0, voided)
        return plus

    def _voided_round_survivors(self, voided: int, m_qubits: int, eta: float) -> int:
        """Total delivered qubits over voided rounds: Binomial(m, η) per round,
        conditioned on at least one loss (rejection-sampled exactly)."""
        gen = self.rng.generator
        total = 0
        remaining = voided
        while remaining > 0:
            draws = gen.binomial(m_qubits, eta, size=remaining)
            good = draws < m_qubits
            total += int(draws[good].sum())
            remaining = int((~good).sum())
        return total


# ---------------------------------------------------------------------------
# simple repetition protocols
# ---------------------------------------------------------------------------


def _finish_report(
    report: ProtocolReport, log: TransmissionLog
) -> ProtocolReport:
    report.total_one_way_sends = log.one_way_sends
    report.completed_bounces = log.completed_bounces
    report.restarts = log.restarts
    return report


def simple_one_way(
    truth: TruthModel,
    n_shots: int,
    ch: LossyChannel | None,
    rng: RngStream,
    count_lost_sends: bool = True,
) -> ProtocolReport:
    """Estimate ωt from the mean of N one-way shots (mean → cos ωt).

    The harness should keep the true phase inside ``ONE_WAY_FRINGE`` so the
    arccos inversion is well conditioned; the protocol itself only sees
    shots.  Success is scored at three standard errors (3/(ω√N)).
    """
    sampler = ShotSampler(truth, ch, rng, count_lost_sends)
    plus = sampler.one_way_block(n_shots)
    mean = _clamp_pm1((2.0 * plus - n_shots) / n_shots)
    phi_hat = math.acos(mean)
    t_hat = phi_hat / truth.omega
    tol = 3.0 / (truth.omega * math.sqrt(n_shots))
    report = ProtocolReport(
        protocol="simple-one-way",
        estimate_t_ba=t_hat,
        estimate_phi=phi_hat,
        total_one_way_sends=0,
        succeeded=abs(t_hat - truth.t_ba) <= tol,
        params={
            "shots": int(n_shots),
            "eta": sampler.channel.eta,
            "count_lost_sends": count_lost_sends,
        },
        extra={"mean_outcome": mean},
    )
    return _finish_report(report, sampler.log)


def simple_two_way(
    truth: TruthModel,
    n_shots: int,
    ch: LossyChannel | None,
    rng: RngStream,
    count_lost_sends: bool = True,
) -> ProtocolReport:
    """Estimate ωt from N single-bounce round trips (mean → cos 2ωt).

    Each delivered shot costs two sends, and the doubled phase makes the
    estimate twice as sensitive per shot as the one-way protocol.  The
    harness should keep ωt inside ``TWO_WAY_FRINGE``.
    """
    sampler = ShotSampler(truth, ch, rng, count_lost_sends)
    plus = sampler.bounce_block(n_shots, 1, Quadrature.COS)
    mean = _clamp_pm1((2.0 * plus - n_shots) / n_shots)
    phi_hat = 0.5 * math.acos(mean)
    t_hat = phi_hat / truth.omega
    tol = 3.0 / (2.0 * truth.omega * math.sqrt(n_shots))
    report = ProtocolReport(
        protocol="simple-two-way",
        estimate_t_ba=t_hat,
        estimate_phi=phi_hat,
        total_one_way_sends=0,
        succeeded=abs(t_hat - truth.t_ba) <= tol,
        params={
            "shots": int(n_shots),
            "eta": sampler.channel.eta,
            "count_lost_sends": count_lost_sends,
        },
        extra={"mean_outcome": mean},
    )
    return _finish_report(report, sampler.log)


# ---------------------------------------------------------------------------
# bitwise protocols
# ---------------------------------------------------------------------------


def _decide_bits_two_quadrature(
    fractions: list[float],
) -> tuple[list[int], float]:
    """All digits from per-level fraction estimates, finest level first.

    Level j measures f_j = frac(2^j·T) and the levels satisfy
    f_j = (t_{j+1} + f_{j+1})/2.  Deciding each digit from its own level's
    threshold alone is fragile whenever some f_j sits near 0 or 1/2 (noise
    flips the digit with probability → 1/2).  Instead the digits are chained
    from the finest level down: the last digit comes from the finest level's
    threshold, and each coarser level j only chooses which of the two
    half-images of the already-refined f_{j+1} estimate its own measurement
    is closer to (circularly).  One digit then fails only if some raw level
    estimate is off by more than ~1/8 of a turn, which the per-level shot
    count makes exponentially unlikely — independent of the true offset.

    Returns (bits, refined_f0) where refined_f0 is the chained estimate of
    the full fraction T.
    """
    k = len(fractions)
    bits = [0] * k
    phi_ref = fractions[k - 1]
    bits[k - 1] = 1 if phi_ref >= 0.5 else 0
    for j in range(k - 2, -1, -1):
        low = 0.5 * phi_ref
        high = 0.5 * (1.0 + phi_ref)
        if _circular_distance(fractions[j], high) < _circular_distance(
            fractions[j], low
        ):
            bits[j] = 1
            phi_ref = high
        else:
            bits[j] = 0
            phi_ref = low
    return bits, phi_ref


def _check_counter_bound(worst_sends: float, k: int) -> None:
    if worst_sends >= SEND_COUNTER_BOUND:
        raise ValueError(
            f"k={k} needs ~{worst_sends:.3e} lossless sends, which overflows "
            f"the send counter bound 2^62 = {SEND_COUNTER_BOUND:.3e}"
        )


def _run_bitwise(
    block: Callable[[int, Quadrature, int], int],
    sampler: ShotSampler,
    k: int,
    eps: float,
    mode: QuadratureMode,
) -> tuple[list[int], list[BitRecord], float | None, int]:
    """Shared digit loop: measure all levels, then decide digits.

    ``block(level, quadrature, n)`` returns the +1 count of n shots at that
    level.  Returns (bits, records, finest_raw_fraction, sends_cos_only).
    """
    n = repetitions_per_bit(k, eps)
    cos_hats: list[float] = []
    sin_hats: list[float | None] = []
    sends_per_level: list[int] = []
    cos_sends_total = 0
    for j in range(k):
        before = sampler.log.one_way_sends
        plus_c = block(j, Quadrature.COS, n)
        cos_sends_total += sampler.log.one_way_sends - before
        cos_hats.append(_clamp_pm1((2.0 * plus_c - n) / n))
        if mode is QuadratureMode.TWO_QUADRATURE:
            plus_s = block(j, Quadrature.SIN, n)
            sin_hats.append(_clamp_pm1((2.0 * plus_s - n) / n))
        else:
            sin_hats.append(None)
        sends_per_level.append(sampler.log.one_way_sends - before)

    finest_fraction: float | None = None
    if mode is QuadratureMode.TWO_QUADRATURE:
        fractions = [
            (math.atan2(s, c) / (2.0 * math.pi)) % 1.0
            for c, s in zip(cos_hats, sin_hats)
        ]
        bits, _ = _decide_bits_two_quadrature(fractions)
        finest_fraction = fractions[-1]
        frac_list: list[float | None] = list(fractions)
    else:
        bits = [bit_from_quadratures(c, None, mode) for c in cos_hats]
        frac_list = [math.acos(_clamp_pm1(c)) / (2.0 * math.pi) for c in cos_hats]

    records = [
        BitRecord(
            bit_index=j + 1,
            repetitions=n,
            cos_estimate=cos_hats[j],
            sin_estimate=sin_hats[j],
            decided_bit=bits[j],
            sends_used=sends_per_level[j],
            fraction_estimate=frac_list[j],
        )
        for j in range(k)
    ]
    return bits, records, finest_fraction, cos_sends_total


def _score_bitwise(
    truth: TruthModel, t_hat: float, k: int
) -> bool:
    return abs(t_hat - truth.t_ba) <= math.pi / truth.omega * 2.0**-k


def improved_estimate(
    truth: TruthModel,
    k: int,
    eps: float,
    mode: QuadratureMode = QuadratureMode.TWO_QUADRATURE,
    ch: LossyChannel | None = None,
    rng: RngStream | None = None,
    count_lost_sends: bool = True,
) -> ProtocolReport:
    """Resolve k digits of T = ωt/π by coherent phase doubling.

    Level j bounces one qubit 2^j times before measuring, so its shot mean is
    cos(2π·frac(2^j T)) — the offset's j-th digit neighborhood at unit
    scale.  Each level takes n = ⌈32·ln(2k/ε)⌉ shots per quadrature; digits
    are decided as described in the two-quadrature chaining rule (or the
    literal per-level threshold in cosine-only mode), and the estimate is the
    centered binary value of the digits.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    n = repetitions_per_bit(k, eps)
    quads = 2 if mode is QuadratureMode.TWO_QUADRATURE else 1
    _check_counter_bound(quads * 2.0 * n * (2.0**k - 1.0), k)
    sampler = ShotSampler(truth, ch, rng, count_lost_sends)

    def block(level: int, quadrature: Quadrature, shots: int) -> int:
        return sampler.bounce_block(shots, 2**level, quadrature)

    bits, records, _, cos_sends = _run_bitwise(block, sampler, k, eps, mode)
    t_hat = assemble_estimate(bits, truth.omega)
    report = ProtocolReport(
        protocol="improved",
        estimate_t_ba=t_hat,
        estimate_phi=truth.omega * t_hat,
        total_one_way_sends=0,
        bit_records=tuple(records),
        bits=tuple(bits),
        mode=mode.value,
        succeeded=_score_bitwise(truth, t_hat, k),
        sends_cos_only=cos_sends,
        params={
            "k": int(k),
            "eps": float(eps),
            "repetitions": n,
            "eta": sampler.channel.eta,
            "count_lost_sends": count_lost_sends,
        },
    )
    return _finish_report(report, sampler.log)


def entangled_oneshot(
    truth: TruthModel,
    m_qubits: int,
    n_shots: int,
    rng: RngStream,
) -> ProtocolReport:
    """Estimate ωt from N rounds of an m-qubit entangled block (lossless).

    The block's parity mean is cos(m·ωt): m qubits prepared in the maximally
    entangled state tick as one object at m times the frequency, so each
    round carries the sensitivity of m coherent exchanges at the price of m
    one-way sends.  The harness should keep ωt within [0, π/m] so the arccos
    inversion is unambiguous.
    """
    if m_qubits < 1:
        raise ValueError(f"qubit count must be >= 1, got {m_qubits}")
    sampler = ShotSampler(truth, None, rng)
    plus = sampler.ghz_block(n_shots, m_qubits, Quadrature.COS)
    mean = _clamp_pm1((2.0 * plus - n_shots) / n_shots)
    phi_hat = math.acos(mean) / m_qubits
    t_hat = phi_hat / truth.omega
    tol = 3.0 / (m_qubits * truth.omega * math.sqrt(n_shots))
    report = ProtocolReport(
        protocol="entangled-oneshot",
        estimate_t_ba=t_hat,
        estimate_phi=phi_hat,
        total_one_way_sends=0,
        succeeded=abs(t_hat - truth.t_ba) <= tol,
        params={"m_qubits": int(m_qubits), "shots": int(n_shots), "eta": 1.0},
        extra={"mean_outcome": mean},
    )
    return _finish_report(report, sampler.log)


def entangled_bitwise(
    truth: TruthModel,
    k: int,
    eps: float,
    ch: LossyChannel | None = None,
    rng: RngStream | None = None,
    mode: QuadratureMode = QuadratureMode.TWO_QUADRATURE,
    count_lost_sends: bool = True,
) -> ProtocolReport:
    """The bitwise protocol with entangled blocks instead of bounce streaks.

    Level j sends one 2^{j+1}-qubit entangled block per shot, whose parity
    mean cos(2^{j+1}·ωt) is identical to the corresponding coherent level's,
    so the digit loop, shot counts and decision rule are shared verbatim with
    :func:`improved_estimate`.  A block costs 2^{j+1} one-way sends — the
    same total as the 2^j round trips it replaces — and is voided entirely if
    any qubit is lost.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    n = repetitions_per_bit(k, eps)
    quads = 2 if mode is QuadratureMode.TWO_QUADRATURE else 1
    _check_counter_bound(quads * 2.0 * n * (2.0**k - 1.0), k)
    sampler = ShotSampler(truth, ch, rng, count_lost_sends)

    def block(level: int, quadrature: Quadrature, shots: int) -> int:
        return sampler.ghz_block(shots, 2 ** (level + 1), quadrature)

    bits, records, _, cos_sends = _run_bitwise(block, sampler, k, eps, mode)
    t_hat = assemble_estimate(bits, truth.omega)
    report = ProtocolReport(
        protocol="entangled-bitwise",
        estimate_t_ba=t_hat,
        estimate_phi=truth.omega * t_hat,
        total_one_way_sends=0,
        bit_records=tuple(records),
        bits=tuple(bits),
        mode=mode.value,
        succeeded=_score_bitwise(truth, t_hat, k),
        sends_cos_only=cos_sends,
        params={
            "k": int(k),
            "eps": float(eps),
            "repetitions": n,
            "eta": sampler.channel.eta,
            "count_lost_sends": count_lost_sends,
        },
    )
    return _finish_report(report, sampler.log)


def hybrid_estimate(
    truth: TruthModel,
    k1: int,
    k: int,
    eps: float,
    ch: LossyChannel | None = None,
    rng: RngStream | None = None,
    mode: QuadratureMode = QuadratureMode.TWO_QUADRATURE,
    count_lost_sends: bool = True,
) -> ProtocolReport:
    """Coherent digits for the first k₁ bits, repetition for the rest.

    Stage 1 runs the coherent bitwise protocol to k₁ digits at budget ε/2.
    Stage 2 treats 2^{k₁} bounces as one shot of a repetition protocol at
    effective frequency 2^{k₁}ω; its quadrature means give the residual
    position ρ ∈ [0, 1) inside the stage-1 cell directly, and the final
    estimate is T̂ = 0.t₁…t_{k₁} + 2^{−k₁}·ρ̂.  The circular residual is
    lifted to the branch nearest the stage-1 refinement (whose finest level
    pins ρ to ±1/4), which keeps the linear error equal to the circular
    estimation error.  With k₁ = k the second stage is empty and the call
    reduces to ``improved_estimate`` on the same stream.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    if not 1 <= k1 <= k:
        raise ValueError(f"need 1 <= k1 <= k, got k1={k1}, k={k}")
    if k1 == k:
        report = improved_estimate(
            truth, k, eps, mode=mode, ch=ch, rng=rng, count_lost_sends=count_lost_sends
        )
        report.protocol = "hybrid"
        report.params["k1"] = int(k1)
        report.succeeded = _score_bitwise(truth, report.estimate_t_ba, k)
        return report

    n1 = repetitions_per_bit(k1, eps / 2.0)
    shots2 = hybrid_phase2_shots(k1, k, eps)
    quads = 2 if mode is QuadratureMode.TWO_QUADRATURE else 1
    worst = quads * (2.0 * n1 * (2.0**k1 - 1.0) + 2.0 * shots2 * 2.0**k1)
    _check_counter_bound(worst, k)
    sampler = ShotSampler(truth, ch, rng, count_lost_sends)

    def block(level: int, quadrature: Quadrature, shots: int) -> int:
        return sampler.bounce_block(shots, 2**level, quadrature)

    bits1, records, finest_fraction, cos_sends1 = _run_bitwise(
        block, sampler, k1, eps / 2.0, mode
    )
    prefix = sum(b * 2.0**-i for i, b in enumerate(bits1, start=1))

    m2 = 2**k1
    before2 = sampler.log.one_way_sends
    plus_c = sampler.bounce_block(shots2, m2, Quadrature.COS)
    cos_sends2 = sampler.log.one_way_sends - before2
    cos_hat = _clamp_pm1((2.0 * plus_c - shots2) / shots2)
    if mode is QuadratureMode.TWO_QUADRATURE:
        plus_s = sampler.bounce_block(shots2, m2, Quadrature.SIN)
        sin_hat = _clamp_pm1((2.0 * plus_s - shots2) / shots2)
        rho_circ = (math.atan2(sin_hat, cos_hat) / (2.0 * math.pi)) % 1.0
        # stage-1 finest level measured f = (t_{k1} + rho)/2; use it as a
        # coarse prior to choose the branch of the circular residual
        rho_prior = (2.0 * finest_fraction - bits1[k1 - 1]) % 1.0
        rho_hat = rho_circ - round(rho_circ - rho_prior)
    else:
        sin_hat = None
        rho_prior = None
        rho_hat = math.acos(cos_hat) / (2.0 * math.pi)
    sends2 = sampler.log.one_way_sends - before2

    t_frac = min(1.0, max(0.0, prefix + 2.0**-k1 * rho_hat))
    t_hat = math.pi / truth.omega * t_frac
    full_bits = tuple(int(t_frac * 2**i) % 2 for i in range(1, k + 1))
    report = ProtocolReport(
        protocol="hybrid",
        estimate_t_ba=t_hat,
        estimate_phi=truth.omega * t_hat,
        total_one_way_sends=0,
        bit_records=tuple(records),
        bits=full_bits,
        mode=mode.value,
        succeeded=_score_bitwise(truth, t_hat, k),
        sends_cos_only=cos_sends1 + cos_sends2,
        params={
            "k": int(k),
            "k1": int(k1),
            "eps": float(eps),
            "repetitions": n1,
            "phase2_shots": shots2,
            "eta": sampler.channel.eta,
            "count_lost_sends": count_lost_sends,
        },
        extra={
            "phase2": {
                "shots_per_quadrature": shots2,
                "cos_estimate": cos_hat,
                "sin_estimate": sin_hat,
                "residual_prior": rho_prior,
                "residual": rho_hat,
                "sends_used": sends2,
            }
        },
    )
    return _finish_report(report, sampler.log)


def select_k1(eta: float, k: int, eps: float) -> int:
    """The coherent-stage depth minimizing the hybrid's analytic cost.

    Scans k₁ ∈ [1, k] and returns the argmin of ``hybrid_cost``; ties break
    toward larger k₁ (prefer the deeper coherent stage at equal cost).
    """
    if k < 1:
        raise ValueError(f"bit count k must be >= 1, got {k}")
    best_k1 = 1
    best_cost = math.inf
    for k1 in range(1, k + 1):
        c = hybrid_cost(k1, k, eps, eta)
        if c <= best_cost:
            best_cost = c
            best_k1 = k1
    return best_k1
