"""Acceptance checks: the scaling laws and closed-form counts this package
exists to demonstrate, each at the tolerance fixed in the acceptance contract.

Every test here is tagged ``@pytest.mark.criterion(n)``; the terminal summary
aggregates one PASS/FAIL line per criterion.  Three criteria assert contracted
bounds that a correctly calibrated implementation cannot meet (wrong constant,
inverted trend, or a dip that channel loss rules out); those tests are kept
as contracted and fail, and an unmarked ``test_calibration_*`` companion next
to each pins the measured behavior.  The README walks through all expected
failures.
"""

import math
import time

import numpy as np
import pytest

from tickclock import cost_model
from tickclock.channel import expected_bounces, sample_bounce_attempts
from tickclock.frames_gates import (
    FrameTag,
    bounce_unitary,
    frame_conjugate,
    hadamard_op,
    pauli_x_op,
    rabi_pulse,
    z_rotation,
)
from tickclock.protocols import (
    QuadratureMode,
    TruthModel,
    improved_estimate,
    repetitions_per_bit,
    select_k1,
    simple_one_way,
    simple_two_way,
)
from tickclock.simulator import (
    RngStream,
    apply,
    excited_state,
    ghz_parity_expectation,
)

SHOT_GRID = (100, 1_000, 10_000, 100_000)
RUNS_PER_POINT = 500


def _rms_errors(protocol, t_ba, seed):
    """RMS estimate error at each shot count, RUNS_PER_POINT runs per point."""
    truth = TruthModel(omega=1.0, t_ba=t_ba)
    master = RngStream(seed)
    rms = []
    for j, n in enumerate(SHOT_GRID):
        point = master.child("n", j)
        errs = [
            protocol(truth, n, None, point.child("run", i)).estimate_t_ba - t_ba
            for i in range(RUNS_PER_POINT)
        ]
        rms.append(float(np.sqrt(np.mean(np.square(errs)))))
    return rms


def _loglog_slope(ns, values):
    return float(np.polyfit(np.log(ns), np.log(values), 1)[0])


# ---------------------------------------------------------------------------
# criterion 1 — one-way repetition scaling
# ---------------------------------------------------------------------------


@pytest.mark.criterion(1)
def test_one_way_rms_slope_is_minus_half():
    """Lossless one-way runs at the fringe center (half-period offset),
    500 runs per shot count in {1e2..1e5}: the log-log slope of RMS error
    vs shots is -0.50 +/- 0.05, inside a 2-minute budget."""
    start = time.monotonic()
    rms = _rms_errors(simple_one_way, math.pi / 2, 101)
    assert abs(_loglog_slope(SHOT_GRID, rms) + 0.5) <= 0.05
    assert time.monotonic() - start < 120.0


@pytest.mark.criterion(1)
def test_one_way_rms_matches_contracted_constant():
    """Contracted band: RMS within +/-20% of 2/(omega sqrt N) at every shot
    count.  The unit-slope fringe propagates binomial noise at half that
    constant, so this bound fails; the companion below pins the measured
    value."""
    rms = _rms_errors(simple_one_way, math.pi / 2, 101)
    for n, r in zip(SHOT_GRID, rms):
        contracted = 2.0 / math.sqrt(n)
        assert 0.8 * contracted <= r <= 1.2 * contracted


def test_calibration_one_way_constant_is_inverse_root_n():
    """Measured: at the fringe center the one-way RMS sits within +/-20% of
    1/(omega sqrt N), the error-propagation constant of a unit-slope cosine
    fringe under binomial shot noise."""
    rms = _rms_errors(simple_one_way, math.pi / 2, 101)
    for n, r in zip(SHOT_GRID, rms):
        measured = 1.0 / math.sqrt(n)
        assert 0.8 * measured <= r <= 1.2 * measured


# ---------------------------------------------------------------------------
# criterion 2 — two-way (single bounce) constant
# ---------------------------------------------------------------------------


@pytest.mark.criterion(2)
def test_two_way_rms_matches_contracted_constant():
    """Same experiment with single-bounce round trips: contracted band
    sqrt(2)/(omega sqrt N) +/-20%.  At the half-period offset the doubled
    phase sits at an extremum of its fringe: every shot returns -1, the
    inversion lands exactly on the truth, and the RMS is identically zero,
    far below the band.  The companion runs at the doubled fringe's own
    center and pins the real constant."""
    rms = _rms_errors(simple_two_way, math.pi / 2, 202)
    for n, r in zip(SHOT_GRID, rms):
        contracted = math.sqrt(2.0) / math.sqrt(n)
        assert 0.8 * contracted <= r <= 1.2 * contracted


def test_calibration_two_way_constant_at_doubled_fringe_center():
    """Measured at the quarter-period offset, where the doubled fringe is
    steepest: slope -1/2 and RMS within +/-20% of 1/(2 omega sqrt N) —
    exactly twice the one-way sensitivity per delivered shot."""
    rms = _rms_errors(simple_two_way, math.pi / 4, 202)
    assert abs(_loglog_slope(SHOT_GRID, rms) + 0.5) <= 0.05
    for n, r in zip(SHOT_GRID, rms):
        measured = 0.5 / math.sqrt(n)
        assert 0.8 * measured <= r <= 1.2 * measured


# ---------------------------------------------------------------------------
# criterion 3 — bitwise protocol correctness
# ---------------------------------------------------------------------------


@pytest.mark.criterion(3)
def test_bitwise_all_digits_correct_rate_and_cell_guarantee():
    """Six digits at eps = 2^-6, lossless, two quadratures: over 200 runs at
    each of 50 random offsets (10^4 runs total) the all-digits-correct rate
    is at least 1 - eps, and every run that nails the digits lands within
    (pi/omega) 2^-6 of the truth.  Budget: 5 minutes."""
    start = time.monotonic()
    k, eps = 6, 2.0**-6
    master = RngStream(303)
    total = correct = 0
    for s in range(50):
        fraction = float(master.child("offset", s).uniform())
        truth = TruthModel(omega=1.0, t_ba=math.pi * fraction)
        digits = tuple(
            int(math.floor(fraction * 2 ** (j + 1))) % 2 for j in range(k)
        )
        for i in range(200):
            report = improved_estimate(
                truth, k, eps, rng=master.child("offset", s).child("run", i)
            )
            total += 1
            if report.bits == digits:
                correct += 1
                assert abs(report.estimate_t_ba - truth.t_ba) <= math.pi * 2.0**-k
                assert report.succeeded
    assert total == 10_000
    assert correct / total >= 1.0 - eps
    assert time.monotonic() - start < 300.0


# ---------------------------------------------------------------------------
# criterion 4 — error x sends products across precision
# ---------------------------------------------------------------------------


def _uncertainty_cost_products():
    """(dt * N / log2 N, dt * sqrt N) for k = 3..8 at the budget eps = 2^-k."""
    flat, sql_like = [], []
    for k in range(3, 9):
        eps = 2.0**-k
        sends = cost_model.improved_cost(k, eps)
        dt = cost_model.uncertainty_mixture(k, eps, 1.0)
        flat.append(dt * sends / math.log2(sends))
        sql_like.append(dt * math.sqrt(sends))
    return flat, sql_like


@pytest.mark.criterion(4)
def test_uncertainty_times_sends_is_flat_up_to_log():
    """omega dt N / log2 N varies by less than 4x across k = 3..8 — the
    uncertainty tracks log(N)/N rather than any power law in between."""
    flat, _ = _uncertainty_cost_products()
    assert max(flat) / min(flat) < 4.0


@pytest.mark.criterion(4)
def test_sql_like_product_grows_with_k():
    """Contracted trend: omega dt sqrt(N) grows with k.  Any protocol whose
    uncertainty falls faster than 1/sqrt(N) drives this product DOWN (here
    from 21.7 at k=3 to 6.4 at k=8), so the contracted direction fails; the
    companion below pins the measured trend, which is the fact that shows
    the 1/sqrt(N) law is beaten."""
    _, sql_like = _uncertainty_cost_products()
    assert all(b > a for a, b in zip(sql_like, sql_like[1:]))


def test_calibration_sql_like_product_falls_with_k():
    """Measured: omega dt sqrt(N) strictly decreases across k = 3..8 and
    loses more than a factor of three end to end — repetition scaling is
    beaten without entanglement."""
    _, sql_like = _uncertainty_cost_products()
    assert all(b < a for a, b in zip(sql_like, sql_like[1:]))
    assert sql_like[0] > 3.0 * sql_like[-1]


# ---------------------------------------------------------------------------
# criterion 5 — lossless counter identities
# ---------------------------------------------------------------------------


@pytest.mark.criterion(5)
@pytest.mark.parametrize("k", range(1, 7))
def test_cosine_only_send_counter_closed_form(k):
    """Lossless cosine-only ladder: the send counter equals 2 n (2^k - 1)
    exactly — n shots per digit, chain lengths doubling per level, one
    quadrature."""
    n = repetitions_per_bit(k, 0.1)
    report = improved_estimate(
        TruthModel(omega=1.0, t_ba=0.3271 * math.pi),
        k,
        0.1,
        mode=QuadratureMode.COSINE_ONLY,
        rng=RngStream(505).child("k", k),
    )
    assert report.total_one_way_sends == 2 * n * (2**k - 1)
    assert report.sends_cos_only == report.total_one_way_sends


@pytest.mark.criterion(5)
def test_two_way_send_counter_is_twice_shots():
    """Every delivered round trip costs exactly two sends: N shots -> 2N."""
    report = simple_two_way(
        TruthModel(omega=1.0, t_ba=math.pi / 4), 50, None, RngStream(1).child("x")
    )
    assert report.total_one_way_sends == 100


# ---------------------------------------------------------------------------
# criterion 6 — retry-cost model
# ---------------------------------------------------------------------------


@pytest.mark.criterion(6)
@pytest.mark.parametrize("eta", (0.5, 0.9, 0.99))
@pytest.mark.parametrize("m", (1, 2, 4, 8))
def test_monte_carlo_retry_mean_within_three_standard_errors(m, eta):
    """10^4 independent streak runs per (m, eta) cell: the sample mean of
    attempted bounces sits within three standard errors of the closed-form
    expectation."""
    rng = RngStream(606).child("cell", m * 1000 + int(eta * 100))
    attempts, _ = sample_bounce_attempts(m, eta, 10_000, rng)
    mean = float(np.mean(attempts))
    se = float(np.std(attempts, ddof=1)) / math.sqrt(attempts.size)
    assert abs(mean - expected_bounces(m, eta)) <= 3.0 * se


@pytest.mark.criterion(6)
@pytest.mark.parametrize("eta", (0.5, 0.9, 0.99))
def test_single_bounce_expectation_is_exact(eta):
    """A single bounce is a plain geometric retry with success eta^2, so its
    expected attempt count equals 1/eta^2 bit for bit."""
    assert expected_bounces(1, eta) == 1.0 / (eta * eta)


# ---------------------------------------------------------------------------
# criterion 7 — entangled-register parity oracle
# ---------------------------------------------------------------------------


@pytest.mark.criterion(7)
@pytest.mark.parametrize("m_qubits", range(1, 11))
def test_ghz_parity_expectation_equals_cos_m_phi(m_qubits):
    """50 random phases per register size M = 1..10: the parity expectation
    of an M-qubit cat state equals cos(M phi) to 1e-10 — the register ticks
    at M times the single-qubit rate."""
    phis = (
        RngStream(707).child("phi").child("m", m_qubits).uniforms(50)
        * 2.0
        * math.pi
    )
    for phi in phis:
        got = ghz_parity_expectation(m_qubits, float(phi))
        assert abs(got - math.cos(m_qubits * float(phi))) <= 1e-10


# ---------------------------------------------------------------------------
# criterion 8 — cost-ratio structure under loss
# ---------------------------------------------------------------------------


def _ratio_curve(eta, k_max=20):
    """lossy coherent cost / lossy repetition cost at eps = 2^-k, k = 1..k_max."""
    return [
        cost_model.lossy_improved_cost(k, 2.0**-k, eta)
        / cost_model.lossy_sql_cost(k, 2.0**-k, eta)
        for k in range(1, k_max + 1)
    ]


@pytest.mark.criterion(8)
@pytest.mark.parametrize("eta", (0.9, 0.99, 0.999))
def test_cost_ratio_dips_below_unity_then_crosses(eta):
    """Contracted shape: the coherent/repetition cost ratio dips below one at
    small k and rises above one past the crossover.  At eta = 0.9 the retry
    blow-up dominates from the very first digit (minimum ratio about 3.3),
    so the dip clause fails there; the companion pins the per-channel
    behavior."""
    ratios = _ratio_curve(eta)
    k_star = cost_model.crossover_bits(eta)
    assert any(r < 1.0 for r in ratios[:k_star])
    assert all(r > 1.0 for r in ratios[k_star - 1 :])


@pytest.mark.criterion(8)
def test_crossover_precision_is_ordered_by_channel_quality():
    """Cleaner channels keep the coherent advantage out to more digits."""
    k_stars = [cost_model.crossover_bits(eta) for eta in (0.9, 0.99, 0.999)]
    assert k_stars[0] < k_stars[1] < k_stars[2]


def test_calibration_ratio_dip_requires_a_clean_channel():
    """Measured: at 1% and 0.1% loss the ratio dips below one and recovers;
    at 10% loss it never drops below three — coherent reuse never pays."""
    for eta in (0.99, 0.999):
        ratios = _ratio_curve(eta)
        k_star = cost_model.crossover_bits(eta)
        assert min(ratios[: k_star - 1]) < 1.0
        assert ratios[k_star - 2] < 1.0 < ratios[k_star - 1]
    assert min(_ratio_curve(0.9)) > 3.0


# ---------------------------------------------------------------------------
# criterion 9 — eleven-digit reference point
# ---------------------------------------------------------------------------


@pytest.mark.criterion(9)
@pytest.mark.parametrize(
    "eta, low, high",
    ((0.9, 3.5, 14.0), (0.99, 30.0, 120.0), (0.999, 200.0, 800.0)),
)
def test_eleven_bit_cost_advantage_bands(eta, low, high):
    """Eleven digits at eps = 2^-11 with an optimized split: repetition cost
    over hybrid cost lands in the contracted band per loss level (the
    roughly 7x / 60x / 400x advantages, read with a 2x margin)."""
    k, eps = 11, 2.0**-11
    k1 = select_k1(eta, k, eps)
    ratio = cost_model.lossy_sql_cost(k, eps, eta) / cost_model.hybrid_cost(
        k1, k, eps, eta
    )
    assert low <= ratio <= high


# ---------------------------------------------------------------------------
# criterion 10 — frame covariance
# ---------------------------------------------------------------------------


@pytest.mark.criterion(10)
def test_outcome_distributions_are_frame_covariant():
    """10^3 random circuits scripted in both parties' frames give identical
    outcome distributions to 1e-12: gates are carried across with the frame
    conjugation, the initial state with the frame shift, and the final
    populations must agree because the shift is diagonal."""
    gen = np.random.Generator(np.random.Philox(1010))
    worst = 0.0
    for _ in range(1000):
        phi = float(gen.uniform(0.0, 2.0 * math.pi))
        ops = []
        for _ in range(int(gen.integers(1, 6))):
            choice = int(gen.integers(0, 5))
            if choice == 0:
                ops.append(
                    rabi_pulse(
                        float(gen.uniform(0.0, 2.0)),
                        float(gen.uniform(0.0, 2.0 * math.pi)),
                        FrameTag.ALICE,
                    )
                )
            elif choice == 1:
                ops.append(z_rotation(float(gen.uniform(0.0, 4.0 * math.pi))))
            elif choice == 2:
                ops.append(hadamard_op(FrameTag.ALICE))
            elif choice == 3:
                ops.append(pauli_x_op(FrameTag.ALICE))
            else:
                ops.append(
                    bounce_unitary(
                        int(gen.integers(1, 5)),
                        float(gen.uniform(0.0, 2.0 * math.pi)),
                    )
                )
        in_alice = excited_state(FrameTag.ALICE)
        for op in ops:
            in_alice = apply(op, in_alice)
        in_bob = excited_state(FrameTag.ALICE).reframe(phi)
        for op in ops:
            in_bob = apply(frame_conjugate(op, phi), in_bob)
        worst = max(worst, abs(in_alice.prob_plus - in_bob.prob_plus))
    assert worst <= 1e-12
