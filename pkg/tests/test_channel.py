"""Loss model: per-send survival, consecutive-bounce retries, and the
closed-form expected attempt count."""

import math

import numpy as np
import pytest

from tickclock.channel import (
    LossyChannel,
    TransmissionLog,
    expected_bounces,
    log_expected_bounces,
    run_coherent_bounces,
    sample_bounce_attempts,
    transmit,
)
from tickclock.simulator import RngStream


def recurrence_oracle(m: int, eta: float) -> float:
    """Independent check: E(j+1) = (E(j) + 1)/eta^2 starting from E(0) = 0."""
    e = 0.0
    for _ in range(m):
        e = (e + 1.0) / (eta * eta)
    return e


def test_channel_validates_eta():
    with pytest.raises(ValueError):
        LossyChannel(0.0)
    with pytest.raises(ValueError):
        LossyChannel(1.0001)
    assert LossyChannel(1.0).eta == 1.0


def test_transmit_lossless_never_drops():
    ch = LossyChannel(1.0)
    log = TransmissionLog()
    rng = RngStream(0).child("t")
    assert all(transmit(ch, rng, log) for _ in range(100))
    assert log.one_way_sends == 100


def test_transmit_records_losses():
    ch = LossyChannel(0.5)
    log = TransmissionLog()
    rng = RngStream(1).child("t")
    outcomes = [transmit(ch, rng, log) for _ in range(2000)]
    assert log.one_way_sends == 2000
    assert abs(sum(outcomes) / 2000 - 0.5) < 0.04  # ~3.6 sigma


def test_transmission_log_can_exclude_lost_sends():
    log = TransmissionLog(count_lost_sends=False)
    log.record_send(True)
    log.record_send(False)
    assert log.one_way_sends == 1


def test_expected_bounces_frozen_values():
    # frozen from the recurrence oracle (exact rational arithmetic)
    assert expected_bounces(1, 0.9) == pytest.approx(1.2345679012345678, rel=1e-15)
    assert expected_bounces(2, 0.9) == pytest.approx(2.758725803993294, rel=1e-12)
    assert expected_bounces(4, 0.9) == pytest.approx(6.9634595396940915, rel=1e-12)
    assert expected_bounces(16, 0.9) == pytest.approx(148.01705572401383, rel=1e-12)
    assert expected_bounces(2, 0.5) == pytest.approx(20.0, rel=1e-12)
    assert expected_bounces(8, 0.5) == pytest.approx(87380.0, rel=1e-12)


def test_expected_bounces_single_bounce_is_geometric():
    for eta in (0.5, 0.9, 0.99, 0.3141):
        assert expected_bounces(1, eta) == 1.0 / eta**2


def test_expected_bounces_lossless_limit():
    for m in (1, 2, 7, 64):
        assert expected_bounces(m, 1.0) == float(m)


def test_expected_bounces_matches_recurrence():
    for eta in (0.5, 0.8, 0.95, 0.99):
        for m in (1, 2, 3, 5, 9, 17):
            assert expected_bounces(m, eta) == pytest.approx(
                recurrence_oracle(m, eta), rel=1e-9
            )


def test_expected_bounces_monotone():
    for eta in (0.6, 0.9, 0.99):
        values = [expected_bounces(m, eta) for m in (1, 2, 4, 8, 16)]
        assert all(b > a for a, b in zip(values, values[1:]))
    for m in (1, 4, 16):
        values = [expected_bounces(m, eta) for eta in (0.5, 0.7, 0.9, 1.0)]
        assert all(b < a for a, b in zip(values, values[1:]))


def test_expected_bounces_overflows_to_inf():
    assert math.isinf(expected_bounces(600, 0.5))
    assert not math.isinf(expected_bounces(600, 0.999))


def test_log_expected_bounces_consistent_with_linear_form():
    for m, eta in [(2, 0.9), (8, 0.5), (16, 0.9)]:
        assert log_expected_bounces(m, eta) == pytest.approx(
            math.log(expected_bounces(m, eta)), rel=1e-12
        )
    # finite where the linear form is not
    assert math.isfinite(log_expected_bounces(600, 0.5))
    assert log_expected_bounces(600, 0.5) == pytest.approx(
        -1200 * math.log(0.5) - math.log(0.75), rel=1e-12
    )


def test_validation_rejects_bad_arguments():
    for fn in (expected_bounces, log_expected_bounces):
        with pytest.raises(ValueError):
            fn(0, 0.9)
        with pytest.raises(ValueError):
            fn(3, 0.0)
        with pytest.raises(ValueError):
            fn(3, 1.5)


def test_run_coherent_bounces_lossless_counts():
    ch = LossyChannel(1.0)
    log = TransmissionLog()
    assert run_coherent_bounces(5, ch, RngStream(0).child("b"), log)
    assert log.one_way_sends == 10
    assert log.completed_bounces == 5
    assert log.restarts == 0
    assert log.attempted_bounces == 5


def test_run_coherent_bounces_accounting_identity():
    ch = LossyChannel(0.7)
    log = TransmissionLog()
    rng = RngStream(21).child("b")
    for _ in range(50):
        run_coherent_bounces(3, ch, rng, log)
    assert log.attempted_bounces == log.completed_bounces + log.restarts
    # every completed bounce is two survived sends; every restart is either a
    # lost first leg (1 send) or a survived-then-lost pair (2 sends)
    assert log.one_way_sends >= 2 * log.completed_bounces + log.restarts
    assert log.one_way_sends <= 2 * log.attempted_bounces


def test_single_run_mean_attempts_match_formula():
    m, eta, runs = 3, 0.8, 400
    ch = LossyChannel(eta)
    rng = RngStream(5).child("loop")
    attempts = []
    for _ in range(runs):
        log = TransmissionLog()
        run_coherent_bounces(m, ch, rng, log)
        attempts.append(log.attempted_bounces)
    mean = float(np.mean(attempts))
    se = float(np.std(attempts, ddof=1)) / math.sqrt(runs)
    assert abs(mean - expected_bounces(m, eta)) <= 3.0 * se


def test_batched_sampler_matches_formula():
    rng = RngStream(6)
    for m, eta in [(1, 0.5), (2, 0.9), (4, 0.7), (8, 0.9)]:
        attempts, failures = sample_bounce_attempts(
            m, eta, 4000, rng.child(f"cell-{m}", int(eta * 1000))
        )
        assert attempts.shape == (4000,) and failures.shape == (4000,)
        assert np.all(attempts >= m)
        # the run ends on m consecutive successes, so at least m attempts
        # succeeded; the rest split into successes inside broken streaks
        # (still completed bounces) and failures
        assert np.all(attempts - failures >= m)
        mean = float(attempts.mean())
        se = float(attempts.std(ddof=1)) / math.sqrt(4000)
        assert abs(mean - expected_bounces(m, eta)) <= 3.0 * se


def test_batched_sampler_lossless_is_deterministic():
    attempts, failures = sample_bounce_attempts(4, 1.0, 10, RngStream(9).child("z"))
    assert np.all(attempts == 4)
    assert np.all(failures == 0)


def test_batched_sampler_agrees_with_single_run_distribution():
    m, eta, runs = 2, 0.6, 3000
    batched, _ = sample_bounce_attempts(m, eta, runs, RngStream(30).child("batch"))
    ch = LossyChannel(eta)
    rng = RngStream(31).child("loop")
    singles = []
    for _ in range(runs):
        log = TransmissionLog()
        run_coherent_bounces(m, ch, rng, log)
        singles.append(log.attempted_bounces)
    singles = np.asarray(singles)
    se = math.hypot(
        float(batched.std(ddof=1)) / math.sqrt(runs),
        float(singles.std(ddof=1)) / math.sqrt(runs),
    )
    assert abs(float(batched.mean()) - float(singles.mean())) <= 3.0 * se


def test_batched_sampler_small_blocks_are_equivalent():
    # forcing tiny internal blocks must not change the sampled distribution's
    # mean beyond noise (the carry logic across block boundaries is exercised)
    a1, f1 = sample_bounce_attempts(3, 0.7, 2000, RngStream(8).child("blk"))
    a2, f2 = sample_bounce_attempts(
        3, 0.7, 2000, RngStream(8).child("blk2"), max_block_elems=64
    )
    se = math.hypot(
        float(a1.std(ddof=1)) / math.sqrt(2000),
        float(a2.std(ddof=1)) / math.sqrt(2000),
    )
    assert abs(float(a1.mean()) - float(a2.mean())) <= 3.0 * se
    assert np.all(a2 >= 3)
    assert np.all(a2 - f2 >= 3)
    assert np.all(f1 >= 0) and np.all(f2 >= 0)
