"""Reduced invariant suite behind the ``selftest`` CLI subcommand.

Each check re-derives a property of the package from scratch at small scale
and reports (name, ok, detail).  The suite is sized to finish in well under a
minute on a laptop while still catching formula and convention regressions
(gate algebra, frame covariance, retry accounting, counter identities, cost
identities, estimator calibration).
"""

from __future__ import annotations

import math

import numpy as np

from . import channel as channel_mod
from . import cost_model
from .channel import LossyChannel, TransmissionLog, sample_bounce_attempts
from .frames_gates import (
    FrameTag,
    bounce_unitary,
    equal_up_to_global_phase,
    frame_conjugate,
    frame_shift_state,
    hadamard_op,
    pauli_x_op,
    rabi_pulse,
    z_rotation,
)
from .protocols import (
    QuadratureMode,
    TruthModel,
    improved_estimate,
    entangled_bitwise,
    repetitions_per_bit,
    simple_one_way,
    simple_two_way,
)
from .simulator import RngStream, ghz_parity_expectation

__all__ = ["CHECKS", "run_all"]


def check_rng_determinism() -> tuple[bool, str]:
    a = RngStream(7).child("stream", 3).uniforms(64)
    b = RngStream(7).child("stream", 3).uniforms(64)
    if not np.array_equal(a, b):
        return False, "identical (seed, path) produced different sequences"
    c = RngStream(7).child("stream", 4).uniforms(64)
    if np.array_equal(a, c):
        return False, "distinct paths produced identical sequences"
    return True, "streams reproducible and path-separated"


def check_gate_algebra() -> tuple[bool, str]:
    gen = np.random.Generator(np.random.Philox(20260814))
    x = pauli_x_op(FrameTag.ALICE)
    for _ in range(20):
        phi = float(gen.uniform(0.0, 2.0 * math.pi))
        for m in (1, 2, 5, 8):
            prod = np.eye(2, dtype=complex)
            xb = frame_conjugate(x, phi)
            for _ in range(m):
                prod = x.matrix @ xb.matrix @ prod
            if not equal_up_to_global_phase(prod, bounce_unitary(m, phi).matrix):
                return False, f"alternating product != bounce unitary at m={m}"
    h = hadamard_op(FrameTag.ALICE)
    r = rabi_pulse(0.5, math.pi / 2.0, FrameTag.ALICE)
    if np.max(np.abs(h.matrix - r.matrix)) > 1e-15:
        return False, "half pulse at drive phase pi/2 is not the Hadamard"
    u = rabi_pulse(0.7, 1.1, FrameTag.ALICE)
    once = frame_conjugate(frame_conjugate(u, 0.4), 0.9)
    both = frame_conjugate(u, 1.3)
    if np.max(np.abs(once.matrix - both.matrix)) > 1e-12:
        return False, "conjugations by 0.4 then 0.9 differ from one by 1.3"
    return True, "bounce algebra, Hadamard identity and conjugation composition hold"


def check_frame_covariance() -> tuple[bool, str]:
    gen = np.random.Generator(np.random.Philox(914))
    for trial in range(100):
        phi_ba = float(gen.uniform(0.0, 2.0 * math.pi))
        ops = []
        for _ in range(int(gen.integers(1, 5))):
            if gen.random() < 0.5:
                ops.append(
                    rabi_pulse(
                        float(gen.uniform(0.0, 2.0)),
                        float(gen.uniform(0.0, 2.0 * math.pi)),
                        FrameTag.ALICE,
                    )
                )
            else:
                ops.append(z_rotation(float(gen.uniform(0.0, 4.0 * math.pi))))
        psi_a = np.array([1.0, 0.0], dtype=complex)
        for op in ops:
            psi_a = op.matrix @ psi_a
        psi_b = frame_shift_state(np.array([1.0, 0.0], dtype=complex), phi_ba)
        for op in ops:
            psi_b = frame_conjugate(op, phi_ba).matrix @ psi_b
        probs_a = np.abs(psi_a) ** 2
        probs_b = np.abs(psi_b) ** 2
        if np.max(np.abs(probs_a - probs_b)) > 1e-12:
            return False, f"outcome distributions diverged on circuit {trial}"
    return True, "100 random circuits give frame-independent statistics"


def check_ghz_oracle() -> tuple[bool, str]:
    gen = np.random.Generator(np.random.Philox(33))
    worst = 0.0
    for m in range(1, 7):
        for _ in range(10):
            phi = float(gen.uniform(0.0, 2.0 * math.pi))
            worst = max(worst, abs(ghz_parity_expectation(m, phi) - math.cos(m * phi)))
    ok = worst <= 1e-10
    return ok, f"max |oracle - cos(m phi)| = {worst:.2e}"


def check_retry_expectation() -> tuple[bool, str]:
    # closed-form self-consistency: the recurrence that defines the formula
    for eta in (0.5, 0.9, 0.99):
        for m in (1, 2, 4, 8):
            lhs = channel_mod.expected_bounces(m + 1, eta)
            rhs = (channel_mod.expected_bounces(m, eta) + 1.0) / eta**2
            if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
                return False, (
                    f"recurrence E(m+1) = (E(m)+1)/eta^2 broken at m={m}, eta={eta}"
                )
        one = channel_mod.expected_bounces(1, eta)
        if abs(one - 1.0 / eta**2) > 1e-12:
            return False, f"E(1) != 1/eta^2 at eta={eta}"
    # Monte Carlo agreement at small scale
    rng = RngStream(5150).child("selftest-bounce")
    for m, eta in ((1, 0.5), (2, 0.9), (4, 0.9)):
        attempts, _ = sample_bounce_attempts(m, eta, 3000, rng)
        mean = float(attempts.mean())
        expect = channel_mod.expected_bounces(m, eta)
        se = float(attempts.std(ddof=1)) / math.sqrt(attempts.size)
        if abs(mean - expect) > 3.0 * se + 1e-9:
            return False, (
                f"mean attempts {mean:.3f} vs expected {expect:.3f} "
                f"(3se = {3 * se:.3f}) at m={m}, eta={eta}"
            )
    return True, "retry formula matches its recurrence and Monte Carlo means"


def check_counter_identities() -> tuple[bool, str]:
    truth = TruthModel(omega=1.0, t_ba=0.3 * math.pi)
    for k in (1, 3):
        n = repetitions_per_bit(k, 0.1)
        rep = improved_estimate(
            truth, k, 0.1, mode=QuadratureMode.COSINE_ONLY,
            rng=RngStream(11).child("counter", k),
        )
        want = 2 * n * (2**k - 1)
        if rep.total_one_way_sends != want:
            return False, f"coherent sends {rep.total_one_way_sends} != {want} at k={k}"
        ent = entangled_bitwise(
            truth, k, 0.1, mode=QuadratureMode.COSINE_ONLY,
            rng=RngStream(11).child("counter-ent", k),
        )
        if ent.total_one_way_sends != want:
            return False, f"entangled sends {ent.total_one_way_sends} != {want} at k={k}"
    two = simple_two_way(truth, 50, None, RngStream(12))
    if two.total_one_way_sends != 100:
        return False, f"two-way sends {two.total_one_way_sends} != 2N"
    return True, "lossless send counters equal their closed forms exactly"


def check_bitwise_success() -> tuple[bool, str]:
    failures = 0
    runs = 60
    offsets = RngStream(77).child("offsets").uniforms(runs)
    for i, t_frac in enumerate(offsets):
        truth = TruthModel(omega=1.0, t_ba=math.pi * float(t_frac))
        rep = improved_estimate(
            truth, 4, 0.1, rng=RngStream(77).child("success", i)
        )
        if abs(rep.estimate_t_ba - truth.t_ba) > math.pi * 2.0**-4:
            failures += 1
    rate = 1.0 - failures / runs
    ok = rate >= 0.9
    return ok, f"in-cell rate {rate:.3f} over {runs} runs (budget 0.9)"


def check_cost_identities() -> tuple[bool, str]:
    for k in (1, 4, 9):
        for eps in (0.5, 0.01):
            a = cost_model.lossy_sql_cost(k, eps, 1.0)
            b = cost_model.sql_one_way_cost(k, eps)
            if abs(a - b) > 1e-9 * b:
                return False, "lossless limit of the lossy repetition cost broken"
            c = cost_model.lossy_improved_cost(k, eps, 1.0)
            d = cost_model.improved_cost(k, eps)
            if abs(c - d) > 1e-9 * d:
                return False, "lossless limit of the lossy coherent cost broken"
            h = cost_model.hybrid_cost(k, k, eps, 0.9)
            i = cost_model.lossy_improved_cost(k, eps / 2.0, 0.9)
            if abs(h - i) > 1e-9 * i:
                return False, "hybrid cost with an empty second stage broken"
    v = cost_model.sql_one_way_cost(1, 2.0 / math.e**2)
    if abs(v - 256.0 / math.pi**2) > 1e-9:
        return False, f"one-way cost anchor value off: {v!r}"
    return True, "cost formulas satisfy their limits and anchor values"


def check_estimator_calibration() -> tuple[bool, str]:
    omega = 1.0
    n = 4096
    runs = 300
    truth = TruthModel(omega=omega, t_ba=math.pi / 2.0)
    errs = []
    for i in range(runs):
        rep = simple_one_way(truth, n, None, RngStream(31).child("cal", i))
        errs.append(rep.estimate_t_ba - truth.t_ba)
    rms = float(np.sqrt(np.mean(np.square(errs))))
    predicted = 1.0 / (omega * math.sqrt(n))
    ok = 0.65 * predicted <= rms <= 1.35 * predicted
    detail = f"one-way rms {rms:.2e} vs 1/(omega sqrt N) = {predicted:.2e}"
    if not ok:
        return False, detail
    truth2 = TruthModel(omega=omega, t_ba=math.pi / 4.0)
    errs2 = []
    for i in range(runs):
        rep = simple_two_way(truth2, n, None, RngStream(32).child("cal2", i))
        errs2.append(rep.estimate_t_ba - truth2.t_ba)
    rms2 = float(np.sqrt(np.mean(np.square(errs2))))
    predicted2 = 1.0 / (2.0 * omega * math.sqrt(n))
    ok2 = 0.65 * predicted2 <= rms2 <= 1.35 * predicted2
    return ok2, detail + f"; two-way rms {rms2:.2e} vs {predicted2:.2e}"


def check_lost_send_accounting() -> tuple[bool, str]:
    truth = TruthModel(omega=1.0, t_ba=0.35 * math.pi)
    ch = LossyChannel(0.7)
    rep_yes = improved_estimate(
        truth, 3, 0.2, ch=ch, rng=RngStream(9).child("lost", 0),
        count_lost_sends=True,
    )
    rep_no = improved_estimate(
        truth, 3, 0.2, ch=ch, rng=RngStream(9).child("lost", 0),
        count_lost_sends=False,
    )
    # identical stream => identical channel history; the counters differ by
    # exactly one send per failed attempt
    diff = rep_yes.total_one_way_sends - rep_no.total_one_way_sends
    if diff != rep_yes.restarts or rep_yes.restarts != rep_no.restarts:
        return False, (
            f"lost-send toggle changed counters inconsistently: "
            f"diff={diff}, restarts={rep_yes.restarts}/{rep_no.restarts}"
        )
    return True, "lost-send toggle shifts counters by exactly the failed attempts"


CHECKS = [
    ("rng-determinism", check_rng_determinism),
    ("gate-algebra", check_gate_algebra),
    ("frame-covariance", check_frame_covariance),
    ("entangled-parity-oracle", check_ghz_oracle),
    ("retry-expectation", check_retry_expectation),
    ("counter-identities", check_counter_identities),
    ("bitwise-success", check_bitwise_success),
    ("cost-identities", check_cost_identities),
    ("estimator-calibration", check_estimator_calibration),
    ("lost-send-accounting", check_lost_send_accounting),
]


def run_all(verbose: bool = True) -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
        if verbose:
            print(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
    return results
