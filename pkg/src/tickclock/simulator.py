"""Statevector evolution, measurement sampling, and seeded random streams.

The protocols in this package only ever measure observables O with O² = I,
so a shot's ±1 outcome distribution is fully determined by its expectation
value.  Production runs therefore sample through :func:`sample_pm1` (or its
batched variants) using closed-form expectations, while the statevector path
(:func:`apply`, :func:`measure_minus_z`) and the exponential-cost GHZ oracle
(:func:`ghz_parity_expectation`) exist to validate those closed forms.

Randomness is counter-based (Philox) and label-split: every independent
consumer derives a child stream from (master seed, path of (name, index)
pairs).  Identical (seed, path) yields an identical sample sequence; distinct
paths are statistically independent.  This makes sweep results independent of
worker scheduling.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .frames_gates import (
    FrameMismatchError,
    FrameTag,
    PhaseAngle,
    Unitary2,
    as_radians,
    frame_shift_state,
    hadamard_op,
)

__all__ = [
    "NORM_TOL",
    "PureQubit",
    "RngStream",
    "GhzState",
    "apply",
    "measure_minus_z",
    "sample_pm1",
    "sample_pm1_batch",
    "count_plus_ones",
    "prepare_ghz",
    "ghz_parity_expectation",
    "GHZ_MAX_QUBITS",
]

NORM_TOL = 1e-12
GHZ_MAX_QUBITS = 12


@dataclass(frozen=True)
class PureQubit:
    """A normalized single-qubit state (amp0 is the excited |0⟩ amplitude)."""

    amp0: complex
    amp1: complex
    frame: FrameTag

    def __post_init__(self) -> None:
        norm_sq = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state norm² = {norm_sq!r} is not 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    @property
    def prob_plus(self) -> float:
        """Probability of the +1 outcome when measuring −Z (i.e. of |1⟩)."""
        return abs(self.amp1) ** 2

    def reframe(self, phi_ba: "PhaseAngle | float") -> "PureQubit":
        """The same physical state described in the other party's frame."""
        v = frame_shift_state(self.vector, phi_ba)
        return PureQubit(v[0], v[1], self.frame.other)


def excited_state(frame: FrameTag) -> PureQubit:
    """|0⟩ in the given frame (energy eigenstate, frame-independent physics)."""
    return PureQubit(1.0 + 0.0j, 0.0j, frame)


class RngStream:
    """Deterministic, label-split random stream over a Philox generator.

    A stream is identified by (master_seed, path), the path being a tuple of
    (name, index) pairs.  Children are derived with :meth:`child`; sampling
    methods consume from a lazily created ``numpy.random.Generator``.  The
    batched methods are the canonical consumption order: drawing n samples in
    one call is not interchangeable with n single draws.
    """

    __slots__ = ("master_seed", "path", "_gen")

    def __init__(self, master_seed: int, path: tuple = ()):
        self.master_seed = int(master_seed)
        self.path = tuple((str(name), int(index)) for name, index in path)
        self._gen: np.random.Generator | None = None

    def child(self, name: str, index: int = 0) -> "RngStream":
        """Independent stream for a named sub-experiment."""
        return RngStream(self.master_seed, self.path + ((name, index),))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            words: list[int] = []
            for name, index in self.path:
                digest = hashlib.sha256(name.encode("utf-8")).digest()
                words.append(int.from_bytes(digest[:4], "big"))
                words.append(index & 0xFFFFFFFF)
            seq = np.random.SeedSequence(self.master_seed, spawn_key=tuple(words))
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen

    def uniform(self) -> float:
        """One uniform sample in [0, 1)."""
        return float(self.generator.random())

    def uniforms(self, n: int) -> np.ndarray:
        return self.generator.random(int(n))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.master_seed}, path={self.path!r})"


def apply(u: Unitary2, psi: PureQubit) -> PureQubit:
    """Apply an operator to a state; both must be described in one frame."""
    if u.frame is not psi.frame:
        raise FrameMismatchError(
            f"operator in {u.frame.value}'s frame cannot act on a state "
            f"described in {psi.frame.value}'s frame"
        )
    v = u.matrix @ psi.vector
    return PureQubit(v[0], v[1], psi.frame)


def measure_minus_z(psi: PureQubit, rng: RngStream) -> int:
    """Projective measurement of −Z; returns ±1, consuming one uniform.

    +1 (the ground state |1⟩) occurs with probability |amp1|².
    """
    return 1 if rng.uniform() < psi.prob_plus else -1


def _check_expectation(expectation: float) -> float:
    e = float(expectation)
    if not math.isfinite(e) or abs(e) > 1.0 + 1e-9:
        raise ValueError(f"expectation {e!r} lies outside [-1, 1]")
    return min(1.0, max(-1.0, e))


def sample_pm1(expectation: float, rng: RngStream) -> int:
    """One ±1 sample with the given mean; valid whenever the observable squares
    to the identity, which makes the mean a complete description."""
    e = _check_expectation(expectation)
    return 1 if rng.uniform() < 0.5 * (1.0 + e) else -1


def sample_pm1_batch(expectation: float, n: int, rng: RngStream) -> np.ndarray:
    """n independent ±1 samples with the given mean (one batched draw)."""
    e = _check_expectation(expectation)
    return np.where(rng.uniforms(int(n)) < 0.5 * (1.0 + e), 1, -1)


def count_plus_ones(expectation: float, n: int, rng: RngStream) -> int:
    """Number of +1 outcomes among n shots with the given mean.

    Distributionally identical to summing :func:`sample_pm1` outcomes — the
    shots are i.i.d. ±1 so their sufficient statistic is binomial — but a
    single counter draw, which keeps million-shot sweeps cheap.
    """
    e = _check_expectation(expectation)
    n = int(n)
    if n < 0:
        raise ValueError("shot count must be non-negative")
    if n == 0:
        return 0
    return int(rng.generator.binomial(n, 0.5 * (1.0 + e)))


@dataclass(frozen=True)
class GhzState:
    """An M-qubit state vector with a frame tag (basis index 0 = |0…0⟩)."""

    m: int
    amps: np.ndarray
    frame: FrameTag

    def __post_init__(self) -> None:
        a = np.array(self.amps, dtype=complex)
        if a.shape != (2**self.m,):
            raise ValueError(f"amplitude vector must have length 2^{self.m}")
        norm_sq = float(np.sum(np.abs(a) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state norm² = {norm_sq!r} is not 1")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)


def prepare_ghz(m: int, frame: FrameTag = FrameTag.ALICE) -> GhzState:
    """(|0…0⟩ + |1…1⟩)/√2 over m qubits."""
    _check_ghz_size(m)
    amps = np.zeros(2**m, dtype=complex)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return GhzState(m, amps, frame)


def _check_ghz_size(m: int) -> None:
    if not 1 <= m <= GHZ_MAX_QUBITS:
        raise ValueError(
            f"qubit count {m} outside [1, {GHZ_MAX_QUBITS}] "
            "(the statevector oracle is exponential in m)"
        )


def _apply_single_qubit(op: np.ndarray, amps: np.ndarray, qubit: int, m: int) -> np.ndarray:
    tensor = amps.reshape((2,) * m)
    tensor = np.tensordot(op, tensor, axes=([1], [qubit]))
    tensor = np.moveaxis(tensor, 0, qubit)
    return tensor.reshape(-1)


def ghz_parity_expectation(m: int, phi_ba: "PhaseAngle | float") -> float:
    """Exact ⟨(−1)^m Z^{⊗m}⟩ after the receiving party's per-qubit analysis.

    Builds the 2^m statevector of the m-qubit maximally entangled state,
    re-expresses each qubit in the receiver's frame, applies the receiver's
    half-pulse to each qubit, and evaluates the parity expectation exactly.
    The result equals cos(m·φ): m entangled qubits tick m times faster than
    one.
    """
    _check_ghz_size(m)
    phi = as_radians(phi_ba)
    amps = prepare_ghz(m, FrameTag.ALICE).amps.copy()

    shift = np.array(
        [[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]], dtype=complex
    )
    h = hadamard_op(FrameTag.BOB).matrix
    for q in range(m):
        amps = _apply_single_qubit(shift, amps, q, m)
    for q in range(m):
        amps = _apply_single_qubit(h, amps, q, m)

    probs = np.abs(amps) ** 2
    idx = np.arange(2**m)
    parity = np.where(_popcount(idx) % 2 == 0, 1.0, -1.0)
    sign = -1.0 if m % 2 else 1.0
    return float(sign * np.sum(probs * parity))


def _popcount(idx: np.ndarray) -> np.ndarray:
    counts = np.zeros_like(idx)
    v = idx.copy()
    while np.any(v):
        counts += v & 1
        v >>= 1
    return counts
