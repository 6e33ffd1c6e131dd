"""Two-level gate algebra for parties whose clock phases disagree.

A qubit ticking at angular frequency ω accumulates phase against each party's
local oscillator.  When two parties' clocks differ by an offset t, the offset
appears in the rotating frame as a static angle φ = ω·t, and every
non-diagonal gate becomes party-relative: the same physical pulse is written
as different matrices in Alice's and Bob's frames.  This module provides the
pulse gates, the frame bookkeeping, and the exact maps between the two
descriptions.

Conventions
-----------
* Basis ordering is (|0⟩, |1⟩) with |0⟩ the *excited* state, so Z = diag(1, −1).
* Angles handed to gate constructors are canonicalized to [0, 2π); spinor
  half-angle gates (``z_rotation``) keep their raw argument because they are
  4π-periodic.
* Every operator carries a :class:`FrameTag`; combining operators tagged with
  different frames raises :class:`FrameMismatchError` unless one is first
  re-expressed with :func:`frame_conjugate`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "UNITARITY_TOL",
    "TWO_PI",
    "FrameTag",
    "FrameMismatchError",
    "PhaseAngle",
    "Unitary2",
    "canonical_phase",
    "as_radians",
    "rabi_pulse",
    "pauli_x_op",
    "hadamard_op",
    "z_rotation",
    "frame_conjugate",
    "frame_shift_state",
    "frame_shift_matrix",
    "bounce_unitary",
    "equal_up_to_global_phase",
]

UNITARITY_TOL = 1e-12
TWO_PI = 2.0 * math.pi


class FrameTag(Enum):
    """Which party's phase reference a state or operator is described in."""

    ALICE = "Alice"
    BOB = "Bob"

    @property
    def other(self) -> "FrameTag":
        return FrameTag.BOB if self is FrameTag.ALICE else FrameTag.ALICE


class FrameMismatchError(ValueError):
    """Raised when objects described in different frames are combined."""


def canonical_phase(radians: float) -> float:
    """Reduce an angle to its canonical representative in [0, 2π)."""
    r = math.fmod(float(radians), TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # the r == 2π corner after rounding up
        r -= TWO_PI
    return r


@dataclass(frozen=True)
class PhaseAngle:
    """An angle interpreted modulo 2π, stored canonically in [0, 2π)."""

    radians: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "radians", canonical_phase(self.radians))

    def __float__(self) -> float:
        return self.radians


def as_radians(phi: "PhaseAngle | float") -> float:
    """Canonical radians of a :class:`PhaseAngle` or bare angle."""
    if isinstance(phi, PhaseAngle):
        return phi.radians
    return canonical_phase(float(phi))


@dataclass(frozen=True)
class Unitary2:
    """A 2×2 unitary together with the frame it is described in.

    The matrix is validated on construction: U·U† must equal the identity
    entrywise within ``UNITARITY_TOL`` and |det U| must be 1 within the same
    tolerance.  The stored array is read-only.
    """

    matrix: np.ndarray
    frame: FrameTag

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        err = np.max(np.abs(m @ m.conj().T - np.eye(2)))
        if err > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (max deviation {err:.3e})")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(abs(det) - 1.0) > UNITARITY_TOL:
            raise ValueError(f"abs(det) = {abs(det)!r} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if not isinstance(self.frame, FrameTag):
            raise TypeError("frame must be a FrameTag")

    def __matmul__(self, other: "Unitary2") -> "Unitary2":
        """Operator composition (self after other), requiring matching frames."""
        if not isinstance(other, Unitary2):
            return NotImplemented
        if other.frame is not self.frame:
            raise FrameMismatchError(
                f"cannot compose {self.frame.value}-frame with "
                f"{other.frame.value}-frame operator; frame_conjugate one first"
            )
        return Unitary2(self.matrix @ other.matrix, self.frame)

    def dagger(self) -> "Unitary2":
        return Unitary2(self.matrix.conj().T, self.frame)

    def isclose(self, other: "Unitary2", tol: float = UNITARITY_TOL) -> bool:
        return self.frame is other.frame and bool(
            np.max(np.abs(self.matrix - other.matrix)) <= tol
        )


def rabi_pulse(k: float, phi: "PhaseAngle | float", frame: FrameTag) -> Unitary2:
    """The (kπ)-pulse about an equatorial axis set by drive phase φ.

    Matrix: diagonal cos(kπ/2); off-diagonal −i·e^{∓iφ}·sin(kπ/2), with the
    upper entry taking e^{−iφ}.  The drive phase is meaningful only relative
    to the issuing party's clock, so the result carries that party's tag.
    """
    if not math.isfinite(k):
        raise ValueError("pulse area parameter k must be finite")
    p = as_radians(phi)
    half = k * math.pi / 2.0
    c = math.cos(half)
    s = math.sin(half)
    m = np.array(
        [
            [c, -1j * cmath.exp(-1j * p) * s],
            [-1j * cmath.exp(1j * p) * s, c],
        ]
    )
    return Unitary2(m, frame)


def pauli_x_op(frame: FrameTag) -> Unitary2:
    """The π-pulse at drive phase 0, with the conventional global −i removed."""
    return Unitary2(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex), frame)


def hadamard_op(frame: FrameTag) -> Unitary2:
    """The half-pulse at drive phase π/2: (1/√2)[[1, −1], [1, 1]].

    Equals ``rabi_pulse(1/2, π/2, frame)`` up to floating-point residue below
    1e-15 (the trig evaluation leaves ~1e-17 imaginary dust on the
    off-diagonal entries).
    """
    r = math.sqrt(0.5)
    return Unitary2(np.array([[r, -r], [r, r]], dtype=complex), frame)


def z_rotation(theta: float, frame: FrameTag = FrameTag.ALICE) -> Unitary2:
    """diag(e^{−iθ/2}, e^{+iθ/2}): a rotation about the ticking axis.

    θ is *not* reduced modulo 2π — the half-angle makes the gate 4π-periodic
    (θ = 2π gives −I, not the identity).  Diagonal gates commute with frame
    conjugation, so the tag is a formality; it defaults to Alice.
    """
    t = float(theta)
    m = np.array(
        [[cmath.exp(-0.5j * t), 0.0], [0.0, cmath.exp(0.5j * t)]], dtype=complex
    )
    return Unitary2(m, frame)


def frame_shift_matrix(phi_ba: "PhaseAngle | float") -> np.ndarray:
    """diag(e^{−iφ/2}, e^{+iφ/2}): re-expression map from Alice's to Bob's frame."""
    p = as_radians(phi_ba)
    return np.array(
        [[cmath.exp(-0.5j * p), 0.0], [0.0, cmath.exp(0.5j * p)]], dtype=complex
    )


def frame_conjugate(u: Unitary2, phi_ba: "PhaseAngle | float") -> Unitary2:
    """Re-express an operator in the other party's frame.

    Returns S·U·S⁻¹ with S = diag(e^{−iφ/2}, e^{+iφ/2}), tagged with the
    opposite frame.  Diagonal operators are fixed points for every φ.
    """
    s = frame_shift_matrix(phi_ba)
    m = s @ u.matrix @ s.conj().T
    return Unitary2(m, u.frame.other)


def frame_shift_state(amps: np.ndarray, phi_ba: "PhaseAngle | float") -> np.ndarray:
    """Re-express a single-qubit amplitude pair in the other party's frame.

    Multiplies (amp0, amp1) by (e^{−iφ/2}, e^{+iφ/2}).  Norm is preserved
    exactly; the caller is responsible for flipping the frame tag of whatever
    container holds the amplitudes (see ``simulator.PureQubit.reframe``).
    """
    v = np.asarray(amps, dtype=complex)
    if v.shape != (2,):
        raise ValueError(f"expected an amplitude pair, got shape {v.shape}")
    return frame_shift_matrix(phi_ba) @ v


def bounce_unitary(m: int, phi_ba: "PhaseAngle | float") -> Unitary2:
    """Net effect, in Alice's frame, of m round trips Alice→Bob→Alice.

    Each round trip applies Bob's π-pulse then Alice's π-pulse; the pair
    composes to diag(e^{+iφ}, e^{−iφ}), so m of them give
    diag(e^{+imφ}, e^{−imφ}).  Because the two pulses cancel except for the
    frame disagreement, the offset phase is amplified m-fold while the qubit
    never needs to be measured in between.
    """
    if m < 1:
        raise ValueError(f"bounce count m must be >= 1, got {m}")
    p = as_radians(phi_ba)
    return Unitary2(
        np.array(
            [[cmath.exp(1j * m * p), 0.0], [0.0, cmath.exp(-1j * m * p)]],
            dtype=complex,
        ),
        FrameTag.ALICE,
    )


def equal_up_to_global_phase(
    a: np.ndarray, b: np.ndarray, tol: float = UNITARITY_TOL
) -> bool:
    """True if a = e^{iα}·b for some real α, entrywise within tol.

    Works for amplitude vectors and matrices alike.  The phase is fitted on
    the largest-magnitude entry of b, then checked entrywise.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    idx = int(np.argmax(np.abs(b)))
    pivot = b.flat[idx]
    if abs(pivot) <= tol:  # b ~ 0: equal only if a ~ 0 too
        return bool(np.max(np.abs(a)) <= tol)
    phase = a.flat[idx] / pivot
    mag = abs(phase)
    if mag == 0.0:
        return False
    phase /= mag
    return bool(np.max(np.abs(a - phase * b)) <= tol)
