"""Dense-coding codec: Pauli encoding, Bell measurement and decoding.

Message table (fixed): ``I=00, X=01, Y=10, Z=11``.  Bob's qubit defaults to
qubit 2 of the shared pair.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .statevec import PureState, apply_single_qubit

_S = 1 / math.sqrt(2)

PAULIS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class PauliMessage(enum.IntEnum):
    I = 0
    X = 1
    Y = 2
    Z = 3

    @property
    def bits(self) -> str:
        return format(int(self), "02b")

    @classmethod
    def from_bits(cls, bits: str) -> "PauliMessage":
        return cls(int(bits, 2))


class BellOutcome(enum.IntEnum):
    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def label(self) -> str:
        return ("phi+", "phi-", "psi+", "psi-")[self]


# Rows are <Bell_k| in the |00>,|01>,|10>,|11> basis; all real.
_BELL_MATRIX = np.array(
    [
        [_S, 0, 0, _S],
        [_S, 0, 0, -_S],
        [0, _S, _S, 0],
        [0, _S, -_S, 0],
    ],
    dtype=np.complex128,
)


@dataclass(frozen=True)
class ChannelDescriptor:
    """What the decoder knows about the pair it shares with the sender."""

    kind: str  # "bell" or "product"
    relative_phase_sign: int = 1

    def __post_init__(self):
        if self.kind not in ("bell", "product"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.relative_phase_sign not in (1, -1):
            raise ValueError("relative_phase_sign must be +1 or -1")


@dataclass(frozen=True)
class ConditionalDistribution:
    """``matrix[message, outcome] = P(outcome | message)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ValueError("entries must lie in [0, 1]")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("rows must sum to 1")
        object.__setattr__(self, "matrix", np.clip(m, 0.0, 1.0))


def bell_states() -> dict[BellOutcome, PureState]:
    return {k: PureState(2, _BELL_MATRIX[k].copy()) for k in BellOutcome}


def encode(message: PauliMessage, state: PureState, bob_qubit: int = 2) -> PureState:
    if state.qubit_count < 2:
        raise ValueError("dense coding needs at least two qubits")
    return apply_single_qubit(state, bob_qubit, PAULIS[PauliMessage(message).name])


def bell_probabilities(state: PureState) -> np.ndarray:
    if state.qubit_count != 2:
        raise ValueError(f"Bell measurement needs 2 qubits, got {state.qubit_count}")
    probs = np.abs(_BELL_MATRIX @ state.amplitudes) ** 2
    return probs / probs.sum()


def bell_measure(state: PureState, rng: np.random.Generator) -> tuple[BellOutcome, np.ndarray]:
    """Sample a Bell-basis outcome; also returns the outcome probabilities."""
    probs = bell_probabilities(state)
    return BellOutcome(sample_outcome(probs, rng.random())), probs


def sample_outcome(probs, r: float) -> int:
    """Inverse-CDF draw of an index from ``probs`` given a uniform ``r``."""
    acc = 0.0
    for k, p in enumerate(probs):
        acc += p
        if r < acc:
            return k
    # r landed above a cumulative sum that rounded below 1.
    return max(k for k, p in enumerate(probs) if p > 0)


def channel_state(channel: ChannelDescriptor) -> PureState:
    """Reference pair for a descriptor: phi+/phi- or the product state |10>."""
    if channel.kind == "bell":
        s = channel.relative_phase_sign
        return PureState(2, np.array([_S, 0, 0, s * _S]))
    return PureState(2, np.array([0, 0, 1.0, 0]))


def conditional_distribution(state: PureState, bob_qubit: int = 2) -> ConditionalDistribution:
    """Exact outcome law of each message sent over ``state``."""
    rows = [bell_probabilities(encode(m, state, bob_qubit)) for m in PauliMessage]
    return ConditionalDistribution(np.array(rows))


@lru_cache(maxsize=None)
def _decode_table(channel: ChannelDescriptor) -> tuple[PauliMessage, ...]:
    m = conditional_distribution(channel_state(channel)).matrix
    # np.argmax returns the first maximum: ties go to the lower message index.
    return tuple(PauliMessage(int(np.argmax(np.round(m[:, k], 12)))) for k in range(4))


def decode(outcome: BellOutcome, channel: ChannelDescriptor) -> PauliMessage:
    """Maximum-likelihood guess of the message given the Bell outcome."""
    return _decode_table(channel)[BellOutcome(outcome)]


def mutual_information(dist: ConditionalDistribution | np.ndarray, prior=None) -> float:
    """Shannon ``I(X;Y)`` in bits; ``prior`` defaults to uniform."""
    if not isinstance(dist, ConditionalDistribution):
        dist = ConditionalDistribution(dist)
    px = np.full(4, 0.25) if prior is None else np.asarray(prior, dtype=float)
    if px.shape != (4,) or np.any(px < 0) or abs(px.sum() - 1.0) > 1e-12:
        raise ValueError("prior must be 4 non-negative numbers summing to 1")
    joint = px[:, None] * dist.matrix
    py = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / (px[:, None] * py[None, :])[mask]
    return float(max(np.sum(joint[mask] * np.log2(ratio)), 0.0))
