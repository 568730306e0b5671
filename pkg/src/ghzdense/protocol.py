"""GHZ channel preparation, the measurement cascade and entanglement purification.

Qubit layout of the ``N + 2`` qubit channel: qubit 1 is Alice, qubit 2 is
Bob, qubits ``3 .. N+2`` belong to the intermediate parties.  The party
holding qubit ``N + 2`` measures first with angle ``angles[0]``, then qubit
``N + 1`` with ``angles[1]`` and so on down to qubit 3 with ``angles[-1]``.

Sign histories are strings over ``"+-"`` in measurement order.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .statevec import (
    MAX_QUBITS,
    PureState,
    apply_single_qubit,
    apply_two_qubit,
    measure_qubit,
)

TAN_POLE_ATOL = 1e-12
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


class BranchPolicy(str, enum.Enum):
    ALL_PLUS = "all-plus"
    ENUMERATE_ALL = "enumerate-all"
    SAMPLE = "sample"


@dataclass(frozen=True)
class ProtocolConfig:
    n_intermediate: int
    angles: tuple[float, ...]
    branch_policy: BranchPolicy = BranchPolicy.ALL_PLUS
    trials: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(t) for t in self.angles))
        object.__setattr__(self, "branch_policy", BranchPolicy(self.branch_policy))
        if self.n_intermediate < 1:
            raise ValueError(f"N must be >= 1, got {self.n_intermediate}")
        if len(self.angles) != self.n_intermediate:
            raise ValueError(
                f"expected {self.n_intermediate} angles, got {len(self.angles)}"
            )
        if not all(math.isfinite(t) for t in self.angles):
            raise ValueError("angles must be finite")
        if self.trials < 0:
            raise ValueError("trials must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def total_qubits(self) -> int:
        return self.n_intermediate + 2

    def to_dict(self) -> dict:
        return {
            "n": self.n_intermediate,
            "angles": list(self.angles),
            "branch_policy": self.branch_policy.value,
            "trials": self.trials,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class BranchOutcome:
    """One cascade history and the residual ``alpha|00> + beta|11>`` it leaves.

    A history of zero probability has no residual state; it is reported with
    ``alpha == beta == 0``.
    """

    signs: str
    probability: float
    alpha: float
    beta: float

    @property
    def state(self) -> PureState:
        if self.probability == 0.0:
            raise ValueError(f"branch {self.signs!r} has zero probability")
        return PureState(2, np.array([self.alpha, 0.0, 0.0, self.beta]))


@dataclass(frozen=True)
class PurificationResult:
    success_probability: float
    failure_probability: float
    success_state: PureState | None
    failure_state: PureState | None
    u: float
    swapped: bool
    # +1 for a phi+ type success state, -1 for phi-.
    relative_sign: int
    # Qubits (1, 2, aux) after the unitary, before the aux measurement.
    joint_state: PureState = field(repr=False)


@dataclass(frozen=True)
class EffectiveAngle:
    sin_theta: float
    cos_theta: float
    a: float


def prepare_ghz(total_qubits: int) -> PureState:
    """``(|0...0> + |1...1>)/sqrt(2)`` on ``total_qubits`` qubits."""
    if total_qubits < 2 or total_qubits > MAX_QUBITS:
        raise ValueError(f"GHZ size must be in 2..{MAX_QUBITS}, got {total_qubits}")
    amps = np.zeros(2**total_qubits, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return PureState(total_qubits, amps)


def measurement_basis(theta: float) -> np.ndarray:
    """Rows are the plus and minus basis vectors for angle ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def _branch_from_state(signs: str, probability: float, state: PureState | None) -> BranchOutcome:
    if state is None or probability == 0.0:
        return BranchOutcome(signs, 0.0, 0.0, 0.0)
    amps = state.amplitudes
    return BranchOutcome(signs, probability, float(amps[0].real), float(amps[3].real))


def cascade(config: ProtocolConfig, rng: np.random.Generator | None = None) -> list[BranchOutcome]:
    """Run the measurement cascade on the full state vector.

    ``all-plus`` returns the single all-plus history, ``enumerate-all`` every
    history in lexicographic order (``+`` before ``-``), and ``sample`` one
    history drawn by the Born rule from ``rng``.
    """
    angles = config.angles
    policy = config.branch_policy
    ghz = prepare_ghz(config.total_qubits)

    if policy is BranchPolicy.ENUMERATE_ALL:
        out: list[BranchOutcome] = []

        def walk(state: PureState | None, depth: int, prob: float, signs: str):
            if depth == len(angles):
                out.append(_branch_from_state(signs, prob, state))
                return
            if state is None:
                walk(None, depth + 1, 0.0, signs + "+")
                walk(None, depth + 1, 0.0, signs + "-")
                return
            split = measure_qubit(state, state.qubit_count, angles[depth])
            walk(split.plus_state, depth + 1, prob * split.plus_probability, signs + "+")
            walk(split.minus_state, depth + 1, prob * split.minus_probability, signs + "-")

        walk(ghz, 0, 1.0, "")
        return out

    if policy is BranchPolicy.SAMPLE and rng is None:
        raise ValueError("the sample policy needs a random generator")

    state: PureState | None = ghz
    prob = 1.0
    signs = ""
    for theta in angles:
        split = measure_qubit(state, state.qubit_count, theta)
        if policy is BranchPolicy.SAMPLE:
            plus = rng.random() < split.plus_probability
        else:
            plus = True
        if plus:
            prob *= split.plus_probability
            state, signs = split.plus_state, signs + "+"
        else:
            prob *= split.minus_probability
            state, signs = split.minus_state, signs + "-"
        if state is None:
            # Only reachable under all-plus when the history is impossible.
            signs += "+" * (len(angles) - len(signs))
            return [BranchOutcome(signs, 0.0, 0.0, 0.0)]
    return [_branch_from_state(signs, prob, state)]


def _check_signs(angles: Sequence[float], signs: str) -> None:
    if len(angles) != len(signs):
        raise ValueError(f"{len(angles)} angles but {len(signs)} signs")
    if set(signs) - {"+", "-"}:
        raise ValueError(f"signs must be '+' or '-', got {signs!r}")


def closed_form_branch(angles: Sequence[float], signs: str) -> BranchOutcome:
    """Branch coefficients from the product recurrence, no state vector involved."""
    _check_signs(angles, signs)
    alpha = beta = 1 / math.sqrt(2)
    for theta, sign in zip(angles, signs):
        c, s = math.cos(theta), math.sin(theta)
        if sign == "+":
            alpha, beta = alpha * c, beta * s
        else:
            alpha, beta = alpha * s, -beta * c
    prob = alpha * alpha + beta * beta
    if prob == 0.0:
        return BranchOutcome(signs, 0.0, 0.0, 0.0)
    norm = math.sqrt(prob)
    return BranchOutcome(signs, prob, alpha / norm, beta / norm)


def closed_form_table(angles: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized ``(alpha, beta)`` for all ``2**N`` histories at once.

    Entry ``k`` corresponds to the history whose j-th sign is the j-th most
    significant bit of ``k`` (0 for ``+``), i.e. lexicographic order.
    """
    alpha = np.array([1 / math.sqrt(2)])
    beta = np.array([1 / math.sqrt(2)])
    for theta in angles:
        c, s = math.cos(theta), math.sin(theta)
        alpha = np.stack([alpha * c, alpha * s], axis=1).reshape(-1)
        beta = np.stack([beta * s, -beta * c], axis=1).reshape(-1)
    return alpha, beta


def history_label(index: int, n: int) -> str:
    return format(index, f"0{n}b").replace("0", "+").replace("1", "-")


def u_parameter(angles: Sequence[float]) -> float:
    """Product of ``tan(theta_i)``."""
    u = 1.0
    for theta in angles:
        c = math.cos(theta)
        if abs(c) < TAN_POLE_ATOL:
            raise ValueError(f"tan pole at angle {theta!r}")
        u *= math.sin(theta) / c
    return u


def purification_unitary(u: float) -> np.ndarray:
    """4x4 purification unitary on (Alice's qubit, aux).

    Basis order ``|0,0>, |1,0>, |0,1>, |1,1>`` with Alice's qubit first.
    """
    if not -1e-12 <= u <= 1 + 1e-12:
        raise ValueError(f"u must lie in [0, 1], got {u!r}")
    u = min(max(u, 0.0), 1.0)
    r = math.sqrt(1.0 - u * u)
    return np.array(
        [
            [u, 0, r, 0],
            [0, 1, 0, 0],
            [0, 0, 0, -1],
            [r, 0, -u, 0],
        ],
        dtype=np.complex128,
    )


def purify(branch: BranchOutcome) -> PurificationResult:
    """Concentrate ``alpha|00> + beta|11>`` into a Bell pair with an aux qubit.

    When ``|beta| > |alpha|`` the unitary is applied with the computational
    labels of Alice's qubit exchanged (conjugated by X), which keeps ``u <= 1``.
    """
    a, b = abs(branch.alpha), abs(branch.beta)
    if a == 0.0 and b == 0.0:
        raise ValueError(f"branch {branch.signs!r} has no residual state")
    swapped = b > a
    u = a / b if swapped else b / a

    joint = branch.state.tensor(PureState(1, np.array([1.0, 0.0])))
    if swapped:
        joint = apply_single_qubit(joint, 1, PAULI_X)
    joint = apply_two_qubit(joint, 1, 3, purification_unitary(u))
    if swapped:
        joint = apply_single_qubit(joint, 1, PAULI_X)

    split = measure_qubit(joint, 3, 0.0)
    success = split.plus_state
    sign = 1
    if success is not None:
        amps = success.amplitudes
        sign = 1 if (amps[3] / amps[0]).real > 0 else -1
    return PurificationResult(
        success_probability=split.plus_probability,
        failure_probability=split.minus_probability,
        success_state=success,
        failure_state=split.minus_state,
        u=u,
        swapped=swapped,
        relative_sign=sign,
        joint_state=joint,
    )


def effective_angle(angles: Sequence[float]) -> EffectiveAngle:
    ps = math.prod(math.sin(t) for t in angles)
    pc = math.prod(math.cos(t) for t in angles)
    a = ps * ps + pc * pc
    if a == 0.0:
        raise ValueError("all-plus history has zero probability for these angles")
    root = math.sqrt(a)
    return EffectiveAngle(ps / root, pc / root, a)


def capacity_closed_form(angles: Sequence[float]) -> float:
    """Classical capacity in bits of the all-plus history.

    ``1 + 2*sin^2(theta)`` with the effective angle, i.e.
    ``1 + 2/(1 + prod(cot)^2)``.  When ``|prod sin| > |prod cos|`` the
    purification runs with labels swapped and the roles of sine and cosine
    exchange, so the value never exceeds 2.
    """
    eff = effective_angle(angles)
    return 1.0 + 2.0 * min(eff.sin_theta**2, eff.cos_theta**2)


def branch_capacity(branch: BranchOutcome) -> float:
    """``1 + 2*min(alpha^2, beta^2)``: 2 bits on success, 1 bit on failure."""
    return 1.0 + 2.0 * min(branch.alpha**2, branch.beta**2)
