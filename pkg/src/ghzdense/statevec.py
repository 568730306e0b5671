"""Dense pure-state simulation engine.

Qubits are numbered from 1 and qubit 1 is the most significant bit of the
basis index, so ``|q1 q2 ... qn>`` lives at index ``sum(q_k * 2**(n-k))``.
Amplitudes are stored as ``complex128`` numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 26
UNITARY_ATOL = 1e-10
NORM_ATOL = 1e-10


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on ``qubit_count`` qubits.

    ``qubit_count == 0`` is allowed and denotes a bare phase, which is what
    remains after measuring the last qubit.
    """

    qubit_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.qubit_count,):
            raise ValueError(
                f"expected {2**self.qubit_count} amplitudes, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if amps.size == 0 or 2**n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self, other: "PureState") -> "PureState":
        """Kronecker product, ``self`` on the leading (most significant) qubits."""
        return PureState(
            self.qubit_count + other.qubit_count,
            np.kron(self.amplitudes, other.amplitudes),
        )


@dataclass(frozen=True)
class MeasurementSplit:
    """Both branches of a single-qubit projective measurement.

    A branch with zero probability carries ``None`` for its state.
    """

    plus_probability: float
    minus_probability: float
    plus_state: PureState | None
    minus_state: PureState | None


def _check_qubits(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n!r}")
    if n > MAX_QUBITS:
        raise ValueError(f"qubit count {n} exceeds supported maximum {MAX_QUBITS}")


def _check_index(state: PureState, q: int) -> None:
    if not 1 <= q <= state.qubit_count:
        raise IndexError(f"qubit {q} out of range 1..{state.qubit_count}")


def _as_unitary(u, dim: int) -> np.ndarray:
    m = np.asarray(u, dtype=np.complex128)
    if m.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    residual = np.max(np.abs(m.conj().T @ m - np.eye(dim)))
    if residual > UNITARY_ATOL:
        raise ValueError(f"matrix is not unitary (residual {residual:.3e})")
    return m


def basis_state(n: int, bits: str) -> PureState:
    """Computational basis state ``|bits>`` on ``n`` qubits."""
    _check_qubits(n)
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValueError(f"bits must be a length-{n} string of 0/1, got {bits!r}")
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return PureState(n, amps)


def apply_single_qubit(state: PureState, q: int, u) -> PureState:
    """Apply a 2x2 unitary to qubit ``q``."""
    _check_index(state, q)
    m = _as_unitary(u, 2)
    n = state.qubit_count
    # (high, target, low) view: qubit q is axis 1.
    psi = state.amplitudes.reshape(2 ** (q - 1), 2, 2 ** (n - q))
    out = np.einsum("ij,ajb->aib", m, psi)
    return PureState(n, out.reshape(-1))


def apply_two_qubit(state: PureState, q1: int, q2: int, u) -> PureState:
    """Apply a 4x4 unitary to the ordered pair ``(q1, q2)``.

    Rows and columns of ``u`` are ordered ``|00>, |10>, |01>, |11>`` where the
    first label is qubit ``q1`` and the second is ``q2``; equivalently the
    local index is ``b1 + 2*b2``.
    """
    _check_index(state, q1)
    _check_index(state, q2)
    if q1 == q2:
        raise ValueError("q1 and q2 must differ")
    m = _as_unitary(u, 4)
    n = state.qubit_count
    psi = state.amplitudes.reshape([2] * n)
    # Bring (q2, q1) to the front so the flattened pair index is b1 + 2*b2.
    psi = np.moveaxis(psi, (q2 - 1, q1 - 1), (0, 1)).reshape(4, -1)
    out = (m @ psi).reshape([2] * n)
    out = np.moveaxis(out, (0, 1), (q2 - 1, q1 - 1))
    return PureState(n, np.ascontiguousarray(out).reshape(-1))


def measure_qubit(state: PureState, q: int, theta: float) -> MeasurementSplit:
    """Project qubit ``q`` on ``cos|0>+sin|1>`` (plus) and ``sin|0>-cos|1>`` (minus).

    The measured qubit is removed from both post-measurement states; measuring
    a single-qubit state leaves a zero-qubit scalar state.
    """
    _check_index(state, q)
    n = state.qubit_count
    c, s = np.cos(theta), np.sin(theta)
    psi = state.amplitudes.reshape(2 ** (q - 1), 2, 2 ** (n - q))
    zero, one = psi[:, 0, :], psi[:, 1, :]
    # Basis vectors are real, so <+| = (c, s) and <-| = (s, -c).
    plus = (c * zero + s * one).reshape(-1)
    minus = (s * zero - c * one).reshape(-1)
    p_plus = float(np.vdot(plus, plus).real)
    p_minus = float(np.vdot(minus, minus).real)
    total = p_plus + p_minus
    p_plus, p_minus = p_plus / total, p_minus / total

    def _post(vec, p):
        if p <= 0.0:
            return None
        nrm = np.linalg.norm(vec)
        if nrm == 0.0:
            return None
        return PureState(n - 1, vec / nrm)

    return MeasurementSplit(p_plus, p_minus, _post(plus, p_plus), _post(minus, p_minus))


def inner_product(a: PureState, b: PureState) -> complex:
    """``<a|b>``."""
    if a.qubit_count != b.qubit_count:
        raise ValueError(
            f"dimension mismatch: {a.qubit_count} vs {b.qubit_count} qubits"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def equal_up_to_phase(a: PureState, b: PureState, atol: float = 1e-10) -> bool:
    """True when ``a`` and ``b`` differ only by a global phase."""
    if a.qubit_count != b.qubit_count:
        return False
    return abs(abs(inner_product(a, b)) - 1.0) <= atol
