"""Invariant checks run by ``ghzdense verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import densecoding as dc
from .analysis import MAX_STATEVECTOR_N, concurrence
from .protocol import (
    BranchPolicy,
    ProtocolConfig,
    branch_capacity,
    capacity_closed_form,
    cascade,
    closed_form_branch,
    closed_form_table,
    effective_angle,
    purify,
)

# State-vector enumeration visits 2**N leaves; beyond this only the sampled
# all-plus path is cross-checked.
MAX_ENUMERATED_CHECK_N = 12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _same_up_to_sign(x: Sequence[float], y: Sequence[float], atol: float) -> bool:
    x, y = np.asarray(x), np.asarray(y)
    return bool(np.allclose(x, y, atol=atol, rtol=0) or np.allclose(x, -y, atol=atol, rtol=0))


def check_oracle_equivalence(angles: Sequence[float], atol: float = 1e-10) -> CheckResult:
    n = len(angles)
    policy = BranchPolicy.ENUMERATE_ALL if n <= MAX_ENUMERATED_CHECK_N else BranchPolicy.ALL_PLUS
    branches = cascade(ProtocolConfig(n, tuple(angles), policy))
    worst = 0.0
    for b in branches:
        ref = closed_form_branch(angles, b.signs)
        worst = max(worst, abs(b.probability - ref.probability))
        if not _same_up_to_sign((b.alpha, b.beta), (ref.alpha, ref.beta), atol):
            return CheckResult("oracle_equivalence", False, f"coefficients differ on {b.signs}")
    ok = worst <= atol
    return CheckResult(
        "oracle_equivalence", ok, f"{len(branches)} branches, max |dp| = {worst:.2e}"
    )


def check_probability_sum(angles: Sequence[float], atol: float = 1e-10) -> CheckResult:
    alpha, beta = closed_form_table(angles)
    total = float(np.sum(alpha**2 + beta**2))
    return CheckResult(
        "branch_probability_sum", abs(total - 1.0) <= atol, f"sum = {total!r}"
    )


def check_purification(angles: Sequence[float], atol: float = 1e-12) -> CheckResult:
    """Output amplitudes of the all-plus purification against the effective angle."""
    branch = closed_form_branch(angles, "+" * len(angles))
    result = purify(branch)
    eff = effective_angle(angles)
    s, c = eff.sin_theta, eff.cos_theta
    expected = np.zeros(8)
    if not result.swapped:
        # sin on |000> and |110>, cos*sqrt(1 - tan^2) on |101>.
        expected[0b000] = math.copysign(abs(s), c)
        expected[0b110] = s
        expected[0b101] = c * math.sqrt(max(1.0 - (s / c) ** 2, 0.0))
    else:
        # Alice's labels exchanged: sine and cosine trade roles, failure on |011>.
        expected[0b000] = c
        expected[0b110] = math.copysign(abs(c), s)
        expected[0b011] = s * math.sqrt(max(1.0 - (c / s) ** 2, 0.0))
    amp_err = float(np.max(np.abs(result.joint_state.amplitudes - expected)))
    p_err = abs(result.success_probability - 2 * min(s * s, c * c))
    conc = concurrence(result.success_state) if result.success_state is not None else 1.0
    ok = amp_err <= atol and p_err <= atol and abs(conc - 1.0) <= 1e-10
    return CheckResult(
        "purification_output",
        ok,
        f"amplitude err {amp_err:.2e}, success prob err {p_err:.2e}, concurrence {conc:.12f}",
    )


def check_capacity_decomposition(angles: Sequence[float], atol: float = 1e-12) -> CheckResult:
    result = purify(closed_form_branch(angles, "+" * len(angles)))
    lhs = capacity_closed_form(angles)
    rhs = 2 * result.success_probability + 1 * result.failure_probability
    return CheckResult(
        "capacity_decomposition", abs(lhs - rhs) <= atol, f"C = {lhs!r}, 2p + (1-p) = {rhs!r}"
    )


def check_branch_capacity(angles: Sequence[float], atol: float = 1e-12) -> CheckResult:
    branch = closed_form_branch(angles, "+" * len(angles))
    lhs, rhs = capacity_closed_form(angles), branch_capacity(branch)
    return CheckResult("all_plus_branch_capacity", abs(lhs - rhs) <= atol, f"{lhs!r} vs {rhs!r}")


def check_codec_round_trip() -> CheckResult:
    for sign in (1, -1):
        channel = dc.ChannelDescriptor("bell", sign)
        pair = dc.channel_state(channel)
        for m in dc.PauliMessage:
            probs = dc.bell_probabilities(dc.encode(m, pair))
            k = int(np.argmax(probs))
            if abs(probs[k] - 1.0) > 1e-12 or dc.decode(dc.BellOutcome(k), channel) != m:
                return CheckResult("codec_round_trip", False, f"sign {sign}, message {m.name}")
    return CheckResult("codec_round_trip", True, "8/8 message-channel pairs decoded")


def run_all(angles: Sequence[float]) -> list[CheckResult]:
    if len(angles) > MAX_STATEVECTOR_N:
        raise ValueError(f"verification uses the state vector, capped at N={MAX_STATEVECTOR_N}")
    return [
        check_oracle_equivalence(angles),
        check_probability_sum(angles),
        check_purification(angles),
        check_capacity_decomposition(angles),
        check_branch_capacity(angles),
        check_codec_round_trip(),
    ]
