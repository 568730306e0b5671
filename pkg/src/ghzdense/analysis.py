"""Entanglement metrics, Monte Carlo information estimates and sweeps."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import densecoding as dc
from .protocol import (
    BranchOutcome,
    BranchPolicy,
    ProtocolConfig,
    PurificationResult,
    branch_capacity,
    capacity_closed_form,
    cascade,
    closed_form_branch,
    closed_form_table,
    effective_angle,
    history_label,
    purify,
)
from .statevec import PureState

BOOTSTRAP_RESAMPLES = 200
MAX_ENUMERATION_N = 20
MAX_PER_BRANCH_N = 12
MAX_STATEVECTOR_N = 24
THREADS_ENV = "GHZDENSE_THREADS"

_TRIAL_STREAM = 0
_BOOTSTRAP_STREAM = 1


def concurrence(state: PureState) -> float:
    """Pure-state concurrence ``2|a00*a11 - a01*a10|``."""
    if state.qubit_count != 2:
        raise ValueError(f"concurrence needs a 2-qubit state, got {state.qubit_count}")
    a = state.amplitudes
    return float(min(2.0 * abs(a[0] * a[3] - a[1] * a[2]), 1.0))


def trial_rng(seed: int, k: int) -> np.random.Generator:
    """Independent stream for trial ``k``; a pure function of ``(seed, k)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_TRIAL_STREAM, k)))


def bootstrap_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_BOOTSTRAP_STREAM, r)))


@dataclass(frozen=True)
class TrialRecord:
    branch_signs: str
    aux_success: bool
    message_sent: dc.PauliMessage
    outcome: dc.BellOutcome
    message_decoded: dc.PauliMessage


@dataclass(frozen=True)
class CapacityReport:
    config: ProtocolConfig
    closed_form: float
    success_probability: float
    branch_average: float | None
    per_branch: dict[str, tuple[float, float]] | None = None
    monte_carlo_estimate: float | None = None
    standard_error: float | None = None
    trials: int = 0
    accepted_trials: int = 0
    empirical_success_rate: float | None = None
    decode_accuracy: float | None = None

    def to_dict(self) -> dict:
        out = {
            "config": self.config.to_dict(),
            "closed_form_bits": self.closed_form,
            "branch_average_bits": self.branch_average,
            "monte_carlo_bits": self.monte_carlo_estimate,
            "standard_error_bits": self.standard_error,
            "success_probability": self.success_probability,
            "trials": self.trials,
            "accepted_trials": self.accepted_trials,
            "empirical_success_rate": self.empirical_success_rate,
            "decode_accuracy": self.decode_accuracy,
        }
        if self.per_branch is not None:
            out["per_branch"] = {
                signs: {"probability": p, "capacity_bits": c}
                for signs, (p, c) in self.per_branch.items()
            }
        return out


class _TrialKernel:
    """Everything after the cascade, with per-channel tables precomputed.

    Encoding and Bell probabilities depend only on the purified pair and the
    message, so they are evaluated once per channel instead of per trial.
    """

    def __init__(self, branch: BranchOutcome, purified: PurificationResult):
        self.branch = branch
        self.success_probability = purified.success_probability
        self.probs = {}
        self.decoded = {}
        for success, pair in ((True, purified.success_state), (False, purified.failure_state)):
            if pair is None:
                continue
            self.probs[success] = [
                dc.bell_probabilities(dc.encode(m, pair)).tolist() for m in dc.PauliMessage
            ]
            channel = (
                dc.ChannelDescriptor("bell", purified.relative_sign)
                if success
                else dc.ChannelDescriptor("product")
            )
            self.decoded[success] = [dc.decode(k, channel) for k in dc.BellOutcome]

    def run(self, rng: np.random.Generator) -> tuple[bool, int, int, int]:
        # One draw per trial: aux outcome, message, Bell outcome.
        u_aux, u_msg, u_bell = rng.random(3).tolist()
        success = u_aux < self.success_probability
        message = min(int(u_msg * 4), 3)
        outcome = dc.sample_outcome(self.probs[success][message], u_bell)
        return success, message, outcome, int(self.decoded[success][outcome])


def _draw_branch(config: ProtocolConfig, rng: np.random.Generator) -> BranchOutcome:
    if config.branch_policy is BranchPolicy.ALL_PLUS:
        return closed_form_branch(config.angles, "+" * config.n_intermediate)
    if config.n_intermediate > MAX_STATEVECTOR_N:
        raise ValueError(f"state-vector cascade is capped at N={MAX_STATEVECTOR_N}")
    return cascade(replace(config, branch_policy=BranchPolicy.SAMPLE), rng)[0]


def run_trial(config: ProtocolConfig, rng: np.random.Generator) -> TrialRecord:
    """One use of the channel: cascade, purify, encode, Bell-measure, decode.

    Under ``all-plus`` the collapsed pair is prepared directly from the
    closed-form coefficients; the other policies sample the state-vector
    cascade.
    """
    branch = _draw_branch(config, rng)
    success, message, outcome, decoded = _TrialKernel(branch, purify(branch)).run(rng)
    return TrialRecord(
        branch.signs,
        success,
        dc.PauliMessage(message),
        dc.BellOutcome(outcome),
        dc.PauliMessage(decoded),
    )


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _run_block(config, start, stop, rejection, kernel):
    """Trials ``start..stop-1``; returns (accepted, aux, message, outcome, correct)."""
    size = stop - start
    accepted = np.zeros(size, dtype=bool)
    aux = np.zeros(size, dtype=bool)
    msg = np.zeros(size, dtype=np.int8)
    out = np.zeros(size, dtype=np.int8)
    ok = np.zeros(size, dtype=bool)
    all_plus = "+" * config.n_intermediate
    sample_cfg = replace(config, branch_policy=BranchPolicy.SAMPLE)
    for i, k in enumerate(range(start, stop)):
        rng = trial_rng(config.seed, k)
        if rejection:
            branch = cascade(sample_cfg, rng)[0]
            if branch.signs != all_plus:
                continue
        accepted[i] = True
        aux[i], msg[i], out[i], decoded = kernel.run(rng)
        ok[i] = decoded == msg[i]
    return accepted, aux, msg, out, ok


def _empirical_conditional(counts: np.ndarray) -> np.ndarray:
    """Row-normalize a 4x4 count table; unseen messages get the pooled row."""
    rows = counts.sum(axis=1, keepdims=True)
    pooled = counts.sum(axis=0)
    pooled = pooled / pooled.sum() if pooled.sum() else np.full(4, 0.25)
    return np.where(rows > 0, counts / np.maximum(rows, 1), pooled)


def _estimate(codes: np.ndarray, mi_failure_exact: float | None) -> float:
    """Information estimate from trial codes ``aux*16 + msg*4 + outcome``."""
    counts = np.bincount(codes, minlength=32).reshape(2, 4, 4).astype(float)
    total = counts.sum()
    per_aux = counts.sum(axis=(1, 2))
    p_success = per_aux[1] / total
    mi_s = dc.mutual_information(_empirical_conditional(counts[1])) if per_aux[1] else 0.0
    if mi_failure_exact is not None:
        mi_f = mi_failure_exact
    else:
        mi_f = dc.mutual_information(_empirical_conditional(counts[0])) if per_aux[0] else 0.0
    return p_success * mi_s + (1 - p_success) * mi_f


def estimate_information(
    config: ProtocolConfig,
    *,
    rejection: bool = False,
    fully_empirical: bool = False,
    threads: int | None = None,
) -> CapacityReport:
    """Closed-form, branch-averaged and Monte Carlo capacity of a configuration.

    Trials are conditioned on the all-plus history.  By default the collapsed
    pair is prepared directly; ``rejection=True`` runs the sampled state-vector
    cascade for every trial and discards other histories.  The failure-branch
    information is exact unless ``fully_empirical`` is set.  The standard error
    comes from a bootstrap over the accepted trials.
    """
    n = config.n_intermediate
    angles = config.angles
    all_plus = closed_form_branch(angles, "+" * n)
    closed = capacity_closed_form(angles)
    eff = effective_angle(angles)
    success_p = 2.0 * min(eff.sin_theta**2, eff.cos_theta**2)
    branch_avg = branch_average_capacity(angles) if n <= MAX_ENUMERATION_N else None
    per_branch = None
    if config.branch_policy is BranchPolicy.ENUMERATE_ALL and n <= MAX_PER_BRANCH_N:
        per_branch = per_branch_capacities(angles)

    report = CapacityReport(
        config=config,
        closed_form=closed,
        success_probability=success_p,
        branch_average=branch_avg,
        per_branch=per_branch,
        trials=config.trials,
    )
    if config.trials == 0:
        return report
    if rejection and n > MAX_STATEVECTOR_N:
        raise ValueError(f"rejection sampling is capped at N={MAX_STATEVECTOR_N}")

    purified = purify(all_plus)
    kernel = _TrialKernel(all_plus, purified)
    workers = threads or _thread_count()
    bounds = np.linspace(0, config.trials, workers + 1).astype(int)
    blocks = list(zip(bounds[:-1], bounds[1:]))
    if workers == 1:
        parts = [_run_block(config, a, b, rejection, kernel) for a, b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _run_block(config, ab[0], ab[1], rejection, kernel), blocks))
    accepted, aux, msg, out, ok = (np.concatenate(cols) for cols in zip(*parts))

    m = int(accepted.sum())
    if m == 0:
        raise RuntimeError(
            f"no trial out of {config.trials} landed in the all-plus history"
        )
    codes = (aux[accepted].astype(np.int64) * 16 + msg[accepted] * 4 + out[accepted]).astype(np.int64)

    mi_f_exact = None
    if not fully_empirical:
        if purified.failure_state is not None:
            mi_f_exact = dc.mutual_information(dc.conditional_distribution(purified.failure_state))
        else:
            mi_f_exact = 0.0
    estimate = _estimate(codes, mi_f_exact)

    boot = np.empty(BOOTSTRAP_RESAMPLES)
    for r in range(BOOTSTRAP_RESAMPLES):
        idx = bootstrap_rng(config.seed, r).integers(0, m, m)
        boot[r] = _estimate(codes[idx], mi_f_exact)
    stderr = float(boot.std(ddof=1))

    return replace(
        report,
        monte_carlo_estimate=float(estimate),
        standard_error=stderr,
        accepted_trials=m,
        empirical_success_rate=float(aux[accepted].mean()),
        decode_accuracy=float(ok[accepted].mean()),
    )


def per_branch_capacities(angles: Sequence[float]) -> dict[str, tuple[float, float]]:
    """``signs -> (probability, capacity)`` for every history."""
    n = len(angles)
    return {
        history_label(k, n): (b.probability, branch_capacity(b) if b.probability else 1.0)
        for k, b in enumerate(closed_form_branch(angles, history_label(k, n)) for k in range(2**n))
    }


def branch_average_capacity(angles: Sequence[float]) -> float:
    """Capacity averaged over all ``2**N`` cascade histories."""
    if len(angles) > MAX_ENUMERATION_N:
        raise ValueError(f"branch enumeration is limited to N <= {MAX_ENUMERATION_N}")
    alpha, beta = closed_form_table(angles)
    a2, b2 = alpha**2, beta**2
    prob = a2 + b2
    # prob * (1 + 2*min/prob), written so zero-probability histories drop out.
    weighted = prob + 2.0 * np.minimum(a2, b2)
    return float(weighted.sum() / prob.sum())


def sweep(
    base: ProtocolConfig,
    vary: str,
    grid: Iterable,
    **estimate_kwargs,
) -> list[CapacityReport]:
    """One report per grid value.

    ``vary="N"`` uses ``base.angles[0]`` as the common angle for every party;
    ``vary="common-angle"`` keeps ``base.n_intermediate`` and sets every angle
    to the grid value.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    reports = []
    for value in grid:
        if vary == "N":
            n = int(value)
            if n != value or n < 1:
                raise ValueError(f"N grid values must be positive integers, got {value!r}")
            cfg = replace(base, n_intermediate=n, angles=(base.angles[0],) * n)
        elif vary == "common-angle":
            theta = float(value)
            if not math.isfinite(theta):
                raise ValueError(f"angle grid values must be finite, got {value!r}")
            cfg = replace(base, angles=(theta,) * base.n_intermediate)
        else:
            raise ValueError(f"unknown sweep variable {vary!r}")
        reports.append(estimate_information(cfg, **estimate_kwargs))
    return reports
