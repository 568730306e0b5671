"""Dense coding between two parties of an (N+2)-qubit GHZ channel.

Intermediate parties measure their qubits in rotated bases, Alice purifies
the residual pair with an auxiliary qubit, and the pair is then used for
Pauli-encoded dense coding.
"""
from .protocol import (
    BranchOutcome,
    BranchPolicy,
    ProtocolConfig,
    capacity_closed_form,
    cascade,
    closed_form_branch,
    purify,
)
from .analysis import CapacityReport, estimate_information, sweep

__version__ = "0.1.0"
