"""Round reduction and round elimination for classical and quantum protocols."""
from __future__ import annotations

from .certificate import EliminationCertificate
from .classical import (
    EliminationRun,
    classical_round_eliminate,
    classical_round_reduce,
    stage1_marginal_check,
)
from .distributions import build_product_distribution, joint_grid, product_grid
from .minimax import minimax_weights
from .quantum import QuantumEliminationRun, quantum_round_eliminate, quantum_round_reduce


def round_reduce(p, g, d):
    """Dispatch to the classical or quantum single-round reduction."""
    from ..protocols import ClassicalProtocol
    if isinstance(p, ClassicalProtocol):
        return classical_round_reduce(p, g, d)
    q, cert, _ = quantum_round_reduce(p, g, d)
    return q, cert


def round_eliminate(p, g, n, **kw):
    from ..protocols import ClassicalProtocol
    if isinstance(p, ClassicalProtocol):
        return classical_round_eliminate(p, g, n, **kw)
    return quantum_round_eliminate(p, g, n, **kw)
