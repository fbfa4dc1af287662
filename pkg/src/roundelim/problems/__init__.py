"""Concrete games, reductions, cell probe compilation, hashing and bound tracers."""
from __future__ import annotations

from .cellprobe import (
    ClassicalCellProbeScheme,
    QuantumCellProbeScheme,
    binary_search_scheme,
    check_address_only,
    compile_audit,
    compile_cellprobe,
    embed_classical_scheme,
    grover_scheme,
    leaky_scheme,
    marked_cell_game,
    predecessor_game,
    scheme_errors,
)
from .fks import FksRankTable, fks_audit, fks_build, fks_query, fks_query_all
from .gt_protocol import communication_audit, gt_layout, gt_protocol
from .rank_parity import gt_answer, gt_self_reduce, par_answer, par_reduce_A, par_reduce_B, rank
from .tracers import gt_threshold, min_m_exp, trace_gt_bound, trace_predecessor_bound
