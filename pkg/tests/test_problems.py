from __future__ import annotations

import math
from fractions import Fraction as F
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roundelim.problems import (
    binary_search_scheme,
    check_address_only,
    communication_audit,
    compile_audit,
    compile_cellprobe,
    embed_classical_scheme,
    fks_audit,
    fks_build,
    fks_query,
    fks_query_all,
    grover_scheme,
    gt_answer,
    gt_layout,
    gt_protocol,
    gt_self_reduce,
    gt_threshold,
    leaky_scheme,
    marked_cell_game,
    min_m_exp,
    par_answer,
    par_reduce_A,
    par_reduce_B,
    predecessor_game,
    rank,
    scheme_errors,
    trace_gt_bound,
    trace_predecessor_bound,
)
from roundelim.problems.rank_parity import EVEN, ODD, block_parities
from roundelim.problems.tracers import integer_root, rational_root
from roundelim.protocols.classical import Signature, eval_classical
from roundelim.protocols.games import greater_than_game
from roundelim.protocols.quantum import eval_quantum, verify_secure

bits = lambda w: st.integers(0, 2**w - 1).map(lambda v: format(v, f"0{w}b"))


def test_rank_and_parity():
    S = {"001", "011", "110"}
    assert rank("011", S) == 2 and par_answer("011", S) == EVEN
    assert rank("111", S) == 3 and par_answer("111", S) == ODD
    assert par_answer("000", S) == EVEN
    with pytest.raises(ValueError):
        par_answer("000", S, q=2)
    with pytest.raises(ValueError):
        rank("01", {"001"})


@settings(max_examples=200, deadline=None)
@given(st.lists(bits(3), min_size=2, max_size=2), st.sets(bits(3), max_size=4), st.integers(1, 2))
def test_reduce_A_preserves_answer(xs, S, i):
    xh, sh = par_reduce_A(xs, S, i, 6, 2)
    assert len(xh) == 6 and len(sh) == len(S)
    assert par_answer(xh, sh) == par_answer(xs[i - 1], S)


@settings(max_examples=200, deadline=None)
@given(bits(3), st.integers(1, 4), st.lists(st.sets(bits(3), max_size=1), min_size=4, max_size=4))
def test_reduce_B_preserves_answer(x, i, sets):
    xh, sh, audit = par_reduce_B(x, i, sets, 6, 4, 4)
    assert par_answer(xh, sh) == par_answer(x, sets[i - 1])
    assert all(c % 2 == 0 for c in block_parities(sh, 6, 4))
    assert audit.padded_blocks == sum(len(s) % 2 for s in sets)


def test_reduce_B_size_audit_flags_odd_blocks():
    _, sh, audit = par_reduce_B("00", 1, [{"00"}, {"01"}], 4, 2, 2)
    assert audit.size == 4 and audit.exceeds
    _, sh, audit = par_reduce_B("00", 1, [{"00", "11"}, set()], 4, 4, 2)
    assert not audit.exceeds


@settings(max_examples=200, deadline=None)
@given(st.lists(bits(2), min_size=4, max_size=4), bits(2), st.integers(1, 4))
def test_gt_self_reduce(xs, y, i):
    xt, yt = gt_self_reduce(xs, y, i, 8, 4)
    assert gt_answer(xt, yt) == gt_answer(xs[i - 1], y)


def test_gt_protocol_layout_and_audit():
    lay = gt_layout(16, 2)
    assert (lay.b, lay.k) == (4, 7)
    a1, a2 = communication_audit(16, 1), communication_audit(16, 2)
    assert a1.bits == 16 and a2.bits == 23
    assert a1.ok and a2.ok
    assert a2.limit == pytest.approx(4 * 2 * 4 * math.ceil(math.log2(96)))
    assert gt_layout(16, 3).hashed(1) and not gt_layout(16, 2).hashed(1)
    with pytest.raises(ValueError):
        gt_layout(16, 5)


def test_gt_protocol_exact_small():
    g = greater_than_game(4)
    rep = eval_classical(gt_protocol(4, 2), g)
    assert rep.eps_worst <= F(1, 3)
    # equal inputs are always answered correctly
    assert all(rep.per_pair[(x, x)] == 0 for x in range(16))
    # one-bit fingerprints: an unlucky pair fails half the time
    assert eval_classical(gt_protocol(4, 2, fingerprint_bits=1), g).eps_worst == F(1, 2)


def test_gt_protocol_deterministic_when_blocks_fit():
    p = gt_protocol(16, 2)
    rng = np.random.default_rng(3)
    from roundelim.protocols.classical import sample_run
    for x, y in rng.integers(0, 1 << 16, size=(200, 2)):
        _, ans = sample_run(p, int(x), int(y), rng)
        assert ans == int(x > y)


def test_fks_example():
    tab = fks_build({2, 5, 9}, 16)
    assert fks_query(tab, 5) == (2, fks_query(tab, 5)[1])
    assert fks_query(tab, 9)[0] == 3 and fks_query(tab, 7)[0] is None
    assert max(fks_query(tab, x)[1] for x in range(16)) <= 3
    assert fks_audit(tab, {2, 5, 9}).ok


def test_fks_vectorised_matches_scalar():
    for S in [(), (0,), (1, 2, 3, 4), (0, 7, 31, 63)]:
        tab = fks_build(S, 64)
        ranks, probes = fks_query_all(tab)
        for x in range(64):
            r, pr = fks_query(tab, x)
            assert ranks[x] == (r or 0) and probes[x] == pr


def test_fks_exhaustive_small_universe():
    for r in range(5):
        for S in combinations(range(16), r):
            tab = fks_build(S, 16)
            ranks, probes = fks_query_all(tab)
            expected = [sorted(S).index(x) + 1 if x in S else 0 for x in range(16)]
            assert list(ranks) == expected and probes.max() <= 3
            assert fks_audit(tab, S).ok


def test_fks_audit_catches_tampering():
    tab = fks_build({1, 4}, 16)
    cells = list(tab.cells)
    k = next(j for j, c in enumerate(cells) if isinstance(c, tuple) and len(c) == 2 and c[0] == 4)
    cells[k] = (4, 99)
    bad = type(tab)(tab.m, tab.n, tuple(cells))
    assert not fks_audit(bad, {1, 4}).ok


def test_binary_search_compiles_exactly():
    s = binary_search_scheme()
    g = predecessor_game(s)
    assert max(scheme_errors(s, g).values()) == 0
    p = compile_cellprobe(s, g)
    assert p.signature == Signature(4, 0, (2, 4, 2, 4), "A")
    assert eval_classical(p, g).eps_worst == 0
    audit = compile_audit(s, g, p)
    assert audit.ok and audit.lengths == audit.expected


def test_grover_compiles_to_small_protocol():
    s = grover_scheme()
    g = marked_cell_game()
    chk = check_address_only(s)
    assert chk.ok and chk.residual <= 1e-9
    minus = np.array([1, -1]) / math.sqrt(2)
    assert abs(abs(np.vdot(minus, chk.states[0])) - 1) <= 1e-9
    p = compile_cellprobe(s, g)
    assert p.signature == Signature(2, 0, (2, 3), "A")
    assert max(eval_quantum(p, g).per_pair.values()) <= 1e-9
    assert verify_secure(p).ok


def test_reversible_scheme_and_leak_rejection():
    s = embed_classical_scheme(binary_search_scheme())
    assert check_address_only(s).ok
    assert max(scheme_errors(s, predecessor_game(binary_search_scheme())).values()) <= 1e-9
    leaky = leaky_scheme()
    assert check_address_only(leaky).residual > 0.5
    with pytest.raises(ValueError):
        compile_cellprobe(leaky)


def test_integer_roots():
    assert integer_root(6**4, 4) == 6 and integer_root(17, 4) is None
    assert rational_root(F(1, 81), 4) == F(1, 3)


@pytest.mark.parametrize("ls", [(1,), (3,), (1, 1), (2, 1), (1, 1, 1), (4, 2, 3)])
def test_gt_tracer(ls):
    n = gt_threshold(ls)
    tr = trace_gt_bound(n, ls)
    assert tr.eps_final == F(1, 2) and tr.n_final >= 1 and tr.contradiction
    for s in tr.stages:
        assert s.increment == F(1, 6 * len(ls))
    assert trace_gt_bound(n - 1, ls).failure_stage == "precondition"
    assert tr.to_csv().splitlines()[0] == "stage,n_i,k_i,eps_exact,eps_decimal,n_real,rounding"


def test_predecessor_tracer():
    delta = F(1, 3) - F(1, 100)
    me = min_m_exp()
    assert me == 1158131
    tr = trace_predecessor_bound(me, 1, 1, delta)
    assert tr.t == 1
    assert tr.eps_final == delta + F(1, 6) == tr.expected_final
    assert tr.eps_final < F(1, 2) and tr.contradiction
    with pytest.raises(ValueError):
        trace_predecessor_bound(me - 1, 1, 1, delta)
    short = trace_predecessor_bound(16, 1, 1, delta, t=3)
    assert short.collapse_stage == 1 and not short.contradiction
