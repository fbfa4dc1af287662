from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roundelim.elimination import (
    build_product_distribution,
    classical_round_reduce,
    joint_grid,
    minimax_weights,
    product_grid,
    quantum_round_reduce,
    round_reduce,
    stage1_marginal_check,
)
from roundelim.info import JointDistribution
from roundelim.lab.generators import case_rng, random_classical_case, random_quantum_protocol
from roundelim.lab.suites import index_elimination
from roundelim.protocols.classical import Signature, deterministic, distributional_error
from roundelim.protocols.games import equality_game, random_game
from roundelim.protocols.quantum import eval_quantum


def send_x():
    g = equality_game(1)
    p = deterministic(g.E, g.F, "A", (1,), [lambda x, tr: str(x)], lambda y, tr: int(int(tr[0]) == y))
    return g, p, JointDistribution.uniform(g.domain)


def test_reduce_send_x_frozen():
    g, p, d = send_x()
    q, cert = classical_round_reduce(p, g, d)
    assert q.signature == Signature(0, 0, (), "B")
    assert cert.eps_before == 0 and cert.eps_after == F(1, 2)
    assert cert.information == pytest.approx(1.0, abs=1e-12)
    # 0 + 1/2 sqrt(2 ln 2)
    assert cert.bound == pytest.approx(0.5 * math.sqrt(2 * math.log(2)), abs=1e-12)
    assert cert.bound == pytest.approx(0.588705011258, abs=1e-12)
    assert cert.ok and stage1_marginal_check(p, q)


def test_reduce_dispatches_on_protocol_kind():
    g, p, d = send_x()
    q, cert = round_reduce(p, g, d)
    assert cert.kind.startswith("classical")


def test_reduce_rejects_bob_start_and_empty():
    g, p, d = send_x()
    silent = deterministic(g.E, g.F, "A", (), [], lambda y, tr: 1)
    with pytest.raises(ValueError):
        classical_round_reduce(silent, g, d)
    bob = deterministic(g.E, g.F, "B", (1,), [lambda y, tr: str(y)], lambda x, tr: 1)
    with pytest.raises(ValueError):
        classical_round_reduce(bob, g, d)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_reduce_bound_holds_on_random_protocols(seed, zero_info):
    rng = np.random.default_rng(seed)
    g, p, d = random_classical_case(rng, zero_information=zero_info)
    q, cert = classical_round_reduce(p, g, d)
    assert cert.shape_ok
    assert float(cert.eps_after) <= cert.bound + 1e-7
    assert cert.eps_after == distributional_error(q, g, d)
    assert stage1_marginal_check(p, q)
    if zero_info:
        assert cert.information == pytest.approx(0.0, abs=1e-12)
        assert float(cert.eps_after) <= float(cert.eps_before) + 1e-12


def test_product_distribution_support_counts():
    d = JointDistribution.uniform(equality_game(1).domain)
    dn = build_product_distribution(d, 2)
    assert len(dn) == 16
    assert sum(w for *_, w in dn) == 1
    assert len(build_product_distribution(d, 2, keep_all_y=True)) == 32
    with pytest.raises(ValueError):
        build_product_distribution(d, 12, cap=1000)


def test_grids():
    g = equality_game(1)
    assert len(joint_grid(g, F(1, 2))) == math.comb(2 + 3, 3)
    for d in product_grid(g, F(1, 4)):
        assert sum(w for *_, w in d) == 1


def test_minimax_lp():
    w, v = minimax_weights([[1, 0], [0, 1]])
    assert w == [F(1, 2), F(1, 2)] and v == pytest.approx(0.5)
    w, v = minimax_weights([[0.2, 0.3], [0.5, 0.9]])
    assert w == [1, 0] and v == pytest.approx(0.3)
    assert sum(w) == 1


def test_classical_eliminate_index_frozen():
    run, _ = index_elimination(True)
    c = run.certificate
    assert c.before == Signature(1, 0, (1,), "A")
    assert c.after == Signature(0, 0, (), "B") and c.shape_ok
    assert c.eps_before == F(3, 8)
    assert c.eps_after == F(1, 2)
    # 3/8 + 1/2 sqrt(2 * 1 * ln2 / 4)
    assert c.bound == pytest.approx(3 / 8 + 0.5 * math.sqrt(2 * math.log(2) / 4), abs=1e-12)
    assert c.bound == pytest.approx(0.669352505629, abs=1e-12)
    assert c.ok
    assert sum(run.weights) == 1


def test_quantum_reduce_random_protocols():
    for k in range(4):
        rng = case_rng(11, k)
        t = 1 + k % 3
        p = random_quantum_protocol(rng, t, 2, 2, 1, k % 2)
        g = random_game(rng, len(p.E), len(p.F))
        d = JointDistribution.uniform(g.domain)
        q, cert, parts = quantum_round_reduce(p, g, d)
        assert cert.shape_ok
        assert q.signature == p.signature.eliminated()
        assert float(cert.eps_after) <= cert.bound + 1e-7
        errs = eval_quantum(q, g).per_pair
        exact = sum(float(w) * errs[(x, y)] for x, y, w in d)
        assert exact == pytest.approx(float(cert.eps_after), abs=1e-9)


def test_quantum_eliminate_index_frozen():
    run, _ = index_elimination(False)
    c = run.certificate
    assert c.before == Signature(1, 0, (1,), "A")
    assert c.after == Signature(0, 1, (), "B")
    assert float(c.eps_before) == pytest.approx(0.375, abs=1e-9)
    assert float(c.eps_after) == pytest.approx(0.5, abs=1e-9)
    # 3/8 + (4 * 1 * ln2 / 4)^(1/4)
    assert c.bound == pytest.approx(0.375 + math.log(2) ** 0.25, abs=1e-12)
    assert c.bound == pytest.approx(1.28744430578, abs=1e-10)
    assert c.ok
