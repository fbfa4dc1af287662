from __future__ import annotations

import math
from fractions import Fraction as F

import numpy as np
import pytest

from roundelim.info import (
    Encoding,
    JointDistribution,
    average_encoding_gap,
    cq_state,
    encoding_mutual_information,
    measurement_distance_check,
    mutual_information,
    shannon_entropy,
    total_variation,
    verify_information_identities,
    von_neumann_entropy,
)
from roundelim.lab.generators import (
    case_rng,
    qubit_layout,
    random_classical_encoding,
    random_density,
    random_pure,
    random_quantum_encoding,
    random_unitary,
)
from roundelim.tensor import DensityMatrix, PureState, trace_norm

ONE = qubit_layout([1], ["M"])
H_3_4 = 0.811278124459  # binary entropy of 3/4


def ket(v):
    v = np.asarray(v, dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()), ONE)


def test_shannon_entropy():
    assert shannon_entropy([F(1)]) == 0
    assert shannon_entropy([F(1, 2), F(1, 2)]) == pytest.approx(1)
    assert shannon_entropy([F(3, 4), F(1, 4)]) == pytest.approx(H_3_4, abs=1e-9)
    with pytest.raises(ValueError):
        shannon_entropy([F(3, 2), F(-1, 2)])


def test_von_neumann_entropy():
    rng = case_rng(1, 0)
    assert von_neumann_entropy(random_pure(rng, qubit_layout([2])).density()) == pytest.approx(0, abs=1e-9)
    assert von_neumann_entropy(DensityMatrix.maximally_mixed(qubit_layout([3]))) == pytest.approx(3)
    assert von_neumann_entropy(DensityMatrix.from_diagonal([0.75, 0.25], ONE)) == pytest.approx(H_3_4, abs=1e-9)


def test_mutual_information_examples():
    lay = qubit_layout([1, 1])
    prod = DensityMatrix(np.kron(random_density(case_rng(2, 0), ONE).matrix, np.diag([1, 0])), lay)
    assert mutual_information(prod, {"A"}) == pytest.approx(0, abs=1e-9)
    bell = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), lay).density()
    assert mutual_information(bell, {"A"}) == pytest.approx(2)
    with pytest.raises(ValueError):
        mutual_information(bell, {"A", "B"})
    with pytest.raises(ValueError):
        mutual_information(bell, set())


def test_chain_identity_and_bounds_random():
    rng = case_rng(3, 0)
    lay = qubit_layout([1, 1, 1])
    for _ in range(30):
        rho = random_density(rng, lay, rank=int(rng.integers(1, 9)))
        rep = verify_information_identities(rho, "chain", parts=[{"A"}, {"B"}, {"C"}])
        assert rep.residual <= 1e-8
        i_ab = mutual_information(rho, {"A"}, {"B"})
        s_a = von_neumann_entropy(DensityMatrix(rho.matrix.reshape(2, 4, 2, 4).trace(axis1=1, axis2=3), ONE))
        assert -1e-8 <= i_ab <= 2 * s_a + 1e-8
        assert von_neumann_entropy(rho) <= 3 + 1e-9


def test_encoding_mutual_information_examples():
    basis = Encoding((0, 1), (F(1, 2), F(1, 2)), (ket([1, 0]), ket([0, 1])))
    assert encoding_mutual_information(basis) == pytest.approx(1)
    const = Encoding((0, 1), (F(1, 2), F(1, 2)), (ket([1, 0]), ket([1, 0])))
    assert encoding_mutual_information(const) == pytest.approx(0, abs=1e-12)
    plus = Encoding((0, 1), (F(1, 2), F(1, 2)), (ket([1, 0]), ket([1, 1] / np.sqrt(2))))
    lam = [(1 + 1 / math.sqrt(2)) / 2, (1 - 1 / math.sqrt(2)) / 2]
    oracle = -sum(x * math.log2(x) for x in lam)
    assert oracle == pytest.approx(0.600876, abs=1e-6)
    assert encoding_mutual_information(plus) == pytest.approx(oracle, abs=1e-9)


def test_encoding_validation():
    with pytest.raises(ValueError):
        Encoding((0, 1), (F(1, 2), F(1, 3)), ({0: F(1)}, {0: F(1)}))
    with pytest.raises(ValueError):
        Encoding((0,), (F(1),), ({0: F(1, 2)},))
    with pytest.raises(ValueError):
        Encoding((0, 1), (F(1, 2), F(1, 2)), ({0: F(1)}, ket([1, 0])))


def test_encoding_information_matches_cq_state():
    rng = case_rng(4, 0)
    for k in range(10):
        e = random_quantum_encoding(rng, 3, 1) if k % 2 else random_classical_encoding(rng, 3, 3)
        rho = cq_state(e)
        assert encoding_mutual_information(e) == pytest.approx(mutual_information(rho, {"X"}), abs=1e-8)


def test_total_variation():
    assert total_variation([F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]) == 0
    assert total_variation([F(1), F(0)], [F(0), F(1)]) == 2
    assert total_variation([F(3, 4), F(1, 4)], [F(1, 2), F(1, 2)]) == F(1, 2)
    assert total_variation({"a": F(1)}, {"b": F(1)}) == 2
    with pytest.raises(ValueError):
        total_variation([F(1)], [F(1, 2), F(1, 2)])


def test_total_variation_matches_diagonal_trace_norm():
    rng = case_rng(5, 0)
    for _ in range(20):
        p = rng.dirichlet(np.ones(4))
        q = rng.dirichlet(np.ones(4))
        assert total_variation(list(p), list(q)) == pytest.approx(trace_norm(np.diag(p - q)), abs=1e-9)


def test_average_encoding_examples():
    const = Encoding((0, 1), (F(1, 2), F(1, 2)), (ket([1, 0]), ket([1, 0])))
    lhs, rhs, slack = average_encoding_gap(const)
    assert (lhs, rhs, slack) == pytest.approx((0, 0, 0), abs=1e-7)
    basis = Encoding((0, 1), (F(1, 2), F(1, 2)), (ket([1, 0]), ket([0, 1])))
    lhs, rhs, slack = average_encoding_gap(basis)
    assert lhs == pytest.approx(1, abs=1e-9)
    assert rhs == pytest.approx(1.177410, abs=1e-6)


def test_average_encoding_random():
    rng = case_rng(6, 0)
    for k in range(50):
        if k % 2:
            e = random_quantum_encoding(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)))
        else:
            e = random_classical_encoding(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        assert average_encoding_gap(e)[2] >= -1e-8


def test_measurement_distance():
    rng = case_rng(7, 0)
    lay = qubit_layout([2])
    r1 = random_density(rng, lay)
    l1, tn = measurement_distance_check(r1, r1, [np.eye(4)])
    assert l1 == pytest.approx(0) and tn == pytest.approx(0, abs=1e-9)
    r2 = random_density(rng, lay)
    w, v = np.linalg.eigh(r1.matrix - r2.matrix)
    proj = [np.outer(v[:, k], v[:, k].conj()) for k in range(4)]
    l1, tn = measurement_distance_check(r1, r2, proj)
    assert l1 == pytest.approx(tn, abs=1e-9)
    for _ in range(10):
        u = random_unitary(rng, 4)
        weights = rng.dirichlet(np.ones(3), size=4)
        povm = [u @ np.diag(weights[:, j]) @ u.conj().T for j in range(3)]
        l1, tn = measurement_distance_check(r1, r2, povm)
        assert l1 <= tn + 1e-8
    with pytest.raises(ValueError):
        measurement_distance_check(r1, r2, [np.eye(4) / 2])


def test_safe_bound():
    lay = qubit_layout([1, 1], ["M1", "M2"])
    words = []
    for x in range(2):
        v = np.zeros(4)
        v[2 * x] = 1
        words.append(DensityMatrix(np.outer(v, v), lay))
    e = Encoding((0, 1), (F(1, 2), F(1, 2)), tuple(words))
    rep = verify_information_identities(e, "safe_bound", main={"M1"})
    assert rep.ok and rep.rhs == 1 and rep.details["classical"]
    # entangled message with a fixed half: superdense coding reaches I = 2 with a = 1
    bells = [np.array([1, 0, 0, 1]), np.array([1, 0, 0, -1]), np.array([0, 1, 1, 0]), np.array([0, 1, -1, 0])]
    words = tuple(DensityMatrix(np.outer(b, b) / 2, lay) for b in bells)
    e = Encoding((0, 1, 2, 3), (F(1, 4),) * 4, words)
    rep = verify_information_identities(e, "safe_bound", main={"M1"})
    assert rep.rhs == 2 and rep.lhs == pytest.approx(2) and rep.ok
    leaky = Encoding((0, 1), (F(1, 2), F(1, 2)), (DensityMatrix(np.diag([1, 0, 0, 0]), lay), DensityMatrix(np.diag([0, 1, 0, 0]), lay)))
    with pytest.raises(ValueError):
        verify_information_identities(leaky, "safe_bound", main={"M1"})


def test_additivity():
    vals = [(a, b) for a in range(2) for b in range(2)]
    e = Encoding(tuple(vals), (F(1, 4),) * 4, tuple({v: F(1)} for v in vals))
    rep = verify_information_identities(e, "additivity")
    assert rep.lhs == pytest.approx(2) and rep.rhs == pytest.approx(2) and rep.ok
    dep = Encoding(((0, 0), (1, 1)), (F(1, 2), F(1, 2)), ({0: F(1)}, {1: F(1)}))
    with pytest.raises(ValueError):
        verify_information_identities(dep, "additivity")


def test_averaging_random_classical():
    rng = case_rng(8, 0)
    for _ in range(20):
        pairs = [(x, y) for x in range(2) for y in range(3)]
        base = random_classical_encoding(rng, len(pairs), 3)
        e = Encoding(tuple(pairs), base.priors, base.codewords)
        rep = verify_information_identities(e, "averaging")
        assert rep.residual <= 1e-7


def test_joint_distribution():
    d = JointDistribution.from_dict({(0, 0): F(1, 2), (1, 1): F(1, 4), (1, 0): F(1, 4)})
    assert d.marginal_x() == {0: F(1, 2), 1: F(1, 2)}
    assert d.conditional_y(1) == {1: F(1, 2), 0: F(1, 2)}
    with pytest.raises(ValueError):
        JointDistribution.from_dict({(0, 0): F(1, 2)})
