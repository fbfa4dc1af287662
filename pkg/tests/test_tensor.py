from __future__ import annotations

import numpy as np
import pytest

from roundelim.lab.generators import case_rng, qubit_layout, random_density, random_pure, random_unitary
from roundelim.tensor import (
    CapacityError,
    DensityMatrix,
    PureState,
    RegisterLayout,
    apply_gate,
    fidelity,
    hermitian_eig,
    max_overlap_local_unitary,
    partial_trace,
    purify,
    state_prep_unitary,
    tensor_product,
    trace_norm,
)

ONE = qubit_layout([1], ["A"])
TWO = qubit_layout([1, 1], ["A", "B"])


def test_tensor_product_basis_states():
    a = PureState.basis(qubit_layout([1], ["P"]), {"P": 0})
    b = PureState.basis(qubit_layout([1], ["Q"]), {"Q": 1})
    ab = tensor_product(a, b)
    assert ab.layout.names == ("P", "Q")
    assert np.allclose(ab.amplitudes, [0, 1, 0, 0])


def test_tensor_product_matrices_and_densities():
    assert np.allclose(tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    a = DensityMatrix.from_diagonal([0.5, 0.5], qubit_layout([1], ["P"]))
    b = DensityMatrix.from_diagonal([1, 0], qubit_layout([1], ["Q"]))
    assert np.allclose(np.diag(tensor_product(a, b).matrix), [0.5, 0, 0.5, 0])
    with pytest.raises(TypeError):
        tensor_product(a, np.eye(2))


def test_partial_trace_product_and_bell():
    rng = case_rng(1, 0)
    ra = random_density(rng, qubit_layout([1], ["A"]))
    rb = random_density(rng, qubit_layout([1], ["B"]))
    assert np.allclose(partial_trace(tensor_product(ra, rb), {"A"}).matrix, ra.matrix)
    bell = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), TWO)
    assert np.allclose(partial_trace(bell.density(), {"A"}).matrix, np.eye(2) / 2)
    with pytest.raises(KeyError):
        partial_trace(bell.density(), {"Z"})


def test_partial_trace_matches_basis_sum():
    rng = case_rng(2, 0)
    for case in range(20):
        psi = random_pure(rng, TWO)
        rho = psi.density().matrix
        # <a|rho_A|a'> = sum_b <a b|rho|a' b>
        expected = np.array([[sum(rho[2 * a + b, 2 * c + b] for b in range(2)) for c in range(2)] for a in range(2)])
        assert np.allclose(partial_trace(psi.density(), {"A"}).matrix, expected, atol=1e-12)
        expected_b = np.array([[sum(rho[2 * a + b, 2 * a + c] for a in range(2)) for c in range(2)] for b in range(2)])
        assert np.allclose(partial_trace(psi.density(), {"B"}).matrix, expected_b, atol=1e-12)


def test_partial_trace_noncontiguous_keep():
    rng = case_rng(3, 0)
    lay = qubit_layout([1, 2, 1], ["A", "B", "C"])
    rho = random_density(rng, lay)
    t = rho.matrix.reshape(2, 4, 2, 2, 4, 2)
    expected = np.einsum("abcdbf->acdf", t).reshape(4, 4)
    got = partial_trace(rho, {"A", "C"})
    assert got.layout.names == ("A", "C")
    assert np.allclose(got.matrix, expected)


def test_hermitian_eig_known_spectra():
    w, _ = hermitian_eig(np.diag([1.0, 3.0]))
    assert np.allclose(w, [3, 1])
    w, _ = hermitian_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(w, [1, -1])
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_hermitian_eig_residuals_random():
    rng = case_rng(4, 0)
    for _ in range(10):
        g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        m = g + g.conj().T
        w, v = hermitian_eig(m)
        assert np.all(np.diff(w) <= 0)
        for k in range(8):
            assert np.linalg.norm(m @ v[:, k] - w[k] * v[:, k]) <= 1e-8
        assert np.allclose(v.conj().T @ v, np.eye(8), atol=1e-8)


def test_trace_norm_values():
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2)
    rng = case_rng(5, 0)
    assert trace_norm(random_density(rng, TWO).matrix) == pytest.approx(1)
    assert trace_norm(np.diag([1.0, 0]) - np.eye(2) / 2) == pytest.approx(1)
    with pytest.raises(ValueError):
        trace_norm(np.ones((2, 3)))


def test_purify_examples():
    pure = purify(DensityMatrix.from_diagonal([1, 0], ONE))
    assert np.allclose(pure.amplitudes, [1, 0, 0, 0])
    bell = purify(DensityMatrix.maximally_mixed(ONE))
    assert np.allclose(bell.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))
    rng = case_rng(6, 0)
    rho = random_density(rng, TWO, rank=2)
    psi = purify(rho)
    assert np.allclose(psi.reduced(["A", "B"]).matrix, rho.matrix, atol=1e-9)


def test_max_overlap_identical_and_orthogonal():
    rng = case_rng(7, 0)
    lay = qubit_layout([1, 1], ["H", "K"])
    psi = random_pure(rng, lay)
    u, ov = max_overlap_local_unitary(psi, psi, {"K"})
    assert ov == pytest.approx(1)
    from roundelim.tensor import apply_matrix
    moved = apply_matrix(psi.amplitudes, lay, u, ["K"])
    assert trace_norm(np.outer(moved, moved.conj()) - np.outer(psi.amplitudes, psi.amplitudes.conj())) < 1e-8
    p0 = PureState.basis(lay, {"H": 0})
    p1 = PureState.basis(lay, {"H": 1})
    _, ov = max_overlap_local_unitary(p0, p1, {"K"})
    assert ov == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        max_overlap_local_unitary(p0, p1, set())


def test_max_overlap_equals_fidelity_and_beats_random():
    rng = case_rng(8, 0)
    lay = qubit_layout([2, 2], ["H", "K"])
    from roundelim.tensor import apply_matrix
    for _ in range(10):
        r1 = random_density(rng, qubit_layout([2], ["H"]))
        r2 = random_density(rng, qubit_layout([2], ["H"]))
        p1 = PureState(purify(r1).amplitudes, lay)
        p2 = PureState(purify(r2).amplitudes, lay)
        u, ov = max_overlap_local_unitary(p1, p2, {"K"})
        assert ov == pytest.approx(fidelity(r1.matrix, r2.matrix), abs=1e-8)
        achieved = abs(np.vdot(p1.amplitudes, apply_matrix(p2.amplitudes, lay, u, ["K"])))
        assert achieved == pytest.approx(ov, abs=1e-10)
        for _ in range(100):
            v = random_unitary(rng, 4)
            assert abs(np.vdot(p1.amplitudes, apply_matrix(p2.amplitudes, lay, v, ["K"]))) <= ov + 1e-10


def test_apply_gate_cases():
    psi = PureState.basis(ONE, {"A": 0})
    assert np.allclose(apply_gate(psi, np.eye(2), ["A"]).amplitudes, psi.amplitudes)
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(apply_gate(psi, x, ["A"]).amplitudes, [0, 1])
    with pytest.raises(ValueError):
        apply_gate(psi, np.array([[1, 1], [0, 1]]), ["A"])
    rng = case_rng(9, 0)
    lay = qubit_layout([1, 2, 1], ["A", "B", "C"])
    phi = random_pure(rng, lay)
    u = random_unitary(rng, 8)
    back = apply_gate(apply_gate(phi, u, ["C", "B"]), u.conj().T, ["C", "B"])
    assert np.allclose(back.amplitudes, phi.amplitudes, atol=1e-9)


def test_apply_gate_target_order():
    lay = qubit_layout([1, 1], ["A", "B"])
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    psi = PureState.basis(lay, {"B": 1})
    # control B, target A
    assert np.allclose(apply_gate(psi, cnot, ["B", "A"]).amplitudes, [0, 0, 0, 1])


def test_capacity_and_validation():
    big = RegisterLayout.of(("A", 13))
    with pytest.raises(CapacityError):
        PureState.basis(big)
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.0, 1.0]), ONE)
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]), ONE)
    with pytest.raises(ValueError):
        RegisterLayout.of(("A", 1), ("A", 1))


def test_canonical_phase():
    a = PureState(np.array([1j, 0]), ONE)
    assert np.allclose(a.amplitudes, [1, 0])


def test_state_prep_unitary():
    rng = case_rng(10, 0)
    for d in (2, 4, 8):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        u = state_prep_unitary(v)
        assert np.allclose(u.conj().T @ u, np.eye(d))
        assert np.allclose(u[:, 0], v)
    u = state_prep_unitary(np.array([0, 1.0]))
    assert np.allclose(u[:, 0], [0, 1])


def test_density_invariants_and_trace_norm_range():
    rng = case_rng(11, 0)
    for _ in range(20):
        a = random_density(rng, TWO)
        b = random_density(rng, TWO)
        assert 0 <= trace_norm(a.matrix - b.matrix) <= 2 + 1e-12
        psi = purify(a)
        assert np.allclose(psi.reduced(["A", "B"]).matrix, a.matrix, atol=1e-9)
