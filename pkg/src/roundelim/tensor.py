"""Dense state-vector and density-matrix machinery over named, party-owned registers.

Basis ordering is big-endian throughout: registers appear in layout order and
the first qubit of the first register is the most significant bit of a basis
index.  A register's value is the integer spelled by its qubits.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 12
ALICE = "A"
BOB = "B"

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
NORM_TOL = 1e-9
UNITARY_TOL = 1e-9


class CapacityError(ValueError):
    """Raised when a layout exceeds the desk-scale qubit cap."""


def other_party(owner: str) -> str:
    return BOB if owner == ALICE else ALICE


@dataclass(frozen=True)
class Register:
    name: str
    qubits: int
    owner: str = ALICE


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[Register, ...]

    def __post_init__(self):
        names = [r.name for r in self.registers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        for r in self.registers:
            if r.qubits < 0:
                raise ValueError(f"register {r.name} has negative size")
            if r.owner not in (ALICE, BOB):
                raise ValueError(f"register {r.name} has unknown owner {r.owner!r}")

    @classmethod
    def of(cls, *specs) -> "RegisterLayout":
        """Build from ``(name, qubits[, owner])`` tuples."""
        return cls(tuple(Register(*s) for s in specs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers)

    @property
    def total(self) -> int:
        return sum(r.qubits for r in self.registers)

    @property
    def dim(self) -> int:
        return 1 << self.total

    def __contains__(self, name) -> bool:
        return any(r.name == name for r in self.registers)

    def __getitem__(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(f"unknown register {name!r}")

    def size(self, names: Iterable[str]) -> int:
        return sum(self[n].qubits for n in names)

    def qubit_indices(self, names: Iterable[str]) -> list[int]:
        """Qubit positions (0 = most significant) of the given registers, in the order given."""
        offsets = {}
        pos = 0
        for r in self.registers:
            offsets[r.name] = pos
            pos += r.qubits
        out = []
        for n in names:
            if n not in offsets:
                raise KeyError(f"unknown register {n!r}")
            out.extend(range(offsets[n], offsets[n] + self[n].qubits))
        return out

    def sub(self, names: Iterable[str]) -> "RegisterLayout":
        """Sub-layout keeping the named registers in layout order."""
        keep = set(names)
        missing = keep - set(self.names)
        if missing:
            raise KeyError(f"unknown registers {sorted(missing)}")
        return RegisterLayout(tuple(r for r in self.registers if r.name in keep))

    def owned_by(self, owner: str) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers if r.owner == owner)

    def with_owner(self, names: Iterable[str], owner: str) -> "RegisterLayout":
        moved = set(names)
        return RegisterLayout(tuple(
            Register(r.name, r.qubits, owner) if r.name in moved else r for r in self.registers))

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.registers + other.registers)

    def check_capacity(self, cap: int = MAX_QUBITS) -> None:
        if self.total > cap:
            raise CapacityError(f"layout uses {self.total} qubits; cap is {cap}")

    def basis_index(self, values: dict[str, int]) -> int:
        """Basis index for per-register integer values (missing registers are 0)."""
        idx = 0
        for r in self.registers:
            v = values.get(r.name, 0)
            if not 0 <= v < (1 << r.qubits):
                raise ValueError(f"value {v} does not fit register {r.name} ({r.qubits} qubits)")
            idx = (idx << r.qubits) | v
        return idx


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])), initial=0.0) <= tol


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(vec) > 1e-12)
    if nz.size == 0:
        return vec
    a = vec[nz[0]]
    return vec * (abs(a) / a)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    layout: RegisterLayout

    def __post_init__(self):
        self.layout.check_capacity()
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.dim:
            raise ValueError(f"{amps.size} amplitudes for a {self.layout.total}-qubit layout")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        if abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise ValueError("state is not normalised")
        amps = _canonical_phase(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, layout: RegisterLayout, values: dict[str, int] | None = None) -> "PureState":
        v = np.zeros(layout.dim, dtype=complex)
        v[layout.basis_index(values or {})] = 1.0
        return cls(v, layout)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.layout)

    def reduced(self, keep: Iterable[str]) -> "DensityMatrix":
        keep = list(keep)
        sub = self.layout.sub(keep)
        return DensityMatrix(reduced_from_vector(self.amplitudes, self.layout, sub.names), sub)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    layout: RegisterLayout

    def __post_init__(self):
        self.layout.check_capacity()
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise ValueError(f"matrix shape {m.shape} does not match layout dimension {self.layout.dim}")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite entry")
        if not is_hermitian(m):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix has trace {np.trace(m).real}")
        m = (m + m.conj().T) / 2
        if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_diagonal(cls, probs: Sequence, layout: RegisterLayout) -> "DensityMatrix":
        return cls(np.diag(np.asarray([float(p) for p in probs], dtype=complex)), layout)

    @classmethod
    def maximally_mixed(cls, layout: RegisterLayout) -> "DensityMatrix":
        return cls(np.eye(layout.dim, dtype=complex) / layout.dim, layout)

    @property
    def dim(self) -> int:
        return self.layout.dim


def _permute_to(vec_or_tensor: np.ndarray, n: int, front: list[int]) -> np.ndarray:
    rest = [q for q in range(n) if q not in set(front)]
    return np.transpose(vec_or_tensor.reshape((2,) * n), front + rest) if n else vec_or_tensor.reshape(())


def vector_as_matrix(vec: np.ndarray, layout: RegisterLayout, rows: Sequence[str]) -> np.ndarray:
    """Reshape a state vector into a (rows) x (everything else) amplitude matrix."""
    n = layout.total
    front = layout.qubit_indices(rows)
    t = _permute_to(vec, n, front)
    return t.reshape(1 << len(front), -1)


def reduced_from_vector(vec: np.ndarray, layout: RegisterLayout, keep: Sequence[str]) -> np.ndarray:
    m = vector_as_matrix(vec, layout, keep)
    return m @ m.conj().T


def tensor_product(a, b):
    """Kronecker product of two states, two density matrices, or two plain matrices."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), a.layout.concat(b.layout))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.layout.concat(b.layout))
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return np.kron(a, b)
    raise TypeError(f"cannot take tensor product of {type(a).__name__} and {type(b).__name__}")


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Trace out every register not in ``keep``."""
    keep = set(keep)
    unknown = keep - set(rho.layout.names)
    if unknown:
        raise KeyError(f"unknown registers {sorted(unknown)}")
    layout = rho.layout
    sub = layout.sub(keep)
    n = layout.total
    front = layout.qubit_indices(sub.names)
    rest = [q for q in range(n) if q not in set(front)]
    k, r = len(front), len(rest)
    t = rho.matrix.reshape((2,) * (2 * n))
    t = np.transpose(t, front + rest + [n + q for q in front] + [n + q for q in rest])
    t = t.reshape(1 << k, 1 << r, 1 << k, 1 << r)
    return DensityMatrix(np.einsum("ijkj->ik", t), sub)


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""
    m = np.asarray(m, dtype=complex)
    _check_square(m)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def trace_norm(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    _check_square(a)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def matrix_sqrt_psd(m: np.ndarray, cutoff: float = 1e-14) -> np.ndarray:
    """Square root of a PSD matrix; eigenvalues below cutoff * max are treated as rounding noise."""
    w, v = hermitian_eig(m)
    top = max(float(np.max(w)), 0.0) if w.size else 0.0
    w = np.where(w > cutoff * top, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Root fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), computed as || sqrt(rho1) sqrt(rho2) ||_1."""
    return float(np.sum(np.linalg.svd(matrix_sqrt_psd(rho1) @ matrix_sqrt_psd(rho2), compute_uv=False)))


def purify(rho: DensityMatrix, name: str = "K", owner: str | None = None) -> PureState:
    """Canonical purification sum_i sqrt(l_i) |e_i>|i> with eigenvalues in descending order.

    The purifying register ``name`` has as many qubits as the input layout and is
    appended after it.
    """
    if not isinstance(rho, DensityMatrix):
        raise TypeError("purify expects a DensityMatrix")
    w, v = hermitian_eig(rho.matrix)
    w = np.clip(w, 0.0, None)
    d = rho.dim
    amps = np.zeros((d, d), dtype=complex)
    for i in range(d):
        amps[:, i] = np.sqrt(w[i]) * v[:, i]
    amps /= np.linalg.norm(amps)
    if owner is None:
        owner = rho.layout.registers[0].owner if rho.layout.registers else ALICE
    layout = rho.layout.concat(RegisterLayout((Register(name, rho.layout.total, owner),)))
    return PureState(amps.reshape(-1), layout)


def max_overlap_local_unitary(phi1: PureState, phi2: PureState, local: Iterable[str]) -> tuple[np.ndarray, float]:
    """Unitary U on the ``local`` registers maximising |<phi1|(I x U)|phi2>|.

    U acts on the local registers taken in layout order.  The optimum equals the
    trace norm of the cross-Gram matrix, which is the root fidelity of the two
    reduced states on the complementary registers.
    """
    local = set(local)
    if not local:
        raise ValueError("local register set is empty")
    if phi1.layout.names != phi2.layout.names or phi1.layout.total != phi2.layout.total:
        raise ValueError("states do not share a layout")
    unknown = local - set(phi1.layout.names)
    if unknown:
        raise KeyError(f"unknown registers {sorted(unknown)}")
    k_names = [n for n in phi1.layout.names if n in local]
    h_names = [n for n in phi1.layout.names if n not in local]
    a1 = vector_as_matrix(phi1.amplitudes, phi1.layout, h_names)
    a2 = vector_as_matrix(phi2.amplitudes, phi2.layout, h_names)
    # <phi1|(I x U)|phi2> = Tr(U G) with G[k', k] = sum_h phi2[h, k'] conj(phi1[h, k])
    gram = a2.T @ a1.conj()
    w, s, vh = np.linalg.svd(gram)
    u = vh.conj().T @ w.conj().T
    return u, float(np.sum(s))


def apply_matrix(vec: np.ndarray, layout: RegisterLayout, u: np.ndarray, targets: Sequence[str]) -> np.ndarray:
    """Apply ``u`` to the concatenation of ``targets`` on a raw amplitude vector."""
    n = layout.total
    front = layout.qubit_indices(targets)
    k = len(front)
    if u.shape != (1 << k, 1 << k):
        raise ValueError(f"gate of shape {u.shape} on {k} target qubits")
    t = _permute_to(vec, n, front).reshape(1 << k, -1)
    t = (u @ t).reshape((2,) * n)
    rest = [q for q in range(n) if q not in set(front)]
    inv = np.argsort(front + rest)
    return np.transpose(t, inv).reshape(-1)


def apply_gate(state: PureState, u: np.ndarray, targets: Sequence[str]) -> PureState:
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("gate is not unitary")
    return PureState(apply_matrix(state.amplitudes, state.layout, u, list(targets)), state.layout)


def state_prep_unitary(target: np.ndarray) -> np.ndarray:
    """A unitary whose first column is ``target`` (Householder reflection, up to phase)."""
    v = np.asarray(target, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    d = v.size
    e0 = np.zeros(d, dtype=complex)
    e0[0] = 1.0
    phase = v[0] / abs(v[0]) if abs(v[0]) > 1e-15 else 1.0
    w = v / phase - e0
    nw = np.linalg.norm(w)
    if nw < 1e-14:
        return np.eye(d, dtype=complex) * phase
    w = w / nw
    h = np.eye(d, dtype=complex) - 2.0 * np.outer(w, w.conj())
    return phase * h
