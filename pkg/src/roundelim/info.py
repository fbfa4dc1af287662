"""Entropies, mutual information, distances and encoding-level inequality checks.

All logarithms are base 2.  Classical distributions are dictionaries from
outcome to exact rational probability; entropies convert to float at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .tensor import (
    DensityMatrix,
    Register,
    RegisterLayout,
    hermitian_eig,
    partial_trace,
    trace_norm,
)

EIG_CLAMP = 1e-10
SQRT_2LN2 = math.sqrt(2 * math.log(2))


def _as_fraction(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p)


def _probs(p) -> list:
    return list(p.values()) if isinstance(p, Mapping) else list(p)


def shannon_entropy(p) -> float:
    """Entropy in bits of a probability list or an outcome -> probability mapping."""
    probs = _probs(p)
    if any(q < 0 for q in probs):
        raise ValueError("negative probability")
    total = sum(probs)
    if abs(float(total) - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {float(total)}")
    h = 0.0
    for q in probs:
        q = float(q)
        if q > 0:
            h -= q * math.log2(q)
    return max(h, 0.0)


def _spectrum_entropy(w: np.ndarray) -> float:
    if np.any(w < -EIG_CLAMP):
        raise ValueError("negative eigenvalue below clamp threshold")
    w = w[w > 0]
    return max(float(-np.sum(w * np.log2(w))), 0.0)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    if not isinstance(rho, DensityMatrix):
        raise TypeError("von_neumann_entropy expects a DensityMatrix")
    w, _ = hermitian_eig(rho.matrix)
    w = np.where((w < 0) & (w >= -EIG_CLAMP), 0.0, w)
    return _spectrum_entropy(w)


def _matrix_entropy(m: np.ndarray) -> float:
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    w = np.where((w < 0) & (w >= -EIG_CLAMP), 0.0, w)
    return _spectrum_entropy(w)


def subsystem_entropy(rho: DensityMatrix, names: Iterable[str]) -> float:
    names = set(names)
    if not names:
        return 0.0
    if names == set(rho.layout.names):
        return von_neumann_entropy(rho)
    return von_neumann_entropy(partial_trace(rho, names))


def mutual_information(rho: DensityMatrix, cut: Iterable[str], other: Iterable[str] | None = None) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) for register groups A = ``cut`` and B = ``other``.

    ``other`` defaults to the complement of ``cut``.
    """
    a = set(cut)
    names = set(rho.layout.names)
    b = names - a if other is None else set(other)
    if not a or not b or a & b or not (a | b) <= names:
        raise ValueError(f"bad cut {sorted(a)} | {sorted(b)}")
    return subsystem_entropy(rho, a) + subsystem_entropy(rho, b) - subsystem_entropy(rho, a | b)


@dataclass(frozen=True)
class JointDistribution:
    """Finite distribution on pairs (x, y) with exact rational weights."""

    support: tuple[tuple[Hashable, Hashable, Fraction], ...]

    def __post_init__(self):
        seen = set()
        clean = []
        for x, y, p in self.support:
            p = _as_fraction(p)
            if p <= 0:
                raise ValueError(f"non-positive probability at {(x, y)}")
            if (x, y) in seen:
                raise ValueError(f"duplicate support point {(x, y)}")
            seen.add((x, y))
            clean.append((x, y, p))
        if sum(p for _, _, p in clean) != 1:
            raise ValueError("probabilities do not sum to 1")
        object.__setattr__(self, "support", tuple(clean))

    @classmethod
    def from_dict(cls, weights: Mapping[tuple, Any]) -> "JointDistribution":
        return cls(tuple((x, y, _as_fraction(p)) for (x, y), p in weights.items() if p != 0))

    @classmethod
    def uniform(cls, pairs: Iterable[tuple]) -> "JointDistribution":
        pairs = list(pairs)
        return cls(tuple((x, y, Fraction(1, len(pairs))) for x, y in pairs))

    @classmethod
    def product(cls, px: Mapping, py: Mapping) -> "JointDistribution":
        return cls(tuple((x, y, _as_fraction(a) * _as_fraction(b))
                         for x, a in px.items() for y, b in py.items() if a and b))

    def __iter__(self):
        return iter(self.support)

    def __len__(self):
        return len(self.support)

    def prob(self, x, y) -> Fraction:
        for a, b, p in self.support:
            if a == x and b == y:
                return p
        return Fraction(0)

    def marginal_x(self) -> dict:
        out: dict = {}
        for x, _, p in self.support:
            out[x] = out.get(x, Fraction(0)) + p
        return out

    def marginal_y(self) -> dict:
        out: dict = {}
        for _, y, p in self.support:
            out[y] = out.get(y, Fraction(0)) + p
        return out

    def conditional_y(self, x) -> dict:
        px = self.marginal_x()[x]
        return {y: p / px for a, y, p in self.support if a == x}


@dataclass(frozen=True, eq=False)
class Encoding:
    """A classical variable X with priors p_x and per-value codewords sigma_x.

    Codewords are either outcome -> probability mappings (classical) or
    DensityMatrix objects sharing one layout (quantum).
    """

    values: tuple
    priors: tuple[Fraction, ...]
    codewords: tuple
    average: Any = field(init=False, repr=False)

    def __post_init__(self):
        if not (len(self.values) == len(self.priors) == len(self.codewords)) or not self.values:
            raise ValueError("values, priors and codewords must be non-empty and aligned")
        priors = tuple(_as_fraction(p) for p in self.priors)
        if any(p <= 0 for p in priors):
            raise ValueError("priors must be positive")
        if sum(priors) != 1:
            raise ValueError("priors must sum to 1")
        object.__setattr__(self, "priors", priors)
        kinds = {isinstance(c, DensityMatrix) for c in self.codewords}
        if len(kinds) != 1:
            raise ValueError("codewords mix classical and quantum kinds")
        if self.is_quantum:
            layouts = {c.layout for c in self.codewords}
            if len(layouts) != 1:
                raise ValueError("quantum codewords do not share a layout")
            avg = sum(float(p) * c.matrix for p, c in zip(priors, self.codewords))
            object.__setattr__(self, "average", DensityMatrix(avg, self.codewords[0].layout))
        else:
            avg: dict = {}
            for p, c in zip(priors, self.codewords):
                if sum(c.values()) != 1 or any(q < 0 for q in c.values()):
                    raise ValueError("classical codeword is not a distribution")
                for m, q in c.items():
                    avg[m] = avg.get(m, Fraction(0)) + p * _as_fraction(q)
            object.__setattr__(self, "average", avg)

    @classmethod
    def from_mapping(cls, priors: Mapping, codewords: Mapping) -> "Encoding":
        vals = tuple(priors)
        return cls(vals, tuple(priors[v] for v in vals), tuple(codewords[v] for v in vals))

    @property
    def is_quantum(self) -> bool:
        return isinstance(self.codewords[0], DensityMatrix)

    def items(self):
        return zip(self.values, self.priors, self.codewords)


def encoding_mutual_information(e: Encoding) -> float:
    """I(X:Q) = S(sigma) - sum_x p_x S(sigma_x)."""
    if e.is_quantum:
        avg = von_neumann_entropy(e.average)
        parts = sum(float(p) * von_neumann_entropy(c) for _, p, c in e.items())
    else:
        avg = shannon_entropy(e.average)
        parts = sum(float(p) * shannon_entropy(c) for _, p, c in e.items())
    return avg - parts


def total_variation(p, q):
    """l1 distance sum_i |p_i - q_i| (range [0, 2]).

    Accepts aligned sequences or outcome -> probability mappings; returns an
    exact Fraction when every weight is rational.
    """
    if isinstance(p, Mapping) != isinstance(q, Mapping):
        raise ValueError("cannot compare a mapping with a sequence")
    if isinstance(p, Mapping):
        keys = set(p) | set(q)
        pairs = [(p.get(k, 0), q.get(k, 0)) for k in keys]
    else:
        if len(p) != len(q):
            raise ValueError("sample spaces differ in size")
        pairs = list(zip(p, q))
    if all(isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)) for a, b in pairs):
        return sum((abs(Fraction(a) - Fraction(b)) for a, b in pairs), Fraction(0))
    return float(sum(abs(float(a) - float(b)) for a, b in pairs))


def codeword_distance(a, b) -> float:
    if isinstance(a, DensityMatrix):
        return trace_norm(a.matrix - b.matrix)
    return float(total_variation(a, b))


def average_encoding_gap(e: Encoding) -> tuple[float, float, float]:
    """(sum_x p_x ||sigma_x - sigma||, sqrt(2 ln 2 I(X:Q)), slack)."""
    lhs = sum(float(p) * codeword_distance(c, e.average) for _, p, c in e.items())
    rhs = SQRT_2LN2 * math.sqrt(max(encoding_mutual_information(e), 0.0))
    return lhs, rhs, rhs - lhs


def measurement_distance_check(rho1: DensityMatrix, rho2: DensityMatrix, povm: Sequence[np.ndarray]) -> tuple[float, float]:
    """l1 distance of the two outcome distributions and the trace norm of rho1 - rho2."""
    d = rho1.dim
    if rho2.dim != d:
        raise ValueError("states live on different spaces")
    total = np.zeros((d, d), dtype=complex)
    for e in povm:
        e = np.asarray(e, dtype=complex)
        if e.shape != (d, d):
            raise ValueError("POVM element has the wrong shape")
        if np.max(np.abs(e - e.conj().T)) > 1e-8 or np.linalg.eigvalsh((e + e.conj().T) / 2)[0] < -1e-8:
            raise ValueError("POVM element is not positive semidefinite")
        total += e
    if np.max(np.abs(total - np.eye(d))) > 1e-8:
        raise ValueError("POVM elements do not sum to the identity")
    p1 = [float(np.real(np.trace(e @ rho1.matrix))) for e in povm]
    p2 = [float(np.real(np.trace(e @ rho2.matrix))) for e in povm]
    return sum(abs(a - b) for a, b in zip(p1, p2)), trace_norm(rho1.matrix - rho2.matrix)


# --- classical-quantum states --------------------------------------------------------------

def _bits(n: int) -> int:
    return max(1, (n - 1).bit_length())


def _codeword_matrix(c, outcomes: list) -> np.ndarray:
    if isinstance(c, DensityMatrix):
        return c.matrix
    return np.diag([float(c.get(m, 0)) for m in outcomes]).astype(complex)


def cq_state(e: Encoding, parts: int | None = None, names: Sequence[str] | None = None) -> DensityMatrix:
    """The state sum_x p_x |x><x| (x) sigma_x.

    With ``parts`` set, every value must be a tuple of that length and each
    coordinate gets its own register (``names`` or X1..Xn); otherwise X is a
    single register.  The codeword register is named ``M`` for classical
    codewords and keeps its own layout for quantum ones.
    """
    if parts is None:
        coords = [list(e.values)]
        keyed = [(v,) for v in e.values]
    else:
        if any(not isinstance(v, tuple) or len(v) != parts for v in e.values):
            raise ValueError(f"values must be {parts}-tuples")
        coords = [sorted({v[j] for v in e.values}, key=repr) for j in range(parts)]
        keyed = list(e.values)
    names = list(names) if names is not None else (["X"] if parts is None else [f"X{j + 1}" for j in range(parts)])
    x_regs = [Register(n, _bits(len(c))) for n, c in zip(names, coords)]
    if e.is_quantum:
        m_layout = e.codewords[0].layout
        outcomes: list = []
    else:
        outcomes = sorted({m for c in e.codewords for m in c}, key=repr)
        m_layout = RegisterLayout((Register("M", _bits(len(outcomes))),))
    layout = RegisterLayout(tuple(x_regs)).concat(m_layout)
    xdim = 1 << sum(r.qubits for r in x_regs)
    mdim = m_layout.dim
    full = np.zeros((xdim * mdim, xdim * mdim), dtype=complex)
    for key, p, c in zip(keyed, e.priors, e.codewords):
        idx = 0
        for r, coord, val in zip(x_regs, coords, key):
            idx = (idx << r.qubits) | coord.index(val)
        block = _codeword_matrix(c, outcomes)
        if block.shape[0] < mdim:
            pad = np.zeros((mdim, mdim), dtype=complex)
            pad[: block.shape[0], : block.shape[0]] = block
            block = pad
        full[idx * mdim:(idx + 1) * mdim, idx * mdim:(idx + 1) * mdim] += float(p) * block
    return DensityMatrix(full, layout)


@dataclass
class IdentityReport:
    mode: str
    lhs: float
    rhs: float
    residual: float
    slack: float | None
    ok: bool
    details: dict = field(default_factory=dict)


def _is_product(e: Encoding, parts: int) -> bool:
    marg = [dict() for _ in range(parts)]
    joint = {}
    for v, p in zip(e.values, e.priors):
        joint[v] = p
        for j in range(parts):
            marg[j][v[j]] = marg[j].get(v[j], Fraction(0)) + p
    for combo in product(*[list(m.items()) for m in marg]):
        vals = tuple(c[0] for c in combo)
        prob = Fraction(1)
        for c in combo:
            prob *= c[1]
        if joint.get(vals, Fraction(0)) != prob:
            return False
    return True


def verify_information_identities(obj, mode: str, *, main: Sequence[str] | None = None,
                                  parts: Sequence[Sequence[str]] | None = None,
                                  tol: float = 1e-7) -> IdentityReport:
    """Check one of the entropy identities or bounds used by the round elimination argument.

    ``chain``: obj is a DensityMatrix and ``parts`` = (A, B, C) register groups;
    checks I(A:BC) = I(A:B) + I(AB:C) - I(B:C).
    ``safe_bound``: obj is an Encoding on a quantum layout; ``main`` names the
    registers of the input-dependent part.  The rest must have an input
    independent reduced state; checks I(X:M) <= 2a (or <= a for diagonal codewords).
    ``additivity``: obj is an Encoding over tuples of independent coordinates;
    checks I(X1..Xn:M) = sum_i I(Xi : M X1..X_{i-1}).
    ``averaging``: obj is an Encoding over pairs (x, y);
    checks I(Y:MX) = I(X:Y) + E_x I((Y:M)|X=x).
    """
    if mode == "chain":
        if not isinstance(obj, DensityMatrix) or parts is None or len(parts) != 3:
            raise ValueError("chain needs a DensityMatrix and three register groups")
        a, b, c = (set(p) for p in parts)
        lhs = mutual_information(obj, a, b | c)
        rhs = mutual_information(obj, a, b) + mutual_information(obj, a | b, c) - mutual_information(obj, b, c)
        res = abs(lhs - rhs)
        return IdentityReport(mode, lhs, rhs, res, None, res <= tol)

    if not isinstance(obj, Encoding):
        raise TypeError(f"{mode} expects an Encoding")

    if mode == "safe_bound":
        if not obj.is_quantum or main is None:
            raise ValueError("safe_bound needs a quantum encoding and the main registers")
        layout = obj.codewords[0].layout
        main = set(main)
        overhead = set(layout.names) - main
        if overhead:
            ref = partial_trace(obj.codewords[0], overhead).matrix
            dev = max(trace_norm(partial_trace(c, overhead).matrix - ref) for c in obj.codewords)
            if dev > 1e-8:
                raise ValueError(f"overhead part depends on the input (deviation {dev:.3g})")
        a = layout.size(main)
        classical = all(np.max(np.abs(c.matrix - np.diag(np.diag(c.matrix)))) <= 1e-12 for c in obj.codewords)
        info = encoding_mutual_information(obj)
        bound = float(a if classical else 2 * a)
        return IdentityReport(mode, info, bound, 0.0, bound - info, info <= bound + tol,
                              {"main_qubits": a, "classical": classical})

    if mode == "additivity":
        n = len(obj.values[0]) if isinstance(obj.values[0], tuple) else 0
        if n < 1:
            raise ValueError("additivity needs tuple-valued X")
        if not _is_product(obj, n):
            raise ValueError("coordinates of X are not independent")
        rho = cq_state(obj, parts=n)
        xs = [f"X{j + 1}" for j in range(n)]
        m = set(rho.layout.names) - set(xs)
        lhs = mutual_information(rho, xs, m)
        terms = [mutual_information(rho, {xs[i]}, m | set(xs[:i])) for i in range(n)]
        rhs = sum(terms)
        res = abs(lhs - rhs)
        return IdentityReport(mode, lhs, rhs, res, None, res <= tol, {"terms": terms})

    if mode == "averaging":
        if not all(isinstance(v, tuple) and len(v) == 2 for v in obj.values):
            raise ValueError("averaging needs (x, y)-valued X")
        rho = cq_state(obj, parts=2, names=["X", "Y"])
        m = set(rho.layout.names) - {"X", "Y"}
        lhs = mutual_information(rho, {"Y"}, m | {"X"})
        ixy = mutual_information(rho, {"X"}, {"Y"})
        px: dict = {}
        for (x, _), p in zip(obj.values, obj.priors):
            px[x] = px.get(x, Fraction(0)) + p
        cond = 0.0
        for x, p in px.items():
            sub = [(y, q / p, c) for (xx, y), q, c in zip(obj.values, obj.priors, obj.codewords) if xx == x]
            if len(sub) > 1:
                cond += float(p) * encoding_mutual_information(
                    Encoding(tuple(s[0] for s in sub), tuple(s[1] for s in sub), tuple(s[2] for s in sub)))
        rhs = ixy + cond
        res = abs(lhs - rhs)
        return IdentityReport(mode, lhs, rhs, res, None, res <= tol, {"I(X:Y)": ixy, "conditional": cond})

    raise ValueError(f"unknown identity mode {mode!r}")
