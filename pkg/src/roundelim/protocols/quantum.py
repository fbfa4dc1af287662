"""Small quantum two-party protocols over named registers, simulated as state vectors.

Registers carry an owner that changes whenever they are sent.  A party may only
touch registers it owns at that moment.  Inputs are loaded as basis states and
answers are read by a computational-basis measurement of the answer registers.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from ..info import Encoding, JointDistribution
from ..tensor import (
    ALICE,
    BOB,
    DensityMatrix,
    Register,
    RegisterLayout,
    is_unitary,
    other_party,
    reduced_from_vector,
    trace_norm,
    vector_as_matrix,
)
from .classical import ErrorReport, Signature, _check_io, _pairs
from .coins import ABORT
from .games import GameSpec

STATE_TOL = 1e-8


# --- gates ---------------------------------------------------------------------------------

def _blocks(vec: np.ndarray, layout: RegisterLayout, controls: Sequence[str], targets: Sequence[str]):
    n = layout.total
    cq = layout.qubit_indices(controls)
    tq = layout.qubit_indices(targets)
    front = cq + tq
    if len(set(front)) != len(front):
        raise ValueError("gate controls and targets overlap")
    fs = set(front)
    order = front + [q for q in range(n) if q not in fs]
    t = vec.reshape((2,) * n).transpose(order).reshape(1 << len(cq), 1 << len(tq), -1)
    return t, order


def _unblock(t: np.ndarray, order: list[int]) -> np.ndarray:
    n = len(order)
    return t.reshape((2,) * n).transpose(np.argsort(order)).reshape(-1)


@dataclass(frozen=True, eq=False)
class Unitary:
    targets: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    @property
    def controls(self) -> tuple[str, ...]:
        return ()

    def registers(self) -> tuple[str, ...]:
        return self.targets

    def check(self, layout: RegisterLayout) -> None:
        d = 1 << layout.size(self.targets)
        if self.matrix.shape != (d, d):
            raise ValueError(f"matrix shape {self.matrix.shape} does not fit targets {self.targets}")
        if not is_unitary(self.matrix):
            raise ValueError(f"gate on {self.targets} is not unitary")

    def apply(self, vec: np.ndarray, layout: RegisterLayout) -> np.ndarray:
        t, order = _blocks(vec, layout, (), self.targets)
        return _unblock(np.einsum("ij,cjr->cir", self.matrix, t), order)


@dataclass(frozen=True, eq=False)
class Controlled:
    """Apply ``branches[v]`` to the targets when the controls hold value v (identity if absent)."""

    controls: tuple[str, ...]
    targets: tuple[str, ...]
    branches: dict

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "branches", {int(k): np.asarray(v, dtype=complex) for k, v in self.branches.items()})

    def registers(self) -> tuple[str, ...]:
        return self.controls + self.targets

    def check(self, layout: RegisterLayout) -> None:
        d = 1 << layout.size(self.targets)
        nc = 1 << layout.size(self.controls)
        for k, m in self.branches.items():
            if not 0 <= k < nc:
                raise ValueError(f"control value {k} out of range")
            if m.shape != (d, d) or not is_unitary(m):
                raise ValueError(f"branch {k} on {self.targets} is not a unitary of dimension {d}")

    def apply(self, vec: np.ndarray, layout: RegisterLayout) -> np.ndarray:
        t, order = _blocks(vec, layout, self.controls, self.targets)
        out = t.copy()
        for k, m in self.branches.items():
            out[k] = m @ t[k]
        return _unblock(out, order)


@dataclass(frozen=True, eq=False)
class Permutation:
    """Basis permutation |c, v> -> |c, table[c][v]> on the targets, controlled by c."""

    controls: tuple[str, ...]
    targets: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "targets", tuple(self.targets))
        tab = np.asarray(self.table, dtype=np.int64)
        if tab.ndim == 1:
            tab = tab[None, :]
        tab.setflags(write=False)
        object.__setattr__(self, "table", tab)

    @classmethod
    def xor(cls, controls, targets, fn, layout: RegisterLayout) -> "Permutation":
        """|c, v> -> |c, v xor fn(c)>."""
        nc = 1 << layout.size(controls)
        nt = 1 << layout.size(targets)
        v = np.arange(nt)
        return cls(controls, targets, np.stack([v ^ int(fn(c)) for c in range(nc)]))

    def registers(self) -> tuple[str, ...]:
        return self.controls + self.targets

    def check(self, layout: RegisterLayout) -> None:
        nc = 1 << layout.size(self.controls)
        nt = 1 << layout.size(self.targets)
        if self.table.shape != (nc, nt):
            raise ValueError(f"permutation table shape {self.table.shape}, expected {(nc, nt)}")
        for row in self.table:
            if sorted(row.tolist()) != list(range(nt)):
                raise ValueError("permutation table row is not a permutation")

    def apply(self, vec: np.ndarray, layout: RegisterLayout) -> np.ndarray:
        t, order = _blocks(vec, layout, self.controls, self.targets)
        out = np.empty_like(t)
        out[np.arange(t.shape[0])[:, None], self.table] = t
        return _unblock(out, order)

    def matrix(self, layout: RegisterLayout) -> np.ndarray:
        nc, nt = self.table.shape
        m = np.zeros((nc * nt, nc * nt))
        for c in range(nc):
            for v in range(nt):
                m[c * nt + self.table[c, v], c * nt + v] = 1
        return m


Gate = Unitary | Controlled | Permutation


@dataclass(frozen=True, eq=False)
class Round:
    speaker: str
    gates: tuple = ()
    sends: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "sends", tuple(self.sends))


# --- protocols -------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuantumSafeProtocol:
    """A coinless [t, c, l_1..l_t] safe quantum protocol.

    ``alice_encode[x]`` lists the basis values of ``alice_inputs`` for input x
    (likewise for Bob).  Other registers start in ``initial`` (default 0).
    The first round's ``safe`` registers form the c-qubit overhead; the rest of
    that round's sends is the l_1-qubit main part.  The recipient of the last
    message (Bob if there is none) applies ``final_gates`` and measures
    ``answer_regs``; ``answer_map`` turns the measured integer into an answer,
    unmapped values counting as errors.
    """

    layout: RegisterLayout
    alice_inputs: tuple[str, ...]
    bob_inputs: tuple[str, ...]
    alice_encode: dict
    bob_encode: dict
    rounds: tuple[Round, ...]
    answer_regs: tuple[str, ...]
    answer_map: dict
    safe: tuple[str, ...] = ()
    final_gates: tuple = ()
    initial: dict = field(default_factory=dict)
    starter: str | None = None
    name: str = ""

    def __post_init__(self):
        for attr in ("alice_inputs", "bob_inputs", "rounds", "answer_regs", "safe", "final_gates"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "alice_encode", {k: tuple(v) for k, v in self.alice_encode.items()})
        object.__setattr__(self, "bob_encode", {k: tuple(v) for k, v in self.bob_encode.items()})
        if self.starter is None:
            object.__setattr__(self, "starter", self.rounds[0].speaker if self.rounds else BOB)
        self.validate()

    # structure ------------------------------------------------------------------------------
    @property
    def E(self) -> tuple:
        return tuple(self.alice_encode)

    @property
    def F(self) -> tuple:
        return tuple(self.bob_encode)

    @property
    def t(self) -> int:
        return len(self.rounds)

    @property
    def answerer(self) -> str:
        return other_party(self.rounds[-1].speaker) if self.rounds else BOB

    @property
    def c(self) -> int:
        return self.layout.size(self.safe)

    @property
    def signature(self) -> Signature:
        ls = [self.layout.size(r.sends) for r in self.rounds]
        if ls:
            ls[0] -= self.c
        return Signature(self.t, self.c, tuple(ls), self.starter)

    @property
    def input_registers(self) -> tuple[str, ...]:
        return self.alice_inputs + self.bob_inputs

    def validate(self) -> None:
        lay = self.layout
        lay.check_capacity()
        names = set(lay.names)
        for group in (self.alice_inputs, self.bob_inputs, self.answer_regs, self.safe, tuple(self.initial)):
            missing = set(group) - names
            if missing:
                raise ValueError(f"unknown registers {sorted(missing)}")
        for regs, enc, owner in ((self.alice_inputs, self.alice_encode, ALICE), (self.bob_inputs, self.bob_encode, BOB)):
            for r in regs:
                if lay[r].owner != owner:
                    raise ValueError(f"input register {r} must start with {owner}")
            for k, vals in enc.items():
                if len(vals) != len(regs):
                    raise ValueError(f"encoding of {k!r} has {len(vals)} values for {len(regs)} registers")
                lay.basis_index(dict(zip(regs, vals)))
        if set(self.initial) & set(self.input_registers):
            raise ValueError("input registers cannot have initial values")
        lay.basis_index({k: v for k, v in self.initial.items()})
        if self.rounds and self.starter != self.rounds[0].speaker:
            raise ValueError("starter does not match the first round")
        owner = {r.name: r.owner for r in lay.registers}
        for j, rnd in enumerate(self.rounds):
            if j and rnd.speaker == self.rounds[j - 1].speaker:
                raise ValueError("rounds must alternate between the parties")
            for gate in rnd.gates:
                gate.check(lay)
                for r in gate.registers():
                    if owner[r] != rnd.speaker:
                        raise ValueError(f"round {j + 1}: {rnd.speaker} touches {r} owned by {owner[r]}")
            for r in rnd.sends:
                if r not in owner:
                    raise ValueError(f"unknown register {r}")
                if owner[r] != rnd.speaker:
                    raise ValueError(f"round {j + 1}: {rnd.speaker} sends {r} owned by {owner[r]}")
                owner[r] = other_party(rnd.speaker)
        if self.safe and self.rounds and not set(self.safe) <= set(self.rounds[0].sends):
            raise ValueError("safe registers must be part of the first message")
        who = self.answerer
        for gate in self.final_gates:
            gate.check(lay)
            for r in gate.registers():
                if owner[r] != who:
                    raise ValueError(f"final gate touches {r}, not owned by the answerer {who}")
        for r in self.answer_regs:
            if owner[r] != who:
                raise ValueError(f"answer register {r} not owned by the answerer {who}")

    def owners_after(self, rounds: int) -> dict:
        owner = {r.name: r.owner for r in self.layout.registers}
        for rnd in self.rounds[:rounds]:
            for r in rnd.sends:
                owner[r] = other_party(rnd.speaker)
        return owner

    # simulation -------------------------------------------------------------------------------
    def initial_vector(self, x, y) -> np.ndarray:
        vals = dict(self.initial)
        vals.update(zip(self.alice_inputs, self.alice_encode[x]))
        vals.update(zip(self.bob_inputs, self.bob_encode[y]))
        v = np.zeros(self.layout.dim, dtype=complex)
        v[self.layout.basis_index(vals)] = 1.0
        return v

    def trajectory(self, x, y) -> list[np.ndarray]:
        """State after loading inputs, after each round, and after the final gates."""
        vec = self.initial_vector(x, y)
        out = [vec]
        for rnd in self.rounds:
            for gate in rnd.gates:
                vec = gate.apply(vec, self.layout)
            out.append(vec)
        for gate in self.final_gates:
            vec = gate.apply(vec, self.layout)
        out.append(vec)
        return out

    def final_vector(self, x, y) -> np.ndarray:
        return self.trajectory(x, y)[-1]

    def answer_distribution(self, x, y) -> dict:
        return answer_law(self, self.final_vector(x, y))


def answer_law(p: QuantumSafeProtocol, vec: np.ndarray) -> dict:
    amps = vector_as_matrix(vec, p.layout, p.answer_regs)
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    law: dict = {}
    for k, pr in enumerate(probs):
        if pr <= 0:
            continue
        g = p.answer_map.get(k, ABORT)
        law[g] = law.get(g, 0.0) + float(pr)
    return law


@dataclass(frozen=True, eq=False)
class QuantumMixture:
    """Public-coin quantum protocol: coinless protocol k runs with probability w_k."""

    components: tuple[tuple[Fraction, QuantumSafeProtocol], ...]
    name: str = ""

    def __post_init__(self):
        comps = tuple((Fraction(w), q) for w, q in self.components if w)
        if not comps or sum(w for w, _ in comps) != 1:
            raise ValueError("mixture weights must be positive and sum to 1")
        sig = comps[0][1].signature
        for _, q in comps[1:]:
            if q.signature != sig:
                raise ValueError("mixture components have different signatures")
            if set(q.E) != set(comps[0][1].E) or set(q.F) != set(comps[0][1].F):
                raise ValueError("mixture components have different input sets")
        object.__setattr__(self, "components", comps)

    @property
    def signature(self) -> Signature:
        return self.components[0][1].signature

    @property
    def E(self) -> tuple:
        return self.components[0][1].E

    @property
    def F(self) -> tuple:
        return self.components[0][1].F

    def answer_distribution(self, x, y) -> dict:
        law: dict = {}
        for w, q in self.components:
            for g, pr in q.answer_distribution(x, y).items():
                law[g] = law.get(g, 0.0) + float(w) * pr
        return law


def as_mixture(p) -> QuantumMixture:
    return p if isinstance(p, QuantumMixture) else QuantumMixture(((Fraction(1), p),))


def flatten_mixtures(weighted: Iterable[tuple[Fraction, Any]], name: str = "") -> QuantumMixture:
    comps = []
    for w, q in weighted:
        for v, r in as_mixture(q).components:
            comps.append((Fraction(w) * v, r))
    return QuantumMixture(tuple(comps), name)


def pair_errors_quantum(p, g: GameSpec, pairs: Iterable) -> dict:
    out = {}
    for x, y in pairs:
        law = p.answer_distribution(x, y)
        out[(x, y)] = max(0.0, 1.0 - law.get(g.f(x, y), 0.0))
    return out


def eval_quantum(p, g: GameSpec, d: JointDistribution | str | None = "worst") -> ErrorReport:
    """Per-pair error by state-vector simulation; mixtures average their components."""
    _check_io(p, g)
    dist = d if isinstance(d, JointDistribution) else None
    pairs = _pairs(g, dist)
    per_pair = pair_errors_quantum(p, g, pairs)
    worst_pair = max(g.domain, key=lambda k: per_pair[k]) if g.domain else None
    eps_d = None
    if dist is not None:
        eps_d = float(sum(float(pr) * per_pair[(x, y)] for x, y, pr in dist))
    sig = p.signature
    return ErrorReport(per_pair, eps_d, per_pair[worst_pair] if worst_pair is not None else 0.0, worst_pair,
                       {"signature": str(sig), "qubits": _qubits(p)})


def _qubits(p) -> int:
    return max(q.layout.total for _, q in as_mixture(p).components)


def distributional_error_quantum(p, g: GameSpec, d: JointDistribution) -> float:
    errs = pair_errors_quantum(p, g, [(x, y) for x, y, _ in d])
    return float(sum(float(pr) * errs[(x, y)] for x, y, pr in d))


def first_message_encoding_quantum(p: QuantumSafeProtocol, d: JointDistribution) -> Encoding:
    """sigma_x = reduced state of the first message given the starter's input."""
    if not isinstance(p, QuantumSafeProtocol):
        raise TypeError("first message encoding needs a coinless protocol")
    if p.t == 0 or not p.rounds[0].sends:
        raise ValueError("protocol has no first message")
    sends = p.rounds[0].sends
    sub = p.layout.sub(sends)
    marg = d.marginal_x() if p.starter == ALICE else d.marginal_y()
    words = []
    fixed_y, fixed_x = p.F[0], p.E[0]
    for v in marg:
        x, y = (v, fixed_y) if p.starter == ALICE else (fixed_x, v)
        vec = p.trajectory(x, y)[1]
        words.append(DensityMatrix(reduced_from_vector(vec, p.layout, sub.names), sub))
    return Encoding(tuple(marg), tuple(marg.values()), tuple(words))


def fix_public_coin_quantum(p, g: GameSpec, d: JointDistribution) -> tuple[QuantumSafeProtocol, float]:
    """Component with the least distributional error (first one on ties)."""
    if isinstance(p, QuantumSafeProtocol):
        return p, distributional_error_quantum(p, g, d)
    best = None
    for _, q in p.components:
        e = distributional_error_quantum(q, g, d)
        if best is None or e < best[1] - 1e-15:
            best = (q, e)
    if len(p.components) == 1:
        return p.components[0][1], best[1]
    return best


# --- verifiers -------------------------------------------------------------------------------

@dataclass
class CheckReport:
    ok: bool
    max_deviation: float
    details: dict = field(default_factory=dict)


def verify_safe(p) -> CheckReport:
    """The safe part of the first message has the same reduced state for every input pair."""
    if isinstance(p, QuantumMixture):
        reps = [verify_safe(q) for _, q in p.components]
        return CheckReport(all(r.ok for r in reps), max(r.max_deviation for r in reps), {"components": len(reps)})
    if not p.safe or not p.rounds:
        return CheckReport(True, 0.0, {"c": 0})
    ref = None
    worst = 0.0
    worst_pair = None
    for x in p.E:
        for y in p.F:
            vec = p.trajectory(x, y)[1]
            rho = reduced_from_vector(vec, p.layout, p.layout.sub(p.safe).names)
            if ref is None:
                ref = rho
                continue
            dev = trace_norm(rho - ref)
            if dev > worst:
                worst, worst_pair = dev, (x, y)
    return CheckReport(worst <= STATE_TOL, worst, {"c": p.c, "worst_pair": worst_pair})


def verify_secure(p) -> CheckReport:
    """Inputs are never sent or measured, and stay in their basis state after every round."""
    if isinstance(p, QuantumMixture):
        reps = [verify_secure(q) for _, q in p.components]
        return CheckReport(all(r.ok for r in reps), max(r.max_deviation for r in reps), {"components": len(reps)})
    inputs = set(p.input_registers)
    problems = []
    for j, rnd in enumerate(p.rounds):
        if inputs & set(rnd.sends):
            problems.append(f"round {j + 1} sends {sorted(inputs & set(rnd.sends))}")
    if inputs & set(p.answer_regs):
        problems.append("input register measured")
    worst = 0.0
    if inputs:
        names = p.layout.sub(inputs).names
        sub = p.layout.sub(inputs)
        for x in p.E:
            for y in p.F:
                vals = dict(zip(p.alice_inputs, p.alice_encode[x]))
                vals.update(zip(p.bob_inputs, p.bob_encode[y]))
                e = np.zeros(sub.dim)
                e[sub.basis_index(vals)] = 1
                target = np.outer(e, e)
                for vec in p.trajectory(x, y)[1:]:
                    worst = max(worst, trace_norm(reduced_from_vector(vec, p.layout, names) - target))
    return CheckReport(not problems and worst <= STATE_TOL, worst, {"problems": problems})


# --- transformations -------------------------------------------------------------------------

def _restrict_controls(gate, layout: RegisterLayout, constants: dict):
    fixed = [c for c in gate.controls if c in constants]
    if any(t in constants for t in gate.targets):
        raise ValueError(f"cannot fix register targeted by a gate: {gate.targets}")
    if not fixed:
        return gate
    keep = [c for c in gate.controls if c not in constants]
    sizes = {c: layout[c].qubits for c in gate.controls}

    def split(v: int) -> dict:
        out = {}
        for c in reversed(gate.controls):
            out[c] = v & ((1 << sizes[c]) - 1)
            v >>= sizes[c]
        return out

    def join(vals: dict) -> int:
        v = 0
        for c in keep:
            v = (v << sizes[c]) | vals[c]
        return v

    ncs = 1 << sum(sizes[c] for c in gate.controls)
    if isinstance(gate, Controlled):
        branches = {}
        for v, m in gate.branches.items():
            vals = split(v)
            if all(vals[c] == constants[c] for c in fixed):
                branches[join(vals)] = m
        if not keep:
            m = branches.get(0)
            return None if m is None else Unitary(gate.targets, m)
        return Controlled(tuple(keep), gate.targets, branches)
    if isinstance(gate, Permutation):
        rows = {}
        for v in range(ncs):
            vals = split(v)
            if all(vals[c] == constants[c] for c in fixed):
                rows[join(vals)] = gate.table[v]
        table = np.stack([rows[k] for k in range(len(rows))])
        return Permutation(tuple(keep), gate.targets, table)
    return gate


def specialize(p: QuantumSafeProtocol, constants: dict, **overrides) -> QuantumSafeProtocol:
    """Remove registers holding known basis values, slicing every gate they control.

    ``overrides`` replaces protocol fields (new inputs, encoders, extra gates...).
    """
    lay = p.layout
    keep_regs = tuple(r for r in lay.registers if r.name not in constants)
    new_layout = RegisterLayout(keep_regs)

    def fix(gates):
        out = []
        for gt in gates:
            g2 = _restrict_controls(gt, lay, constants)
            if g2 is not None:
                out.append(g2)
        return tuple(out)

    rounds = tuple(Round(r.speaker, fix(r.gates), tuple(s for s in r.sends if s not in constants)) for r in p.rounds)
    fields = dict(
        layout=new_layout,
        alice_inputs=tuple(r for r in p.alice_inputs if r not in constants),
        bob_inputs=tuple(r for r in p.bob_inputs if r not in constants),
        alice_encode=p.alice_encode,
        bob_encode=p.bob_encode,
        rounds=rounds,
        answer_regs=p.answer_regs,
        answer_map=p.answer_map,
        safe=tuple(s for s in p.safe if s not in constants),
        final_gates=fix(p.final_gates),
        initial={k: v for k, v in p.initial.items() if k not in constants},
        starter=p.starter,
        name=p.name,
    )
    fields.update(overrides)
    return QuantumSafeProtocol(**fields)


def append_round(p: QuantumSafeProtocol, rnd: Round, answer_regs=None, answer_map=None,
                 final_gates=()) -> QuantumSafeProtocol:
    """Protocol with one more round; the new recipient applies ``final_gates`` and answers."""
    return replace(p, rounds=p.rounds + (rnd,), final_gates=tuple(final_gates),
                   answer_regs=tuple(answer_regs if answer_regs is not None else p.answer_regs),
                   answer_map=answer_map if answer_map is not None else p.answer_map)
