"""Cell probe schemes (classical decision trees and quantum query circuits) and their
compilation into query/data communication protocols.

A scheme stores data d as a table T_d of s cells of w bits.  A quantum scheme
works on registers Q (query index), J (address, log s qubits), B (data, w
qubits) and its own work registers; between consecutive gate lists it calls
the oracle |j, b, z> -> |j, b xor T_d[j], z>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from ..protocols.classical import ClassicalProtocol, bits, eval_classical
from ..protocols.coins import ALICE, BOB
from ..protocols.embed import width
from ..protocols.games import GameSpec
from ..protocols.quantum import Permutation, QuantumSafeProtocol, Round, Unitary, eval_quantum
from ..tensor import Register, RegisterLayout, reduced_from_vector, state_prep_unitary

ADDRESS_TOL = 1e-8


def _log2_exact(s: int) -> int:
    if s < 1 or s & (s - 1):
        raise ValueError(f"cell count {s} must be a power of 2")
    return s.bit_length() - 1


@dataclass(frozen=True, eq=False)
class ClassicalCellProbeScheme:
    """``probe(q, words)`` gives the next address from the words read so far; ``answer(q, words)`` the result."""

    s: int
    w: int
    t: int
    queries: tuple
    datas: tuple
    storage: Callable[[Any], Sequence[int]]
    probe: Callable[[Any, tuple], int]
    answer: Callable[[Any, tuple], Any]
    name: str = ""

    def table(self, d) -> tuple[int, ...]:
        tab = tuple(int(v) for v in self.storage(d))
        if len(tab) != self.s or any(not 0 <= v < (1 << self.w) for v in tab):
            raise ValueError(f"table for {d!r} does not fit {self.s} cells of {self.w} bits")
        return tab

    def run(self, q, d) -> tuple[Any, tuple[int, ...]]:
        tab = self.table(d)
        words: tuple = ()
        addrs = []
        for _ in range(self.t):
            j = self.probe(q, words)
            addrs.append(j)
            words = words + (tab[j],)
        return self.answer(q, words), tuple(addrs)


@dataclass(frozen=True, eq=False)
class QuantumCellProbeScheme:
    """``steps`` holds t + 1 gate lists on ``layout``; the oracle acts between consecutive lists.

    With ``address_only`` set, ``fixed_states[i]`` is the declared state of B
    just before oracle call i + 1.
    """

    s: int
    w: int
    t: int
    queries: tuple
    datas: tuple
    storage: Callable[[Any], Sequence[int]]
    work: tuple[tuple[str, int], ...]
    steps: tuple
    answer_regs: tuple[str, ...]
    answer_map: dict
    address_only: bool = False
    fixed_states: tuple | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(tuple(s) for s in self.steps))
        if len(self.steps) != self.t + 1:
            raise ValueError("need t + 1 gate lists")
        for gates in self.steps:
            for gt in gates:
                gt.check(self.layout)

    @property
    def layout(self) -> RegisterLayout:
        regs = [Register("Q", width(len(self.queries)), ALICE), Register("J", _log2_exact(self.s), ALICE),
                Register("B", self.w, ALICE)]
        regs += [Register(n, q, ALICE) for n, q in self.work]
        return RegisterLayout(tuple(regs))

    def table(self, d) -> tuple[int, ...]:
        tab = tuple(int(v) for v in self.storage(d))
        if len(tab) != self.s or any(not 0 <= v < (1 << self.w) for v in tab):
            raise ValueError(f"table for {d!r} does not fit {self.s} cells of {self.w} bits")
        return tab

    def oracle(self, d) -> Permutation:
        tab = self.table(d)
        nb = 1 << self.w
        return Permutation(("J",), ("B",), np.array([[v ^ tab[j] for v in range(nb)] for j in range(self.s)]))

    def trajectory(self, q, d) -> tuple[list[np.ndarray], np.ndarray]:
        """States just before each oracle call, and the final state."""
        lay = self.layout
        vec = np.zeros(lay.dim, dtype=complex)
        vec[lay.basis_index({"Q": self.queries.index(q)})] = 1
        orc = self.oracle(d)
        before = []
        for i, gates in enumerate(self.steps):
            for gt in gates:
                vec = gt.apply(vec, lay)
            if i < self.t:
                before.append(vec)
                vec = orc.apply(vec, lay)
        return before, vec

    def answer_distribution(self, q, d) -> dict:
        _, vec = self.trajectory(q, d)
        probs = np.real(np.diag(reduced_from_vector(vec, self.layout, self.answer_regs)))
        out: dict = {}
        for v, pr in enumerate(probs):
            if pr > 1e-15:
                key = self.answer_map.get(v, "<invalid>")
                out[key] = out.get(key, 0.0) + float(pr)
        return out


def scheme_errors(scheme, g: GameSpec) -> dict:
    """Error probability of the scheme for every (query, data) pair of g."""
    out = {}
    for q, d in g.domain:
        if isinstance(scheme, ClassicalCellProbeScheme):
            out[(q, d)] = 0.0 if scheme.run(q, d)[0] == g.f(q, d) else 1.0
        else:
            out[(q, d)] = 1.0 - scheme.answer_distribution(q, d).get(g.f(q, d), 0.0)
    return out


@dataclass
class AddressOnlyReport:
    ok: bool
    residual: float
    states: list
    details: dict = field(default_factory=dict)


def check_address_only(scheme: QuantumCellProbeScheme) -> AddressOnlyReport:
    """Before each oracle call the data register must be in a fixed pure state, unentangled and
    independent of (q, d).  The residual is max 1 - <theta_i| rho_B |theta_i>."""
    states = list(scheme.fixed_states) if scheme.fixed_states is not None else [None] * scheme.t
    states = [None if v is None else np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in states]
    worst, where = 0.0, None
    for q in scheme.queries:
        for d in scheme.datas:
            before, _ = scheme.trajectory(q, d)
            for i, vec in enumerate(before):
                rho = reduced_from_vector(vec, scheme.layout, ("B",))
                if states[i] is None:
                    vals, vecs = np.linalg.eigh(rho)
                    top = vecs[:, -1]
                    k = int(np.argmax(np.abs(top)))
                    states[i] = top * (abs(top[k]) / top[k])
                th = states[i]
                res = float(1.0 - np.real(th.conj() @ rho @ th))
                if res > worst:
                    worst, where = res, (q, d, i + 1)
    return AddressOnlyReport(worst <= ADDRESS_TOL, worst, states, {"worst_case": where})


# --- compilation ---------------------------------------------------------------------------

def _compile_classical(scheme: ClassicalCellProbeScheme) -> ClassicalProtocol:
    ls = _log2_exact(scheme.s)
    lengths = (ls, ls + scheme.w) * scheme.t

    def words_of(tr: tuple) -> tuple:
        return tuple(int(m[ls:], 2) for m in tr[1::2])

    def message(j):
        if j % 2 == 0:
            return lambda q, tr, _c, _p: bits(scheme.probe(q, words_of(tr)), ls)

        def bob(d, tr, _c, _p):
            j_addr = int(tr[-1], 2)
            return tr[-1] + bits(scheme.table(d)[j_addr], scheme.w)
        return bob

    return ClassicalProtocol(tuple(scheme.queries), tuple(scheme.datas), ALICE, lengths,
                             tuple(message(j) for j in range(2 * scheme.t)),
                             lambda q, tr, _c, _p: scheme.answer(q, words_of(tr)), name=f"compiled({scheme.name})")


def _swap(w: int) -> np.ndarray:
    d = 1 << w
    m = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            m[b * d + a, a * d + b] = 1
    return m


def _compile_quantum(scheme: QuantumCellProbeScheme) -> QuantumSafeProtocol:
    base = scheme.layout
    nd = len(scheme.datas)
    regs = list(base.registers) + [Register("D", width(nd), BOB)]
    addr_only = scheme.address_only
    if addr_only:
        regs += [Register(f"T{i}", scheme.w, BOB) for i in range(1, scheme.t + 1)]
    layout = RegisterLayout(tuple(regs))
    ls = _log2_exact(scheme.s)
    nb = 1 << scheme.w
    dsize = 1 << layout["D"].qubits
    tables = [scheme.table(d) for d in scheme.datas]

    def oracle_gate(target: str) -> Permutation:
        rows = []
        for c in range(dsize * scheme.s):
            di, j = divmod(c, scheme.s)
            word = tables[di][j] if di < nd else 0
            rows.append([v ^ word for v in range(nb)])
        return Permutation(("D", "J"), (target,), np.array(rows))

    rounds = []
    thetas = check_address_only(scheme).states if addr_only else None
    for i in range(scheme.t):
        pre = (Unitary(("B", f"T{i}"), _swap(scheme.w)),) if addr_only and i else ()
        rounds.append(Round(ALICE, pre + scheme.steps[i], ("J",) if addr_only else ("J", "B")))
        if addr_only:
            reg = f"T{i + 1}"
            bob_gates = (Unitary((reg,), state_prep_unitary(thetas[i])), oracle_gate(reg))
            rounds.append(Round(BOB, bob_gates, ("J", reg)))
        else:
            rounds.append(Round(BOB, (oracle_gate("B"),), ("J", "B")))
    final = ((Unitary(("B", f"T{scheme.t}"), _swap(scheme.w)),) if addr_only else ()) + scheme.steps[scheme.t]
    return QuantumSafeProtocol(
        layout=layout, alice_inputs=("Q",), bob_inputs=("D",),
        alice_encode={q: (k,) for k, q in enumerate(scheme.queries)},
        bob_encode={d: (k,) for k, d in enumerate(scheme.datas)},
        rounds=tuple(rounds), answer_regs=scheme.answer_regs, answer_map=scheme.answer_map,
        final_gates=final, name=f"compiled({scheme.name})")


def compile_cellprobe(scheme, g: GameSpec | None = None):
    """2t-round protocol where Alice holds the query and Bob the data.

    Classical schemes give [2t; log s, log s + w, ...]^A protocols.  Quantum
    schemes give [2t, 0, log s + w, log s + w, ...]^A protocols, or
    [2t, 0, log s, log s + w, ...]^A when flagged address-only: Bob then keeps
    one register per probe prepared in the declared data state, applies the
    oracle to it and returns it with the address; Alice swaps it into B.
    """
    if isinstance(scheme, ClassicalCellProbeScheme):
        p = _compile_classical(scheme)
    else:
        if scheme.address_only:
            rep = check_address_only(scheme)
            if not rep.ok:
                raise ValueError(f"address-only check failed: residual {rep.residual:.3g} at {rep.details['worst_case']}")
        p = _compile_quantum(scheme)
    if g is not None and (set(g.E) - set(p.E) or set(g.F) - set(p.F)):
        raise ValueError("game inputs do not match the scheme's queries and data")
    return p


@dataclass
class CompileAudit:
    signature_ok: bool
    expected: tuple
    lengths: tuple
    max_error_gap: float

    @property
    def ok(self) -> bool:
        return self.signature_ok and self.max_error_gap <= 1e-9


def compile_audit(scheme, g: GameSpec, p=None) -> CompileAudit:
    """Message lengths against the expected signature and per-pair error agreement."""
    p = p if p is not None else compile_cellprobe(scheme, g)
    ls = _log2_exact(scheme.s)
    first = ls if (isinstance(scheme, ClassicalCellProbeScheme) or scheme.address_only) else ls + scheme.w
    expected = (first, ls + scheme.w) * scheme.t
    sig = p.signature
    rep = eval_classical(p, g) if isinstance(p, ClassicalProtocol) else eval_quantum(p, g)
    ref = scheme_errors(scheme, g)
    gap = max(abs(float(rep.per_pair[k]) - ref[k]) for k in ref)
    ok = sig.lengths == expected and sig.t == 2 * scheme.t and sig.c == 0 and sig.starter == ALICE
    return CompileAudit(ok, expected, sig.lengths, gap)


# --- example schemes -----------------------------------------------------------------------

NONE = -1


def _pred_storage(S: tuple) -> tuple[int, int, int, int]:
    e = sorted(S)
    e = e + [e[-1]] * (3 - len(e))
    return (e[1], e[0], e[2], 0)


def binary_search_scheme(universe: int = 4) -> ClassicalCellProbeScheme:
    """Predecessor over {0..3} for non-empty sets of at most 3 elements: s = 4, w = 2, t = 2.

    Cell 0 holds the median, cells 1 and 2 the lower and upper elements
    (duplicated when |S| < 3); the answer is NONE when q is below min S.
    """
    from itertools import combinations
    if universe != 4:
        raise ValueError("the example is fixed to the universe {0..3}")
    datas = tuple(c for r in (1, 2, 3) for c in combinations(range(4), r))

    def probe(q, words):
        if not words:
            return 0
        return 2 if q >= words[0] else 1

    def answer(q, words):
        mid, side = words
        if q >= mid:
            return side if q >= side else mid
        return side if q >= side else NONE

    return ClassicalCellProbeScheme(4, 2, 2, tuple(range(4)), datas, _pred_storage, probe, answer, "binary-search")


def predecessor_game(scheme) -> GameSpec:
    def pred(q, S):
        below = [y for y in S if y <= q]
        return max(below) if below else NONE
    return GameSpec.from_function(scheme.queries, scheme.datas, (NONE,) + tuple(range(4)), pred, name="PRED")


def _hadamard(k: int) -> np.ndarray:
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    out = np.array([[1.0]])
    for _ in range(k):
        out = np.kron(out, h)
    return out


def grover_scheme() -> QuantumCellProbeScheme:
    """Search for the single marked cell among 4 with one query; the data qubit holds (|0> - |1>)/sqrt(2)."""
    minus = np.array([1, -1]) / math.sqrt(2)
    h2 = _hadamard(2)
    diffusion = h2 @ (2 * np.diag([1, 0, 0, 0]) - np.eye(4)) @ h2
    x = np.array([[0, 1], [1, 0]])
    steps = ((Unitary(("J",), h2), Unitary(("B",), _hadamard(1) @ x)), (Unitary(("J",), diffusion),))
    return QuantumCellProbeScheme(
        4, 1, 1, (0,), (0, 1, 2, 3), lambda d: tuple(int(j == d) for j in range(4)), (), steps,
        ("J",), {v: v for v in range(4)}, address_only=True, fixed_states=(minus,), name="grover")


def marked_cell_game() -> GameSpec:
    return GameSpec.from_function((0,), (0, 1, 2, 3), (0, 1, 2, 3), lambda q, d: d, name="FIND")


def embed_classical_scheme(scheme: ClassicalCellProbeScheme) -> QuantumCellProbeScheme:
    """Reversible version of a decision tree: words are copied to history registers and B is reset
    before the next probe, so B is |0> at every oracle call."""
    ls = _log2_exact(scheme.s)
    t, w = scheme.t, scheme.w
    answers = sorted({scheme.answer(q, words) for q in scheme.queries
                      for words in np.ndindex(*([1 << w] * t))}, key=repr)
    code = {a: k for k, a in enumerate(answers)}
    hist = [(f"H{i}", w) for i in range(1, t)]
    work = tuple(hist) + (("A", width(len(answers))),)
    probe_layout = RegisterLayout((Register("Q", width(len(scheme.queries))), Register("J", ls), Register("B", w))
                                  + tuple(Register(n, q) for n, q in work))

    def words(vals: list[int]) -> tuple:
        return tuple(int(v) for v in vals)

    def split(v: int, sizes: list[int]) -> list[int]:
        out = []
        for s in reversed(sizes):
            out.append(v & ((1 << s) - 1))
            v >>= s
        return out[::-1]

    qs = scheme.queries
    steps = []
    steps.append((Permutation.xor(("Q",), ("J",),
                                  lambda c: scheme.probe(qs[c], ()) if c < len(qs) else 0, probe_layout),))
    for i in range(1, t + 1):
        gates = []
        prior = [f"H{k}" for k in range(1, i)]
        if i < t:
            h = f"H{i}"
            gates.append(Permutation.xor(("B",), (h,), lambda c: c, probe_layout))
            gates.append(Permutation.xor((h,), ("B",), lambda c: c, probe_layout))
            ctrl = ("Q",) + tuple(prior) + (h,)
            sizes = [probe_layout[r].qubits for r in ctrl]

            def addr(c, sizes=sizes, i=i):
                parts = split(c, sizes)
                if parts[0] >= len(qs):
                    return 0
                q, ws = qs[parts[0]], words(parts[1:])
                return scheme.probe(q, ws[: i - 1]) ^ scheme.probe(q, ws)
            gates.append(Permutation.xor(ctrl, ("J",), addr, probe_layout))
        else:
            ctrl = ("Q",) + tuple(prior) + ("B",)
            sizes = [probe_layout[r].qubits for r in ctrl]

            def ans(c, sizes=sizes):
                parts = split(c, sizes)
                if parts[0] >= len(qs):
                    return 0
                return code[scheme.answer(qs[parts[0]], words(parts[1:]))]
            gates.append(Permutation.xor(ctrl, ("A",), ans, probe_layout))
        steps.append(tuple(gates))
    zero = np.zeros(1 << w)
    zero[0] = 1
    return QuantumCellProbeScheme(scheme.s, w, t, scheme.queries, scheme.datas, scheme.storage, work, tuple(steps),
                                  ("A",), {k: a for a, k in code.items()}, address_only=True,
                                  fixed_states=(zero,) * t, name=f"reversible({scheme.name})")


def leaky_scheme() -> QuantumCellProbeScheme:
    """Grover-like scheme that also writes the query bit into the data register (not address-only)."""
    h2 = _hadamard(2)
    steps = ((Unitary(("J",), h2), Permutation(("Q",), ("B",), np.array([[0, 1], [1, 0]]))),
             (Unitary(("J",), np.eye(4)),))
    return QuantumCellProbeScheme(4, 1, 1, (0, 1), (0, 1, 2, 3), lambda d: tuple(int(j == d) for j in range(4)), (),
                                  steps, ("J",), {v: v for v in range(4)}, address_only=True,
                                  fixed_states=(np.array([1.0, 0.0]),), name="leaky")
