"""Seeded random states, encodings and distributions for property suites."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..info import Encoding
from ..tensor import DensityMatrix, PureState, Register, RegisterLayout


def case_rng(seed: int, case: int) -> np.random.Generator:
    """Independent stream for one case, split from the suite seed by case index."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), case]))


def qubit_layout(sizes, names=None, owner: str = "A") -> RegisterLayout:
    names = names or [chr(ord("A") + i) for i in range(len(sizes))]
    return RegisterLayout(tuple(Register(n, q, owner) for n, q in zip(names, sizes)))


def random_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_pure(rng: np.random.Generator, layout: RegisterLayout) -> PureState:
    return PureState(random_vector(rng, layout.dim), layout)


def random_density(rng: np.random.Generator, layout: RegisterLayout, rank: int | None = None) -> DensityMatrix:
    d = layout.dim
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, layout)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_rational_dist(rng: np.random.Generator, k: int, denom: int = 8, full_support: bool = True) -> list[Fraction]:
    """Random distribution on k outcomes with weights in multiples of 1/(denom*k)."""
    total = denom * k
    lo = 1 if full_support else 0
    cuts = sorted(rng.integers(0, total - lo * k + 1, size=k - 1).tolist())
    parts = [b - a for a, b in zip([0] + cuts, cuts + [total - lo * k])]
    return [Fraction(p + lo, total) for p in parts]


def random_classical_encoding(rng: np.random.Generator, nx: int, nm: int) -> Encoding:
    priors = random_rational_dist(rng, nx)
    words = []
    for _ in range(nx):
        w = random_rational_dist(rng, nm, full_support=bool(rng.integers(2)))
        words.append({m: p for m, p in enumerate(w) if p})
    return Encoding(tuple(range(nx)), tuple(priors), tuple(words))


def random_quantum_encoding(rng: np.random.Generator, nx: int, qubits: int) -> Encoding:
    layout = qubit_layout([qubits], ["M"])
    priors = random_rational_dist(rng, nx)
    words = tuple(random_density(rng, layout, rank=int(rng.integers(1, layout.dim + 1))) for _ in range(nx))
    return Encoding(tuple(range(nx)), tuple(priors), words)


def random_quantum_protocol(rng: np.random.Generator, t: int, ne: int = 2, nf: int = 2, l1: int = 1,
                            c: int = 0, max_qubits: int = 12):
    """Random secure safe [t, c, l1, 1, ..]^A protocol with 1-qubit work registers per party.

    Inputs act only as controls.  The safe part is half of a Bell pair with
    Alice's work qubit, so its reduced state does not depend on the inputs.
    ``max_qubits`` bounds the size of the protocol after one round reduction.
    """
    from ..protocols.quantum import Controlled, QuantumSafeProtocol, Round, Unitary
    from ..protocols.embed import width
    from ..tensor import state_prep_unitary

    wx, wy = width(ne), width(nf)
    regs = [Register("X", wx, "A"), Register("Y", wy, "B"), Register("WA", 1, "A"), Register("WB", 1, "B"),
            Register("M1", l1, "A")]
    if c:
        regs.append(Register("S", c, "A"))
    for j in range(2, t + 1):
        regs.append(Register(f"M{j}", 1, "A" if j % 2 else "B"))
    layout = RegisterLayout(tuple(regs))
    if layout.total + wx + l1 + c > max_qubits:
        raise ValueError("protocol would exceed the qubit cap after reduction")

    def ctrl(inp: str, targets: tuple, n_inputs: int) -> Controlled:
        d = 1 << layout.size(targets)
        return Controlled((inp,), targets, {v: random_unitary(rng, d) for v in range(n_inputs)})

    rounds = []
    first = []
    if c:
        bell = np.zeros(1 << (c + 1), dtype=complex)
        bell[0] = bell[-1] = 1 / np.sqrt(2)
        first.append(Unitary(("S", "WA"), state_prep_unitary(bell)))
    first.append(ctrl("X", ("WA", "M1"), ne))
    rounds.append(Round("A", tuple(first), ("M1",) + (("S",) if c else ())))
    prev = ("M1",) + (("S",) if c else ())
    for j in range(2, t + 1):
        spk, inp, work, n_in = ("A", "X", "WA", ne) if j % 2 else ("B", "Y", "WB", nf)
        mine = tuple(r for r in prev if layout[r].qubits) if j == 2 else (f"M{j - 1}",)
        rounds.append(Round(spk, (ctrl(inp, (work,) + mine + (f"M{j}",), n_in),), (f"M{j}",)))
        prev = (f"M{j}",)
    ans = "B" if t % 2 else "A"
    inp, work, n_in = ("Y", "WB", nf) if ans == "B" else ("X", "WA", ne)
    final = (ctrl(inp, (work,) + prev, n_in),)
    return QuantumSafeProtocol(
        layout=layout, alice_inputs=("X",), bob_inputs=("Y",),
        alice_encode={x: (x,) for x in range(ne)}, bob_encode={y: (y,) for y in range(nf)},
        rounds=tuple(rounds), answer_regs=(work,), answer_map={0: 0, 1: 1},
        safe=("S",) if c else (), final_gates=final, name=f"random-q{t}")


def random_coin(rng: np.random.Generator, max_values: int = 3):
    from ..protocols.coins import FiniteCoin
    k = int(rng.integers(1, max_values + 1))
    return FiniteCoin(tuple(enumerate(random_rational_dist(rng, k, denom=4))))


def random_joint(rng: np.random.Generator, E, F):
    from ..info import JointDistribution
    pairs = [(x, y) for x in E for y in F]
    w = random_rational_dist(rng, len(pairs), full_support=bool(rng.integers(2)))
    if not any(w):
        w[0] = Fraction(1)
    return JointDistribution.from_dict(dict(zip(pairs, w)))


def random_classical_case(rng: np.random.Generator, zero_information: bool = False):
    """(game, private-coin protocol started by Alice, distribution) with |E|, |F| <= 4, l_1 <= 2, t <= 3.

    With ``zero_information`` the first message depends on Alice's coin only.
    """
    from ..protocols.classical import ClassicalProtocol, bits, random_table_protocol
    from ..protocols.games import random_game
    ne, nf, t = (int(v) for v in rng.integers(1, [5, 5, 4]))
    lengths = [int(v) for v in rng.integers(1, 3, size=t)]
    g = random_game(rng, ne, nf)
    p = random_table_protocol(rng, g.E, g.F, g.G, lengths, "A", random_coin(rng), random_coin(rng))
    if zero_information:
        table = {a: bits(int(rng.integers(1 << lengths[0])), lengths[0]) for a, _ in p.alice_coin.items()}
        first = lambda x, tr, a, pub: table[a]
        p = ClassicalProtocol(p.E, p.F, p.starter, p.lengths, (first,) + p.messages[1:], p.answer,
                              p.alice_coin, p.bob_coin, p.public_coin, None, "random-zero-info")
    return g, p, random_joint(rng, g.E, g.F)
