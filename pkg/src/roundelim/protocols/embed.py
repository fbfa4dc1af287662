"""Reversible embedding of classical protocols as quantum protocols.

Each message is computed into a fresh register by an XOR permutation controlled
on the speaker's input, private coin and the messages it has received.  The
speaker's own earlier messages are recomputed inside the classical function
rather than stored, so no history registers are needed.  Private
coins become registers prepared in sum_r sqrt(p_r)|r>, used only as controls;
a public coin becomes a mixture over its values.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..tensor import ALICE, BOB, Register, RegisterLayout, state_prep_unitary
from .classical import ClassicalProtocol
from .coins import ABORT
from .games import GameSpec
from .quantum import Permutation, QuantumMixture, QuantumSafeProtocol, Round, Unitary


def width(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def _coin_prep(reg: str, probs: list) -> Unitary:
    d = 1 << width(len(probs))
    amp = np.zeros(d)
    amp[: len(probs)] = np.sqrt([float(q) for q in probs])
    return Unitary((reg,), state_prep_unitary(amp))


def _decode(v: int, sizes: list[int]) -> list[int]:
    out = []
    for s in reversed(sizes):
        out.append(v & ((1 << s) - 1))
        v >>= s
    return out[::-1]


def index_coding(values) -> tuple[list[tuple[str, int]], dict]:
    """Single-register coding of inputs by their position."""
    values = list(values)
    return [("", width(len(values)))], {v: (k,) for k, v in enumerate(values)}


def power_codings(g: GameSpec, n: int):
    """Register codings for g^(n): Alice X1..Xn; Bob I, Y, BX1..BX(n-1) (unused prefix slots hold 0)."""
    from .games import PowerInput  # local to keep the module import light
    we, wf = width(len(g.E)), width(len(g.F))
    ei = {x: k for k, x in enumerate(g.E)}
    fi = {y: k for k, y in enumerate(g.F)}
    alice = [(f"X{j}", we) for j in range(1, n + 1)]
    bob = [("I", width(n)), ("Y", wf)] + [(f"BX{j}", we) for j in range(1, n)]

    def acode(x):
        return tuple(ei[v] for v in x)

    def bcode(b: PowerInput):
        pre = [ei[v] for v in b.prefix] + [0] * (n - 1 - len(b.prefix))
        return (b.i - 1, fi[b.y]) + tuple(pre)

    return alice, acode, bob, bcode


def embed_classical(p: ClassicalProtocol, g: GameSpec, public_value=None, alice_coding=None, bob_coding=None):
    """Quantum protocol (or mixture over public coin values) with the same answer law on every input.

    ``alice_coding`` is ``(registers, code)`` with registers a list of
    (name, qubits) and ``code(x)`` the tuple of register values; by default a
    single register ``X`` (``Y`` for Bob) holds the input's position.
    """
    if p.alice_abort is not None:
        raise ValueError("protocols with abort rules cannot be embedded")
    if p.has_public_coin and public_value is None:
        comps = tuple((w, embed_classical(p, g, v, alice_coding, bob_coding)) for v, w in p.public_coin.items())
        return QuantumMixture(comps, p.name)
    pv = public_value if public_value is not None else next(iter(p.public_coin.items()))[0]
    E, F = list(p.E), list(p.F)
    t = p.t
    spk = [p.speaker(j) for j in range(t)]
    answerer = p.answerer
    acts = {ALICE: [j for j in range(t) if spk[j] == ALICE], BOB: [j for j in range(t) if spk[j] == BOB]}
    coins = {ALICE: list(p.alice_coin.items()), BOB: list(p.bob_coin.items())}
    if alice_coding is None:
        [(_, wa)], amap = index_coding(E)
        alice_coding = ([("X", wa)], lambda x: amap[x])
    if bob_coding is None:
        [(_, wb)], bmap = index_coding(F)
        bob_coding = ([("Y", wb)], lambda y: bmap[y])
    in_regs = {ALICE: [n for n, _ in alice_coding[0]], BOB: [n for n, _ in bob_coding[0]]}
    codes = {ALICE: {x: tuple(alice_coding[1](x)) for x in E}, BOB: {y: tuple(bob_coding[1](y)) for y in F}}
    decode = {party: {v: k for k, v in codes[party].items()} for party in (ALICE, BOB)}
    regs = [Register(n, q, ALICE) for n, q in alice_coding[0]] + [Register(n, q, BOB) for n, q in bob_coding[0]]
    coin_reg = {}
    for party, tag in ((ALICE, "RA"), (BOB, "RB")):
        if len(coins[party]) > 1 and (acts[party] or answerer == party):
            coin_reg[party] = tag
            regs.append(Register(tag, width(len(coins[party])), party))
    for j in range(t):
        regs.append(Register(f"M{j + 1}", p.lengths[j], spk[j]))
    answers = list(g.G)
    layout = RegisterLayout(tuple(regs))

    def received(party: str, upto: int) -> list[int]:
        return [k for k in range(upto) if spk[k] != party and p.lengths[k]]

    def table(party: str, upto: int, fn, lay: RegisterLayout) -> tuple[list[str], list[int]]:
        ni = len(in_regs[party])
        heard = received(party, upto)
        has_coin = party in coin_reg
        controls = in_regs[party] + ([coin_reg[party]] if has_coin else []) + [f"M{k + 1}" for k in heard]
        sizes = [lay[c].qubits for c in controls]
        coin_vals = coins[party]
        vals = []
        for cv in range(1 << sum(sizes)):
            parts = _decode(cv, sizes)
            inp_code = tuple(parts[:ni])
            ci = parts[ni] if has_coin else 0
            got = dict(zip(heard, parts[ni + 1:] if has_coin else parts[ni:]))
            val = 0
            if inp_code in decode[party] and ci < len(coin_vals):
                inp, coin = decode[party][inp_code], coin_vals[ci][0]
                view = p.public_coin.view(party, inp, pv)
                tr: tuple = ()
                for k in range(upto):
                    if k in got:
                        tr += (format(got[k], f"0{p.lengths[k]}b"),)
                    elif spk[k] == party:
                        tr += (p.messages[k](inp, tr, coin, view),)
                    else:
                        tr += ("",)
                val = fn(inp, tr, coin, view)
            vals.append(val)
        return controls, vals

    def compute_gate(party: str, upto: int, target: str, fn, lay: RegisterLayout) -> Permutation:
        controls, vals = table(party, upto, fn, lay)
        nt = 1 << lay[target].qubits
        return Permutation(tuple(controls), (target,), np.stack([np.arange(nt) ^ v for v in vals]))

    def msg_fn(j):
        def fn(inp, tr, c, view):
            m = p.messages[j](inp, tr, c, view)
            if m is ABORT:
                raise ValueError("aborting messages cannot be embedded")
            return int(m, 2) if m else 0
        return fn

    def ans_fn(inp, tr, c, view):
        a = p.answer(inp, tr, c, view)
        return answers.index(a) if a in answers else len(answers)

    prepared = set()

    def prep(party: str) -> list:
        if party in coin_reg and party not in prepared:
            prepared.add(party)
            return [_coin_prep(coin_reg[party], [q for _, q in coins[party]])]
        return []

    # answer register: one extra code only if some reachable answer falls outside G
    _, ans_codes = table(answerer, t, ans_fn, layout)
    top = max(ans_codes)
    ans_bits = width(top + 1) if top >= len(answers) else width(len(answers))
    layout = layout.concat(RegisterLayout((Register("Ans", ans_bits, answerer),)))
    rounds = []
    for j in range(t):
        party = spk[j]
        gates = prep(party)
        if p.lengths[j]:
            gates.append(compute_gate(party, j, f"M{j + 1}", msg_fn(j), layout))
        rounds.append(Round(party, tuple(gates), (f"M{j + 1}",)))
    final = prep(answerer) + [compute_gate(answerer, t, "Ans", ans_fn, layout)]
    return QuantumSafeProtocol(
        layout=layout,
        alice_inputs=tuple(in_regs[ALICE]),
        bob_inputs=tuple(in_regs[BOB]),
        alice_encode=codes[ALICE],
        bob_encode=codes[BOB],
        rounds=tuple(rounds),
        answer_regs=("Ans",),
        answer_map={k: a for k, a in enumerate(answers)},
        final_gates=tuple(final),
        starter=p.starter,
        name=f"embedded {p.name}".strip(),
    )
