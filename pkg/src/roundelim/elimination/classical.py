"""Classical round reduction and round elimination as protocol compilers.

Reduction: Alice's first message m is replaced by a public draw from its
average law sigma(m).  Alice then resamples her private coin r from its
conditional law given (x, m); a draw with sigma(m|x) = 0 counts as an error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from ..info import JointDistribution, encoding_mutual_information
from ..protocols.classical import (
    DEFAULT_BRANCH_CAP,
    ClassicalProtocol,
    Signature,
    distributional_error,
    eval_classical,
    first_message_encoding_classical,
    fix_public_coin_classical,
    mix_classical,
    other,
)
from ..protocols.coins import ABORT, ALICE, BOB, NO_COIN, CoupledCoin, FiniteCoin
from ..protocols.games import GameSpec, PowerInput, power_game
from .certificate import EliminationCertificate
from .distributions import build_product_distribution, product_grid
from .minimax import minimax_weights

LN2 = math.log(2)
POWER_CAP = 4096


def _fixed_public(p: ClassicalProtocol):
    return next(iter(p.public_coin.items()))[0]


def coupled_coin_for(p: ClassicalProtocol, d: JointDistribution) -> CoupledCoin:
    """Public (m, r) coupling: m from the averaged first message law, r from Alice's conditional coin law."""
    pv = _fixed_public(p)
    px = d.marginal_x()
    rule = p.messages[0]
    joint: dict = {}
    for x in p.E:
        view = p.public_coin.view(ALICE, x, pv)
        law: dict = {}
        for a, pa in p.alice_coin.items():
            m = rule(x, (), a, view)
            law.setdefault(m, {})
            law[m][a] = law[m].get(a, Fraction(0)) + pa
        joint[x] = law
    sigma: dict = {}
    for x, w in px.items():
        for m, law in joint[x].items():
            sigma[m] = sigma.get(m, Fraction(0)) + w * sum(law.values())
    sigma = {m: s for m, s in sigma.items() if s}
    cond = {}
    for x in p.E:
        for m in sigma:
            law = joint[x].get(m)
            if not law:
                cond[(x, m)] = {ABORT: Fraction(1)}
            else:
                tot = sum(law.values())
                cond[(x, m)] = {a: q / tot for a, q in law.items()}
    order = sorted(sigma, key=repr)
    return CoupledCoin(tuple((m, sigma[m]) for m in order), tuple(p.E), cond)


def classical_round_reduce(p: ClassicalProtocol, g: GameSpec, d: JointDistribution,
                           cap: int = DEFAULT_BRANCH_CAP) -> tuple[ClassicalProtocol, EliminationCertificate]:
    """Remove Alice's first message of a private-coin protocol; Bob starts the result."""
    if p.t == 0:
        raise ValueError("protocol has no round to remove")
    if p.starter != ALICE:
        raise ValueError("the first message must be Alice's")
    if p.has_public_coin:
        raise ValueError("round reduction needs a private-coin protocol")
    pv = _fixed_public(p)
    coin = coupled_coin_for(p, d)

    def alice_view(x):
        return p.public_coin.view(ALICE, x, pv)

    def bob_view(y):
        return p.public_coin.view(BOB, y, pv)

    def message(j):
        rule = p.messages[j]
        if p.speaker(j) == ALICE:
            def alice_rule(x, tr, _c, view):
                m, r = view
                if r is ABORT or m is ABORT:
                    return ABORT
                return rule(x, (m,) + tr, r, alice_view(x))
            return alice_rule

        def bob_rule(y, tr, b, m):
            if m is ABORT:
                return ABORT
            return rule(y, (m,) + tr, b, bob_view(y))
        return bob_rule

    if p.answerer == ALICE:
        def answer(x, tr, _c, view):
            m, r = view
            if r is ABORT or m is ABORT:
                return ABORT
            return p.answer(x, (m,) + tr, r, alice_view(x))
    else:
        def answer(y, tr, b, m):
            if m is ABORT:
                return ABORT
            return p.answer(y, (m,) + tr, b, bob_view(y))

    def abort(_x, _c, view):
        m, r = view
        return r is ABORT or m is ABORT

    q = ClassicalProtocol(p.E, p.F, BOB, p.lengths[1:], tuple(message(j) for j in range(1, p.t)), answer,
                          NO_COIN, p.bob_coin, coin, abort, name=f"reduce({p.name})")
    eps_p = distributional_error(p, g, d, cap)
    eps_q = distributional_error(q, g, d, cap)
    enc = first_message_encoding_classical(p, d)
    info = max(encoding_mutual_information(enc), 0.0)
    zero_info = all(w == enc.average for w in enc.codewords)
    bound = float(eps_p) + 0.5 * math.sqrt(2 * LN2 * info)
    cert = EliminationCertificate(
        "classical-reduce", p.signature, q.signature, Signature(p.t - 1, 0, p.lengths[1:], BOB),
        eps_p, eps_q, info, bound, "eps_P + (1/2) sqrt(2 ln2 I(X:M))",
        {"zero_information": zero_info, "messages": len(coin.sigma)})
    return q, cert


def stage1_marginal_check(p: ClassicalProtocol, q: ClassicalProtocol) -> bool:
    """For every x, Q's law of (m, r) equals sigma(m) q^{xm}_r and Alice's coin law is sum_m sigma(m) q^{xm}_r."""
    coin = q.public_coin
    if not isinstance(coin, CoupledCoin):
        raise TypeError("expected a reduced protocol")
    sigma = dict(coin.sigma)
    for x in p.E:
        joint: dict = {}
        for v, w in coin.enumerate_for(x):
            key = coin.view(ALICE, x, v)
            joint[key] = joint.get(key, Fraction(0)) + w
        expected = {(m, r): sigma[m] * qr for m in sigma for r, qr in coin.cond[(x, m)].items()}
        if joint != expected:
            return False
        r_law: dict = {}
        for (m, r), w in joint.items():
            r_law[r] = r_law.get(r, Fraction(0)) + w
        r_expected: dict = {}
        for m, s in sigma.items():
            for r, qr in coin.cond[(x, m)].items():
                r_expected[r] = r_expected.get(r, Fraction(0)) + s * qr
        if r_law != r_expected:
            return False
    return True


def prime_protocol(pstar: ClassicalProtocol, g: GameSpec, n: int, i: int, prefix: tuple,
                   px: dict) -> ClassicalProtocol:
    """Protocol for g from a coinless-public protocol for g^(n) at index i with a known prefix.

    Alice samples x_{i+1..n} privately from px; Bob plays (i, y, prefix).
    """
    pv = _fixed_public(pstar)
    tails = list(product(list(px), repeat=n - i))
    coin_items = []
    for tail in tails:
        w = Fraction(1)
        for v in tail:
            w *= px[v]
        for a, pa in pstar.alice_coin.items():
            if w * pa:
                coin_items.append(((tail, a), w * pa))
    alice_coin = FiniteCoin(tuple(coin_items))

    def full(x, tail):
        return prefix + (x,) + tail

    def bob_in(y):
        return PowerInput(i, y, prefix)

    def message(j):
        rule = pstar.messages[j]
        if pstar.speaker(j) == ALICE:
            def alice_rule(x, tr, c, _v):
                xs = full(x, c[0])
                return rule(xs, tr, c[1], pstar.public_coin.view(ALICE, xs, pv))
            return alice_rule

        def bob_rule(y, tr, b, _v):
            return rule(bob_in(y), tr, b, pstar.public_coin.view(BOB, bob_in(y), pv))
        return bob_rule

    if pstar.answerer == ALICE:
        def answer(x, tr, c, _v):
            xs = full(x, c[0])
            return pstar.answer(xs, tr, c[1], pstar.public_coin.view(ALICE, xs, pv))
    else:
        def answer(y, tr, b, _v):
            return pstar.answer(bob_in(y), tr, b, pstar.public_coin.view(BOB, bob_in(y), pv))

    return ClassicalProtocol(g.E, g.F, pstar.starter, pstar.lengths, tuple(message(j) for j in range(pstar.t)),
                             answer, alice_coin, pstar.bob_coin, NO_COIN, None, name=f"P'[{i};{prefix}]")


@dataclass
class EliminationRun:
    protocol: ClassicalProtocol
    certificate: EliminationCertificate
    family: list
    weights: list
    ledger: list


def eliminate_for_distribution(p: ClassicalProtocol, g: GameSpec, gn: GameSpec, n: int, d: JointDistribution,
                               cap: int = DEFAULT_BRANCH_CAP) -> tuple[ClassicalProtocol, dict]:
    """Protocol for g with eps_D at most delta + (1/2) sqrt(2 l_1 ln2 / n), built for one distribution d."""
    dstar = build_product_distribution(d, n)
    pstar, eps_star = fix_public_coin_classical(p, gn, dstar, cap)
    px = d.marginal_x()
    comps = []
    info = 0.0
    for i in range(1, n + 1):
        for prefix in product(list(px), repeat=i - 1):
            w = Fraction(1, n)
            for v in prefix:
                w *= px[v]
            pprime = prime_protocol(pstar, g, n, i, prefix, px)
            q, cert = classical_round_reduce(pprime, g, d, cap)
            comps.append((w, q))
            info += float(w) * cert.information
    mixed = mix_classical(comps, name="eliminated")
    return mixed, {"eps_star": eps_star, "mean_information": info, "components": len(comps)}


def classical_round_eliminate(p: ClassicalProtocol, g: GameSpec, n: int, grid=None,
                              step: Fraction = Fraction(1, 8), cap: int = DEFAULT_BRANCH_CAP) -> EliminationRun:
    """Public-coin protocol for g with one round fewer than the given protocol for g^(n).

    For every distribution of the grid (default: product distributions with
    weights in multiples of ``step``) the proof's construction is applied; the
    resulting finite family is mixed by the minimax linear program and the
    worst-case error of the mixture is evaluated exactly.
    """
    if len(g.E) ** n > POWER_CAP:
        raise ValueError(f"|E|^n = {len(g.E) ** n} exceeds the cap of {POWER_CAP}")
    if p.starter != ALICE or p.t < 1:
        raise ValueError("protocol must start with a message from Alice")
    gn = power_game(g, n)
    if set(p.E) != set(gn.E) or not set(gn.F) <= set(p.F):
        raise ValueError("protocol is not shaped for the power game")
    delta = eval_classical(p, gn, "worst", cap).eps_worst
    grid = grid if grid is not None else product_grid(g, step)
    family, ledger = [], []
    l1 = p.lengths[0]
    for d in grid:
        q, info = eliminate_for_distribution(p, g, gn, n, d, cap)
        eps_d = distributional_error(q, g, d, cap)
        family.append(q)
        ledger.append({"eps_D": eps_d, "mean_information": info["mean_information"],
                       "information_budget": l1 / n, "eps_star": info["eps_star"]})
    tables = [eval_classical(q, g, "worst", cap).per_pair for q in family]
    pairs = list(g.domain)
    weights, value = minimax_weights([[float(t[pr]) for pr in pairs] for t in tables])
    chosen = [(w, q) for w, q in zip(weights, family) if w]
    out = chosen[0][1] if len(chosen) == 1 else mix_classical(chosen, name="eliminated-minimax")
    per_pair = {pr: sum((w * t[pr] for w, t in zip(weights, tables)), Fraction(0)) for pr in pairs}
    worst = max(per_pair.values())
    bound = float(delta) + 0.5 * math.sqrt(2 * l1 * LN2 / n)
    cert = EliminationCertificate(
        "classical-eliminate", p.signature, out.signature, Signature(p.t - 1, 0, p.lengths[1:], BOB),
        delta, worst, max(e["mean_information"] for e in ledger), bound,
        "delta + (1/2) sqrt(2 l1 ln2 / n)",
        {"n": n, "grid": len(grid), "lp_value": value, "family_used": len(chosen),
         "max_grid_eps_D": max(sum((pr_w * per_pair[(x, y)] for x, y, pr_w in d), Fraction(0)) for d in grid),
         "information_ledger_ok": all(e["mean_information"] <= e["information_budget"] + 1e-7 for e in ledger)})
    return EliminationRun(out, cert, family, weights, ledger)
