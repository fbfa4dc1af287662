"""Table- or rule-driven classical randomized protocols with exact rational evaluation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from ..info import Encoding, JointDistribution
from .coins import ABORT, ALICE, BOB, NO_COIN, CoinSpace, FiniteCoin, MixtureCoin, as_coin
from .games import GameSpec

DEFAULT_BRANCH_CAP = 10**7

Rule = Callable[[Any, tuple, Any, Any], Any]


class EnumerationCapError(ValueError):
    """Raised when exact enumeration would exceed the configured branch cap."""


def other(party: str) -> str:
    return BOB if party == ALICE else ALICE


@dataclass(frozen=True)
class Signature:
    """Round structure [t, c, l_1..l_t] with the starting party."""

    t: int
    c: int
    lengths: tuple[int, ...]
    starter: str

    def __str__(self):
        ls = ",".join(str(x) for x in self.lengths)
        return f"[{self.t},{self.c}{',' if ls else ''}{ls}]^{self.starter}"

    def extend(self, length: int) -> "Signature":
        return Signature(self.t + 1, self.c, self.lengths + (length,), self.starter)

    def eliminated(self) -> "Signature":
        """Shape after removing the first message: one round fewer, overhead c + l_1, starter flipped."""
        if self.t < 1:
            raise ValueError("no round to eliminate")
        return Signature(self.t - 1, self.c + self.lengths[0], self.lengths[1:], other(self.starter))


@dataclass(frozen=True, eq=False)
class ClassicalProtocol:
    """A t-round protocol; round j is spoken by ``starter`` for even j and by the other party otherwise.

    ``messages[j](own_input, transcript, own_coin, public_view)`` returns a bit
    string of length ``lengths[j]`` or ABORT.  ``answer`` has the same shape and
    is called for the recipient of the last message (Bob when there are no
    rounds).  ``alice_abort(x, coin, public_view)`` marks draws that count as
    an error before any communication.
    """

    E: tuple
    F: tuple
    starter: str
    lengths: tuple[int, ...]
    messages: tuple[Rule, ...]
    answer: Rule
    alice_coin: FiniteCoin = NO_COIN
    bob_coin: FiniteCoin = NO_COIN
    public_coin: CoinSpace = NO_COIN
    alice_abort: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.starter not in (ALICE, BOB):
            raise ValueError(f"unknown starter {self.starter!r}")
        if len(self.messages) != len(self.lengths):
            raise ValueError("one message rule per round required")
        object.__setattr__(self, "lengths", tuple(int(l) for l in self.lengths))
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "alice_coin", as_coin(self.alice_coin))
        object.__setattr__(self, "bob_coin", as_coin(self.bob_coin))
        object.__setattr__(self, "public_coin", as_coin(self.public_coin))

    @property
    def t(self) -> int:
        return len(self.lengths)

    def speaker(self, j: int) -> str:
        return self.starter if j % 2 == 0 else other(self.starter)

    @property
    def answerer(self) -> str:
        return BOB if self.t == 0 else other(self.speaker(self.t - 1))

    @property
    def signature(self) -> Signature:
        return Signature(self.t, 0, self.lengths, self.starter)

    @property
    def has_public_coin(self) -> bool:
        return not self.public_coin.trivial

    def run(self, x, y, a, b, pv) -> tuple[tuple, Any]:
        """Transcript and answer for fixed inputs and coins (answer ABORT on error events)."""
        pub = self.public_coin
        av = pub.view(ALICE, x, pv)
        bv = pub.view(BOB, y, pv)
        if self.alice_abort is not None and self.alice_abort(x, a, av):
            return (), ABORT
        tr: tuple = ()
        for j, rule in enumerate(self.messages):
            msg = rule(x, tr, a, av) if self.speaker(j) == ALICE else rule(y, tr, b, bv)
            if msg is ABORT:
                return tr, ABORT
            if len(msg) != self.lengths[j] or msg.strip("01"):
                raise ValueError(f"round {j + 1} message {msg!r} is not a {self.lengths[j]}-bit string")
            tr = tr + (msg,)
        if self.answerer == ALICE:
            return tr, self.answer(x, tr, a, av)
        return tr, self.answer(y, tr, b, bv)

    def branches_for(self, x) -> int:
        return self.public_coin.size_for(x) * len(self.alice_coin.dist) * len(self.bob_coin.dist)

    def outcome_distribution(self, x, y) -> dict:
        """Exact law of the answer (ABORT included) for one input pair."""
        out: dict = {}
        for pv, pp in self.public_coin.enumerate_for(x):
            for a, pa in self.alice_coin.items():
                for b, pb in self.bob_coin.items():
                    _, ans = self.run(x, y, a, b, pv)
                    out[ans] = out.get(ans, Fraction(0)) + pp * pa * pb
        return out

    def transcript_distribution(self, x, y) -> dict:
        out: dict = {}
        for pv, pp in self.public_coin.enumerate_for(x):
            for a, pa in self.alice_coin.items():
                for b, pb in self.bob_coin.items():
                    tr, ans = self.run(x, y, a, b, pv)
                    key = (tr, ans)
                    out[key] = out.get(key, Fraction(0)) + pp * pa * pb
        return out

    def with_name(self, name: str) -> "ClassicalProtocol":
        return replace(self, name=name)


@dataclass
class ErrorReport:
    per_pair: dict
    eps_D: Any
    eps_worst: Any
    worst_pair: Any
    stats: dict = field(default_factory=dict)


def _pairs(g: GameSpec, d: JointDistribution | None) -> list:
    pairs = list(g.domain)
    if d is not None:
        seen = set(pairs)
        for x, y, _ in d:
            if not g.is_legal(x, y):
                raise ValueError(f"distribution puts mass on illegal pair {(x, y)}")
            if (x, y) not in seen:
                pairs.append((x, y))
                seen.add((x, y))
    return pairs


def _check_io(p, g: GameSpec) -> None:
    if set(g.E) - set(p.E) or set(g.F) - set(p.F):
        raise ValueError("protocol input sets do not cover the game's inputs")


def eval_classical(p: ClassicalProtocol, g: GameSpec, d: JointDistribution | str | None = "worst",
                   cap: int = DEFAULT_BRANCH_CAP) -> ErrorReport:
    """Exact error of every legal pair by full enumeration of coins.

    ``d`` may be a JointDistribution (then eps_D is filled in) or "worst".
    """
    _check_io(p, g)
    dist = d if isinstance(d, JointDistribution) else None
    pairs = _pairs(g, dist)
    branches = sum(p.branches_for(x) for x, _ in pairs)
    if branches > cap:
        raise EnumerationCapError(f"{branches} branches exceed the cap of {cap}")
    per_pair = {}
    for x, y in pairs:
        law = p.outcome_distribution(x, y)
        per_pair[(x, y)] = Fraction(1) - law.get(g.f(x, y), Fraction(0))
    worst_pair = max(g.domain, key=lambda k: per_pair[k]) if g.domain else None
    eps_worst = per_pair[worst_pair] if worst_pair is not None else Fraction(0)
    eps_d = None
    if dist is not None:
        eps_d = sum((pr * per_pair[(x, y)] for x, y, pr in dist), Fraction(0))
    return ErrorReport(per_pair, eps_d, eps_worst, worst_pair,
                       {"branches": branches, "lengths": p.lengths, "bits": sum(p.lengths)})


def distributional_error(p: ClassicalProtocol, g: GameSpec, d: JointDistribution,
                         cap: int = DEFAULT_BRANCH_CAP) -> Fraction:
    """eps_D only, enumerating just the support of d."""
    total = Fraction(0)
    branches = sum(p.branches_for(x) for x, _, _ in d)
    if branches > cap:
        raise EnumerationCapError(f"{branches} branches exceed the cap of {cap}")
    for x, y, pr in d:
        law = p.outcome_distribution(x, y)
        total += pr * (1 - law.get(g.f(x, y), Fraction(0)))
    return total


def sample_run(p: ClassicalProtocol, x, y, rng: np.random.Generator) -> tuple[tuple, Any]:
    pv = p.public_coin.sample_for(x, rng)
    a = p.alice_coin.sample_for(x, rng)
    b = p.bob_coin.sample_for(y, rng)
    return p.run(x, y, a, b, pv)


def monte_carlo_error(p: ClassicalProtocol, g: GameSpec, d: JointDistribution, trials: int,
                      rng: np.random.Generator) -> tuple[float, float]:
    """Sampled eps_D and its standard error."""
    support = list(d)
    probs = np.array([float(pr) for _, _, pr in support])
    idx = rng.choice(len(support), size=trials, p=probs / probs.sum())
    errs = 0
    for k in idx:
        x, y, _ = support[int(k)]
        _, ans = sample_run(p, x, y, rng)
        errs += ans != g.f(x, y)
    est = errs / trials
    return est, math.sqrt(max(est * (1 - est), 1e-300) / trials)


def first_message_encoding_classical(p: ClassicalProtocol, d: JointDistribution) -> Encoding:
    """Law of the first message given the starter's input, with priors from d."""
    if p.t == 0:
        raise ValueError("protocol has no first message")
    marg = d.marginal_x() if p.starter == ALICE else d.marginal_y()
    own = p.alice_coin if p.starter == ALICE else p.bob_coin
    rule = p.messages[0]
    words = []
    for v in marg:
        law: dict = {}
        coin_iter = p.public_coin.enumerate_for(v) if p.starter == ALICE else p.public_coin.items()
        for pv, pp in coin_iter:
            view = p.public_coin.view(p.starter, v, pv)
            for c, pc in own.items():
                m = rule(v, (), c, view)
                law[m] = law.get(m, Fraction(0)) + pp * pc
        words.append(law)
    return Encoding(tuple(marg), tuple(marg.values()), tuple(words))


class _FixedCoin(CoinSpace):
    """A single public draw that keeps the view semantics of its parent coin."""

    def __init__(self, base: CoinSpace, value):
        self.base = base
        self.value = value

    def items(self):
        return iter([(self.value, Fraction(1))])

    def view(self, party, own_input, value):
        return self.base.view(party, own_input, value)

    def sample_for(self, x, rng):
        return self.value

    def size_for(self, x) -> int:
        return 1

    @property
    def trivial(self) -> bool:
        return True


def fix_classical_coin(p: ClassicalProtocol, value) -> ClassicalProtocol:
    return replace(p, public_coin=_FixedCoin(p.public_coin, value), name=f"{p.name}|coin={value!r}")


def fix_public_coin_classical(p: ClassicalProtocol, g: GameSpec, d: JointDistribution,
                              cap: int = DEFAULT_BRANCH_CAP) -> tuple[ClassicalProtocol, Fraction]:
    """Coin value with the least distributional error (first one on ties)."""
    if not p.has_public_coin:
        return p, distributional_error(p, g, d, cap)
    best = None
    total = Fraction(0)
    for v, w in p.public_coin.items():
        q = fix_classical_coin(p, v)
        e = distributional_error(q, g, d, cap)
        total += w * e
        if best is None or e < best[1]:
            best = (q, e)
    assert best[1] <= total
    return best


def mix_classical(components: Sequence[tuple[Fraction, ClassicalProtocol]], name: str = "") -> ClassicalProtocol:
    """Public-coin mixture: run component k with probability w_k."""
    comps = [(Fraction(w), q) for w, q in components]
    first = comps[0][1]
    for _, q in comps[1:]:
        if (q.E, q.F, q.starter, q.lengths) != (first.E, first.F, first.starter, first.lengths):
            raise ValueError("mixture components have different shapes")
        if q.alice_coin.as_dict() != first.alice_coin.as_dict() or q.bob_coin.as_dict() != first.bob_coin.as_dict():
            raise ValueError("mixture components use different private coins")
    protos = [q for _, q in comps]

    def message(j):
        return lambda inp, tr, c, pub: protos[pub[0]].messages[j](inp, tr, c, pub[1])

    def answer(inp, tr, c, pub):
        return protos[pub[0]].answer(inp, tr, c, pub[1])

    abort = None
    if any(q.alice_abort is not None for q in protos):
        def abort(x, c, pub):
            q = protos[pub[0]]
            return q.alice_abort is not None and q.alice_abort(x, c, pub[1])

    coin = MixtureCoin(tuple((w, q.public_coin) for w, q in comps))
    return ClassicalProtocol(first.E, first.F, first.starter, first.lengths,
                             tuple(message(j) for j in range(first.t)), answer,
                             first.alice_coin, first.bob_coin, coin, abort, name)


def from_tables(E, F, starter: str, lengths: Sequence[int], message_tables: Sequence[dict], answer_table: dict,
                alice_coin=None, bob_coin=None, public_coin=None, abort_table: dict | None = None,
                name: str = "") -> ClassicalProtocol:
    """Protocol whose rules are dictionaries keyed by (own input, transcript, own coin, public view)."""

    def lookup(table):
        return lambda inp, tr, c, pub: table[(inp, tr, c, pub)]

    abort = None
    if abort_table is not None:
        abort = lambda x, c, pub: abort_table.get((x, c, pub), False)
    return ClassicalProtocol(tuple(E), tuple(F), starter, tuple(lengths),
                             tuple(lookup(t) for t in message_tables), lookup(answer_table),
                             as_coin(alice_coin), as_coin(bob_coin), as_coin(public_coin), abort, name)


def deterministic(E, F, starter: str, lengths: Sequence[int], messages: Sequence[Callable],
                  answer: Callable, name: str = "") -> ClassicalProtocol:
    """Coinless protocol from rules of the form (own input, transcript) -> message."""
    return ClassicalProtocol(tuple(E), tuple(F), starter, tuple(lengths),
                             tuple((lambda m: (lambda inp, tr, c, pub: m(inp, tr)))(m) for m in messages),
                             lambda inp, tr, c, pub: answer(inp, tr), name=name)


def tabulate(p: ClassicalProtocol, cap: int = DEFAULT_BRANCH_CAP) -> dict:
    """Every rule call reachable from some input pair, as explicit tables."""
    msg_tables = [dict() for _ in range(p.t)]
    answer_table: dict = {}
    abort_table: dict = {}
    branches = sum(p.branches_for(x) for x in p.E) * len(p.F)
    if branches > cap:
        raise EnumerationCapError(f"{branches} branches exceed the cap of {cap}")
    pub = p.public_coin
    for x in p.E:
        for y in p.F:
            for pv, _ in pub.enumerate_for(x):
                av, bv = pub.view(ALICE, x, pv), pub.view(BOB, y, pv)
                for a, _ in p.alice_coin.items():
                    if p.alice_abort is not None:
                        hit = bool(p.alice_abort(x, a, av))
                        abort_table[(x, a, av)] = hit
                        if hit:
                            continue
                    for b, _ in p.bob_coin.items():
                        tr: tuple = ()
                        aborted = False
                        for j, rule in enumerate(p.messages):
                            key = (x, tr, a, av) if p.speaker(j) == ALICE else (y, tr, b, bv)
                            msg = rule(*key)
                            msg_tables[j][key] = msg
                            if msg is ABORT:
                                aborted = True
                                break
                            tr = tr + (msg,)
                        if aborted:
                            continue
                        key = (x, tr, a, av) if p.answerer == ALICE else (y, tr, b, bv)
                        answer_table[key] = p.answer(*key)
    return {"messages": msg_tables, "answer": answer_table,
            "abort": abort_table if p.alice_abort is not None else None}


def bits(v: int, width: int) -> str:
    return format(v, f"0{width}b") if width else ""


def random_table_protocol(rng: np.random.Generator, E: Sequence, F: Sequence, G: Sequence, lengths: Sequence[int],
                          starter: str = ALICE, alice_coin=None, bob_coin=None, name: str = "") -> ClassicalProtocol:
    """Protocol with uniformly random message and answer tables over every reachable key."""
    alice_coin, bob_coin = as_coin(alice_coin), as_coin(bob_coin)
    t = len(lengths)
    tables = []
    spk = [starter if j % 2 == 0 else other(starter) for j in range(t)]
    for j in range(t):
        own, coin = (E, alice_coin) if spk[j] == ALICE else (F, bob_coin)
        prev = [tuple(bits(v, l) for v, l in zip(vs, lengths[:j]))
                for vs in product(*[range(1 << l) for l in lengths[:j]])]
        tables.append({(inp, tr, c, None): bits(int(rng.integers(1 << lengths[j])), lengths[j])
                       for inp in own for tr in prev for c, _ in coin.items()})
    ans_party = BOB if t == 0 else other(spk[-1])
    own, coin = (E, alice_coin) if ans_party == ALICE else (F, bob_coin)
    full = [tuple(bits(v, l) for v, l in zip(vs, lengths)) for vs in product(*[range(1 << l) for l in lengths])]
    answer = {(inp, tr, c, None): G[int(rng.integers(len(G)))] for inp in own for tr in full for c, _ in coin.items()}
    return from_tables(E, F, starter, lengths, tables, answer, alice_coin, bob_coin, None, name=name)
