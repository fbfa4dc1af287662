from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roundelim.info import JointDistribution
from roundelim.lab.generators import case_rng, random_classical_case, random_coin, random_quantum_protocol
from roundelim.protocols import ABORT, eval_protocol
from roundelim.protocols.classical import (
    ClassicalProtocol,
    EnumerationCapError,
    Signature,
    deterministic,
    distributional_error,
    eval_classical,
    first_message_encoding_classical,
    fix_public_coin_classical,
    mix_classical,
    monte_carlo_error,
    random_table_protocol,
)
from roundelim.protocols.coins import CoupledCoin, FiniteCoin, MixtureCoin, UniformBits
from roundelim.protocols.embed import embed_classical, power_codings
from roundelim.protocols.games import GameSpec, PowerInput, equality_game, power_game, random_game, xor_game
from roundelim.protocols.quantum import (
    Controlled,
    QuantumSafeProtocol,
    Round,
    Unitary,
    eval_quantum,
    verify_safe,
    verify_secure,
)
from roundelim.protocols.serialize import dumps, loads
from roundelim.tensor import CapacityError, Register, RegisterLayout


def send_x_protocol() -> ClassicalProtocol:
    g = equality_game(1)
    return deterministic(g.E, g.F, "A", (1,), [lambda x, tr: str(x)], lambda y, tr: int(int(tr[0]) == y), "send-x")


def test_signature_text_and_elimination():
    s = Signature(3, 0, (1, 2, 1), "A")
    assert str(s) == "[3,0,1,2,1]^A"
    assert s.eliminated() == Signature(2, 1, (2, 1), "B")


def test_power_game_shape():
    g = equality_game(1)
    gn = power_game(g, 2)
    assert len(gn.E) == 4
    # Bob: i = 1 with no prefix, or i = 2 with a 1-element prefix; y in {0, 1}
    assert len(gn.F) == 2 + 4
    x, b = (1, 0), PowerInput(2, 0, (1,))
    assert gn.f(x, b) == 1
    assert not gn.is_legal((0, 0), PowerInput(2, 0, (1,)))


def test_deterministic_protocol_exact():
    g = equality_game(1)
    p = send_x_protocol()
    rep = eval_classical(p, g)
    assert rep.eps_worst == 0
    assert p.signature == Signature(1, 0, (1,), "A")
    silent = deterministic(g.E, g.F, "A", (), [], lambda y, tr: 1)
    assert silent.answerer == "B"
    assert eval_classical(silent, g).eps_worst == 1
    d = JointDistribution.uniform(g.domain)
    assert distributional_error(silent, g, d) == F(1, 2)


def test_private_coin_error_is_exact_rational():
    g = xor_game()
    coin = FiniteCoin.of({0: F(1, 3), 1: F(2, 3)})
    # Alice sends x xor coin; Bob answers message xor y: wrong whenever the coin is 1
    p = ClassicalProtocol(g.E, g.F, "A", (1,), (lambda x, tr, a, pub: str(x ^ a),),
                          lambda y, tr, b, pub: int(tr[0]) ^ y, alice_coin=coin)
    rep = eval_classical(p, g)
    assert rep.eps_worst == F(2, 3)
    assert all(v == F(2, 3) for v in rep.per_pair.values())


def test_abort_counts_as_error():
    g = xor_game()
    p = ClassicalProtocol(g.E, g.F, "A", (1,), (lambda x, tr, a, pub: ABORT if x else "0",),
                          lambda y, tr, b, pub: y)
    rep = eval_classical(p, g)
    assert rep.per_pair[(1, 0)] == 1 and rep.per_pair[(0, 0)] == 0


def test_bad_message_length_rejected():
    g = xor_game()
    p = deterministic(g.E, g.F, "A", (1,), [lambda x, tr: "01"], lambda y, tr: 0)
    with pytest.raises(ValueError):
        eval_classical(p, g)


def test_enumeration_cap():
    g = xor_game()
    p = ClassicalProtocol(g.E, g.F, "A", (1,), (lambda x, tr, a, pub: "0",), lambda y, tr, b, pub: 0,
                          public_coin=UniformBits(10))
    with pytest.raises(EnumerationCapError):
        eval_classical(p, g, cap=100)


def test_fix_public_coin_picks_best_value():
    g = equality_game(1)
    pub = FiniteCoin.uniform([0, 1])
    # coin 0: honest; coin 1: always answer 0
    p = ClassicalProtocol(g.E, g.F, "A", (1,), (lambda x, tr, a, pv: str(x),),
                          lambda y, tr, b, pv: int(int(tr[0]) == y) if pv == 0 else 0, public_coin=pub)
    d = JointDistribution.uniform(g.domain)
    assert distributional_error(p, g, d) == F(1, 4)
    q, err = fix_public_coin_classical(p, g, d)
    assert err == 0 and not q.has_public_coin
    assert distributional_error(q, g, d) == 0


def test_mixture_error_is_weighted_average():
    g = equality_game(1)
    honest = send_x_protocol()
    lazy = deterministic(g.E, g.F, "A", (1,), [lambda x, tr: "0"], lambda y, tr: 0)
    mix = mix_classical([(F(1, 4), honest), (F(3, 4), lazy)])
    rep = eval_classical(mix, g)
    lazy_rep = eval_classical(lazy, g)
    for pr in g.domain:
        assert rep.per_pair[pr] == F(3, 4) * lazy_rep.per_pair[pr]


def test_first_message_encoding():
    g = equality_game(1)
    d = JointDistribution.uniform(g.domain)
    enc = first_message_encoding_classical(send_x_protocol(), d)
    assert enc.average == {"0": F(1, 2), "1": F(1, 2)}


def test_coupled_and_mixture_coins():
    c = CoupledCoin((("0", F(1, 2)), ("1", F(1, 2))), (0, 1),
                    {(0, "0"): {0: F(1)}, (0, "1"): {1: F(1)}, (1, "0"): {0: F(1, 2), 1: F(1, 2)},
                     (1, "1"): {ABORT: F(1)}})
    law = dict(c.enumerate_for(1))
    assert sum(law.values()) == 1
    views = {c.view("A", 1, v) for v in law}
    assert ("1", ABORT) in views
    m = MixtureCoin(((F(1, 3), FiniteCoin.uniform([0, 1])), (F(2, 3), FiniteCoin.of({7: F(1)}))))
    assert sum(w for _, w in m.items()) == 1


def test_monte_carlo_close_to_exact():
    g = xor_game()
    coin = FiniteCoin.of({0: F(3, 4), 1: F(1, 4)})
    p = ClassicalProtocol(g.E, g.F, "A", (1,), (lambda x, tr, a, pub: str(x ^ a),),
                          lambda y, tr, b, pub: int(tr[0]) ^ y, alice_coin=coin)
    d = JointDistribution.uniform(g.domain)
    est, se = monte_carlo_error(p, g, d, 4000, np.random.default_rng(0))
    assert abs(est - 0.25) <= 5 * se


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_serialize_round_trip_classical(seed):
    rng = np.random.default_rng(seed)
    g, p, d = random_classical_case(rng)
    q = loads(dumps(p))
    assert eval_classical(q, g).per_pair == eval_classical(p, g).per_pair
    assert dumps(q) == dumps(p)


def test_serialize_round_trip_quantum_and_game():
    rng = case_rng(5, 0)
    p = random_quantum_protocol(rng, 2, 2, 3, 1, 1)
    g = random_game(rng, 2, 3)
    q = loads(dumps(p))
    a, b = eval_quantum(p, g).per_pair, eval_quantum(q, g).per_pair
    assert max(abs(a[k] - b[k]) for k in a) == 0
    assert dumps(q) == dumps(p)
    assert loads(dumps(g)).table == g.table


def test_embedding_matches_classical_laws():
    for k in range(6):
        rng = case_rng(8, k)
        g, p, _ = random_classical_case(rng)
        q = embed_classical(p, g)
        a, b = eval_classical(p, g).per_pair, eval_quantum(q, g).per_pair
        assert max(abs(float(a[pr]) - b[pr]) for pr in g.domain) <= 1e-9
        assert q.signature == p.signature
        assert verify_secure(q).ok


def test_embedding_of_public_coin_power_protocol():
    from roundelim.lab.suites import index_protocol
    g, gn, p = index_protocol(2)
    ac, acode, bc, bcode = power_codings(g, 2)
    q = embed_classical(p, gn, alice_coding=(ac, acode), bob_coding=(bc, bcode))
    a, b = eval_classical(p, gn).per_pair, eval_quantum(q, gn).per_pair
    assert max(abs(float(a[pr]) - b[pr]) for pr in gn.domain) <= 1e-9
    assert eval_classical(p, gn).eps_worst == F(1, 4)


def bell_protocol(leak_input: bool) -> QuantumSafeProtocol:
    lay = RegisterLayout((Register("X", 1, "A"), Register("Y", 1, "B"), Register("W", 1, "A"),
                          Register("S", 1, "A"), Register("M", 1, "A")))
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    x = np.array([[0, 1], [1, 0]])
    if leak_input:
        # the would-be safe qubit carries a copy of x
        gates = [Controlled(("X",), ("S",), {1: x}), Controlled(("X",), ("M",), {1: x})]
    else:
        gates = [Unitary(("S",), h), Unitary(("S", "W"), cnot), Controlled(("X",), ("M",), {1: x})]
    return QuantumSafeProtocol(lay, ("X",), ("Y",), {0: (0,), 1: (1,)}, {0: (0,), 1: (1,)},
                               (Round("A", tuple(gates), ("M", "S")),), ("M",), {0: 0, 1: 1}, safe=("S",))


def test_safe_and_secure_checks():
    good = bell_protocol(False)
    assert good.signature == Signature(1, 1, (1,), "A")
    assert verify_safe(good).ok and verify_secure(good).ok
    bad = bell_protocol(True)
    rep = verify_safe(bad)
    assert not rep.ok and rep.max_deviation > 0.1


def test_insecure_protocol_detected():
    lay = RegisterLayout((Register("X", 1, "A"), Register("Y", 1, "B"), Register("M", 1, "A")))
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    p = QuantumSafeProtocol(lay, ("X",), ("Y",), {0: (0,), 1: (1,)}, {0: (0,), 1: (1,)},
                            (Round("A", (Unitary(("X",), h),), ("M",)),), ("M",), {0: 0, 1: 1})
    assert not verify_secure(p).ok


def test_ownership_schedule_enforced():
    lay = RegisterLayout((Register("X", 1, "A"), Register("Y", 1, "B"), Register("M", 1, "A")))
    x = np.array([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        # Bob acts on Alice's register before it was sent to him
        QuantumSafeProtocol(lay, ("X",), ("Y",), {0: (0,)}, {0: (0,)},
                            (Round("B", (Unitary(("M",), x),), ("M",)),), ("M",), {0: 0})


def test_qubit_capacity():
    lay = RegisterLayout(tuple(Register(f"R{k}", 1, "A") for k in range(13)))
    with pytest.raises(CapacityError):
        lay.check_capacity()


def test_random_quantum_protocol_shapes():
    for t in (1, 2, 3):
        p = random_quantum_protocol(case_rng(2, t), t, 2, 2, 1, 1)
        assert p.signature == Signature(t, 1, (1,) * t, "A")
        assert verify_safe(p).ok and verify_secure(p).ok
        rep = eval_protocol(p, random_game(case_rng(3, t), 2, 2))
        assert 0 <= rep.eps_worst <= 1
