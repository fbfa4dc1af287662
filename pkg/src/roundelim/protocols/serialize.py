"""JSON documents for games and protocols with exact round trips.

Rationals are written as "num/den" strings, complex matrices as nested
[re, im] pairs (Python's float repr is exact), tuples and a few marker
objects as tagged single-key objects.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from ..tensor import Register, RegisterLayout
from .classical import ClassicalProtocol, _FixedCoin, from_tables, tabulate
from .coins import ABORT, CoinSpace, CoupledCoin, FiniteCoin, MixtureCoin, UniformBits
from .games import GameSpec, PowerInput
from .quantum import Controlled, Permutation, QuantumMixture, QuantumSafeProtocol, Round, Unitary


def enc(v: Any):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, float):
        return {"float": repr(v)}
    if isinstance(v, Fraction):
        return {"frac": f"{v.numerator}/{v.denominator}"}
    if isinstance(v, tuple):
        return {"tuple": [enc(x) for x in v]}
    if isinstance(v, PowerInput):
        return {"power": [v.i, enc(v.y), enc(v.prefix)]}
    if v is ABORT:
        return {"abort": True}
    raise TypeError(f"cannot encode {type(v).__name__}")


def dec(v: Any):
    if v is None or isinstance(v, (bool, str, int)):
        return v
    if isinstance(v, dict):
        (tag, body), = v.items()
        if tag == "float":
            return float(body)
        if tag == "frac":
            return Fraction(body)
        if tag == "tuple":
            return tuple(dec(x) for x in body)
        if tag == "power":
            return PowerInput(body[0], dec(body[1]), dec(body[2]))
        if tag == "abort":
            return ABORT
    raise ValueError(f"cannot decode {v!r}")


def frac(p) -> str:
    p = Fraction(p)
    return f"{p.numerator}/{p.denominator}"


def matrix_doc(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from(doc: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in doc], dtype=complex)


# --- games -----------------------------------------------------------------------------------

def game_doc(g: GameSpec) -> dict:
    return {"kind": "game", "name": g.name, "E": [enc(x) for x in g.E], "F": [enc(y) for y in g.F],
            "G": [enc(a) for a in g.G], "table": [[enc(x), enc(y), enc(g.f(x, y))] for x, y in g.domain]}


def game_from(doc: dict) -> GameSpec:
    dom = [(dec(x), dec(y)) for x, y, _ in doc["table"]]
    table = {(dec(x), dec(y)): dec(a) for x, y, a in doc["table"]}
    return GameSpec(tuple(dec(x) for x in doc["E"]), tuple(dec(y) for y in doc["F"]),
                    tuple(dec(a) for a in doc["G"]), table, tuple(dom), doc.get("name", ""))


# --- coins -----------------------------------------------------------------------------------

def coin_doc(c: CoinSpace) -> dict:
    if isinstance(c, FiniteCoin):
        return {"finite": [[enc(v), frac(p)] for v, p in c.dist]}
    if isinstance(c, UniformBits):
        return {"uniform_bits": c.nbits}
    if isinstance(c, CoupledCoin):
        return {"coupled": {
            "sigma": [[enc(m), frac(p)] for m, p in c.sigma],
            "xs": [enc(x) for x in c.xs],
            "cond": [[enc(x), enc(m), [[enc(r), frac(q)] for r, q in c.cond[(x, m)].items()]]
                     for x in c.xs for m, _ in c.sigma],
        }}
    if isinstance(c, MixtureCoin):
        return {"mixture": [[frac(w), coin_doc(k)] for w, k in c.components]}
    if isinstance(c, _FixedCoin):
        return {"fixed": {"base": coin_doc(c.base), "value": enc(c.value)}}
    raise TypeError(f"cannot serialize coin {type(c).__name__}")


def coin_from(doc: dict) -> CoinSpace:
    (tag, body), = doc.items()
    if tag == "finite":
        return FiniteCoin(tuple((dec(v), Fraction(p)) for v, p in body))
    if tag == "uniform_bits":
        return UniformBits(body)
    if tag == "coupled":
        sigma = tuple((dec(m), Fraction(p)) for m, p in body["sigma"])
        cond = {(dec(x), dec(m)): {dec(r): Fraction(q) for r, q in law} for x, m, law in body["cond"]}
        return CoupledCoin(sigma, tuple(dec(x) for x in body["xs"]), cond)
    if tag == "mixture":
        return MixtureCoin(tuple((Fraction(w), coin_from(k)) for w, k in body))
    if tag == "fixed":
        return _FixedCoin(coin_from(body["base"]), dec(body["value"]))
    raise ValueError(f"unknown coin kind {tag!r}")


# --- classical -------------------------------------------------------------------------------

def _key_doc(key: tuple) -> list:
    return [enc(k) for k in key]


def classical_doc(p: ClassicalProtocol) -> dict:
    tabs = tabulate(p)
    return {
        "kind": "classical", "name": p.name,
        "E": [enc(x) for x in p.E], "F": [enc(y) for y in p.F],
        "starter": p.starter, "lengths": list(p.lengths),
        "alice_coin": coin_doc(p.alice_coin), "bob_coin": coin_doc(p.bob_coin),
        "public_coin": coin_doc(p.public_coin),
        "messages": [[[_key_doc(k), enc(v)] for k, v in t.items()] for t in tabs["messages"]],
        "answer": [[_key_doc(k), enc(v)] for k, v in tabs["answer"].items()],
        "abort": None if tabs["abort"] is None else [[_key_doc(k), v] for k, v in tabs["abort"].items()],
    }


def classical_from(doc: dict) -> ClassicalProtocol:
    def table(rows):
        return {tuple(dec(k) for k in key): dec(v) for key, v in rows}

    abort = None if doc["abort"] is None else {tuple(dec(k) for k in key): v for key, v in doc["abort"]}
    return from_tables(tuple(dec(x) for x in doc["E"]), tuple(dec(y) for y in doc["F"]), doc["starter"],
                       doc["lengths"], [table(t) for t in doc["messages"]], table(doc["answer"]),
                       coin_from(doc["alice_coin"]), coin_from(doc["bob_coin"]), coin_from(doc["public_coin"]),
                       abort, doc.get("name", ""))


# --- quantum ---------------------------------------------------------------------------------

def gate_doc(gate) -> dict:
    if isinstance(gate, Unitary):
        return {"unitary": {"targets": list(gate.targets), "matrix": matrix_doc(gate.matrix)}}
    if isinstance(gate, Controlled):
        return {"controlled": {"controls": list(gate.controls), "targets": list(gate.targets),
                               "branches": [[k, matrix_doc(m)] for k, m in sorted(gate.branches.items())]}}
    if isinstance(gate, Permutation):
        return {"permutation": {"controls": list(gate.controls), "targets": list(gate.targets),
                                "table": gate.table.tolist()}}
    raise TypeError(f"unknown gate {type(gate).__name__}")


def gate_from(doc: dict):
    (tag, b), = doc.items()
    if tag == "unitary":
        return Unitary(tuple(b["targets"]), matrix_from(b["matrix"]))
    if tag == "controlled":
        return Controlled(tuple(b["controls"]), tuple(b["targets"]), {k: matrix_from(m) for k, m in b["branches"]})
    if tag == "permutation":
        return Permutation(tuple(b["controls"]), tuple(b["targets"]), np.array(b["table"], dtype=np.int64))
    raise ValueError(f"unknown gate kind {tag!r}")


def quantum_doc(p) -> dict:
    if isinstance(p, QuantumMixture):
        return {"kind": "quantum_mixture", "name": p.name,
                "components": [[frac(w), quantum_doc(q)] for w, q in p.components]}
    return {
        "kind": "quantum", "name": p.name,
        "layout": [[r.name, r.qubits, r.owner] for r in p.layout.registers],
        "alice_inputs": list(p.alice_inputs), "bob_inputs": list(p.bob_inputs),
        "alice_encode": [[enc(k), list(v)] for k, v in p.alice_encode.items()],
        "bob_encode": [[enc(k), list(v)] for k, v in p.bob_encode.items()],
        "rounds": [{"speaker": r.speaker, "gates": [gate_doc(g) for g in r.gates], "sends": list(r.sends)}
                   for r in p.rounds],
        "answer_regs": list(p.answer_regs),
        "answer_map": [[k, enc(v)] for k, v in sorted(p.answer_map.items())],
        "safe": list(p.safe),
        "final_gates": [gate_doc(g) for g in p.final_gates],
        "initial": [[k, v] for k, v in p.initial.items()],
        "starter": p.starter,
    }


def quantum_from(doc: dict):
    if doc["kind"] == "quantum_mixture":
        return QuantumMixture(tuple((Fraction(w), quantum_from(q)) for w, q in doc["components"]), doc.get("name", ""))
    return QuantumSafeProtocol(
        layout=RegisterLayout(tuple(Register(n, q, o) for n, q, o in doc["layout"])),
        alice_inputs=tuple(doc["alice_inputs"]), bob_inputs=tuple(doc["bob_inputs"]),
        alice_encode={dec(k): tuple(v) for k, v in doc["alice_encode"]},
        bob_encode={dec(k): tuple(v) for k, v in doc["bob_encode"]},
        rounds=tuple(Round(r["speaker"], tuple(gate_from(g) for g in r["gates"]), tuple(r["sends"]))
                     for r in doc["rounds"]),
        answer_regs=tuple(doc["answer_regs"]),
        answer_map={k: dec(v) for k, v in doc["answer_map"]},
        safe=tuple(doc["safe"]),
        final_gates=tuple(gate_from(g) for g in doc["final_gates"]),
        initial={k: v for k, v in doc["initial"]},
        starter=doc["starter"],
        name=doc.get("name", ""),
    )


# --- entry points ----------------------------------------------------------------------------

def to_doc(obj) -> dict:
    if isinstance(obj, GameSpec):
        return game_doc(obj)
    if isinstance(obj, ClassicalProtocol):
        return classical_doc(obj)
    if isinstance(obj, (QuantumSafeProtocol, QuantumMixture)):
        return quantum_doc(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_doc(doc: dict):
    kind = doc.get("kind")
    if kind == "game":
        return game_from(doc)
    if kind == "classical":
        return classical_from(doc)
    if kind in ("quantum", "quantum_mixture"):
        return quantum_from(doc)
    raise ValueError(f"unknown document kind {kind!r}")


def dumps(obj) -> str:
    return json.dumps(to_doc(obj), sort_keys=True, separators=(",", ":"))


def loads(text: str):
    return from_doc(json.loads(text))
