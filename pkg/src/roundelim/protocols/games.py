"""Finite two-party games and their n-fold direct-sum power games."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, Iterable


@dataclass(frozen=True, eq=False)
class GameSpec:
    """Inputs E (Alice), F (Bob), answers G and the truth table on the legal pairs.

    ``domain`` lists the legal (x, y) pairs; a total game uses all of E x F.
    """

    E: tuple
    F: tuple
    G: tuple
    table: dict
    domain: tuple = field(default=())
    name: str = ""

    def __post_init__(self):
        dom = tuple(self.domain) if self.domain else tuple(product(self.E, self.F))
        object.__setattr__(self, "domain", dom)
        es, fs, gs = set(self.E), set(self.F), set(self.G)
        for x, y in dom:
            if x not in es or y not in fs:
                raise ValueError(f"pair {(x, y)} outside E x F")
            if (x, y) not in self.table:
                raise ValueError(f"truth table missing pair {(x, y)}")
            if self.table[(x, y)] not in gs:
                raise ValueError(f"answer {self.table[(x, y)]!r} not in G")

    @classmethod
    def from_function(cls, E: Iterable, F: Iterable, G: Iterable, fn: Callable,
                      domain: Iterable | None = None, name: str = "") -> "GameSpec":
        E, F, G = tuple(E), tuple(F), tuple(G)
        dom = tuple(domain) if domain is not None else tuple(product(E, F))
        return cls(E, F, G, {(x, y): fn(x, y) for x, y in dom}, dom, name)

    def f(self, x, y):
        return self.table[(x, y)]

    def is_legal(self, x, y) -> bool:
        return (x, y) in self.table

    @property
    def is_total(self) -> bool:
        return len(self.domain) == len(self.E) * len(self.F)


def equality_game(bits: int = 1) -> GameSpec:
    vals = tuple(range(1 << bits))
    return GameSpec.from_function(vals, vals, (0, 1), lambda x, y: int(x == y), name=f"EQ{bits}")


def greater_than_game(bits: int) -> GameSpec:
    vals = tuple(range(1 << bits))
    return GameSpec.from_function(vals, vals, (0, 1), lambda x, y: int(x > y), name=f"GT{bits}")


def xor_game() -> GameSpec:
    return GameSpec.from_function((0, 1), (0, 1), (0, 1), lambda x, y: x ^ y, name="XOR")


def random_game(rng, ne: int, nf: int, ng: int = 2) -> GameSpec:
    E, F, G = tuple(range(ne)), tuple(range(nf)), tuple(range(ng))
    table = {(x, y): int(rng.integers(ng)) for x in E for y in F}
    return GameSpec(E, F, G, table, name=f"rand{ne}x{nf}")


@dataclass(frozen=True)
class PowerInput:
    """Bob's input in the power game: index i (1-based), his y and Alice's prefix x_1..x_{i-1}."""

    i: int
    y: Hashable
    prefix: tuple


def power_game(g: GameSpec, n: int) -> GameSpec:
    """g^(n): Alice holds x_1..x_n, Bob holds (i, y, x_1..x_{i-1}); the answer is g(x_i, y)."""
    if n < 1:
        raise ValueError("n must be positive")
    E = tuple(product(g.E, repeat=n))
    F = tuple(PowerInput(i, y, pre) for i in range(1, n + 1) for pre in product(g.E, repeat=i - 1) for y in g.F)
    table = {}
    dom = []
    for x in E:
        for b in F:
            if x[: b.i - 1] == b.prefix and g.is_legal(x[b.i - 1], b.y):
                dom.append((x, b))
                table[(x, b)] = g.f(x[b.i - 1], b.y)
    return GameSpec(E, F, g.G, table, tuple(dom), name=f"{g.name}^({n})")
