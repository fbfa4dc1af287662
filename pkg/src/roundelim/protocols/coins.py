"""Coin spaces for classical protocols.

Rules never see a raw public draw; they receive the *view* of their party.
For ordinary coins both parties see the whole value.  A :class:`CoupledCoin`
models a shared draw ``m`` together with an Alice-side coin whose law depends
on her input: Alice sees ``(m, r_x)`` and Bob sees ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator

import numpy as np

ALICE = "A"
BOB = "B"


class _Abort:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ABORT"

    def __reduce__(self):
        return (_Abort, ())


ABORT = _Abort()


def _sample_dict(items: list, rng: np.random.Generator):
    probs = np.array([float(p) for _, p in items])
    k = int(rng.choice(len(items), p=probs / probs.sum()))
    return items[k][0]


class CoinSpace:
    def items(self) -> Iterator[tuple[Any, Fraction]]:
        raise NotImplementedError

    def enumerate_for(self, x) -> Iterator[tuple[Any, Fraction]]:
        """Draws sufficient to evaluate inputs where Alice holds ``x`` (same law on views)."""
        return self.items()

    def view(self, party: str, own_input, value):
        return value

    def sample_for(self, x, rng: np.random.Generator):
        raise NotImplementedError

    def size_for(self, x) -> int:
        raise NotImplementedError

    @property
    def trivial(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class FiniteCoin(CoinSpace):
    dist: tuple[tuple[Any, Fraction], ...]

    def __post_init__(self):
        clean = tuple((v, Fraction(p)) for v, p in self.dist if p != 0)
        if any(p < 0 for _, p in clean) or sum(p for _, p in clean) != 1:
            raise ValueError("coin is not a probability distribution")
        object.__setattr__(self, "dist", clean)

    @classmethod
    def of(cls, d=None) -> "FiniteCoin":
        if d is None:
            return cls(((None, Fraction(1)),))
        if isinstance(d, FiniteCoin):
            return d
        return cls(tuple(d.items()))

    @classmethod
    def uniform(cls, values) -> "FiniteCoin":
        values = list(values)
        return cls(tuple((v, Fraction(1, len(values))) for v in values))

    def items(self):
        return iter(self.dist)

    def as_dict(self) -> dict:
        return dict(self.dist)

    def sample_for(self, x, rng):
        return _sample_dict(list(self.dist), rng) if len(self.dist) > 1 else self.dist[0][0]

    def size_for(self, x) -> int:
        return len(self.dist)

    @property
    def trivial(self) -> bool:
        return len(self.dist) == 1


NO_COIN = FiniteCoin.of()


@dataclass(frozen=True, eq=False)
class UniformBits(CoinSpace):
    """``nbits`` uniform public bits, drawn as one integer."""

    nbits: int

    def items(self):
        if self.nbits > 24:
            raise OverflowError(f"refusing to enumerate 2^{self.nbits} coin values")
        w = Fraction(1, 1 << self.nbits)
        return ((v, w) for v in range(1 << self.nbits))

    def sample_for(self, x, rng):
        if self.nbits == 0:
            return 0
        nbytes = (self.nbits + 7) // 8
        return int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - self.nbits)

    def size_for(self, x) -> int:
        return 1 << self.nbits

    @property
    def trivial(self) -> bool:
        return self.nbits == 0


@dataclass(frozen=True, eq=False)
class CoupledCoin(CoinSpace):
    """Shared draw m ~ sigma and, for each Alice input x, a coin r ~ cond[(x, m)].

    Full values are ``(m, rmap)`` with ``rmap`` a tuple aligned with ``xs``; the
    per-x draws are independent given m (product coupling).
    """

    sigma: tuple[tuple[Any, Fraction], ...]
    xs: tuple
    cond: dict

    def items(self):
        from itertools import product
        for m, pm in self.sigma:
            laws = [list(self.cond[(x, m)].items()) for x in self.xs]
            for combo in product(*laws):
                p = pm
                for _, q in combo:
                    p *= q
                yield (m, tuple(r for r, _ in combo)), p

    def enumerate_for(self, x):
        k = self.xs.index(x)
        for m, pm in self.sigma:
            for r, q in self.cond[(x, m)].items():
                rmap = tuple(r if j == k else None for j in range(len(self.xs)))
                yield (m, rmap), pm * q

    def view(self, party, own_input, value):
        m, rmap = value
        if party == BOB:
            return m
        return m, rmap[self.xs.index(own_input)]

    def sample_for(self, x, rng):
        m = _sample_dict(list(self.sigma), rng)
        k = self.xs.index(x)
        r = _sample_dict(list(self.cond[(x, m)].items()), rng)
        return m, tuple(r if j == k else None for j in range(len(self.xs)))

    def size_for(self, x) -> int:
        return sum(len(self.cond[(x, m)]) for m, _ in self.sigma)


@dataclass(frozen=True, eq=False)
class MixtureCoin(CoinSpace):
    """Pick component k with probability w_k, then draw that component's coin."""

    components: tuple[tuple[Fraction, CoinSpace], ...]

    def __post_init__(self):
        if sum(w for w, _ in self.components) != 1 or any(w < 0 for w, _ in self.components):
            raise ValueError("mixture weights must form a distribution")

    def items(self):
        for k, (w, c) in enumerate(self.components):
            if w:
                for v, p in c.items():
                    yield (k, v), w * p

    def enumerate_for(self, x):
        for k, (w, c) in enumerate(self.components):
            if w:
                for v, p in c.enumerate_for(x):
                    yield (k, v), w * p

    def view(self, party, own_input, value):
        k, v = value
        return k, self.components[k][1].view(party, own_input, v)

    def sample_for(self, x, rng):
        items = [(k, w) for k, (w, _) in enumerate(self.components) if w]
        k = _sample_dict(items, rng)
        return k, self.components[k][1].sample_for(x, rng)

    def size_for(self, x) -> int:
        return sum(c.size_for(x) for w, c in self.components if w)


def as_coin(c) -> CoinSpace:
    if c is None:
        return NO_COIN
    if isinstance(c, CoinSpace):
        return c
    return FiniteCoin.of(c)
