"""Rank parity and greater-than games with their input-to-input reductions.

Strings are bit strings compared as integers; rank(x, S) = |{y in S : y <= x}|.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

ODD, EVEN = "odd", "even"


def _check_bits(s: str, length: int | None = None) -> None:
    if s.strip("01"):
        raise ValueError(f"{s!r} is not a bit string")
    if length is not None and len(s) != length:
        raise ValueError(f"{s!r} has length {len(s)}, expected {length}")


def rank(x: str, S: Iterable[str]) -> int:
    S = list(S)
    _check_bits(x)
    for y in S:
        _check_bits(y, len(x))
    return sum(1 for y in S if int(y, 2) <= int(x, 2))


def par_answer(x: str, S: Iterable[str], q: int | None = None) -> str:
    S = set(S)
    if q is not None and len(S) > q:
        raise ValueError(f"|S| = {len(S)} exceeds q = {q}")
    return ODD if rank(x, S) % 2 else EVEN


def _log2_exact(k: int) -> int:
    if k < 1 or k & (k - 1):
        raise ValueError(f"{k} is not a power of 2")
    return k.bit_length() - 1


def par_reduce_A(xs: Sequence[str], S: Iterable[str], i: int, p: int, k: int) -> tuple[str, set]:
    """Alice's k-fold input (x_1..x_k) with Bob's (i, x_1..x_{i-1}, S) -> one rank parity instance on p bits.

    The answer for (x_hat, S_hat) equals the answer for (x_i, S).
    """
    if p % k:
        raise ValueError("k must divide p")
    w = p // k
    if len(xs) != k or not 1 <= i <= k:
        raise ValueError("need k blocks and 1 <= i <= k")
    for x in xs:
        _check_bits(x, w)
    prefix = "".join(xs[: i - 1])
    pad = "0" * (p - i * w)
    s_hat = set()
    for y in S:
        _check_bits(y, w)
        s_hat.add(prefix + y + pad)
    return "".join(xs), s_hat


@dataclass(frozen=True)
class SizeAudit:
    """Size of the reduced set against the target bound q; ``exceeds`` flags a violation."""

    size: int
    q: int
    padded_blocks: int

    @property
    def exceeds(self) -> bool:
        return self.size > self.q


def par_reduce_B(x: str, i: int, sets: Sequence[Iterable[str]], p: int, q: int, k: int) -> tuple[str, set, SizeAudit]:
    """Alice's (i, x) with Bob's k sets -> one rank parity instance on p bits.

    Block j holds (j-1)·0·y for y in S_j; odd blocks get the extra element
    (j-1)·1^(p - log k), which sits above the whole block, so every block has
    even size and only block i decides the parity below x_hat.
    """
    if q % k:
        raise ValueError("k must divide q")
    lk = _log2_exact(k)
    w = p - lk - 1
    if w < 0:
        raise ValueError("p is too small for k blocks")
    if len(sets) != k or not 1 <= i <= k:
        raise ValueError("need k sets and 1 <= i <= k")
    _check_bits(x, w)
    tag = (lambda j: format(j, f"0{lk}b")) if lk else (lambda j: "")
    s_hat: set = set()
    padded = 0
    for j, S in enumerate(sets):
        block = set(S)
        for y in block:
            _check_bits(y, w)
        if len(block) > q // k:
            raise ValueError(f"block {j + 1} has more than q/k elements")
        s_hat |= {tag(j) + "0" + y for y in block}
        if len(block) % 2:
            s_hat.add(tag(j) + "1" * (p - lk))
            padded += 1
    return tag(i - 1) + "0" + x, s_hat, SizeAudit(len(s_hat), q, padded)


def block_parities(s_hat: Iterable[str], p: int, k: int) -> list[int]:
    """Number of elements per block of a reduced set, by block tag."""
    lk = _log2_exact(k)
    counts = [0] * k
    for s in s_hat:
        counts[int(s[:lk], 2) if lk else 0] += 1
    return counts


def gt_self_reduce(xs: Sequence[str], y: str, i: int, n: int, k: int) -> tuple[str, str]:
    """Alice's (x_1..x_k) with Bob's (i, x_1..x_{i-1}, y) -> one greater-than instance on n bits.

    x_tilde > y_tilde iff x_i > y.
    """
    if n % k:
        raise ValueError("k must divide n")
    w = n // k
    if len(xs) != k or not 1 <= i <= k:
        raise ValueError("need k blocks and 1 <= i <= k")
    for x in xs:
        _check_bits(x, w)
    _check_bits(y, w)
    return "".join(xs), "".join(xs[: i - 1]) + y + "1" * (n - i * w)


def gt_answer(x: str, y: str) -> int:
    _check_bits(x)
    _check_bits(y, len(x))
    return int(int(x, 2) > int(y, 2))
