"""Two-level perfect hash tables that return ranks of members.

Cell layout: cell 0 holds (k, p, n1); cells 1..n1 hold per-bucket
(k_i, offset, size); the remaining cells are slots holding (y, rank) or EMPTY.
h(x) = ((k x) mod p) mod n1 at level 1 and ((k_i x) mod p) mod size at
level 2.  Ranks are 1-based positions in sorted order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

EMPTY = None


def is_prime(v: int) -> bool:
    if v < 2:
        return False
    return all(v % d for d in range(2, math.isqrt(v) + 1))


def next_prime_above(m: int) -> int:
    p = m + 1
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class FksRankTable:
    m: int
    n: int
    cells: tuple

    @property
    def size(self) -> int:
        return len(self.cells)


def _level1(S: list[int], p: int, n1: int) -> tuple[int, list[list[int]]]:
    for k in range(1, p):
        buckets: list[list[int]] = [[] for _ in range(n1)]
        for x in S:
            buckets[(k * x) % p % n1].append(x)
        if sum(len(b) ** 2 for b in buckets) <= 4 * len(S):
            return k, buckets
    raise RuntimeError("no level-1 multiplier found")


def _level2(bucket: list[int], p: int) -> int:
    size = len(bucket) ** 2
    for k in range(1, p):
        if len({(k * x) % p % size for x in bucket}) == len(bucket):
            return k
    raise RuntimeError("no level-2 multiplier found")


def fks_build(S: Iterable[int], m: int) -> FksRankTable:
    S = sorted(set(int(v) for v in S))
    if any(not 0 <= v < m for v in S):
        raise ValueError("S must be a subset of [m]")
    p = next_prime_above(m)
    n1 = max(1, len(S))
    rank = {y: r for r, y in enumerate(S, start=1)}
    k, buckets = _level1(S, p, n1) if S else (1, [[]])
    headers = []
    slots: list = []
    offset = 1 + n1
    for b in buckets:
        size = len(b) ** 2
        if not b:
            headers.append((0, offset, 0))
            continue
        ki = _level2(b, p)
        cells = [EMPTY] * size
        for y in b:
            cells[(ki * y) % p % size] = (y, rank[y])
        headers.append((ki, offset, size))
        slots.extend(cells)
        offset += size
    return FksRankTable(m, len(S), ((k, p, n1),) + tuple(headers) + tuple(slots))


class _Reader:
    def __init__(self, cells):
        self.cells = cells
        self.probes = 0

    def __call__(self, j: int):
        self.probes += 1
        return self.cells[j]


def fks_query(table: FksRankTable, x: int) -> tuple[int | None, int]:
    """(rank, probes) for members, (None, probes) for non-members."""
    if not 0 <= x < table.m:
        raise ValueError("query outside the universe")
    read = _Reader(table.cells)
    k, p, n1 = read(0)
    ki, off, size = read(1 + (k * x) % p % n1)
    if size == 0:
        return None, read.probes
    slot = read(off + (ki * x) % p % size)
    if slot is EMPTY or slot[0] != x:
        return None, read.probes
    return slot[1], read.probes


def fks_query_all(table: FksRankTable) -> tuple[np.ndarray, np.ndarray]:
    """Ranks (0 for absent) and probe counts for every x in [m], computed with array indexing."""
    cells = table.cells
    k, p, n1 = cells[0]
    xs = np.arange(table.m, dtype=np.int64)
    head = np.array(cells[1:1 + n1], dtype=np.int64).reshape(n1, 3)
    slots = np.array([(-1, 0) if c is EMPTY else c for c in cells[1 + n1:]] or [(-1, 0)], dtype=np.int64)
    row = head[(k * xs) % p % n1]
    size = row[:, 2]
    probes = np.where(size == 0, 2, 3)
    idx = row[:, 1] - 1 - n1 + (row[:, 0] * xs) % p % np.maximum(size, 1)
    idx = np.where(size == 0, 0, idx)
    hit = (size > 0) & (slots[idx, 0] == xs)
    return np.where(hit, slots[idx, 1], 0), probes


@dataclass(frozen=True)
class FksAudit:
    cells: int
    cell_limit: int
    word_bits: int
    word_limit: int
    implicit: bool
    problems: tuple

    @property
    def ok(self) -> bool:
        return self.cells <= self.cell_limit and self.word_bits <= self.word_limit and self.implicit


def fks_audit(table: FksRankTable, S: Iterable[int]) -> FksAudit:
    """Space and implicitness: slots hold only (member, rank) pairs, headers only hash parameters."""
    S = sorted(set(S))
    rank = {y: r for r, y in enumerate(S, start=1)}
    cells = table.cells
    k, p, n1 = cells[0]
    problems = []
    if not (is_prime(p) and p > table.m and 0 < k < p and n1 == max(1, len(S))):
        problems.append("header")
    n_slots = len(cells) - 1 - n1
    seen = set()
    for i in range(n1):
        ki, off, size = cells[1 + i]
        if not (0 <= ki < p and 1 + n1 <= off <= 1 + n1 + n_slots and size >= 0):
            problems.append(f"bucket {i}")
    for c in cells[1 + n1:]:
        if c is EMPTY:
            continue
        y, r = c
        if rank.get(y) != r:
            problems.append(f"slot {c}")
        seen.add(y)
    if seen != set(S):
        problems.append("members missing")
    words = [v for c in cells if c is not EMPTY for v in c]
    word_bits = max(int(v).bit_length() for v in words) if words else 0
    word_limit = 2 * max(1, math.ceil(math.log2(max(table.m, 2)))) + 2
    return FksAudit(len(cells), 5 * max(1, len(S)) + 1, word_bits, word_limit, not problems, tuple(problems))
