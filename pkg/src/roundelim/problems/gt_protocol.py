"""A t-round public-coin protocol for greater-than on n-bit integers.

The (zero-padded) inputs are viewed as b^t bits with b = ceil(n^(1/t)).  Each
round narrows the interval holding the first differing bit by a factor b:
the speaker sends one fingerprint per sub-block of the current interval, and
the receiver locates the first sub-block whose fingerprint differs.  Blocks
of at most k bits are sent verbatim, longer ones as k inner-product hashes
with public random masks.  From round 2 on a message starts with the index
chosen by the speaker (value b meaning "no difference found").
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..protocols.classical import ClassicalProtocol, bits
from ..protocols.coins import ALICE, BOB, NO_COIN, UniformBits


def _int_root_ceil(n: int, t: int) -> int:
    b = max(1, round(n ** (1.0 / t)))
    while b ** t < n:
        b += 1
    while b > 1 and (b - 1) ** t >= n:
        b -= 1
    return b


def _log2_ceil_frac(v: Fraction) -> int:
    k = 0
    while Fraction(2) ** k < v:
        k += 1
    return k


@dataclass(frozen=True)
class GtLayout:
    n: int
    t: int
    b: int
    k: int
    index_bits: int
    mask_offsets: tuple[int, ...]

    @property
    def padded(self) -> int:
        return self.b ** self.t

    def block(self, r: int) -> int:
        """Sub-block length at level r (1-based)."""
        return self.b ** (self.t - r)

    def fp_bits(self, r: int) -> int:
        return min(self.k, self.block(r))

    def hashed(self, r: int) -> bool:
        return self.block(r) > self.k

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple((self.index_bits if r > 1 else 0) + self.b * self.fp_bits(r) for r in range(1, self.t + 1))

    @property
    def coin_bits(self) -> int:
        return self.mask_offsets[-1]


def gt_layout(n: int, t: int, delta=Fraction(1, 3), fingerprint_bits: int | None = None) -> GtLayout:
    if n < 1:
        raise ValueError("n must be positive")
    if not 1 <= t or (n > 1 and t > math.log2(n)) or (n == 1 and t != 1):
        raise ValueError(f"need 1 <= t <= log2 n, got t = {t}")
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    b = _int_root_ceil(n, t)
    k = fingerprint_bits if fingerprint_bits is not None else _log2_ceil_frac(Fraction(n * t) / delta)
    if k < 1:
        raise ValueError("fingerprints need at least one bit")
    offs = [0]
    for r in range(1, t + 1):
        s = b ** (t - r)
        offs.append(offs[-1] + (b * k * s if s > k else 0))
    return GtLayout(n, t, b, k, (b).bit_length(), tuple(offs))


def _fingerprints(lay: GtLayout, r: int, value: str, start: int, masks: int) -> list[int]:
    s = lay.block(r)
    out = []
    for j in range(lay.b):
        blk = value[start + j * s: start + (j + 1) * s]
        if not lay.hashed(r):
            out.append(int(blk, 2))
            continue
        v = int(blk, 2)
        h = 0
        for h_bit in range(lay.k):
            off = lay.mask_offsets[r - 1] + (j * lay.k + h_bit) * s
            mask = (masks >> off) & ((1 << s) - 1)
            h = (h << 1) | (bin(v & mask).count("1") & 1)
        out.append(h)
    return out


def _first_diff(a: list[int], c: list[int], b: int) -> int:
    return next((j for j in range(b) if a[j] != c[j]), b)


def _parse(lay: GtLayout, r: int, msg: str) -> tuple[int | None, list[int]]:
    idx = None
    if r > 1:
        idx, msg = int(msg[: lay.index_bits], 2), msg[lay.index_bits:]
    w = lay.fp_bits(r)
    return idx, [int(msg[j * w:(j + 1) * w], 2) for j in range(lay.b)]


def _replay(lay: GtLayout, value: str, tr: tuple, masks: int) -> tuple[int, int | None, int]:
    """Start of the current interval, next index (None before any message), level reached."""
    start = 0
    for r in range(2, len(tr) + 1):
        idx, _ = _parse(lay, r, tr[r - 1])
        if idx >= lay.b:
            return start, lay.b, r
        start += idx * lay.block(r - 1)
    if not tr:
        return 0, None, 0
    r = len(tr)
    _, theirs = _parse(lay, r, tr[-1])
    mine = _fingerprints(lay, r, value, start, masks)
    return start, _first_diff(mine, theirs, lay.b), r


def gt_protocol(n: int, t: int, delta=Fraction(1, 3), fingerprint_bits: int | None = None) -> ClassicalProtocol:
    """Alice starts; inputs are integers in [0, 2^n); the answer is 1 iff x > y."""
    lay = gt_layout(n, t, delta, fingerprint_bits)
    N = lay.padded

    def as_bits(v: int) -> str:
        return bits(v, N)

    def message(j):
        r = j + 1

        def rule(inp, tr, _c, masks):
            value = as_bits(inp)
            if r == 1:
                return "".join(bits(f, lay.fp_bits(1)) for f in _fingerprints(lay, 1, value, 0, masks))
            start, idx, level = _replay(lay, value, tr, masks)
            if idx >= lay.b or level < r - 1:
                return bits(lay.b, lay.index_bits) + "0" * (lay.b * lay.fp_bits(r))
            start += idx * lay.block(r - 1)
            fps = _fingerprints(lay, r, value, start, masks)
            return bits(idx, lay.index_bits) + "".join(bits(f, lay.fp_bits(r)) for f in fps)
        return rule

    last_receiver = BOB if t % 2 else ALICE

    def answer(inp, tr, _c, masks):
        value = as_bits(inp)
        start, idx, level = _replay(lay, value, tr, masks)
        if idx is None or idx >= lay.b or level < t:
            return 0
        bit = value[start + idx * lay.block(t)]
        return int(bit == "0") if last_receiver == BOB else int(bit == "1")

    coin = UniformBits(lay.coin_bits) if lay.coin_bits else NO_COIN
    E = tuple(range(1 << n))
    return ClassicalProtocol(E, E, ALICE, lay.lengths, tuple(message(j) for j in range(t)), answer,
                             public_coin=coin, name=f"gt[{n},{t}]")


@dataclass(frozen=True)
class CommunicationAudit:
    bits: int
    limit: float
    k: int
    b: int

    @property
    def ok(self) -> bool:
        return self.bits <= self.limit


def communication_audit(n: int, t: int, delta=Fraction(1, 3), fingerprint_bits: int | None = None) -> CommunicationAudit:
    """Total message length against 4 t n^(1/t) ceil(log2(n t / delta))."""
    lay = gt_layout(n, t, delta, fingerprint_bits)
    limit = 4 * t * n ** (1.0 / t) * _log2_ceil_frac(Fraction(n * t) / Fraction(delta))
    return CommunicationAudit(sum(lay.lengths), limit, lay.k, lay.b)


def sampled_error(p: ClassicalProtocol, pairs, rng: np.random.Generator) -> tuple[int, int]:
    """Errors over one coin draw per pair: (errors, trials)."""
    from ..protocols.classical import sample_run
    errs = 0
    for x, y in pairs:
        _, ans = sample_run(p, x, y, rng)
        errs += ans != int(x > y)
    return errs, len(pairs)
