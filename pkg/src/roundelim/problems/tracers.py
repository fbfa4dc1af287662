"""Finite parameter ledgers for the greater-than and predecessor lower-bound iterations.

Both ledgers use exact integers and rationals where the arithmetic allows it
and 60-digit decimals for the constants involving ln 2.  Every division that
must produce an integer is floored; predecessor fan-outs are rounded up
(the Bob-side one to a power of 2).  The rounding is recorded per row.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction

CTX = Context(prec=60)
LN2 = CTX.ln(Decimal(2))
GT_CONST = 6 ** 4            # C = (4 ln 2) * 6^4
PRED_CONST = 12 ** 4         # c1 = (4 ln 2) * 12^4


def _dec(v) -> Decimal:
    if isinstance(v, Fraction):
        return CTX.divide(Decimal(v.numerator), Decimal(v.denominator))
    return Decimal(v)


def _ceil(d: Decimal) -> int:
    return int(d.to_integral_value(rounding=ROUND_CEILING, context=CTX))


def _floor(d: Decimal) -> int:
    return int(d.to_integral_value(rounding=ROUND_FLOOR, context=CTX))


def integer_root(v: int, k: int) -> int | None:
    """Exact k-th root of a non-negative integer, or None."""
    if v < 0:
        raise ValueError("negative radicand")
    r = int(round(v ** (1.0 / k))) if v.bit_length() < 1000 else 1 << (v.bit_length() // k)
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** k == v:
            return c
    # Newton fallback for large values
    x = 1 << ((v.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + v // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x if x ** k == v else None


def rational_root(v: Fraction, k: int) -> Fraction | None:
    num, den = integer_root(v.numerator, k), integer_root(v.denominator, k)
    return None if num is None or den is None else Fraction(num, den)


def fmt12(v) -> str:
    """12 significant digits for ints of any size, Decimals, Fractions and floats."""
    if isinstance(v, int) and v.bit_length() > 160:
        shift = v.bit_length() - 100
        ctx = Context(prec=30)
        d = ctx.multiply(Decimal(v >> shift), ctx.power(Decimal(2), shift))
        return format(ctx.plus(d), ".11e")
    if isinstance(v, (int, Fraction)):
        v = _dec(v)
    if isinstance(v, Decimal):
        return format(Context(prec=12).plus(v), "g")
    return format(v, ".12g")


def _rows_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --- greater-than ----------------------------------------------------------------------------

@dataclass
class GtStage:
    stage: int
    l: int
    k_coeff: Fraction          # k_i / (4 ln 2)
    k_int: int                 # fan-out used for the integer ledger, floor(k_i)
    n_int: int                 # floor(n_{i-1} / k_int)
    n_real: Decimal            # n / prod k_j with unrounded k
    eps: Fraction
    increment: Fraction

    @property
    def k(self) -> Decimal:
        return CTX.multiply(CTX.multiply(Decimal(4), LN2), _dec(self.k_coeff))


@dataclass
class GtTrace:
    n: int
    ls: tuple[int, ...]
    threshold: Decimal
    precondition_ok: bool
    stages: list[GtStage]
    failure_stage: str | None

    @property
    def t(self) -> int:
        return len(self.ls)

    @property
    def eps_final(self) -> Fraction:
        return self.stages[-1].eps if self.stages else Fraction(1, 3)

    @property
    def n_final(self) -> int:
        return self.stages[-1].n_int if self.stages else self.n

    @property
    def contradiction(self) -> bool:
        """A zero-round protocol with error below 1/2 would remain for a non-trivial instance."""
        return self.failure_stage is None and self.eps_final == Fraction(1, 2) and self.n_final >= 1

    def to_csv(self) -> str:
        rows = [[0, self.n, "", "1/3", fmt12(Fraction(1, 3)), "", "exact"]]
        for s in self.stages:
            rows.append([s.stage, s.n_int, s.k_int, f"{s.eps.numerator}/{s.eps.denominator}", fmt12(s.eps),
                         fmt12(s.n_real), "floor"])
        return _rows_csv(["stage", "n_i", "k_i", "eps_exact", "eps_decimal", "n_real", "rounding"], rows)


def trace_gt_bound(n: int, ls) -> GtTrace:
    """Ledger of k_i = C t^4 l_i, n_i = n_{i-1} / k_i and eps_i = eps_{i-1} + ((4 ln 2) l_i / k_i)^(1/4)."""
    ls = tuple(int(v) for v in ls)
    if not ls or any(v < 1 for v in ls):
        raise ValueError("need at least one positive message length")
    t = len(ls)
    four_ln2 = CTX.multiply(Decimal(4), LN2)
    threshold = CTX.power(CTX.multiply(four_ln2, Decimal(GT_CONST * t ** 3 * sum(ls))), t)
    ok = Decimal(n) >= threshold
    stages = []
    eps = Fraction(1, 3)
    n_int, n_real = n, Decimal(n)
    for i, l in enumerate(ls, start=1):
        coeff = Fraction(GT_CONST * t ** 4 * l)
        inc = rational_root(Fraction(l) / coeff, 4)
        if inc is None:
            raise ArithmeticError("increment is not an exact rational")
        eps += inc
        k = CTX.multiply(four_ln2, _dec(coeff))
        k_int = _floor(k)
        n_int //= k_int
        n_real = CTX.divide(n_real, k)
        stages.append(GtStage(i, l, coeff, k_int, n_int, n_real, eps, inc))
    failure = None
    if not ok:
        failure = "precondition"
    elif n_int < 1:
        failure = f"stage {next(s.stage for s in stages if s.n_int < 1)}"
    return GtTrace(n, ls, threshold, ok, stages, failure)


def gt_threshold(ls) -> int:
    """Smallest integer n meeting the precondition for the given message lengths."""
    t = len(ls)
    four_ln2 = CTX.multiply(Decimal(4), LN2)
    return _ceil(CTX.power(CTX.multiply(four_ln2, Decimal(GT_CONST * t ** 3 * sum(ls))), t))


# --- predecessor -----------------------------------------------------------------------------

@dataclass
class PredStage:
    stage: int
    signature: str
    p_after_a: int             # bit length after the Alice-side reduction (floor division by k_a)
    p: int                     # bit length after the Bob-side reduction
    log_q: int                 # log2 of the set size bound
    eps: Fraction
    block_ok: bool             # p_after_a / 2 >= log k_b + 1
    rounding: str = "floor"


@dataclass
class PredTrace:
    m_exp: int
    c2: int
    c3: int
    delta: Fraction
    t: int
    t_formula: Decimal
    log_m: int
    log_n: int
    a: int
    log_b: int
    k_a: int
    log_k_b: int
    stages: list[PredStage] = field(default_factory=list)
    collapse_stage: int | None = None

    @property
    def eps_final(self) -> Fraction:
        return self.stages[-1].eps if self.stages else self.delta

    @property
    def expected_final(self) -> Fraction:
        return self.delta + Fraction(2 * self.t, 12 * self.t)

    @property
    def witness_ok(self) -> bool:
        """p_t >= (log m)^(1/2), the concrete exponent used for the polynomial-size check."""
        return bool(self.stages) and self.collapse_stage is None and self.stages[-1].p ** 2 >= self.log_m

    @property
    def contradiction(self) -> bool:
        return (self.collapse_stage is None and len(self.stages) == self.t and self.eps_final < Fraction(1, 2)
                and self.stages[-1].p >= 1 and self.stages[-1].log_q >= 1 and self.witness_ok)

    def to_csv(self) -> str:
        rows = [[0, f"[{2 * self.t},0,{self.a},b]^A", fmt12(self.log_m), self.log_n, self.k_a, self.log_k_b,
                 f"{self.delta.numerator}/{self.delta.denominator}", fmt12(self.delta), "", "exact"]]
        for s in self.stages:
            rows.append([s.stage, s.signature, fmt12(s.p), s.log_q, self.k_a, self.log_k_b,
                         f"{s.eps.numerator}/{s.eps.denominator}", fmt12(s.eps), s.block_ok, s.rounding])
        return _rows_csv(["stage", "signature", "log_m_i", "log_n_i", "k_a", "log_k_b", "eps_exact",
                          "eps_decimal", "block_ok", "rounding"], rows)


def bound_rounds(m_exp: int, c2: int = 1, c3: int = 1) -> Decimal:
    c1 = CTX.multiply(CTX.multiply(Decimal(4), LN2), Decimal(PRED_CONST))
    lll = CTX.divide(CTX.ln(Decimal(m_exp)), LN2)
    return CTX.divide(Decimal(m_exp), CTX.multiply(c1 + c2 + c3, lll))


def min_m_exp(c2: int = 1, c3: int = 1) -> int:
    """Smallest log log m for which the bound's round count reaches 1."""
    lo, hi = 4, 4
    while bound_rounds(hi, c2, c3) < 1:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if bound_rounds(mid, c2, c3) >= 1:
            hi = mid
        else:
            lo = mid + 1
    return lo


def trace_predecessor_bound(m_exp: int, c2: int = 1, c3: int = 1, delta=Fraction(1, 3) - Fraction(1, 100),
                            t: int | None = None) -> PredTrace:
    """Iterate the two reductions and two eliminations per stage for m = 2^(2^m_exp).

    log n = floor((log log m)^2 / log log log m), a = c2 log n, b = (log m)^c3,
    k_a = ceil(c1 a t^4), k_b = ceil(c1 b t^4) rounded up to a power of 2.
    """
    if m_exp < 2:
        raise ValueError("m_exp must be at least 2")
    if c2 < 1 or c3 < 1:
        raise ValueError("c2 and c3 must be at least 1")
    delta = Fraction(delta)
    if not 0 <= delta < Fraction(1, 3):
        raise ValueError("delta must lie in [0, 1/3)")
    t_thm = bound_rounds(m_exp, c2, c3)
    if t is None:
        t = _floor(t_thm)
        if t < 1:
            raise ValueError(f"parameters too small: the bound's round count is {fmt12(t_thm)} < 1")
    if t < 1:
        raise ValueError("t must be at least 1")
    log_m = 1 << m_exp
    lll = CTX.divide(CTX.ln(Decimal(m_exp)), LN2)
    log_n = _floor(CTX.divide(Decimal(m_exp * m_exp), lll))
    a = c2 * log_n
    log_b = c3 * m_exp
    four_ln2 = CTX.multiply(Decimal(4), LN2)
    c1t4 = CTX.multiply(CTX.multiply(four_ln2, Decimal(PRED_CONST)), Decimal(t ** 4))
    k_a = _ceil(CTX.multiply(c1t4, Decimal(a)))
    log_k_b = log_b + _ceil(CTX.divide(CTX.ln(c1t4), LN2))
    tr = PredTrace(m_exp, c2, c3, delta, t, t_thm, log_m, log_n, a, log_b, k_a, log_k_b)
    p, log_q = log_m, log_n
    for i in range(1, t + 1):
        p_a = p // k_a
        p_b = p_a - log_k_b - 1
        block_ok = 2 * (log_k_b + 1) <= p_a
        log_q -= log_k_b
        eps = delta + Fraction(2 * i, 12 * t)
        sig = f"[{2 * t - 2 * i},{i}(a+b),a,b]^A"
        tr.stages.append(PredStage(i, sig, p_a, p_b, log_q, eps, block_ok))
        if p_b < 1 or log_q < 0 or not block_ok:
            tr.collapse_stage = i
            break
        p = p_b
    return tr
