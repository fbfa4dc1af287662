"""Best mixture of a finite protocol family against the worst input pair."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog


def minimax_weights(errors: Sequence[Sequence[float]], max_denominator: int = 10**6) -> tuple[list[Fraction], float]:
    """Weights lambda minimising max_pair sum_k lambda_k errors[k][pair].

    Solves the linear program with HiGHS and rounds the weights to rationals
    that sum to exactly 1.  Returns the weights and the LP value.
    """
    a = np.asarray(errors, dtype=float)
    k, m = a.shape
    # variables: lambda_1..lambda_k, v ; minimise v
    c = np.zeros(k + 1)
    c[-1] = 1.0
    a_ub = np.hstack([a.T, -np.ones((m, 1))])
    b_ub = np.zeros(m)
    a_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * k + [(None, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"minimax LP failed: {res.message}")
    lam = [Fraction(float(v)).limit_denominator(max_denominator) if v > 1e-12 else Fraction(0) for v in res.x[:k]]
    total = sum(lam)
    if total == 0:
        lam = [Fraction(1)] + [Fraction(0)] * (k - 1)
    else:
        lam = [v / total for v in lam]
    return lam, float(res.x[-1])
