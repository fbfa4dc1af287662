"""Input distributions for round elimination: the product distribution D* and adversarial grids."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement, product

from ..info import JointDistribution
from ..protocols.games import GameSpec, PowerInput

DEFAULT_SUPPORT_CAP = 10**6


def build_product_distribution(d: JointDistribution, n: int, keep_all_y: bool = False,
                               cap: int = DEFAULT_SUPPORT_CAP) -> JointDistribution:
    """Distribution on power-game inputs: i uniform in [n], (x_j, y_j) i.i.d. from d, Bob gets y_i.

    With ``keep_all_y`` the discarded y_j (j != i) are kept, giving the joint
    law of (x_1..x_n, i, y_1..y_n) before marginalisation; Bob's input is then
    ``(PowerInput, y-tuple)``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    xs = sorted({x for x, _, _ in d}, key=repr)
    ys = sorted({y for _, y, _ in d}, key=repr)
    size = len(xs) ** n * n * (len(ys) ** n if keep_all_y else len(ys))
    if size > cap:
        raise ValueError(f"product distribution support bound {size} exceeds cap {cap}")
    px = d.marginal_x()
    weights: dict = {}
    if keep_all_y:
        pairs = [(x, y, p) for x, y, p in d]
        for i in range(1, n + 1):
            for combo in product(pairs, repeat=n):
                w = Fraction(1, n)
                for _, _, p in combo:
                    w *= p
                xv = tuple(c[0] for c in combo)
                yv = tuple(c[1] for c in combo)
                key = (xv, (PowerInput(i, yv[i - 1], xv[: i - 1]), yv))
                weights[key] = weights.get(key, Fraction(0)) + w
    else:
        for i in range(1, n + 1):
            for xv in product(list(px), repeat=n):
                base = Fraction(1, n)
                for j, x in enumerate(xv):
                    if j != i - 1:
                        base *= px[x]
                if not base:
                    continue
                for y, pxy in d.conditional_y(xv[i - 1]).items():
                    w = base * px[xv[i - 1]] * pxy
                    key = (xv, PowerInput(i, y, xv[: i - 1]))
                    weights[key] = weights.get(key, Fraction(0)) + w
    return JointDistribution.from_dict(weights)


def _compositions(total: int, parts: int):
    for cuts in combinations_with_replacement(range(total + 1), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[k + 1] - bounds[k] for k in range(parts))


def joint_grid(g: GameSpec, step: Fraction) -> list[JointDistribution]:
    """Every distribution on the legal pairs whose weights are multiples of ``step``."""
    k = int(1 / Fraction(step))
    pairs = list(g.domain)
    out = []
    for comp in _compositions(k, len(pairs)):
        out.append(JointDistribution.from_dict({pr: Fraction(c, k) for pr, c in zip(pairs, comp) if c}))
    return out


def product_grid(g: GameSpec, step: Fraction) -> list[JointDistribution]:
    """Product distributions p_X x p_Y with marginal weights in multiples of ``step`` (total games only)."""
    if not g.is_total:
        raise ValueError("product grid needs a total game")
    k = int(1 / Fraction(step))
    out = []
    for a in _compositions(k, len(g.E)):
        for b in _compositions(k, len(g.F)):
            px = {x: Fraction(c, k) for x, c in zip(g.E, a) if c}
            py = {y: Fraction(c, k) for y, c in zip(g.F, b) if c}
            out.append(JointDistribution.product(px, py))
    return out
