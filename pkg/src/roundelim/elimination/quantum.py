"""Quantum round reduction and round elimination for safe coinless protocols.

Reduction of a protocol P whose first message S is sent by Alice:

* a classical copy C of Alice's input becomes the new input register, and a
  fresh register R of |S| qubits joins Alice's workspace;
* feeding sum_x sqrt(p_x)|x> to the old input register gives a first-round
  state theta whose message part is the average sigma; a unitary U_x on
  Alice's side (controlled by C) moves theta as close as possible to the
  true state theta_x;
* Bob instead prepares the eigenbasis purification of sigma on (S, R), runs his
  next round and sends R along with his message; Alice's unitary V_x maps
  |0>|phi_sigma> exactly onto U_x theta, so the result behaves like the
  intermediate protocol while Bob now speaks first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from ..info import Encoding, JointDistribution, encoding_mutual_information, verify_information_identities
from ..protocols.classical import Signature
from ..protocols.games import GameSpec, PowerInput, power_game
from ..protocols.quantum import (
    Controlled,
    QuantumMixture,
    QuantumSafeProtocol,
    Round,
    Unitary,
    as_mixture,
    distributional_error_quantum,
    first_message_encoding_quantum,
    flatten_mixtures,
    pair_errors_quantum,
    specialize,
    verify_safe,
    verify_secure,
)
from ..tensor import (
    ALICE,
    apply_matrix,
    BOB,
    DensityMatrix,
    PureState,
    Register,
    RegisterLayout,
    max_overlap_local_unitary,
    purify,
    reduced_from_vector,
    state_prep_unitary,
)
from .certificate import EliminationCertificate
from .distributions import build_product_distribution, product_grid
from .minimax import minimax_weights

LN2 = math.log(2)


def _fresh(layout: RegisterLayout, base: str) -> str:
    name = base
    k = 1
    while name in layout:
        k += 1
        name = f"{base}{k}"
    return name


def input_superposition(p: QuantumSafeProtocol, px: dict, regs: tuple[str, ...] | None = None) -> np.ndarray:
    """sum_x sqrt(p_x)|enc(x)> on Alice's input registers."""
    regs = regs or p.alice_inputs
    sub = p.layout.sub(regs)
    vec = np.zeros(sub.dim, dtype=complex)
    for x, w in px.items():
        vals = dict(zip(p.alice_inputs, p.alice_encode[x]))
        vec[sub.basis_index({r: vals[r] for r in regs})] += math.sqrt(float(w))
    return vec / np.linalg.norm(vec)


def _run_gates(vec: np.ndarray, layout: RegisterLayout, gates) -> np.ndarray:
    for gt in gates:
        vec = gt.apply(vec, layout)
    return vec


@dataclass
class ReductionParts:
    """Intermediate objects of one reduction, exposed for inspection and tests."""

    intermediate: QuantumSafeProtocol
    sigma: DensityMatrix
    u_overlaps: dict
    v_overlaps: dict


def quantum_round_reduce(p: QuantumSafeProtocol, g: GameSpec, d: JointDistribution,
                         check: bool = True) -> tuple[QuantumSafeProtocol, EliminationCertificate, ReductionParts]:
    """[t, c, l_1..l_t]^A safe coinless secure protocol -> [t-1, c+l_1, l_2..l_t]^B one."""
    if not isinstance(p, QuantumSafeProtocol):
        raise TypeError("quantum round reduction needs a coinless protocol")
    if p.t < 1 or p.starter != ALICE:
        raise ValueError("protocol must start with a message from Alice")
    if check:
        sec = verify_secure(p)
        if not sec.ok:
            raise ValueError(f"protocol is not secure: {sec.details}")
    lay = p.layout
    sends = p.rounds[0].sends
    size_s = lay.size(sends)
    xin = p.alice_inputs
    alice_regs = [r for r in lay.owned_by(ALICE)]
    work = [r for r in alice_regs if r not in xin and r not in sends]
    copies = {x: _fresh(lay, "C" + x) for x in xin}
    ext = lay.concat(RegisterLayout(tuple(Register(copies[x], lay[x].qubits, ALICE) for x in xin)))
    rname = _fresh(ext, "R")
    ext = ext.concat(RegisterLayout((Register(rname, size_s, ALICE),)))
    # first-round states on Alice's side (inputs, work, message, R)
    local = RegisterLayout(tuple(r for r in ext.registers if r.name in set(alice_regs) | {rname}))
    k_regs = tuple(r.name for r in local.registers if r.name not in sends)
    g_regs = tuple(r for r in k_regs if r != rname)
    init_vals = {k: v for k, v in p.initial.items() if k in local}
    px = d.marginal_x()
    gates1 = p.rounds[0].gates

    def start(values: dict) -> np.ndarray:
        v = np.zeros(local.dim, dtype=complex)
        v[local.basis_index(values)] = 1
        return v

    thetas = {}
    for x in p.E:
        vals = dict(init_vals)
        vals.update(zip(xin, p.alice_encode[x]))
        thetas[x] = PureState(_run_gates(start(vals), local, gates1), local)
    psi = input_superposition(p, px)
    prep_x = Unitary(xin, state_prep_unitary(psi))
    theta = PureState(_run_gates(start(init_vals), local, (prep_x,) + gates1), local)
    sigma = DensityMatrix(reduced_from_vector(theta.amplitudes, local, local.sub(sends).names), lay.sub(sends))

    csub = ext.sub(copies.values())
    cnames = tuple(copies[x] for x in xin)

    def cval(x) -> int:
        return csub.basis_index(dict(zip(cnames, p.alice_encode[x])))

    u_maps, u_over = {}, {}
    theta_prime = {}
    for x in p.E:
        u, ov = max_overlap_local_unitary(thetas[x], theta, k_regs)
        u_maps[cval(x)] = u
        u_over[x] = ov
        theta_prime[x] = PureState(apply_matrix(theta.amplitudes, local, u, list(k_regs)), local)
    u_gate = Controlled(cnames, k_regs, u_maps)

    # intermediate protocol: Alice feeds the superposition, then corrects with U_x
    inter_rounds = (Round(ALICE, (prep_x,) + gates1 + (u_gate,), sends),) + p.rounds[1:]
    x_init = {k: v for k, v in p.initial.items()}
    intermediate = QuantumSafeProtocol(
        layout=ext, alice_inputs=cnames, bob_inputs=p.bob_inputs,
        alice_encode={x: p.alice_encode[x] for x in p.E}, bob_encode=p.bob_encode,
        rounds=inter_rounds, answer_regs=p.answer_regs, answer_map=p.answer_map, safe=p.safe,
        final_gates=p.final_gates, initial=x_init, starter=ALICE, name=f"intermediate({p.name})")

    # Bob's purification of sigma on (S, R) and Alice's exact correction V_x
    phi = purify(sigma, name=rname, owner=BOB)
    phi_gate = Unitary(tuple(sigma.layout.names) + (rname,), state_prep_unitary(phi.amplitudes))
    src_vals = {k: v for k, v in init_vals.items() if k in set(g_regs)}
    src = _run_gates(start(src_vals), local, (phi_gate,))
    src_state = PureState(src, local)
    v_maps, v_over = {}, {}
    for x in p.E:
        v, ov = max_overlap_local_unitary(theta_prime[x], src_state, k_regs)
        v_maps[cval(x)] = v
        v_over[x] = ov
    v_gate = Controlled(cnames, k_regs, v_maps)

    q_layout = ext.with_owner(tuple(sends) + (rname,), BOB)
    q_initial = {k: v for k, v in p.initial.items() if k not in set(sends)}
    if p.t == 1:
        q_rounds = ()
        final = (phi_gate,) + p.final_gates
    else:
        r2 = p.rounds[1]
        q_rounds = [Round(BOB, (phi_gate,) + r2.gates, (rname,) + r2.sends)]
        if p.t >= 3:
            r3 = p.rounds[2]
            q_rounds.append(Round(ALICE, (v_gate,) + r3.gates, r3.sends))
            q_rounds.extend(p.rounds[3:])
            final = p.final_gates
        else:
            final = (v_gate,) + p.final_gates
        q_rounds = tuple(q_rounds)
    q = QuantumSafeProtocol(
        layout=q_layout, alice_inputs=cnames, bob_inputs=p.bob_inputs,
        alice_encode={x: p.alice_encode[x] for x in p.E}, bob_encode=p.bob_encode,
        rounds=q_rounds, answer_regs=p.answer_regs, answer_map=p.answer_map, safe=(rname,),
        final_gates=final, initial=q_initial, starter=BOB, name=f"reduce({p.name})")

    eps_p = distributional_error_quantum(p, g, d)
    eps_q = distributional_error_quantum(q, g, d)
    enc = first_message_encoding_quantum(p, d)
    info = max(encoding_mutual_information(enc), 0.0)
    bound = eps_p + (2 * LN2 * info) ** 0.25
    details = {"min_u_overlap": min(u_over[x] for x in px), "min_v_overlap": min(v_over.values())}
    if check:
        details["eps_intermediate"] = distributional_error_quantum(intermediate, g, d)
        details["safe_ok"] = verify_safe(q).ok
        details["secure_ok"] = verify_secure(q).ok
    cert = EliminationCertificate("quantum-reduce", p.signature, q.signature, p.signature.eliminated(),
                                  eps_p, eps_q, info, bound, "eps_P + (2 ln2 I(X:M))^(1/4)", details)
    return q, cert, ReductionParts(intermediate, sigma, u_over, v_over)


# --- elimination -----------------------------------------------------------------------------

def power_input_registers(n: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Register names used for power-game protocols: Alice X1..Xn; Bob I, Y, BX1..BX(n-1)."""
    return tuple(f"X{j}" for j in range(1, n + 1)), ("I", "Y") + tuple(f"BX{j}" for j in range(1, n))


def prime_protocol_quantum(pstar: QuantumSafeProtocol, g: GameSpec, n: int, i: int, prefix: tuple,
                           px: dict) -> QuantumSafeProtocol:
    """Protocol for g at index i with a fixed prefix: the prefix and index registers become constants,
    x_{i+1..n} are fed as sum_x sqrt(p_x)|x> (they only ever act as controls)."""
    xs, bs = power_input_registers(n)
    if tuple(pstar.alice_inputs) != xs or tuple(pstar.bob_inputs) != bs:
        raise ValueError("protocol does not use the power-game register convention")
    y0 = g.F[0]
    bvals = dict(zip(bs, pstar.bob_encode[PowerInput(i, y0, prefix)]))
    some_x = next(x for x in pstar.E if x[: i - 1] == prefix)
    avals = dict(zip(xs, pstar.alice_encode[some_x]))
    constants = {r: v for r, v in bvals.items() if r != "Y"}
    constants.update({xs[j]: avals[xs[j]] for j in range(i - 1)})
    xi = xs[i - 1]
    alice_encode, bob_encode = {}, {}
    for x in g.E:
        full = next(v for v in pstar.E if v[: i - 1] == prefix and v[i - 1] == x)
        alice_encode[x] = (dict(zip(xs, pstar.alice_encode[full]))[xi],)
    for y in g.F:
        bob_encode[y] = (dict(zip(bs, pstar.bob_encode[PowerInput(i, y, prefix)]))["Y"],)
    # superposition over later coordinates, built from the encodings of x_j
    preps = []
    for j in range(i, n):
        reg = xs[j]
        sub = pstar.layout.sub([reg])
        vec = np.zeros(sub.dim, dtype=complex)
        for x, w in px.items():
            full = next(v for v in pstar.E if v[j] == x)
            vec[dict(zip(xs, pstar.alice_encode[full]))[reg]] += math.sqrt(float(w))
        preps.append(Unitary((reg,), state_prep_unitary(vec / np.linalg.norm(vec))))
    base = specialize(pstar, constants, alice_inputs=(xi,), bob_inputs=("Y",),
                      alice_encode=alice_encode, bob_encode=bob_encode)
    first = base.rounds[0]
    rounds = (Round(first.speaker, tuple(preps) + first.gates, first.sends),) + base.rounds[1:]
    return QuantumSafeProtocol(base.layout, base.alice_inputs, base.bob_inputs, base.alice_encode, base.bob_encode,
                               rounds, base.answer_regs, base.answer_map, base.safe, base.final_gates,
                               base.initial, base.starter, f"P'[{i};{prefix}]")


@dataclass
class QuantumEliminationRun:
    protocol: QuantumMixture
    certificate: EliminationCertificate
    family: list
    weights: list
    ledger: list


def _mixture_tables(p, gn: GameSpec) -> list[tuple[Fraction, QuantumSafeProtocol, dict]]:
    return [(w, q, pair_errors_quantum(q, gn, gn.domain)) for w, q in as_mixture(p).components]


def eliminate_for_distribution_quantum(tables, g: GameSpec, gn: GameSpec, n: int, d: JointDistribution):
    dstar = build_product_distribution(d, n)
    best = None
    for _, q, tab in tables:
        e = sum(float(w) * tab[(x, y)] for x, y, w in dstar)
        if best is None or e < best[1] - 1e-15:
            best = (q, e)
    pstar, eps_star = best
    px = d.marginal_x()
    comps, info, certs = [], 0.0, []
    for i in range(1, n + 1):
        for prefix in product(list(px), repeat=i - 1):
            w = Fraction(1, n)
            for v in prefix:
                w *= px[v]
            pprime = prime_protocol_quantum(pstar, g, n, i, prefix, px)
            q, cert, _ = quantum_round_reduce(pprime, g, d, check=False)
            comps.append((w, q))
            certs.append(cert)
            info += float(w) * cert.information
    # cross-check: the averaged per-coordinate information equals I(X_1..X_n : M) / n
    total = _joint_information(pstar, gn, n, px)
    mixed = QuantumMixture(tuple(comps), name="eliminated")
    return mixed, {"eps_star": eps_star, "mean_information": info, "joint_information": total,
                   "reduce_ok": all(c.ok for c in certs)}


def _joint_information(pstar: QuantumSafeProtocol, gn: GameSpec, n: int, px: dict) -> float:
    xs = [v for v in pstar.E if all(c in px for c in v)]
    priors = []
    for v in xs:
        w = Fraction(1)
        for c in v:
            w *= px[c]
        priors.append(w)
    d = JointDistribution(tuple((v, gn.F[0], w) for v, w in zip(xs, priors)))
    enc = first_message_encoding_quantum(pstar, d)
    x_qubits = n * max(1, (len(px) - 1).bit_length())
    if x_qubits + enc.codewords[0].layout.total <= 10:
        rep = verify_information_identities(Encoding(enc.values, enc.priors, enc.codewords), "additivity")
        return rep.lhs
    return encoding_mutual_information(enc)


def quantum_round_eliminate(p, g: GameSpec, n: int, grid=None, step: Fraction = Fraction(1, 4)) -> QuantumEliminationRun:
    """Safe public-coin protocol for g from one for g^(n), with the first message removed."""
    gn = power_game(g, n)
    mix = as_mixture(p)
    sig = mix.signature
    if sig.t < 1 or sig.starter != ALICE:
        raise ValueError("protocol must start with a message from Alice")
    tables = _mixture_tables(mix, gn)
    per = {pr: sum(float(w) * t[pr] for w, _, t in tables) for pr in gn.domain}
    delta = max(per.values())
    grid = grid if grid is not None else product_grid(g, step)
    family, ledger = [], []
    l1 = sig.lengths[0]
    for d in grid:
        q, info = eliminate_for_distribution_quantum(tables, g, gn, n, d)
        family.append(q)
        ledger.append({"eps_D": distributional_error_quantum(q, g, d), **info,
                       "information_budget": 2 * l1 / n})
    fam_tables = [pair_errors_quantum(q, g, g.domain) for q in family]
    pairs = list(g.domain)
    weights, value = minimax_weights([[t[pr] for pr in pairs] for t in fam_tables])
    chosen = [(w, q) for w, q in zip(weights, family) if w]
    out = flatten_mixtures(chosen, name="eliminated-minimax")
    per_pair = {pr: sum(float(w) * t[pr] for w, t in zip(weights, fam_tables)) for pr in pairs}
    worst = max(per_pair.values())
    bound = delta + (4 * l1 * LN2 / n) ** 0.25
    safe = verify_safe(out)
    secure = verify_secure(out)
    cert = EliminationCertificate(
        "quantum-eliminate", sig, out.signature, sig.eliminated(), delta, worst,
        max(e["mean_information"] for e in ledger), bound, "delta + (4 l1 ln2 / n)^(1/4)",
        {"n": n, "grid": len(grid), "lp_value": value, "family_used": len(chosen),
         "safe_ok": safe.ok, "secure_ok": secure.ok,
         "information_ledger_ok": all(e["mean_information"] <= e["information_budget"] + 1e-7 for e in ledger),
         "additivity_residual": max(abs(e["mean_information"] - e["joint_information"] / n) for e in ledger)})
    return QuantumEliminationRun(out, cert, family, weights, ledger)
