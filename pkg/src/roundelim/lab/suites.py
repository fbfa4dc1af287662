"""Seeded verification suites producing JSON-lines result records."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable

import numpy as np

from ..tensor import DensityMatrix, PureState, apply_matrix, fidelity, partial_trace, trace_norm
from ..info import (
    Encoding,
    average_encoding_gap,
    mutual_information,
    subsystem_entropy,
    verify_information_identities,
    von_neumann_entropy,
)
from .generators import (
    case_rng,
    qubit_layout,
    random_classical_case,
    random_classical_encoding,
    random_density,
    random_pure,
    random_quantum_encoding,
    random_quantum_protocol,
    random_rational_dist,
)

DEFAULT_SEED = 0


@dataclass
class ExperimentConfig:
    suite: str
    seed: int = DEFAULT_SEED
    out: str | None = None
    cap_qubits: int = 12
    cap_branches: int = 10**7
    trials: int | None = None
    tolerance: float = 1e-7
    timings: bool = False

    @classmethod
    def from_env(cls, suite: str, **kw) -> "ExperimentConfig":
        """Caps default to LAB_CAP_QUBITS / LAB_CAP_BRANCHES when set; explicit values win."""
        env = {"cap_qubits": os.environ.get("LAB_CAP_QUBITS"), "cap_branches": os.environ.get("LAB_CAP_BRANCHES")}
        for k, v in env.items():
            if kw.get(k) is None and v is not None:
                kw[k] = int(v)
        return cls(suite, **{k: v for k, v in kw.items() if v is not None})


# --- record formatting -----------------------------------------------------------------------

def num(v):
    """12 significant digits for reals, "n/d" for rationals; other values unchanged."""
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        return float(format(v, ".12g"))
    if isinstance(v, dict):
        return {str(k): num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [num(x) for x in v]
    return str(v)


def digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(np.ascontiguousarray(np.round(p, 12)).tobytes())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:16]


def record(suite: str, case, inputs: str, measured: dict, bound: dict, slack, ok: bool, residual=None) -> dict:
    return {"suite": suite, "case": case, "digest": inputs, "measured": num(measured), "bound": num(bound),
            "slack": num(slack), "residual": num(residual), "pass": bool(ok)}


def _min(*vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


# --- suites ----------------------------------------------------------------------------------

def suite_info_identities(cfg: ExperimentConfig):
    trials = cfg.trials or 200
    for k in range(trials):
        rng = case_rng(cfg.seed, k)
        sizes = [[1, 1, 1], [1, 2], [2, 1], [1, 1]][k % 4]
        lay = qubit_layout(sizes)
        rho = random_density(rng, lay, rank=int(rng.integers(1, lay.dim + 1)))
        names = lay.names
        if len(names) == 3:
            parts = [{names[0]}, {names[1]}, {names[2]}]
        else:
            sub = qubit_layout([1] * lay.total)
            rho = DensityMatrix(rho.matrix, sub)
            names = sub.names
            parts = [{names[0]}, {names[1]}, set(names[2:])] if len(names) == 3 else None
        if parts is None:
            a, b = {names[0]}, {names[1]}
            residual = 0.0
        else:
            rep = verify_information_identities(rho, "chain", parts=parts, tol=cfg.tolerance)
            a, b = parts[0], parts[1] | parts[2]
            residual = rep.residual
        i_ab = mutual_information(rho, a, b)
        s_a = subsystem_entropy(rho, a)
        s = von_neumann_entropy(rho)
        slacks = [i_ab, 2 * s_a - i_ab, rho.layout.total - s]
        slack = min(slacks)
        yield record("info-identities", k, digest(rho.matrix), {"I_AB": i_ab, "S_A": s_a, "S": s},
                     {"2S_A": 2 * s_a, "log_d": rho.layout.total}, slack,
                     residual <= cfg.tolerance and slack >= -1e-9, residual)


def suite_average_encoding(cfg: ExperimentConfig):
    basis = Encoding((0, 1), (Fraction(1, 2),) * 2,
                     (DensityMatrix.from_diagonal([1, 0], qubit_layout([1], ["M"])),
                      DensityMatrix.from_diagonal([0, 1], qubit_layout([1], ["M"]))))
    lhs, rhs, slack = average_encoding_gap(basis)
    residual = max(abs(lhs - 1), abs(rhs - math.sqrt(2 * math.log(2))))
    yield record("average-encoding", "basis-example", digest("basis"), {"lhs": lhs}, {"rhs": rhs}, slack,
                 slack >= -1e-8 and residual <= 1e-6, residual)
    trials = cfg.trials or 600
    n_classical = (trials * 5) // 6
    for k in range(trials):
        rng = case_rng(cfg.seed, k)
        if k < n_classical:
            e = random_classical_encoding(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
            kind = "classical"
            key = digest(repr(e.priors), repr(e.codewords))
        else:
            e = random_quantum_encoding(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)))
            kind = "quantum"
            key = digest(repr(e.priors), *[c.matrix for c in e.codewords])
        lhs, rhs, slack = average_encoding_gap(e)
        yield record("average-encoding", k, key, {"kind": kind, "lhs": lhs}, {"rhs": rhs}, slack, slack >= -1e-8)


def suite_local_transition(cfg: ExperimentConfig):
    trials = cfg.trials or 100
    for k in range(trials):
        rng = case_rng(cfg.seed, k)
        h, kq = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        lay = qubit_layout([h, kq], ["H", "K"])
        p1 = random_pure(rng, lay)
        if k % 3 == 0:
            # nearby pair: perturb the first state
            v = p1.amplitudes + 0.1 * (rng.normal(size=lay.dim) + 1j * rng.normal(size=lay.dim))
            p2 = PureState(v / np.linalg.norm(v), lay)
        else:
            p2 = random_pure(rng, lay)
        r1, r2 = partial_trace(p1.density(), ["H"]).matrix, partial_trace(p2.density(), ["H"]).matrix
        u, overlap = max_overlap(p1, p2)
        moved = apply_matrix(p2.amplitudes, lay, u, ["K"])
        achieved = abs(np.vdot(p1.amplitudes, moved))
        f = fidelity(r1, r2)
        residual = max(abs(overlap - f), abs(achieved - f))
        post = trace_norm(np.outer(p1.amplitudes, p1.amplitudes.conj()) - np.outer(moved, moved.conj()))
        bound = 2 * math.sqrt(trace_norm(r1 - r2))
        yield record("local-transition", k, digest(p1.amplitudes, p2.amplitudes),
                     {"overlap": achieved, "post_distance": post}, {"fidelity": f, "2sqrt_distance": bound},
                     bound - post, residual <= 1e-8 and post <= bound + 1e-8, residual)


def max_overlap(p1, p2):
    from ..tensor import max_overlap_local_unitary
    return max_overlap_local_unitary(p1, p2, ["K"])


def suite_classical_roundelim(cfg: ExperimentConfig):
    from ..elimination.classical import classical_round_eliminate, classical_round_reduce, stage1_marginal_check
    from ..protocols.classical import ClassicalProtocol
    from ..protocols.coins import FiniteCoin
    from ..protocols.games import equality_game, power_game
    trials = cfg.trials or 1000
    for k in range(trials):
        rng = case_rng(cfg.seed, k)
        zero = k % 5 == 0
        g, p, d = random_classical_case(rng, zero_information=zero)
        q, cert = classical_round_reduce(p, g, d, cfg.cap_branches)
        stage1 = stage1_marginal_check(p, q)
        exact = cert.eps_after == cert.eps_before if cert.details["zero_information"] else None
        ok = cert.ok and stage1 and exact is not False
        yield record("classical-roundelim", k, digest(str(p.signature), repr(d.support)),
                     {"eps_P": cert.eps_before, "eps_Q": cert.eps_after, "I": cert.information,
                      "signature": str(cert.after), "zero_information": cert.details["zero_information"],
                      "exact_equality": exact, "stage1": stage1},
                     {"bound": cert.bound}, cert.slack, ok)
    # end to end: 1-bit equality, n = 4, index protocol with a public (index, guess) coin
    run, p = index_elimination(classical=True)
    c = run.certificate
    yield record("classical-roundelim", "eliminate-EQ1-n4", digest("index", 4),
                 {"delta": c.eps_before, "worst_error": c.eps_after, "signature": str(c.after),
                  "lp_value": c.details["lp_value"], "information_ledger_ok": c.details["information_ledger_ok"]},
                 {"bound": c.bound}, c.slack, c.ok and c.details["information_ledger_ok"])


def index_protocol(n: int = 4):
    """One-bit protocol for EQ1^(n): Alice sends x_r for a public index r; Bob answers on his index
    and outputs a public random guess otherwise."""
    from ..protocols.classical import ClassicalProtocol
    from ..protocols.coins import FiniteCoin
    from ..protocols.games import equality_game, power_game
    g = equality_game(1)
    gn = power_game(g, n)
    pub = FiniteCoin.uniform([(r, b) for r in range(1, n + 1) for b in (0, 1)])

    def m1(x, tr, a, pv):
        return str(x[pv[0] - 1])

    def ans(bi, tr, b, pv):
        r, guess = pv
        return int(int(tr[0]) == bi.y) if r == bi.i else guess

    return g, gn, ClassicalProtocol(gn.E, gn.F, "A", (1,), (m1,), ans, public_coin=pub, name="index")


def index_elimination(classical: bool, n: int = 4):
    from ..elimination.classical import classical_round_eliminate
    from ..elimination.quantum import quantum_round_eliminate
    from ..protocols.embed import embed_classical, power_codings
    g, gn, p = index_protocol(n)
    if classical:
        return classical_round_eliminate(p, g, n), p
    ac, acode, bc, bcode = power_codings(g, n)
    qp = embed_classical(p, gn, alice_coding=(ac, acode), bob_coding=(bc, bcode))
    return quantum_round_eliminate(qp, g, n), qp


def suite_quantum_roundelim(cfg: ExperimentConfig):
    from ..elimination.quantum import quantum_round_reduce
    from ..protocols.games import random_game
    from ..info import JointDistribution
    trials = cfg.trials or 100
    for k in range(trials):
        rng = case_rng(cfg.seed, k)
        t = int(rng.integers(1, 4))
        ne, nf, l1, c = int(rng.integers(2, 5)), int(rng.integers(2, 5)), int(rng.integers(1, 3)), int(rng.integers(0, 2))
        try:
            p = random_quantum_protocol(rng, t, ne, nf, l1, c, max_qubits=cfg.cap_qubits)
        except ValueError:
            p = random_quantum_protocol(rng, t, 2, 2, 1, c, max_qubits=cfg.cap_qubits)
        g = random_game(rng, len(p.E), len(p.F))
        px = random_rational_dist(rng, len(p.E))
        py = random_rational_dist(rng, len(p.F))
        d = JointDistribution.product(dict(zip(p.E, px)), dict(zip(p.F, py)))
        q, cert, parts = quantum_round_reduce(p, g, d)
        det = cert.details
        ok = cert.ok and det["safe_ok"] and det["secure_ok"]
        yield record("quantum-roundelim", k, digest(str(p.signature), repr(d.support), k),
                     {"eps_P": cert.eps_before, "eps_Q": cert.eps_after, "I": cert.information,
                      "before": str(cert.before), "after": str(cert.after), "safe": det["safe_ok"],
                      "secure": det["secure_ok"], "eps_intermediate": det["eps_intermediate"],
                      "min_v_overlap": det["min_v_overlap"]},
                     {"bound": cert.bound, "expected_after": str(cert.expected_after)}, cert.slack, ok,
                     abs(1 - det["min_v_overlap"]))
    run, _ = index_elimination(classical=False)
    c = run.certificate
    det = c.details
    ok = c.ok and det["safe_ok"] and det["secure_ok"] and det["information_ledger_ok"]
    yield record("quantum-roundelim", "eliminate-EQ1-n4", digest("index-quantum", 4),
                 {"delta": c.eps_before, "worst_error": c.eps_after, "signature": str(c.after),
                  "safe": det["safe_ok"], "secure": det["secure_ok"]},
                 {"bound": c.bound}, c.slack, ok, det["additivity_residual"])


def sweep_par_reduce_A(p: int, k: int, q: int):
    from ..problems.rank_parity import par_answer, par_reduce_A
    w = p // k
    strings = ["".join(s) for s in product("01", repeat=w)]
    sets = [set(c) for r in range(min(q, len(strings)) + 1) for c in combinations(strings, r)]
    n = fails = 0
    for xs in product(strings, repeat=k):
        for i in range(1, k + 1):
            for S in sets:
                xh, sh = par_reduce_A(xs, S, i, p, k)
                n += 1
                fails += par_answer(xh, sh) != par_answer(xs[i - 1], S)
    return n, fails


def sweep_par_reduce_B(p: int, k: int, q: int):
    from ..problems.rank_parity import block_parities, par_answer, par_reduce_B
    lk = k.bit_length() - 1
    w = p - lk - 1
    strings = ["".join(s) for s in product("01", repeat=w)]
    blocks = [set(c) for r in range(min(q // k, len(strings)) + 1) for c in combinations(strings, r)]
    n = fails = oversize = odd_blocks = 0
    for sets in product(blocks, repeat=k):
        counts = None
        for x in strings:
            for i in range(1, k + 1):
                xh, sh, audit = par_reduce_B(x, i, sets, p, q, k)
                if counts is None:
                    counts = block_parities(sh, p, k)
                    odd_blocks += sum(c % 2 for c in counts)
                    oversize += audit.exceeds
                n += 1
                fails += par_answer(xh, sh) != par_answer(x, sets[i - 1])
    return n, fails, oversize, odd_blocks


def sweep_gt_self_reduce(n_bits: int, k: int):
    from ..problems.rank_parity import gt_answer, gt_self_reduce
    w = n_bits // k
    strings = ["".join(s) for s in product("01", repeat=w)]
    n = fails = 0
    for xs in product(strings, repeat=k):
        for i in range(1, k + 1):
            for y in strings:
                xt, yt = gt_self_reduce(xs, y, i, n_bits, k)
                n += 1
                fails += gt_answer(xt, yt) != gt_answer(xs[i - 1], y)
    return n, fails


PAR_A_CONFIGS = ((2, 2), (4, 2), (4, 4), (6, 2))
PAR_B_CONFIGS = ((3, 2, 2), (4, 2, 2), (4, 2, 4), (5, 2, 4), (6, 2, 4), (4, 4, 4), (5, 4, 4), (6, 4, 4))
GT_CONFIGS = ((2, 2), (4, 2), (4, 4), (6, 2), (8, 2), (8, 4))


def suite_reductions(cfg: ExperimentConfig):
    from ..problems.rank_parity import par_answer
    # rank parity against an independent counting loop, p = 4, |S| <= 3
    strings = [format(v, "04b") for v in range(16)]
    n = fails = 0
    for r in range(4):
        for S in combinations(range(16), r):
            for x in range(16):
                count = 0
                for y in S:
                    if y <= x:
                        count += 1
                n += 1
                fails += par_answer(strings[x], {strings[y] for y in S}) != ("odd" if count % 2 else "even")
    yield record("reductions", "par_answer-p4", digest("par", 4), {"instances": n, "failures": fails}, {},
                 None, fails == 0)
    for p, k in PAR_A_CONFIGS:
        n, fails = sweep_par_reduce_A(p, k, 4)
        yield record("reductions", f"par_reduce_A-p{p}-k{k}-q4", digest("A", p, k), {"instances": n, "failures": fails},
                     {}, None, fails == 0)
    for p, k, q in PAR_B_CONFIGS:
        n, fails, oversize, odd = sweep_par_reduce_B(p, k, q)
        yield record("reductions", f"par_reduce_B-p{p}-k{k}-q{q}", digest("B", p, k, q),
                     {"instances": n, "failures": fails, "size_exceeds_q": oversize, "odd_blocks": odd},
                     {}, None, fails == 0 and odd == 0)
    for nb, k in GT_CONFIGS:
        n, fails = sweep_gt_self_reduce(nb, k)
        yield record("reductions", f"gt_self_reduce-n{nb}-k{k}", digest("GT", nb, k),
                     {"instances": n, "failures": fails}, {}, None, fails == 0)


def fks_sweep(m: int, max_size: int, sets=None) -> dict:
    """Build and query every given set (default: all subsets of [m] up to max_size) against a linear scan."""
    from ..problems.fks import fks_audit, fks_build, fks_query_all
    sets = sets if sets is not None else (S for r in range(max_size + 1) for S in combinations(range(m), r))
    n = wrong = probe_viol = audit_fail = 0
    max_probes = max_cells_excess = 0
    for S in sets:
        tab = fks_build(S, m)
        ranks, probes = fks_query_all(tab)
        oracle = np.zeros(m, dtype=np.int64)
        for x in range(m):
            count = 0
            member = False
            for y in S:
                if y <= x:
                    count += 1
                member = member or y == x
            oracle[x] = count if member else 0
        n += 1
        wrong += int(not np.array_equal(ranks, oracle))
        mp = int(probes.max())
        max_probes = max(max_probes, mp)
        probe_viol += mp > 3
        audit = fks_audit(tab, S)
        audit_fail += not audit.ok
        max_cells_excess = max(max_cells_excess, audit.cells - 5 * max(1, len(S)))
    return {"sets": n, "wrong": wrong, "probe_violations": probe_viol, "max_probes": max_probes,
            "audit_failures": audit_fail, "max_cells_minus_5n": max_cells_excess}


def fks_sweep_fast(m: int, max_size: int) -> dict:
    """Exhaustive sweep with an array-based linear scan, for large universes."""
    from ..problems.fks import fks_audit, fks_build, fks_query_all
    n = wrong = probe_viol = audit_fail = 0
    max_probes = max_cells_excess = 0
    xs = np.arange(m)
    for r in range(max_size + 1):
        for S in combinations(range(m), r):
            tab = fks_build(S, m)
            ranks, probes = fks_query_all(tab)
            arr = np.array(S, dtype=np.int64)
            member = np.isin(xs, arr)
            oracle = np.where(member, (arr[None, :] <= xs[:, None]).sum(axis=1), 0)
            n += 1
            wrong += int(not np.array_equal(ranks, oracle))
            mp = int(probes.max())
            max_probes = max(max_probes, mp)
            probe_viol += mp > 3
            audit = fks_audit(tab, S)
            audit_fail += not audit.ok
            max_cells_excess = max(max_cells_excess, audit.cells - 5 * max(1, r))
    return {"sets": n, "wrong": wrong, "probe_violations": probe_viol, "max_probes": max_probes,
            "audit_failures": audit_fail, "max_cells_minus_5n": max_cells_excess}


def suite_cellprobe_compile(cfg: ExperimentConfig):
    from ..problems import cellprobe as cp
    from ..protocols.quantum import eval_quantum, verify_secure
    s = cp.binary_search_scheme()
    g = cp.predecessor_game(s)
    audit = cp.compile_audit(s, g)
    yield record("cellprobe-compile", "binary-search", digest("bs"),
                 {"lengths": list(audit.lengths), "max_error_gap": audit.max_error_gap},
                 {"expected_lengths": list(audit.expected)}, None, audit.ok, audit.max_error_gap)
    gs = cp.grover_scheme()
    gg = cp.marked_cell_game()
    p = cp.compile_cellprobe(gs, gg)
    audit = cp.compile_audit(gs, gg, p)
    succ = 1 - max(eval_quantum(p, gg).per_pair.values())
    chk = cp.check_address_only(gs)
    minus = np.array([1, -1]) / math.sqrt(2)
    state_gap = float(1 - abs(np.vdot(minus, chk.states[0])))
    yield record("cellprobe-compile", "grover-address-only", digest("grover"),
                 {"signature": str(p.signature), "qubits": p.layout.total, "success": succ,
                  "address_residual": chk.residual, "data_state_gap": state_gap, "secure": verify_secure(p).ok},
                 {"success": 1.0}, succ - 1, audit.ok and abs(1 - succ) <= 1e-9 and chk.ok and state_gap <= 1e-8,
                 abs(1 - succ))
    general = cp.QuantumCellProbeScheme(gs.s, gs.w, gs.t, gs.queries, gs.datas, gs.storage, gs.work, gs.steps,
                                        gs.answer_regs, gs.answer_map, False, None, "grover-general")
    audit = cp.compile_audit(general, gg)
    yield record("cellprobe-compile", "grover-general", digest("grover-general"),
                 {"lengths": list(audit.lengths), "max_error_gap": audit.max_error_gap},
                 {"expected_lengths": list(audit.expected)}, None, audit.ok, audit.max_error_gap)
    emb = cp.embed_classical_scheme(s)
    chk = cp.check_address_only(emb)
    err = max(cp.scheme_errors(emb, g).values())
    yield record("cellprobe-compile", "reversible-binary-search", digest("rev-bs"),
                 {"address_residual": chk.residual, "max_error": err}, {}, None, chk.ok and err <= 1e-9,
                 chk.residual)
    leaky = cp.leaky_scheme()
    chk = cp.check_address_only(leaky)
    try:
        cp.compile_cellprobe(leaky)
        rejected = False
    except ValueError:
        rejected = True
    yield record("cellprobe-compile", "leaky-rejected", digest("leaky"),
                 {"address_residual": chk.residual, "rejected": rejected}, {}, None, rejected and not chk.ok)
    stats = fks_sweep_fast(16, 4)
    yield record("cellprobe-compile", "fks-m16-exhaustive", digest("fks", 16, 4), stats, {"max_probes": 3}, None,
                 stats["wrong"] == 0 and stats["probe_violations"] == 0 and stats["audit_failures"] == 0)
    trials = cfg.trials or 2000
    rng = case_rng(cfg.seed, 0)
    sets = [tuple(sorted(rng.choice(64, size=int(rng.integers(0, 5)), replace=False).tolist())) for _ in range(trials)]
    stats = fks_sweep(64, 4, sets)
    yield record("cellprobe-compile", "fks-m64-sampled", digest("fks", 64, repr(sets)), stats, {"max_probes": 3},
                 None, stats["wrong"] == 0 and stats["probe_violations"] == 0 and stats["audit_failures"] == 0)


GT_TRACER_LS = ((1,), (4,), (1, 1), (2, 3), (1, 1, 1), (1, 2, 3))


def suite_bound_tracers(cfg: ExperimentConfig):
    from ..problems.tracers import gt_threshold, min_m_exp, trace_gt_bound, trace_predecessor_bound
    for ls in GT_TRACER_LS:
        n = gt_threshold(ls)
        tr = trace_gt_bound(n, ls)
        yield record("bound-tracers", f"gt-{'-'.join(map(str, ls))}", digest("gt", ls, n),
                     {"n": n, "eps_t": tr.eps_final, "n_t": tr.n_final, "contradiction": tr.contradiction},
                     {"eps_t": Fraction(1, 2), "n_t": 1}, float(tr.n_final - 1),
                     tr.eps_final == Fraction(1, 2) and tr.n_final >= 1 and tr.contradiction)
        low = trace_gt_bound(n - 1, ls)
        yield record("bound-tracers", f"gt-{'-'.join(map(str, ls))}-below", digest("gt-low", ls, n - 1),
                     {"n": n - 1, "failure_stage": low.failure_stage}, {}, None,
                     low.failure_stage == "precondition")
    delta = Fraction(1, 3) - Fraction(1, 100)
    me = min_m_exp()
    tr = trace_predecessor_bound(me, 1, 1, delta)
    yield record("bound-tracers", f"pred-m_exp{me}", digest("pred", me),
                 {"t": tr.t, "eps_final": tr.eps_final, "witness": tr.witness_ok, "contradiction": tr.contradiction},
                 {"eps_final": delta + Fraction(1, 6), "half": Fraction(1, 2)}, float(Fraction(1, 2) - tr.eps_final),
                 tr.eps_final == delta + Fraction(1, 6) and tr.eps_final < Fraction(1, 2) and tr.contradiction)
    tr = trace_predecessor_bound(16, 1, 1, delta, t=3)
    yield record("bound-tracers", "pred-m_exp16-t3-collapse", digest("pred", 16, 3),
                 {"collapse_stage": tr.collapse_stage, "contradiction": tr.contradiction}, {"t": 3}, None,
                 tr.collapse_stage is not None and tr.collapse_stage < 3 and not tr.contradiction)


def suite_gt_protocol(cfg: ExperimentConfig):
    from ..problems.gt_protocol import communication_audit, gt_layout, gt_protocol, sampled_error
    from ..protocols.classical import eval_classical
    from ..protocols.games import greater_than_game
    trials = cfg.trials or 10_000
    for t in (1, 2, 3):
        n = 16
        p = gt_protocol(n, t)
        audit = communication_audit(n, t)
        rng = case_rng(cfg.seed, t)
        half = trials // 2
        xs = rng.integers(0, 1 << n, size=trials)
        ys = rng.integers(0, 1 << n, size=trials)
        # half uniform pairs, half pairs differing only below a random bit position
        flips = rng.integers(0, n, size=trials - half)
        pairs = [(int(x), int(y)) for x, y in zip(xs[:half], ys[:half])]
        pairs += [(int(x), int(x) ^ (int(y) & ((1 << int(b)) - 1)) | 0) for x, y, b in zip(xs[half:], ys[half:], flips)]
        errs, cnt = sampled_error(p, pairs, rng)
        rate = errs / cnt
        yield record("gt-protocol", f"n16-t{t}", digest("gt", n, t, trials),
                     {"bits": audit.bits, "k": audit.k, "b": audit.b, "errors": errs, "trials": cnt, "error_rate": rate},
                     {"bits": audit.limit, "delta": Fraction(1, 3)}, Fraction(1, 3) - Fraction(errs, cnt),
                     audit.ok and Fraction(errs, cnt) <= Fraction(1, 3))
    # exact evaluation with short hashes on a small instance: error within the union bound
    g = greater_than_game(4)
    for k in (1, 2):
        lay = gt_layout(4, 2, fingerprint_bits=k)
        p = gt_protocol(4, 2, fingerprint_bits=k)
        worst = eval_classical(p, g).eps_worst
        tests = sum(lay.b for r in range(1, lay.t + 1) if lay.hashed(r))
        bound = min(Fraction(1), Fraction(tests, 2 ** k))
        yield record("gt-protocol", f"n4-t2-hash{k}", digest("gt-hash", k),
                     {"worst_error": worst}, {"union_bound": bound}, bound - worst, worst <= bound)
    for x in (0, 5, 65535):
        p = gt_protocol(16, 2)
        errs, cnt = sampled_error(p, [(x, x)] * 10, case_rng(cfg.seed, 100 + x))
        yield record("gt-protocol", f"equal-{x}", digest("gt-eq", x), {"errors": errs}, {}, None, errs == 0)


SUITES: dict[str, Callable] = {
    "info-identities": suite_info_identities,
    "average-encoding": suite_average_encoding,
    "local-transition": suite_local_transition,
    "classical-roundelim": suite_classical_roundelim,
    "quantum-roundelim": suite_quantum_roundelim,
    "reductions": suite_reductions,
    "cellprobe-compile": suite_cellprobe_compile,
    "bound-tracers": suite_bound_tracers,
    "gt-protocol": suite_gt_protocol,
}


def dumps_record(rec: dict) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"))


def run_suite(cfg: ExperimentConfig) -> list[dict]:
    """Run a suite; with ``cfg.out`` set, write its records (one JSON object per line) to that path."""
    if cfg.suite not in SUITES:
        raise KeyError(f"unknown suite {cfg.suite!r}; choose from {', '.join(sorted(SUITES))}")
    if cfg.out is not None:
        parent = os.path.dirname(os.path.abspath(cfg.out))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
            raise OSError(f"cannot write to {cfg.out}")
    records = []
    start = time.perf_counter()
    for rec in SUITES[cfg.suite](cfg):
        if cfg.timings:
            now = time.perf_counter()
            rec["wall_time"] = round(now - start, 6)
            start = now
        records.append(rec)
    if cfg.out is not None:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(dumps_record(rec) + "\n")
    return records


# --- report ----------------------------------------------------------------------------------

REPORT_COLUMNS = ["suite", "cases", "failures", "min_slack", "max_residual"]


def read_records(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: malformed record ({exc.msg})") from None
            if not isinstance(rec, dict) or not {"suite", "pass"} <= rec.keys():
                raise ValueError(f"line {lineno}: record lacks suite or pass fields")
            out.append(rec)
    return out


def _real(v):
    if v is None:
        return None
    if isinstance(v, str) and "/" in v:
        return float(Fraction(v))
    return float(v)


def aggregate(records: list[dict]) -> list[list]:
    agg: dict = {}
    for rec in records:
        a = agg.setdefault(rec["suite"], {"cases": 0, "failures": 0, "min_slack": None, "max_residual": None})
        a["cases"] += 1
        a["failures"] += not rec["pass"]
        s = _real(rec.get("slack"))
        if s is not None:
            a["min_slack"] = s if a["min_slack"] is None else min(a["min_slack"], s)
        r = _real(rec.get("residual"))
        if r is not None:
            a["max_residual"] = r if a["max_residual"] is None else max(a["max_residual"], r)
    rows = []
    for suite in sorted(agg):
        a = agg[suite]
        rows.append([suite, a["cases"], a["failures"],
                     "" if a["min_slack"] is None else format(a["min_slack"], ".12g"),
                     "" if a["max_residual"] is None else format(a["max_residual"], ".12g")])
    return rows


def emit_report(in_path: str, out_path: str | None = None) -> str:
    rows = aggregate(read_records(in_path))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    w.writerows(rows)
    text = buf.getvalue()
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
