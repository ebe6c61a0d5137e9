"""Machine-checked acceptance suite shared by ``alerting verify`` and the tests.

Each check returns a :class:`CheckResult`; none of them raise on a failed
property, so one report can list every failure.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import adversary as adv
from . import game, oracles
from .agents import NodePolicy, agent_for, decide_burned, decide_sequential, decide_simultaneous
from .chain import BoundedDelay, ChainState, Lockstep, Transaction, TxKind
from .core import MICRO, Action, BribeVector, ProtocolParams, TokenAmount, make_params
from .protocols import (
    RoundConfig, SlotSchedule, TraceLog, conservation_holds, lockstep_chain, observable_trace,
    run_burned_penalty, run_lockstep, run_naive_commit_reveal, run_sequential, run_tee_round,
)
from .protocols.catalog import PROTOCOLS
from .tee import (
    BadHeaderChain, InsufficientDepth, PoPProof, TeeError, TeeState, build_pop, encode_message,
)

MU = Fraction(1, MICRO)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], Tuple[bool, str]], limit: Optional[float] = None) -> CheckResult:
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed report
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    secs = time.perf_counter() - start
    if limit is not None and secs >= limit:
        ok, detail = False, f"{detail}; took {secs:.2f}s, limit {limit}s"
    return CheckResult(name, ok, detail, secs)


def _params(n: int, lam, c=0, **extra) -> ProtocolParams:
    return make_params({"n": n, "penalty_lambda": Fraction(lam), "operator_cost_c": Fraction(c), **extra})


def _rational(n: int, seed: int = 0) -> Dict[int, NodePolicy]:
    return {i: NodePolicy.bribed(seed) for i in range(1, n + 1)}


# ---------------------------------------------- 1. comparison table

def _simulated_tx_counts(pid: str, n: int) -> Tuple[int, int]:
    p = _params(n, 1)
    honest: Dict[int, NodePolicy] = {}
    counts = []
    for needed in (True, False):
        cfg = RoundConfig(p, alert_needed=needed, seed=n)
        if pid == "lockstep":
            o = run_lockstep(cfg, honest, BribeVector())
        elif pid == "burned":
            o = run_burned_penalty(cfg, honest, BribeVector())
        elif pid == "tee":
            o = run_tee_round(cfg, honest, BribeVector())
        else:
            o = run_sequential(cfg, honest, BribeVector(), SlotSchedule.identity(n))
        counts.append(o.tx_count)
    return counts[0], counts[1]


def check_table1() -> CheckResult:
    def body():
        from .cli import ExperimentSpec, cmd_analyze  # the CLI imports this module

        start = time.perf_counter()
        spec = ExperimentSpec(grid={"n": list(range(2, 65)), "penalty_lambda": [1]})
        rows = cmd_analyze(spec, ["lockstep", "tee", "sequential"])
        elapsed = time.perf_counter() - start
        bad = []
        for pid, n_s, lam_s, _c, cost, tx_a, tx_n, _lat in rows:
            n, lam = int(n_s), Fraction(lam_s)
            want = {
                "lockstep": (lam * n * (n - 1), n, 0),
                "tee": (lam * n * (n - 1), 2 * n, 2 * n),
                "sequential": (lam * n * (n - 1) / 2, 1, 0),
            }[pid]
            if (Fraction(cost), int(tx_a), int(tx_n)) != want:
                bad.append((pid, n))
        for pid in ("lockstep", "tee", "sequential", "burned"):
            for n in (2, 3, 4):
                sim = _simulated_tx_counts(pid, n)
                info = PROTOCOLS[pid]
                if sim != (info.tx_alert(n), info.tx_noalert(n)):
                    bad.append((pid, n, "simulated", sim))
        if elapsed >= 1.0:
            bad.append(("analyze runtime", elapsed))
        return not bad, f"{len(rows)} rows, analyze {elapsed * 1000:.0f}ms, mismatches={bad[:5]}"
    return _timed("1 comparison table", body)


# ------------------------------------------------------ 2. dominance

def check_dominance() -> CheckResult:
    def body():
        mismatches, count = [], 0
        for n in range(2, 11):
            for lam in (Fraction(1), Fraction(10), Fraction(1000), MU, 10 * MU, 1000 * MU):
                for c in (Fraction(0), lam / 2):
                    if (c * MICRO).denominator != 1:
                        continue
                    p = _params(n, lam, c)
                    t1, t2 = lam + c / n, lam * (n - 1) + c
                    betas = {Fraction(0), t1 - MU, t1, t1 + MU, (t1 + t2) / 2, t2 - MU, t2, t2 + MU, 2 * t2}
                    for beta in sorted(b for b in betas if b >= 0):
                        count += 1
                        got = game.classify_dominance(beta, p)
                        if n <= 6:
                            want = oracles.enumerated_dominance(beta, p)
                        else:
                            want = (game.DominanceClass.ALERT_DOMINANT if beta <= t1 else
                                    game.DominanceClass.NO_ALERT_DOMINANT if beta >= t2 else
                                    game.DominanceClass.INTERIOR)
                        if got is not want:
                            mismatches.append((n, lam, c, beta, got, want))
        return not mismatches, f"{count} points, mismatches={mismatches[:3]}"
    return _timed("2 dominance thresholds", body, 30)


# --------------------------------------------- 3. no symmetric pure NE

def check_no_symmetric_pure_ne(seed: int = 3) -> CheckResult:
    def body():
        rng = random.Random(seed)
        bad, samples = [], 0
        while samples < 100:
            n = rng.randint(3, 10)
            lam = Fraction(rng.randint(1, 1000))
            p = _params(n, lam)
            lo, hi = lam, lam * (n - 1)
            beta = lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000)
            samples += 1
            pairs = oracles.best_response_pairs(beta, p)
            # all-Alert: opponents all alert is the first enumerated profile
            all_alert_dev = pairs[0][1] > pairs[0][0]
            all_silent_dev = pairs[-1][0] > pairs[-1][1]
            if not (game.no_symmetric_pure_ne(beta, p) and all_alert_dev and all_silent_dev):
                bad.append((n, lam, beta))
        return not bad, f"{samples} interior samples, counterexamples={bad[:3]}"
    return _timed("3 no symmetric pure NE", body)


# ------------------------------------------------- 4. mixed equilibria

def mixed_grid() -> List[Tuple[ProtocolParams, Fraction]]:
    pts = []
    for c_ratio in (Fraction(0), Fraction(1, 2)):
        for n in range(2, 11):
            lam = Fraction(1)
            p = _params(n, lam, lam * c_ratio)
            t1, t2 = game.alert_threshold(p), game.no_alert_threshold(p)
            if t1 >= t2:
                continue
            k = 32
            for j in range(1, k + 1):
                beta = t1 + (t2 - t1) * Fraction(j, k + 1)
                pts.append((p, Fraction(math.floor(beta * MICRO), MICRO)))
    return pts


def check_mixed_bound() -> CheckResult:
    def body():
        pts = mixed_grid()
        bad, worst = [], 0.0
        for p, beta in pts:
            sol = game.solve_symmetric(beta, p)
            ua, us = oracles.binomial_expected_payoffs(sol.q, beta, p)
            resid = abs(float(ua - us))
            worst = max(worst, resid)
            bribes = BribeVector({i: TokenAmount.of(beta) for i in range(1, p.n + 1)},
                                 TokenAmount.of(game.bribe_bound_coefficient(p)))
            profile = game.MixedProfile.symmetric(p.n, sol.q, sol.half_width)
            bound = game.expected_bribe_bound_check(bribes, profile, p)
            # utility upper bound over the whole solver interval
            d = sol.half_width
            util_hi = bribes.G * (sol.q + d) ** p.n - p.n * beta * (sol.q - d)
            if resid >= 1e-9 or not bound.holds or util_hi > 0:
                bad.append((p.n, p.c, beta, resid))
        closed = []
        p3 = _params(3, 1)
        for j in range(1, 200):
            beta = 1 + Fraction(j, 200)
            q = game.symmetric_mixed_q(beta, p3)
            if abs(float(q - (beta - 1))) >= 1e-12:
                closed.append(beta)
        ok = not bad and not closed
        return ok, f"{len(pts)} grid points, worst residual {worst:.2e}, failures={bad[:3]}, n=3 closed-form misses={closed[:3]}"
    return _timed("4 mixed-equilibrium bound", body, 60)


# ---------------------------------------------------------- 5. SPNE

def random_bribes(rng: random.Random, n: int, lam: Fraction) -> BribeVector:
    # quarter-lambda grid so exact ties with lambda(s-1) are common
    return BribeVector.from_list([lam * Fraction(rng.randint(0, 4 * n), 4) for _ in range(n)],
                                 lam * rng.randint(0, n * n))


def check_spne(trials: int = 1000, seed: int = 5) -> CheckResult:
    def body():
        rng = random.Random(seed)
        bad, total = [], 0
        for n in range(2, 6):
            lam = Fraction(rng.choice([1, 2, 10]))
            p = _params(n, lam)
            for _ in range(trials):
                total += 1
                bribes = random_bribes(rng, n, lam)
                perm = list(range(1, n + 1))
                rng.shuffle(perm)
                sched = SlotSchedule(tuple(perm))
                out = game.sequential_spne(bribes, sched, p)
                k, payoffs, adv_pay = oracles.spne_brute_force(bribes, sched, p)
                agent_first = next((s for s in range(1, n + 1) if decide_sequential(
                    agent_for(sched.node_at(s), _rational(n), bribes), s, p) is Action.ALERT), None)
                if (out.alert_slot, out.node_payoffs, out.adversary_payoff) != (k, payoffs, adv_pay) \
                        or agent_first != k:
                    bad.append((n, bribes.as_list(n), perm))
        return not bad, f"{total} vectors, mismatches={len(bad)} {bad[:2]}"
    return _timed("5 SPNE oracle equivalence", body, 120)


# ---------------------------------------------- 6. sequential threshold

def check_sequential_threshold(seed: int = 6) -> CheckResult:
    def body():
        rng = random.Random(seed)
        bad = []
        for n in range(2, 33):
            p = _params(n, 1)
            sched = SlotSchedule.for_round(n, rng.randrange(10**6))
            T = game.sequential_suppression_threshold(p)
            G = T + n * p.eps + MU
            strat = adv.AdversaryStrategy(adv.StrategyKind.SEQUENTIAL_GREEDY, TokenAmount.of(G))
            bribes = adv.emit_bribes(strat, p, sched)
            out = game.sequential_spne(bribes, sched, p)
            dec = adv.rational_decision(strat, p, "sequential", sched)
            if out.alert_raised or bribes.total().tokens != T + n * p.eps or not isinstance(dec, adv.Attack):
                bad.append(("greedy", n))
            if n <= 8:
                sim = run_sequential(RoundConfig(p, seed=n), _rational(n), bribes, sched)
                if sim.alert_raised:
                    bad.append(("engine", n))
            # at G = T the cheapest suppressing vector is still out of reach
            if not isinstance(adv.rational_decision(
                    adv.AdversaryStrategy(adv.StrategyKind.SEQUENTIAL_GREEDY, TokenAmount.of(T)), p, "sequential", sched),
                    adv.Abstain):
                bad.append(("abstain", n))
            opt = game.sequential_adversary_optimal(T, p, sched)
            if opt.offers or not game.sequential_spne(opt, sched, p).alert_raised:
                bad.append(("optimal", n))
            cheapest = sum((p.lam * (s - 1) + MU for s in range(1, n + 1)), Fraction(0))
            if not cheapest > T:
                bad.append(("cheapest", n))
            for _ in range(40):
                w = [rng.random() for _ in range(n)]
                budget = int(T * MICRO)
                amounts = [int(budget * x / sum(w)) for x in w]
                vec = BribeVector({sched.node_at(s + 1): TokenAmount(a) for s, a in enumerate(amounts)}, T)
                if vec.total().tokens > T or not game.sequential_spne(vec, sched, p).alert_raised:
                    bad.append(("random", n))
            for m in range(1, n + 1):
                cost = game.sequential_delay_cost(m, p)
                vec = game.sequential_greedy_vector(p, sched, slots=m)
                first = game.sequential_spne(vec, sched, p).alert_slot
                if cost != sum((p.lam * (s - 1) for s in range(1, m + 1)), Fraction(0)) \
                        or first != (m + 1 if m < n else None) \
                        or vec.total().tokens != cost + m * p.eps:
                    bad.append(("delay", n, m))
        return not bad, f"n=2..32, failures={bad[:4]}"
    return _timed("6 sequential quadratic threshold", body)


# ------------------------------------------- 7. simulation fidelity

def _predicted_simultaneous(actions: Dict[int, Action], bribes: BribeVector, p: ProtocolParams,
                            burned: bool = False) -> Tuple[frozenset, Dict[int, Fraction], Fraction]:
    F = frozenset(i for i, a in actions.items() if a is Action.ALERT)
    fn = game.burned_node_payoff if burned else game.sim_node_payoff
    pay = {i: fn(a, bribes.beta(i), F, p) for i, a in actions.items()}
    return F, pay, game.sim_adversary_payoff(bribes, F, p)


def check_simulation_fidelity(rounds: int = 10_000, outcomes: Optional[List] = None) -> CheckResult:
    def body():
        notes, bad = [], []
        n = 3
        p = _params(n, 1)
        q = game.symmetric_mixed_q(Fraction(3, 2), p)
        Q = float(q) ** n
        sigma = math.sqrt(Q * (1 - Q) / rounds)
        interior = BribeVector.from_list([Fraction(3, 2)] * n, 6)
        policies = _rational(n, seed=7)
        for pid, runner in (("lockstep", run_lockstep), ("tee", run_tee_round)):
            suppressed = 0
            for r in range(rounds):
                cfg = RoundConfig(p, round_index=r, seed=r)
                out = runner(cfg, policies, interior)
                acts = {i: decide_simultaneous(agent_for(i, policies, interior, r, r), p) for i in range(1, n + 1)}
                F, pay, adv_pay = _predicted_simultaneous(acts, interior, p)
                if (out.alerter_set_F, out.node_payoffs, out.adversary_payoff) != (F, pay, adv_pay):
                    bad.append((pid, r))
                suppressed += not out.alert_raised
                if outcomes is not None:
                    outcomes.append((pid, out))
            freq = suppressed / rounds
            if abs(freq - Q) > 3 * sigma:
                bad.append((pid, "frequency", freq))
            notes.append(f"{pid} suppression {freq:.4f} vs Q={Q:.4f}")
        rng = random.Random(77)
        lam = Fraction(1)
        for r in range(rounds):
            bribes = random_bribes(rng, n, lam)
            sched = SlotSchedule.for_round(n, r)
            cfg = RoundConfig(p, round_index=r, seed=r)
            out = run_sequential(cfg, policies, bribes, sched)
            ref = game.sequential_spne(bribes, sched, p)
            if (out.alert_slot, out.node_payoffs, out.adversary_payoff) != \
                    (ref.alert_slot, ref.node_payoffs, ref.adversary_payoff):
                bad.append(("sequential", r))
            if outcomes is not None:
                outcomes.append(("sequential", out))
        pb = _params(n, 1, 6)
        for r in range(rounds):
            bribes = BribeVector.from_list([Fraction(rng.randint(0, 16), 2) for _ in range(n)], 30)
            cfg = RoundConfig(pb, round_index=r, seed=r)
            out = run_burned_penalty(cfg, policies, bribes)
            acts = {i: decide_burned(agent_for(i, policies, bribes, r, r), pb) for i in range(1, n + 1)}
            F, pay, adv_pay = _predicted_simultaneous(acts, bribes, pb, burned=True)
            if (out.alerter_set_F, out.node_payoffs, out.adversary_payoff) != (F, pay, adv_pay):
                bad.append(("burned", r))
            if outcomes is not None:
                outcomes.append(("burned", out))
        notes.append(f"sequential/burned deterministic rounds={rounds}")
        return not bad, "; ".join(notes) + f"; mismatches={bad[:4]}"
    return _timed("7 simulation fidelity", body)


# ----------------------------------------------------- 8. deniability

def _lockstep_observation(p: ProtocolParams, actions: Dict[int, Action]):
    chain = lockstep_chain(p)
    trace = TraceLog()
    policies = {i: NodePolicy.scripted(a) for i, a in actions.items()}
    run_lockstep(RoundConfig(p, start_step=2), policies, BribeVector(), chain=chain, trace=trace)
    t0 = 2
    return (observable_trace(chain, trace, t0 + p.delta_write - 1), observable_trace(chain, trace, chain.clock))


def lockstep_deniability_failures(max_n: int = 6) -> List[tuple]:
    bad = []
    for n in range(2, max_n + 1):
        p = _params(n, 1)
        bases = {
            "all-alert": {i: Action.ALERT for i in range(1, n + 1)},
            "all-silent": {i: Action.NO_ALERT for i in range(1, n + 1)},
            "alternating": {i: Action.ALERT if i % 2 else Action.NO_ALERT for i in range(1, n + 1)},
        }
        for label, base in bases.items():
            for i in range(1, n + 1):
                for first in (Action.ALERT, Action.NO_ALERT):
                    e0 = {**base, i: first}
                    e1 = {**base, i: Action.NO_ALERT if first is Action.ALERT else Action.ALERT}
                    pre0, full0 = _lockstep_observation(p, e0)
                    pre1, full1 = _lockstep_observation(p, e1)
                    if pre0 != pre1 or full0 == full1:
                        bad.append((n, label, i, first.value))
    return bad


def tee_exposure_failures(seed: int = 8) -> List[str]:
    """Throw every misuse of the device API at it before the honest PoP is deep enough."""
    p = _params(3, 1, delta_write=2, n_commit=3, n_reveal=5)
    chain = ChainState(BoundedDelay(p.delta_write, seed), p.delta_block, b"main")
    chain.advance(2)
    dev = TeeState(1, chain.tip, b"seed", chain.consensus_key)
    start = chain.height
    gamma = dev.seal(encode_message(Action.NO_ALERT), p.n_commit)
    nonce = dev._sealed[gamma].nonce_r
    tx = chain.submit(Transaction(1, TxKind.COMMIT, gamma))
    chain.advance_blocks(p.delta_write + p.n_commit + 1)
    inc_height = chain.location(tx)[0]
    honest = build_pop(chain, start, tx)

    fork = ChainState(BoundedDelay(p.delta_write, seed), p.delta_block, b"main", consensus_key=b"attacker")
    fork.advance(2)
    ftx = fork.submit(Transaction(1, TxKind.COMMIT, gamma))
    fork.advance_blocks(20)
    other = ChainState(BoundedDelay(p.delta_write, seed), p.delta_block, b"side-chain")
    other.advance(2)
    otx = other.submit(Transaction(1, TxKind.COMMIT, gamma))
    other.advance_blocks(20)

    attempts: List[Tuple[str, Callable[[], object]]] = []
    for upto in range(inc_height - 1, inc_height + p.n_commit):
        attempts.append((f"short-{upto}", lambda u=upto: dev.unseal_after(gamma, build_pop(chain, start, tx, u))))
    attempts.append(("fork", lambda: dev.unseal_after(gamma, build_pop(fork, start, ftx))))
    attempts.append(("wrong-chain", lambda: dev.unseal_after(gamma, build_pop(other, start, otx))))
    hs = honest.headers
    attempts.append(("gap", lambda: dev.unseal_after(gamma, PoPProof(hs[:1] + hs[2:], honest.inclusion, honest.inclusion_height_index - 1, tx))))
    attempts.append(("reordered", lambda: dev.unseal_after(gamma, PoPProof(tuple(reversed(hs)), honest.inclusion, honest.inclusion_height_index, tx))))
    attempts.append(("wrong-index", lambda: dev.unseal_after(gamma, PoPProof(hs, honest.inclusion, honest.inclusion_height_index + 1, tx))))
    bogus = Transaction(1, TxKind.COMMIT, b"\x00" * 32, tx.submitted_at)
    attempts.append(("wrong-tx", lambda: dev.unseal_after(gamma, PoPProof(hs, honest.inclusion, honest.inclusion_height_index, bogus))))
    attempts.append(("unknown-handle", lambda: dev.unseal_after(b"\x11" * 32, honest)))
    attempts.append(("peek", lambda: dev.peek_nonce(gamma)))
    attempts.append(("checkpoint-fork", lambda: dev.advance_checkpoint(fork.headers_after(start))))
    attempts.append(("checkpoint-empty", lambda: dev.advance_checkpoint([])))

    bad = []
    for label, call in attempts:
        try:
            result = call()
        except (TeeError, LookupError) as exc:
            if nonce.hex() in str(exc):
                bad.append(f"{label}: nonce in error")
            continue
        if label == "checkpoint-empty" and getattr(result, "height", None) == start:
            continue
        bad.append(f"{label}: accepted")
    if dev.checkpoint.height != start:
        bad.append("checkpoint moved during failed attempts")
    try:
        _, r, _ = dev.unseal_after(gamma, honest)
        if r != nonce:
            bad.append("honest PoP opened the wrong nonce")
    except TeeError as exc:
        bad.append(f"honest PoP did not open: {type(exc).__name__}")
    # replaying an older, shorter proof after the checkpoint advanced
    try:
        dev.unseal_after(gamma, build_pop(chain, start, tx, inc_height + p.n_commit))
        bad.append("replay accepted")
    except BadHeaderChain:
        pass
    return bad


def check_deniability() -> CheckResult:
    def body():
        lock = lockstep_deniability_failures()
        tee = tee_exposure_failures()
        return not lock and not tee, f"lockstep failures={lock[:3]}, tee failures={tee[:3]}"
    return _timed("8 deniability traces", body)


def tee_boundary_failures() -> List[str]:
    """Commit included at post-checkpoint header 2: five headers (3 after) open, four do not."""
    bad = []
    chain = ChainState(Lockstep(1), 1)
    dev = TeeState(1, chain.tip, b"boundary", chain.consensus_key)
    gamma = dev.seal(encode_message(Action.ALERT, b"\x07" * 32), 3)
    chain.advance(1)
    tx = chain.submit(Transaction(1, TxKind.COMMIT, gamma))
    chain.advance_blocks(4)
    if chain.location(tx)[0] != 2:
        return ["commit not included at height 2"]
    try:
        dev.unseal_after(gamma, build_pop(chain, 0, tx, 4))
        bad.append("opened with 2 blocks after inclusion")
    except InsufficientDepth:
        pass
    try:
        dev.unseal_after(gamma, build_pop(chain, 0, tx, 5))
    except TeeError as exc:
        bad.append(f"refused 3 blocks after inclusion: {type(exc).__name__}")
    return bad


def check_tee_boundary() -> CheckResult:
    def body():
        bad = tee_boundary_failures()
        return not bad, f"failures={bad}"
    return _timed("tee PoP depth boundary", body)


# -------------------------------------------------- 9. early reveal

def check_early_reveal(max_n: int = 32) -> CheckResult:
    def body():
        bad = []
        p4 = _params(4, 1)
        if game.early_reveal_attack_cost(p4, 0) != Fraction(25, 3):
            bad.append("formula n=4")
        for n in range(4, max_n + 1):
            p = _params(n, 1)
            harmonic = sum((Fraction(1, j) for j in range(1, n + 1)), Fraction(0))
            budget = game.early_reveal_attack_cost(p, 0)
            if budget != n * harmonic:
                bad.append(("closed form", n))
            script = adv.early_reveal_script(p, 0)
            cfg = RoundConfig(p, seed=n)
            naive = run_naive_commit_reveal(cfg, _rational(n), BribeVector({}, n * n), collusion_script=script)
            if naive.alert_raised or naive.adversary_spend != budget:
                bad.append(("naive", n, naive.adversary_spend))
            tee = run_tee_round(cfg, _rational(n), BribeVector({}, n * n), collusion_script=script)
            if not tee.alert_raised or tee.adversary_spend > budget:
                bad.append(("tee", n))
            if not game.simultaneous_suppression_threshold(p) > budget:
                bad.append(("quadratic", n))
        ratios = []
        for n in range(8, 1025):
            p = _params(n, 1)
            ratios.append(float(game.early_reveal_attack_cost(p, 0)) / (n * math.log(n)))
        lo, hi = min(ratios), max(ratios)
        if not (1.0 <= lo and hi <= 1.4):
            bad.append(("band", lo, hi))
        return not bad, f"n=4..{max_n}; cost/(n ln n) in [{lo:.3f}, {hi:.3f}]; failures={bad[:3]}"
    return _timed("9 early-reveal attack", body)


# --------------------------------------------------- 10. conservation

def conservation_failures(rounds: int = 300, seed: int = 10, outcomes: Sequence = ()) -> List[tuple]:
    rng = random.Random(seed)
    bad = []
    for pid, out in outcomes:
        if not conservation_holds(out, burn=pid == "burned"):
            bad.append((pid, "collected"))
    for r in range(rounds):
        n = rng.randint(2, 6)
        lam = Fraction(rng.randint(1, 7), rng.choice([1, 3, 7]))
        lam = Fraction(math.floor(lam * MICRO), MICRO)
        c = Fraction(rng.randint(0, 5 * MICRO), MICRO)
        p = _params(n, lam, c)
        policies = {}
        for i in range(1, n + 1):
            policies[i] = rng.choice([NodePolicy.honest(), NodePolicy.bribed(r),
                                      NodePolicy.scripted(Action.NO_ALERT), NodePolicy.mixed(Fraction(1, 2), r)])
        bribes = BribeVector.from_list([rng.randint(0, 3 * n) for _ in range(n)], rng.randint(0, 50))
        cfg = RoundConfig(p, round_index=r, seed=r)
        runs = [
            ("lockstep", run_lockstep(cfg, policies, bribes)),
            ("burned", run_burned_penalty(cfg, policies, bribes)),
            ("tee", run_tee_round(cfg, policies, bribes, withhold={rng.randint(1, n)} if rng.random() < 0.3 else ())),
            ("sequential", run_sequential(cfg, policies, bribes, SlotSchedule.for_round(n, r))),
        ]
        for pid, out in runs:
            if not conservation_holds(out, burn=pid == "burned"):
                bad.append((pid, r))
    return bad


def check_conservation(outcomes: Sequence = ()) -> CheckResult:
    def body():
        bad = conservation_failures(outcomes=outcomes)
        return not bad, f"{len(outcomes)} collected + 1200 randomized rounds, violations={bad[:4]}"
    return _timed("10 conservation", body)


# ----------------------------------------------------------------- driver

def run_all(rounds: int = 10_000, progress: Optional[Callable[[CheckResult], None]] = None) -> List[CheckResult]:
    collected: List = []
    steps = [
        check_table1,
        check_dominance,
        check_no_symmetric_pure_ne,
        check_mixed_bound,
        check_spne,
        check_sequential_threshold,
        lambda: check_simulation_fidelity(rounds, collected),
        check_deniability,
        check_early_reveal,
        lambda: check_conservation(collected),
        check_tee_boundary,
    ]
    results = []
    for step in steps:
        res = step()
        results.append(res)
        if progress:
            progress(res)
    return results
