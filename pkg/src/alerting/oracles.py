"""Brute-force reference computations.

These deliberately avoid the closed forms in :mod:`alerting.game` so the two
can be checked against each other: payoff tables are enumerated profile by
profile, mixed payoffs come from exact binomial sums, and the sequential
equilibrium is found by filtering all 2^n pure profiles.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .core import Action, BribeVector, MoneyLike, ProtocolParams, as_tokens
from .game import DominanceClass
from .sequencing import SlotSchedule

PayoffFn = Callable[[Action, MoneyLike, int, ProtocolParams], Fraction]


def _table_payoff(action: Action, beta: Fraction, alerters: int, params: ProtocolParams,
                  conditional: bool = False) -> Fraction:
    # alerters counts every alerting node including the caller
    n, lam, c = params.n, params.lam, params.c
    if action is Action.ALERT:
        slashed_pool = lam * (n - alerters)
        return (slashed_pool + c) / alerters
    if alerters == 0:
        return beta
    return -lam if conditional else beta - lam


def best_response_pairs(beta: MoneyLike, params: ProtocolParams, conditional: bool = False
                        ) -> List[Tuple[Fraction, Fraction]]:
    """(U_Alert, U_NoAlert) against every opponent pure profile."""
    b = as_tokens(beta)
    out = []
    for others in itertools.product((Action.ALERT, Action.NO_ALERT), repeat=params.n - 1):
        k = sum(1 for a in others if a is Action.ALERT)
        out.append((_table_payoff(Action.ALERT, b, k + 1, params, conditional),
                    _table_payoff(Action.NO_ALERT, b, k, params, conditional)))
    return out


def enumerated_dominance(beta: MoneyLike, params: ProtocolParams) -> DominanceClass:
    pairs = best_response_pairs(beta, params)
    if all(a >= s for a, s in pairs):
        return DominanceClass.ALERT_DOMINANT
    if all(s >= a for a, s in pairs):
        return DominanceClass.NO_ALERT_DOMINANT
    return DominanceClass.INTERIOR


def conditional_alert_always_best(beta: MoneyLike, params: ProtocolParams) -> bool:
    return all(a > s for a, s in best_response_pairs(beta, params, conditional=True))


def binomial_expected_payoffs(q: Fraction, beta: MoneyLike, params: ProtocolParams
                              ) -> Tuple[Fraction, Fraction]:
    """Exact expected (U_Alert, U_NoAlert) when each opponent stays silent w.p. q."""
    q = Fraction(q)
    p = 1 - q
    b = as_tokens(beta)
    m = params.n - 1
    ua = us = Fraction(0)
    for k in range(m + 1):
        w = math.comb(m, k) * p**k * q**(m - k)
        ua += w * _table_payoff(Action.ALERT, b, k + 1, params)
        us += w * _table_payoff(Action.NO_ALERT, b, k, params)
    return ua, us


def spne_brute_force(bribes: BribeVector, schedule: SlotSchedule, params: ProtocolParams
                     ) -> Tuple[Optional[int], Dict[int, Fraction], Fraction]:
    """Search all slot-action profiles for the subgame-perfect one.

    Every slot is reached on some path (the one where all earlier slots stay
    silent), so each slot's action must be a best one-shot choice there:
    Alert earns lambda(s-1), staying silent is worth at most the bribe. Ties
    go to Alert. Returns (first alerting slot, node payoffs, adversary payoff).
    """
    n, lam = params.n, params.lam
    survivors = []
    for profile in itertools.product((Action.ALERT, Action.NO_ALERT), repeat=n):
        ok = True
        for s, act in enumerate(profile, start=1):
            beta = bribes.beta(schedule.node_at(s))
            alert_value, silent_value = lam * (s - 1), beta
            best = Action.ALERT if alert_value >= silent_value else Action.NO_ALERT
            if act is not best:
                ok = False
                break
        if ok:
            survivors.append(profile)
    if len(survivors) != 1:
        raise AssertionError(f"expected a unique SPNE profile, found {len(survivors)}")
    profile = survivors[0]
    k = next((s for s, a in enumerate(profile, start=1) if a is Action.ALERT), None)
    payoffs: Dict[int, Fraction] = {}
    adv = Fraction(0)
    for s in range(1, n + 1):
        node = schedule.node_at(s)
        beta = bribes.beta(node)
        if k is None:
            payoffs[node] = beta
            adv -= beta
        elif s < k:
            payoffs[node] = beta - lam
            adv -= beta
        elif s == k:
            payoffs[node] = lam * (k - 1)
        else:
            payoffs[node] = Fraction(0)
    if k is None:
        adv += bribes.G
    return k, payoffs, adv
