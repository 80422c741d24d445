"""Rebalancing scheduler for unrelated machines.

The LP rounding leaves every machine within T plus its largest job. Machines
far above the average (Bad) then hand their largest job to distinct lightly
loaded machines (Good) that can run it, matched with Hopcroft–Karp. This is
repeated for every processing time threshold p_t with phi_t >= L/T and the
best schedule wins.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Set

from .instance import (
    Assignment,
    FeasibilityProfile,
    Instance,
    SchedulingException,
    feasibility_profile,
    load_profile,
)
from .lp import DEFAULT_MAX_BITS, LpTLParams, build_lp, minimal_L, minimal_TL
from .lp import solve_feasibility
from .matching import maximum_matching
from .rounding import round_lp

_LOGGER = logging.getLogger(__name__)


class BalanceView:
    """Bad and Good machines of an assignment for one gamma and threshold."""

    def __init__(
        self,
        gamma: Fraction,
        bad: Set[int],
        good: Set[int],
        good_for: Dict[int, List[int]],
        jmax: Dict[int, int],
    ) -> None:
        self.gamma = gamma
        self.bad = bad
        self.good = good
        self.good_for = good_for
        self.jmax = jmax

    def __repr__(self):
        return "<BalanceView gamma=%s bad=%s good=%s>" % (
            self.gamma,
            sorted(self.bad),
            sorted(self.good),
        )


def largest_job(inst: Instance, a: Assignment, i: int) -> Optional[int]:
    """Job with the largest p_ij on machine i, ties to the lowest index."""
    jobs = a.jobs_on(i)
    if not jobs:
        return None
    return min(jobs, key=lambda j: (-inst.p[i][j], j))


def balance_view(
    inst: Instance,
    a: Assignment,
    T,
    L,
    t: int,
    profile: Optional[FeasibilityProfile] = None,
    gamma: Optional[Fraction] = None,
) -> BalanceView:
    """Classify machines for threshold index t.

    :param t: index into the feasibility profile thresholds
    :param profile: precomputed feasibility profile of inst
    :param gamma: override for 1/phi_t
    """
    if profile is None:
        profile = feasibility_profile(inst)
    p_t = profile.thresholds[t] if profile.thresholds else 0
    if gamma is None:
        if profile.phi[t] == 0:
            raise ValueError("threshold %s has feasibility parameter 0" % p_t)
        gamma = 1 / profile.phi[t]
    gamma = Fraction(gamma)

    loads = load_profile(inst, a).load
    bad = {i for i in range(inst.m) if loads[i] > T + gamma * L}
    good = {i for i in range(inst.m) if loads[i] <= gamma * L}
    jmax = {i: largest_job(inst, a, i) for i in bad}
    good_for = {}
    for i in bad:
        j = jmax[i]
        good_for[j] = [
            g
            for g in sorted(good)
            if inst.finite(g, j) and inst.p[g][j] <= p_t
        ]
    return BalanceView(gamma, bad, good, good_for, jmax)


def good_machine_bounds_hold(view: BalanceView, m: int, T, L) -> bool:
    """Both counting bounds on Bad and Good for an assignment with avg <= L."""
    k = len(view.bad)
    if not k < Fraction(m) / (view.gamma + 1):
        return False
    if L == 0:
        return True
    return len(view.good) > (1 - 1 / view.gamma) * m + (k / view.gamma) * (
        Fraction(T) / L
    )


def transfer(inst: Instance, a: Assignment, view: BalanceView) -> Optional[Assignment]:
    """Move every Bad machine's largest job along a Bad-saturating matching.

    :return: the new assignment, or None when no matching saturates Bad
    """
    if not view.bad:
        return a
    bad = sorted(view.bad)
    adjacency = {i: view.good_for[view.jmax[i]] for i in bad}
    matched = maximum_matching(bad, adjacency)
    if len(matched) < len(bad):
        return None
    for i in bad:
        a = a.move(view.jmax[i], matched[i])
    return a


def _check_transfer(inst, before, after, view, T, L, p_t) -> None:
    old, new = load_profile(inst, before).load, load_profile(inst, after).load
    for i in range(inst.m):
        if i in view.bad:
            ok = new[i] <= T
        elif new[i] != old[i]:
            ok = new[i] <= p_t + view.gamma * L
        else:
            ok = True
        if not ok:
            raise SchedulingException(
                "machine %s ends at load %s after the transfer" % (i, new[i])
            )


def rebalance(
    inst: Instance,
    sigma: Assignment,
    params: LpTLParams,
    profile: FeasibilityProfile,
) -> Assignment:
    """Best transfer candidate over all thresholds, or sigma if none matches."""
    T, L = params.T, params.L
    best = None
    best_makespan = None
    for t, p_t in enumerate(profile.thresholds):
        phi_t = profile.phi[t]
        if T == 0 or phi_t < Fraction(L) / T:
            continue
        view = balance_view(inst, sigma, T, L, t, profile)
        candidate = transfer(inst, sigma, view)
        if candidate is None:
            _LOGGER.debug("threshold %s: no matching saturates %s", p_t, view)
            continue
        _check_transfer(inst, sigma, candidate, view, T, L, p_t)
        makespan = load_profile(inst, candidate).makespan
        _LOGGER.debug("threshold %s: candidate makespan %s", p_t, makespan)
        if best is None or makespan < best_makespan:
            best, best_makespan = candidate, makespan
    if best is None:
        _LOGGER.debug("no threshold yields a matching, keeping the rounded schedule")
        return sigma
    return best


def schedule_fully_feasible(
    inst: Instance, sweep: bool = True, max_bits: int = DEFAULT_MAX_BITS
) -> Assignment:
    """Schedule unrelated machines within T_opt + L_opt / phi.

    :param inst: instance of any kind
    :param sweep: also try every T' from the minimal T up to the best makespan
        found, each with its own minimal L
    :param max_bits: LP solver bit bound
    :rtype: Assignment
    """
    if inst.n == 0:
        return Assignment([])
    profile = feasibility_profile(inst)
    params = minimal_TL(inst, max_bits)
    best, best_makespan = None, None
    while True:
        x = solve_feasibility(build_lp(inst, params), max_bits)
        sigma = round_lp(inst, x, params)
        candidate = rebalance(inst, sigma, params, profile)
        makespan = load_profile(inst, candidate).makespan
        _LOGGER.debug("%s gives makespan %s", params, makespan)
        if best is None or makespan < best_makespan:
            best, best_makespan = candidate, makespan
        T = params.T + 1
        if not sweep or T >= best_makespan:
            break
        params = LpTLParams(T, minimal_L(inst, T, max_bits))
    return best
