"""Exhaustive reference solvers for small instances.

Assignments are enumerated depth first in mixed-radix order (job 0 is the most
significant digit, machines in index order), pruning branches that cannot
strictly improve the incumbent. The first optimum found is therefore the
lexicographically smallest one.
"""
import itertools
import logging
from fractions import Fraction
from typing import List, Optional, Tuple

from .graphbalancing import GraphBalancingInstance
from .instance import Assignment, BudgetExceeded, Instance
from .reopt import ReoptInput

_LOGGER = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 2 * 10 ** 7
DEFAULT_ORIENTATION_EDGES = 24


class OracleResult:
    """Exact optimum values with a witness assignment."""

    def __init__(
        self,
        T_opt,
        L_opt=None,
        witness: Optional[Assignment] = None,
        cost: Optional[int] = None,
    ) -> None:
        self.T_opt = T_opt
        self.L_opt = L_opt
        self.witness = witness
        self.cost = cost

    def __repr__(self):
        return "<OracleResult T_opt=%s L_opt=%s cost=%s>" % (
            self.T_opt,
            self.L_opt,
            self.cost,
        )


def within_cap(inst: Instance, cap: int = DEFAULT_ORACLE_CAP) -> bool:
    return inst.m ** inst.n <= cap


def _check_cap(inst: Instance, cap: int) -> None:
    if not within_cap(inst, cap):
        raise BudgetExceeded(
            "%s^%s assignments exceed the oracle cap %s" % (inst.m, inst.n, cap)
        )


def _options(inst: Instance) -> List[List[int]]:
    return [inst.machines_for(j) for j in range(inst.n)]


def _min_makespan(inst: Instance) -> Tuple:
    options = _options(inst)
    loads = [0] * inst.m
    sigma = [0] * inst.n
    best = [None, None]

    def visit(j, running):
        if best[0] is not None and running >= best[0]:
            return
        if j == inst.n:
            best[0], best[1] = running, list(sigma)
            return
        for i in options[j]:
            loads[i] += inst.p[i][j]
            sigma[j] = i
            visit(j + 1, max(running, loads[i]))
            loads[i] -= inst.p[i][j]

    visit(0, 0)
    return best[0], best[1]


def _min_total(inst: Instance, limit) -> Tuple:
    """Smallest total load among assignments with makespan <= limit."""
    options = _options(inst)
    cheapest = [min(inst.p[i][j] for i in options[j]) for j in range(inst.n)]
    rest = [sum(cheapest[j:]) for j in range(inst.n + 1)]
    loads = [0] * inst.m
    sigma = [0] * inst.n
    best = [None, None]

    def visit(j, total):
        if best[0] is not None and total + rest[j] >= best[0]:
            return
        if j == inst.n:
            best[0], best[1] = total, list(sigma)
            return
        for i in options[j]:
            value = inst.p[i][j]
            if loads[i] + value > limit:
                continue
            loads[i] += value
            sigma[j] = i
            visit(j + 1, total + value)
            loads[i] -= value

    visit(0, 0)
    return best[0], best[1]


def exact_makespan(inst: Instance, cap: int = DEFAULT_ORACLE_CAP) -> OracleResult:
    """Optimal makespan T_opt and the least average load among its optima.

    :raises BudgetExceeded: if m^n exceeds cap
    """
    _check_cap(inst, cap)
    if inst.n == 0:
        return OracleResult(0, Fraction(0), Assignment([]))
    t_opt, _ = _min_makespan(inst)
    total, sigma = _min_total(inst, t_opt)
    result = OracleResult(t_opt, Fraction(total) / inst.m, Assignment(sigma))
    _LOGGER.debug("oracle: %s", result)
    return result


def exact_reopt(
    reopt: ReoptInput, ratio=1, cap: int = DEFAULT_ORACLE_CAP
) -> OracleResult:
    """Least transition cost over schedules with makespan <= ratio * C*.

    :param ratio: makespan factor, None for no makespan restriction
    :raises BudgetExceeded: if m^n exceeds cap
    """
    inst = reopt.new
    _check_cap(inst, cap)
    t_opt = exact_makespan(inst, cap).T_opt
    limit = None if ratio is None else Fraction(ratio) * t_opt
    options = _options(inst)
    loads = [0] * inst.m
    sigma = [0] * inst.n
    best = [None, None]

    def visit(j, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if j == inst.n:
            best[0], best[1] = cost, list(sigma)
            return
        # machines the job already sits on first, so cheap branches come early
        for i in sorted(options[j], key=lambda i: reopt.job_cost(j, i)):
            value = inst.p[i][j]
            if limit is not None and loads[i] + value > limit:
                continue
            loads[i] += value
            sigma[j] = i
            visit(j + 1, cost + reopt.job_cost(j, i))
            loads[i] -= value

    visit(0, 0)
    return OracleResult(t_opt, witness=Assignment(best[1]), cost=best[0])


def exact_orientation(
    g: GraphBalancingInstance, max_edges: int = DEFAULT_ORIENTATION_EDGES
) -> Tuple[int, List[int]]:
    """Minimum maximum weighted in-degree over all orientations.

    :return: (makespan, head vertex per edge)
    :raises BudgetExceeded: if g has more than max_edges non-loop edges
    """
    free = [e for e in range(len(g.edges)) if not g.is_loop(e)]
    if len(free) > max_edges:
        raise BudgetExceeded(
            "%s edges exceed the orientation cap %s" % (len(free), max_edges)
        )
    best = None
    for bits in itertools.product((0, 1), repeat=len(free)):
        heads = [g.reference_head(e) for e in range(len(g.edges))]
        for e, bit in zip(free, bits):
            heads[e] = g.head(e, bit)
        value = max(g.loads(heads), default=0)
        if best is None or value < best[0]:
            best = (value, heads)
    return best
