"""Parameterized approximation scheme over large (machine, job) pairs.

A pair is large when eps*T < p_ij <= T. Every 0/1 pattern over the k large
pairs that gives a job at most one large slot is fixed, the remaining small
pairs are solved as an LP and the result is rounded through sub-machine bins.
Any success has makespan at most (1 + eps) T.
"""
import itertools
import logging
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from .instance import Assignment, BudgetExceeded, Instance, SchedulingException
from .instance import load_profile
from .lp import DEFAULT_MAX_BITS, LpProblem, Sense, solve_feasibility, t_search_range
from .rounding import build_submachine_graph, match_jobs

_LOGGER = logging.getLogger(__name__)

DEFAULT_K_CAP = 20

Pattern = Tuple[Optional[int], ...]  # per job: machine of its large slot or None


class ParameterBudgetExceeded(BudgetExceeded):
    """Raised when the number of large pairs exceeds k_cap."""


class SchemeInfeasible(SchedulingException):
    """Raised when no pattern admits a feasible residual LP."""


class MilpParams:
    """Scheme parameters for one makespan guess T."""

    def __init__(self, inst: Instance, eps, T: int, k_cap: int = DEFAULT_K_CAP):
        eps = Fraction(eps)
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1], got %s" % eps)
        self.epsilon = eps
        self.T = T
        self.k_cap = k_cap
        self.large_pairs = large_pairs(inst, eps, T)

    @property
    def k(self) -> int:
        return len(self.large_pairs)

    def __repr__(self):
        return "<MilpParams eps=%s T=%s k=%s>" % (self.epsilon, self.T, self.k)


def large_pairs(inst: Instance, eps, T: int) -> List[Tuple[int, int]]:
    """Pairs with eps*T < p_ij <= T, compared exactly."""
    bound = Fraction(eps) * T
    return [
        (i, j) for i, j, value in inst.finite_entries() if bound < value <= T
    ]


def _patterns(inst: Instance, params: MilpParams) -> Iterator[Pattern]:
    options = [[None] for _ in range(inst.n)]  # type: List[List[Optional[int]]]
    for i, j in params.large_pairs:
        options[j].append(i)
    for pattern in itertools.product(*options):
        fixed = [0] * inst.m
        for j, i in enumerate(pattern):
            if i is not None:
                fixed[i] += inst.p[i][j]
        if all(load <= params.T for load in fixed):
            yield pattern


def _residual_solution(
    inst: Instance, params: MilpParams, pattern: Pattern, max_bits: int
) -> Optional[Dict[Tuple[int, int], Fraction]]:
    """Solve the small-pair LP under a fixed pattern; None when infeasible."""
    bound = params.epsilon * params.T
    fixed_load = [0] * inst.m
    for j, i in enumerate(pattern):
        if i is not None:
            fixed_load[i] += inst.p[i][j]

    lp = LpProblem()
    free_jobs = [j for j, i in enumerate(pattern) if i is None]
    for j in free_jobs:
        for i in inst.machines_for(j):
            if inst.p[i][j] <= bound:
                lp.add_variable((i, j))
    for j in free_jobs:
        lp.add_row(
            {(i, j): 1 for i in range(inst.m) if lp.has_variable((i, j))},
            Sense.EQ,
            1,
        )
    for i in range(inst.m):
        lp.add_row(
            {(i, j): inst.p[i][j] for j in free_jobs if lp.has_variable((i, j))},
            Sense.LE,
            params.T - fixed_load[i],
        )
    solution = solve_feasibility(lp, max_bits)
    if not solution.feasible:
        return None
    x = dict(solution.x)
    for j, i in enumerate(pattern):
        if i is not None:
            x[(i, j)] = Fraction(1)
    return x


def _check_fixed_bins(inst, pattern, graph) -> None:
    for i in range(inst.m):
        fixed = sorted(
            (j for j, machine in enumerate(pattern) if machine == i),
            key=lambda j: (-inst.p[i][j], j),
        )
        for s, j in enumerate(fixed):
            if graph.bins[i][s] != {j: 1}:
                raise SchedulingException(
                    "bin %s of machine %s does not hold large job %s alone"
                    % (s + 1, i, j)
                )


def _solve_pattern(inst, params, pattern, max_bits) -> Optional[Assignment]:
    x = _residual_solution(inst, params, pattern, max_bits)
    if x is None:
        return None
    graph = build_submachine_graph(inst, x)
    _check_fixed_bins(inst, pattern, graph)
    a = match_jobs(inst, graph)
    makespan = load_profile(inst, a).makespan
    if makespan > (1 + params.epsilon) * params.T:
        raise SchedulingException(
            "pattern %s rounded to makespan %s above (1+%s)*%s"
            % (pattern, makespan, params.epsilon, params.T)
        )
    return a


def _scheme(
    inst: Instance, eps, T: int, k_cap: int, max_bits: int, first: bool
) -> Optional[Assignment]:
    params = MilpParams(inst, eps, T, k_cap)
    if params.k > k_cap:
        raise ParameterBudgetExceeded(
            "%s large pairs exceed the cap of %s" % (params.k, k_cap)
        )
    best, best_makespan = None, None
    tried = 0
    for pattern in _patterns(inst, params):
        tried += 1
        a = _solve_pattern(inst, params, pattern, max_bits)
        if a is None:
            continue
        if first:
            return a
        makespan = load_profile(inst, a).makespan
        if best is None or makespan < best_makespan:
            best, best_makespan = a, makespan
    _LOGGER.debug("%s: tried %s patterns, best %s", params, tried, best_makespan)
    return best


def solve_milp_scheme(
    inst: Instance,
    eps,
    T: int,
    k_cap: int = DEFAULT_K_CAP,
    max_bits: int = DEFAULT_MAX_BITS,
) -> Assignment:
    """Best rounded pattern solution for makespan guess T.

    :param eps: accuracy in (0, 1]
    :param T: makespan guess
    :param k_cap: largest number of large pairs to enumerate
    :raises ParameterBudgetExceeded: if k > k_cap
    :raises SchemeInfeasible: if no pattern has a feasible residual LP
    """
    if inst.n == 0:
        return Assignment([])
    a = _scheme(inst, eps, T, k_cap, max_bits, first=False)
    if a is None:
        raise SchemeInfeasible("no pattern is feasible for T=%s eps=%s" % (T, eps))
    return a


def minimal_T_for_scheme(
    inst: Instance, eps, k_cap: int = DEFAULT_K_CAP, max_bits: int = DEFAULT_MAX_BITS
) -> int:
    """Binary search the smallest integer T for which the scheme succeeds."""
    if inst.n == 0:
        return 0
    low, high = t_search_range(inst)
    while low < high:
        mid = (low + high) // 2
        if _scheme(inst, eps, mid, k_cap, max_bits, first=True) is not None:
            high = mid
        else:
            low = mid + 1
    _LOGGER.debug("scheme feasible from T=%s for eps=%s", low, eps)
    return low
