"""Rounding of fractional LP(T, L) solutions through sub-machine bins.

Every machine i is split into k_i = ceil(sum_j x_ij) unit bins. The jobs with
a positive fraction on i are poured into these bins in nonincreasing order of
p_ij, and a min-cost matching of jobs to bins then picks one bin per job.
"""
import logging
import math
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple, Union

from .instance import Assignment, Instance, SchedulingException, load_profile
from .lp import LpSolution, LpTLParams
from .matching import min_cost_matching

_LOGGER = logging.getLogger(__name__)

Bin = Tuple[int, int]  # (machine, bin index starting at 1)


class MalformedFraction(SchedulingException):
    """Raised when a job's fractions do not sum to one."""


class NoPerfectMatching(SchedulingException):
    """Raised when no matching covers every job."""


class RoundingBoundViolated(SchedulingException):
    """Raised when a rounded assignment breaks the rounding guarantee."""


class SubMachineGraph:
    """Bins per machine and the job-to-bin edges they induce."""

    def __init__(self, m: int) -> None:
        # bins[i][s - 1] maps job -> fraction placed in bin (i, s)
        self.bins = {i: [] for i in range(m)}  # type: Dict[int, List[Dict]]
        self.costs = {}  # type: Dict[Tuple[int, Bin], Fraction]

    def k(self, i: int) -> int:
        return len(self.bins[i])

    def bin_nodes(self) -> List[Bin]:
        return [(i, s + 1) for i in sorted(self.bins) for s in range(self.k(i))]

    def edges_of(self, j: int) -> List[Bin]:
        return [node for (job, node) in self.costs if job == j]

    def __repr__(self):
        return "<SubMachineGraph bins=%s edges=%s>" % (
            len(self.bin_nodes()),
            len(self.costs),
        )


def _fractions(x: Union[LpSolution, Mapping]) -> Mapping:
    return x.x if isinstance(x, LpSolution) else x


def build_submachine_graph(
    inst: Instance, x: Union[LpSolution, Mapping[Tuple[int, int], Fraction]]
) -> SubMachineGraph:
    """Pack the fractions of x into unit bins per machine.

    :raises MalformedFraction: if some job's fractions do not sum to 1
    """
    x = {key: Fraction(v) for key, v in _fractions(x).items() if v}
    for j in range(inst.n):
        total = sum(v for (i, job), v in x.items() if job == j)
        if total != 1:
            raise MalformedFraction("fractions of job %s sum to %s" % (j, total))

    graph = SubMachineGraph(inst.m)
    for i in range(inst.m):
        jobs = sorted(
            (j for (machine, j) in x if machine == i),
            key=lambda j: (-inst.p[i][j], j),
        )
        k_i = math.ceil(sum(x[(i, j)] for j in jobs))
        bins = graph.bins[i]
        room = Fraction(0)
        for j in jobs:
            rest = x[(i, j)]
            while rest > 0:
                if room == 0:
                    bins.append({})
                    room = Fraction(1)
                piece = min(rest, room)
                bins[-1][j] = bins[-1].get(j, 0) + piece
                graph.costs[(j, (i, len(bins)))] = inst.p[i][j]
                rest -= piece
                room -= piece
        if len(bins) != k_i:  # pragma: no cover
            raise SchedulingException(
                "machine %s packed into %s bins, expected %s" % (i, len(bins), k_i)
            )
    return graph


def match_jobs(inst: Instance, graph: SubMachineGraph) -> Assignment:
    """Min-cost matching of every job to one of its bins.

    :raises NoPerfectMatching: if some job cannot be matched
    """
    matched = min_cost_matching(list(range(inst.n)), graph.bin_nodes(), graph.costs)
    if matched is None:
        raise NoPerfectMatching("sub-machine graph has no job-saturating matching")
    return Assignment(matched[j][0] for j in range(inst.n))


def round_fractional(
    inst: Instance, x: Union[LpSolution, Mapping[Tuple[int, int], Fraction]]
) -> Assignment:
    return match_jobs(inst, build_submachine_graph(inst, x))


def rounding_bounds_hold(inst: Instance, a: Assignment, params: LpTLParams) -> bool:
    """avg load <= L and load(i) <= T + largest job on i, for every machine."""
    profile = load_profile(inst, a)
    if profile.avg_load > params.L:
        return False
    for i in range(inst.m):
        largest = max((inst.p[i][j] for j in a.jobs_on(i)), default=0)
        if profile.load[i] > params.T + largest:
            return False
    return True


def round_lp(inst: Instance, x: LpSolution, params: LpTLParams) -> Assignment:
    """Round a feasible LP(T, L) solution into an integral assignment.

    :param inst: instance
    :param x: feasible solution of LP(T, L)
    :param params: the (T, L) pair x was computed for
    :raises RoundingBoundViolated: if the rounding guarantee fails
    :rtype: Assignment
    """
    a = round_fractional(inst, x)
    if not rounding_bounds_hold(inst, a, params):
        raise RoundingBoundViolated("rounded %s breaks %s" % (a, params))
    _LOGGER.debug("rounded LP solution for %s into %s", params, a)
    return a
