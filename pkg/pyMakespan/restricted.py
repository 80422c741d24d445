"""Restricted assignment by pushing jobs along augmenting paths.

Jobs travel from overloaded machines (load >= p_max + delta + 1) toward
underloaded machines (load <= delta). A single balancing run with
delta = floor(L_opt / phi) ends with no overloaded machine left, which bounds
the makespan by p_max + floor(L_opt / phi).
"""
import logging
import math
from collections import deque
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from .instance import (
    Assignment,
    Instance,
    InstanceKind,
    SchedulingException,
    feasibility_parameter,
    load_profile,
    require_kind,
)

_LOGGER = logging.getLogger(__name__)


class MachinePartition:
    """Overloaded, underloaded and remaining machines for a given delta."""

    def __init__(self, delta: int, p_max, loads) -> None:
        self.delta = delta
        self.overloaded = {
            i for i, load in enumerate(loads) if load >= p_max + delta + 1
        }
        self.underloaded = {i for i, load in enumerate(loads) if load <= delta}
        self.balanced = (
            set(range(len(loads))) - self.overloaded - self.underloaded
        )

    def __repr__(self):
        return "<MachinePartition M+=%s M-=%s>" % (
            sorted(self.overloaded),
            sorted(self.underloaded),
        )


class PushGraph:
    """Job/machine graph of an assignment that supports path pushes.

    Machine v_i points to the jobs it holds; a job points to every other
    machine it may run on. A push reverses a path v_a -> w_j -> v_b -> ...,
    moving each job on it one machine forward.
    """

    def __init__(self, inst: Instance, sigma0: Assignment, delta: int) -> None:
        sigma0.check(inst)
        self.inst = inst
        self.delta = delta
        self.p_max = inst.p_max
        self.sigma = list(sigma0)
        self.loads = list(load_profile(inst, sigma0).load)
        self.pushes = 0

    def partition(self) -> MachinePartition:
        return MachinePartition(self.delta, self.p_max, self.loads)

    def _jobs_on(self, i: int) -> List[int]:
        return [j for j, machine in enumerate(self.sigma) if machine == i]

    def find_path(
        self, partition: MachinePartition
    ) -> Optional[List[Tuple[int, int]]]:
        """Breadth-first search from every overloaded machine at once.

        The first hop may move any job; later hops must forward a job of the
        same size as the one that arrived, so intermediate loads never change.

        :return: list of (job, destination machine) moves, or None
        """
        sources = sorted(partition.overloaded)
        visited = set(sources)  # type: Set[int]
        # parent[machine] = (previous machine, job moved in, its size)
        parent = {}  # type: Dict[int, Tuple[int, int, int]]
        queue = deque(sources)
        while queue:
            i = queue.popleft()
            incoming = parent[i][2] if i in parent else None
            for j in self._jobs_on(i):
                size = self.inst.p[i][j]
                if incoming is not None and size != incoming:
                    continue
                for target in self.inst.machines_for(j):
                    if target == i or target in visited:
                        continue
                    visited.add(target)
                    parent[target] = (i, j, size)
                    if target in partition.underloaded:
                        return self._unwind(parent, target)
                    queue.append(target)
        return None

    @staticmethod
    def _unwind(parent, target) -> List[Tuple[int, int]]:
        moves = []
        while target in parent:
            previous, j, _ = parent[target]
            moves.append((j, target))
            target = previous
        moves.reverse()
        return moves

    def push(self, moves: List[Tuple[int, int]]) -> None:
        for j, target in moves:
            source = self.sigma[j]
            size = self.inst.p[source][j]
            self.loads[source] -= size
            self.loads[target] += size
            self.sigma[j] = target
        self.pushes += 1
        _LOGGER.debug("push %s: %s, loads %s", self.pushes, moves, self.loads)

    def balance(self) -> Assignment:
        """Push until no overloaded machine reaches an underloaded one."""
        while True:
            partition = self.partition()
            if not partition.overloaded or not partition.underloaded:
                break
            moves = self.find_path(partition)
            if moves is None:
                break
            before = list(self.loads)
            self.push(moves)
            self._check_push(moves, before)
        return Assignment(self.sigma)

    def _check_push(self, moves, before) -> None:
        target = moves[-1][1]
        dropped = [i for i, old in enumerate(before) if self.loads[i] < old]
        for i, (old, new) in enumerate(zip(before, self.loads)):
            if old != new and i != target and i not in dropped:
                raise SchedulingException(
                    "intermediate machine %s changed load during a push" % i
                )
        if len(dropped) != 1 or self.loads[target] - before[target] > self.p_max:
            raise SchedulingException("push %s broke the load accounting" % moves)


def initial_feasible(inst: Instance) -> Assignment:
    """Place every job on its lowest-index feasible machine."""
    return Assignment(inst.machines_for(j)[0] for j in range(inst.n))


def ubf(inst: Instance, sigma0: Assignment, delta: int) -> Assignment:
    """Balance sigma0 by augmenting pushes with threshold delta.

    :rtype: Assignment
    """
    require_kind(inst, InstanceKind.Restricted, InstanceKind.Identical)
    return PushGraph(inst, sigma0, delta).balance()


def restricted_delta(inst: Instance) -> int:
    """floor(L_opt / phi) with L_opt = sum p_j / m."""
    if inst.n == 0:
        return 0
    l_opt = Fraction(sum(inst.sizes), inst.m)
    return math.floor(l_opt / feasibility_parameter(inst))


def schedule_restricted(inst: Instance) -> Assignment:
    """Run one balancing pass with delta = floor(L_opt / phi).

    :raises SchedulingException: if an overloaded machine survives
    """
    graph = balance_restricted(inst)
    return Assignment(graph.sigma)


def balance_restricted(inst: Instance) -> PushGraph:
    """Like schedule_restricted, but return the finished PushGraph."""
    require_kind(inst, InstanceKind.Restricted, InstanceKind.Identical)
    delta = restricted_delta(inst)
    graph = PushGraph(inst, initial_feasible(inst), delta)
    graph.balance()
    if graph.partition().overloaded:
        raise SchedulingException(
            "machines %s stay overloaded with delta %s"
            % (sorted(graph.partition().overloaded), delta)
        )
    _LOGGER.debug("balanced with delta %s after %s pushes", delta, graph.pushes)
    return graph


def restricted_ratio_guarantee(inst: Instance) -> Optional[Fraction]:
    """Infimum of the ratios r in (3/2, 2) with d (r - 1) p_max > sum p_j.

    For phi = d/m every such r makes the balancing an r-approximation.
    Returns None when no r below 2 qualifies.
    """
    p_max = inst.p_max
    if inst.n == 0 or p_max == 0:
        return None
    d = min(len(inst.machines_for(j)) for j in range(inst.n))
    total = sum(inst.sizes)
    # d (r - 1) p_max > total  <=>  r > 1 + total / (d p_max)
    threshold = 1 + Fraction(total, d * p_max)
    if threshold >= 2:
        return None
    return max(threshold, Fraction(3, 2))
