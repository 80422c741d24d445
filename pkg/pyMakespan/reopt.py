"""Reoptimization input shared by the identical and uniform algorithms.

An old schedule sigma0 of an old instance is to be turned into a schedule of a
new instance. Jobs keep stable IDs across both instances; a job costs one unit
when it is new or sits on a different machine than before.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .instance import (
    Assignment,
    InfeasiblePairAssigned,
    Instance,
    InstanceKind,
    InvalidInstance,
)

_LOGGER = logging.getLogger(__name__)


class ReoptInput:
    """Old instance, new instance, old schedule and the unit transition cost.

    machine_map[i] is the new index of old machine i, or None when it was
    removed. By default old machine i keeps index i if i < new.m.
    """

    def __init__(
        self,
        old: Instance,
        new: Instance,
        sigma0: Assignment,
        job_ids_old: Optional[Sequence] = None,
        job_ids_new: Optional[Sequence] = None,
        speed_ratio_bound: Optional[Fraction] = None,
        machine_map: Optional[Sequence[Optional[int]]] = None,
    ) -> None:
        self.old = old
        self.new = new
        self.sigma0 = sigma0
        self.job_ids_old = (
            tuple(job_ids_old) if job_ids_old is not None else tuple(range(old.n))
        )
        self.job_ids_new = (
            tuple(job_ids_new) if job_ids_new is not None else tuple(range(new.n))
        )
        self.speed_ratio_bound = (
            Fraction(speed_ratio_bound) if speed_ratio_bound is not None else None
        )
        if machine_map is None:
            machine_map = [i if i < new.m else None for i in range(old.m)]
        self.machine_map = tuple(machine_map)
        self._validate()
        position = {job_id: k for k, job_id in enumerate(self.job_ids_old)}
        #: surviving old machine of every new job, None for new jobs and jobs
        #: of removed machines
        self.old_machine = [
            self.machine_map[sigma0[position[job_id]]] if job_id in position else None
            for job_id in self.job_ids_new
        ]  # type: List[Optional[int]]

    def _validate(self) -> None:
        if self.old.kind != self.new.kind:
            raise InvalidInstance(
                "old instance is %s, new instance is %s"
                % (self.old.kind.value, self.new.kind.value)
            )
        if len(self.job_ids_old) != self.old.n or len(self.job_ids_new) != self.new.n:
            raise InvalidInstance("job id lists do not match the job counts")
        for ids in (self.job_ids_old, self.job_ids_new):
            if len(set(ids)) != len(ids):
                raise InvalidInstance("job ids must be unique, got %s" % (ids,))
        mapped = [i for i in self.machine_map if i is not None]
        if len(self.machine_map) != self.old.m or len(set(mapped)) != len(mapped):
            raise InvalidInstance("machine map %s is not injective" % (mapped,))
        if any(not 0 <= i < self.new.m for i in mapped):
            raise InvalidInstance("machine map points past %s machines" % self.new.m)
        try:
            self.sigma0.check(self.old)
        except InfeasiblePairAssigned as ex:
            raise InvalidInstance("sigma0 does not fit the old instance") from ex
        if self.new.kind == InstanceKind.Uniform and self.speed_ratio_bound:
            if max(self.new.speeds) > self.speed_ratio_bound * min(self.new.speeds):
                raise InvalidInstance(
                    "speed ratio exceeds the bound %s" % self.speed_ratio_bound
                )

    @property
    def m(self) -> int:
        return self.new.m

    @property
    def m0(self) -> int:
        return self.old.m

    def is_unplaced(self, j: int) -> bool:
        """True when job j is new or its old machine was removed."""
        return self.old_machine[j] is None

    def job_cost(self, j: int, i: int) -> int:
        """Transition cost of putting new job j on machine i."""
        return 0 if self.old_machine[j] == i else 1

    def old_contents(self) -> Dict[int, List[int]]:
        """New-instance jobs grouped by their surviving old machine."""
        contents = {i: [] for i in range(self.m)}  # type: Dict[int, List[int]]
        for j, i in enumerate(self.old_machine):
            if i is not None:
                contents[i].append(j)
        return contents

    def __repr__(self):
        return "<ReoptInput m0=%s m=%s n0=%s n=%s>" % (
            self.m0,
            self.m,
            self.old.n,
            self.new.n,
        )


def transition_cost(reopt: ReoptInput, sigma: Assignment) -> int:
    """Count jobs that are new, lost their machine or changed machine."""
    return sum(reopt.job_cost(j, i) for j, i in enumerate(sigma))
