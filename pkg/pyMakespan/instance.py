"""
Scheduling instances and assignments.

An instance is a machines x jobs matrix of processing times in which a job that
cannot run on a machine carries the INFEASIBLE sentinel. The four machine
models (unrelated, restricted, uniform, identical) are specializations of the
same matrix and are tagged with an InstanceKind.

All load arithmetic is exact: integers, or Fractions when machine speeds are
rational.
"""
import logging
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

_LOGGER = logging.getLogger(__name__)

#: Marks a (machine, job) pair on which the job cannot run.
INFEASIBLE = None


class InstanceKind(Enum):
    """Machine model of an instance."""

    Unrelated = "unrelated"
    Restricted = "restricted"
    Uniform = "uniform"
    Identical = "identical"


class SchedulingException(Exception):
    """Base exception for scheduling errors."""


class InvalidInstance(SchedulingException):
    """Raised when an instance or input file violates its invariants."""


class KindMismatch(SchedulingException):
    """Raised when an algorithm receives an instance of the wrong kind."""


class InfeasiblePairAssigned(SchedulingException):
    """Raised when a job is assigned to a machine it cannot run on."""


class BudgetExceeded(SchedulingException):
    """Raised when an enumeration would exceed its configured budget."""


def is_finite(value) -> bool:
    return value is not INFEASIBLE


class Instance:
    """Processing-time matrix p[i][j] for m machines and n jobs.

    Use the kind specific constructors (:meth:`unrelated`,
    :meth:`restricted`, :meth:`identical`, :meth:`uniform`) rather than
    calling the initializer directly.
    """

    def __init__(
        self,
        kind: InstanceKind,
        p: Sequence[Sequence],
        base_times: Optional[Sequence[int]] = None,
        speeds: Optional[Sequence[Fraction]] = None,
    ) -> None:
        if not p:
            raise InvalidInstance("an instance needs at least one machine")
        self.kind = kind
        self.p = tuple(tuple(row) for row in p)
        self.m = len(self.p)
        self.n = len(self.p[0])
        self.base_times = tuple(base_times) if base_times is not None else None
        self.speeds = tuple(speeds) if speeds is not None else None
        self._validate()

    @classmethod
    def unrelated(cls, p: Sequence[Sequence[Optional[int]]]) -> "Instance":
        return cls(InstanceKind.Unrelated, p)

    @classmethod
    def restricted(
        cls, sizes: Sequence[int], machine_sets: Sequence[Iterable[int]], m: int
    ) -> "Instance":
        """Create a restricted assignment instance.

        :param sizes: processing time p_j of every job
        :param machine_sets: machines each job may run on
        :param m: number of machines
        """
        if len(sizes) != len(machine_sets):
            raise InvalidInstance(
                "got %s sizes but %s machine sets" % (len(sizes), len(machine_sets))
            )
        allowed = [set(machines) for machines in machine_sets]
        p = [
            [size if i in allowed[j] else INFEASIBLE for j, size in enumerate(sizes)]
            for i in range(m)
        ]
        return cls(InstanceKind.Restricted, p)

    @classmethod
    def identical(cls, m: int, sizes: Sequence[int]) -> "Instance":
        return cls(InstanceKind.Identical, [list(sizes) for _ in range(m)])

    @classmethod
    def uniform(
        cls, base_times: Sequence[int], speeds: Sequence[Rational]
    ) -> "Instance":
        """Create a uniform machines instance, p_ij = p_j / s_i."""
        speeds = [Fraction(s) for s in speeds]
        if not speeds or any(s <= 0 for s in speeds):
            raise InvalidInstance("speeds must be positive, got %s" % speeds)
        p = [[Fraction(t) / s for t in base_times] for s in speeds]
        return cls(InstanceKind.Uniform, p, base_times=base_times, speeds=speeds)

    def _validate(self) -> None:
        for i, row in enumerate(self.p):
            if len(row) != self.n:
                raise InvalidInstance(
                    "machine %s has %s entries, expected %s" % (i, len(row), self.n)
                )
            for j, value in enumerate(row):
                if value is INFEASIBLE:
                    continue
                if not isinstance(value, Rational) or isinstance(value, bool):
                    raise InvalidInstance(
                        "p[%s][%s] = %r is not an exact number" % (i, j, value)
                    )
                if value < 0:
                    raise InvalidInstance("p[%s][%s] = %s is negative" % (i, j, value))

        for j in range(self.n):
            if not self.machines_for(j):
                raise InvalidInstance("job %s has no feasible machine" % j)

        if self.kind == InstanceKind.Identical:
            if any(row != self.p[0] for row in self.p) or INFEASIBLE in self.p[0]:
                raise InvalidInstance("identical machines need equal finite rows")
        elif self.kind == InstanceKind.Restricted:
            for j in range(self.n):
                if len({self.p[i][j] for i in self.machines_for(j)}) > 1:
                    raise InvalidInstance(
                        "job %s has several finite processing times" % j
                    )
        elif self.kind == InstanceKind.Uniform:
            if self.base_times is None or self.speeds is None:
                raise InvalidInstance("uniform instances need base times and speeds")
            if len(self.base_times) != self.n or len(self.speeds) != self.m:
                raise InvalidInstance("base times or speeds have the wrong length")
            if any(not isinstance(t, int) or t <= 0 for t in self.base_times):
                raise InvalidInstance(
                    "base times must be positive integers, got %s"
                    % (self.base_times,)
                )

    def finite(self, i: int, j: int) -> bool:
        return self.p[i][j] is not INFEASIBLE

    def machines_for(self, j: int) -> List[int]:
        """Return the machines job j can run on, in index order."""
        return [i for i in range(self.m) if self.p[i][j] is not INFEASIBLE]

    def size(self, j: int):
        """Return the machine independent size of job j.

        Defined for restricted and identical instances (the common finite
        value) and for uniform instances (the base time).
        """
        if self.kind == InstanceKind.Uniform:
            return self.base_times[j]
        if self.kind == InstanceKind.Unrelated:
            raise KindMismatch("unrelated jobs have no machine independent size")
        return self.p[self.machines_for(j)[0]][j]

    @property
    def sizes(self) -> Tuple:
        return tuple(self.size(j) for j in range(self.n))

    @property
    def p_max(self):
        """Largest finite processing time, 0 for an empty job set."""
        return max((v for row in self.p for v in row if v is not INFEASIBLE), default=0)

    def finite_entries(self) -> Iterator[Tuple[int, int, Rational]]:
        for i, row in enumerate(self.p):
            for j, value in enumerate(row):
                if value is not INFEASIBLE:
                    yield i, j, value

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.p == other.p
            and self.base_times == other.base_times
            and self.speeds == other.speeds
        )

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "<Instance %s m=%s n=%s>" % (self.kind.value, self.m, self.n)


def require_kind(inst: Instance, *kinds: InstanceKind) -> None:
    if inst.kind not in kinds:
        raise KindMismatch(
            "expected a %s instance, got %s"
            % (" or ".join(k.value for k in kinds), inst.kind.value)
        )


class Assignment:
    """Total map from jobs to machines, sigma[j] is the machine of job j."""

    def __init__(self, sigma: Iterable[int]) -> None:
        self._sigma = tuple(int(i) for i in sigma)

    @property
    def sigma(self) -> Tuple[int, ...]:
        return self._sigma

    def __len__(self):
        return len(self._sigma)

    def __getitem__(self, j):
        return self._sigma[j]

    def __iter__(self):
        return iter(self._sigma)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self._sigma == other._sigma

    def __hash__(self):
        return hash(self._sigma)

    def __repr__(self):
        return "<Assignment %s>" % (list(self._sigma),)

    def jobs_on(self, i: int) -> List[int]:
        return [j for j, machine in enumerate(self._sigma) if machine == i]

    def move(self, j: int, i: int) -> "Assignment":
        """Return a copy with job j placed on machine i."""
        sigma = list(self._sigma)
        sigma[j] = i
        return Assignment(sigma)

    def check(self, inst: Instance) -> None:
        """Check totality and feasibility against inst.

        :raises InfeasiblePairAssigned: on a missing or infeasible placement
        """
        if len(self._sigma) != inst.n:
            raise InfeasiblePairAssigned(
                "assignment covers %s jobs, instance has %s"
                % (len(self._sigma), inst.n)
            )
        for j, i in enumerate(self._sigma):
            if not 0 <= i < inst.m:
                raise InfeasiblePairAssigned("job %s on unknown machine %s" % (j, i))
            if inst.p[i][j] is INFEASIBLE:
                raise InfeasiblePairAssigned(
                    "job %s cannot run on machine %s" % (j, i)
                )


class LoadProfile:
    """Per-machine loads of an assignment with makespan and average load."""

    def __init__(self, load: Sequence) -> None:
        self.load = tuple(load)
        self.makespan = max(self.load, default=0)
        self.avg_load = Fraction(sum(self.load), len(self.load)) if self.load else 0

    def __repr__(self):
        return "<LoadProfile load=%s makespan=%s>" % (list(self.load), self.makespan)


def load_profile(inst: Instance, a: Assignment) -> LoadProfile:
    """Compute exact machine loads of a on inst.

    :raises InfeasiblePairAssigned: if a job sits on an infeasible machine
    """
    a.check(inst)
    load = [0] * inst.m
    for j, i in enumerate(a):
        load[i] += inst.p[i][j]
    return LoadProfile(load)


class FeasibilityProfile:
    """Feasibility parameter phi_t for every distinct finite processing time."""

    def __init__(self, thresholds: Sequence, phi: Sequence[Fraction]) -> None:
        self.thresholds = tuple(thresholds)
        self.phi = tuple(phi)

    def __repr__(self):
        return "<FeasibilityProfile thresholds=%s phi=%s>" % (
            list(self.thresholds),
            [str(f) for f in self.phi],
        )


def phi_at(inst: Instance, threshold) -> Fraction:
    """Return min over jobs of the fraction of machines with p_ij <= threshold."""
    if inst.n == 0:
        return Fraction(1)
    counts = (
        sum(
            1
            for i in range(inst.m)
            if inst.p[i][j] is not INFEASIBLE and inst.p[i][j] <= threshold
        )
        for j in range(inst.n)
    )
    return Fraction(min(counts), inst.m)


def feasibility_profile(inst: Instance) -> FeasibilityProfile:
    thresholds = sorted({value for _, _, value in inst.finite_entries()})
    return FeasibilityProfile(thresholds, [phi_at(inst, t) for t in thresholds])


def feasibility_parameter(inst: Instance) -> Fraction:
    """Fraction of machines every job can run on (restricted phi)."""
    if inst.n == 0:
        return Fraction(1)
    return Fraction(min(len(inst.machines_for(j)) for j in range(inst.n)), inst.m)
