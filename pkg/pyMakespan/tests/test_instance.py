from fractions import Fraction

import pytest

from pyMakespan import (
    INFEASIBLE,
    Assignment,
    InfeasiblePairAssigned,
    Instance,
    InstanceKind,
    InvalidInstance,
    KindMismatch,
    feasibility_parameter,
    load_profile,
    phi_at,
)
from pyMakespan.instance import feasibility_profile, require_kind

from .conftest import any_instance


def test_single_machine_loads():
    inst = Instance.unrelated([[2, 3]])
    profile = load_profile(inst, Assignment([0, 0]))
    assert profile.load == (5,)
    assert profile.makespan == 5


def test_identical_loads_with_idle_machine():
    inst = Instance.identical(2, [4])
    profile = load_profile(inst, Assignment([0]))
    assert profile.load == (4, 0)
    assert profile.makespan == 4
    assert profile.avg_load == 2


def test_unrelated_loads():
    inst = Instance.unrelated([[1, 2, 3], [3, 2, 1]])
    profile = load_profile(inst, Assignment([0, 0, 1]))
    assert profile.load == (3, 1)
    assert profile.makespan == 3


def test_infeasible_pair_rejected():
    inst = Instance.restricted([2, 3], [[0, 1], [1]], m=2)
    with pytest.raises(InfeasiblePairAssigned):
        load_profile(inst, Assignment([0, 0]))
    with pytest.raises(InfeasiblePairAssigned):
        load_profile(inst, Assignment([0]))
    with pytest.raises(InfeasiblePairAssigned):
        load_profile(inst, Assignment([0, 5]))


def test_feasibility_profile():
    profile = feasibility_profile(Instance.unrelated([[1, 1], [1, 1]]))
    assert profile.thresholds == (1,)
    assert profile.phi == (1,)

    inst = Instance.restricted([2, 3], [[0, 1], [1]], m=2)
    profile = feasibility_profile(inst)
    assert profile.thresholds == (2, 3)
    assert profile.phi == (0, Fraction(1, 2))

    profile = feasibility_profile(Instance.unrelated([[5]]))
    assert profile.thresholds == (5,)
    assert profile.phi == (1,)


def test_phi_at_counts_machines_below_threshold():
    inst = Instance.unrelated([[1, 4], [3, INFEASIBLE], [2, 2]])
    assert phi_at(inst, 1) == 0
    assert phi_at(inst, 2) == Fraction(1, 3)
    assert phi_at(inst, 4) == Fraction(2, 3)
    assert feasibility_parameter(inst) == Fraction(2, 3)


def test_empty_job_set():
    inst = Instance.identical(3, [])
    assert inst.n == 0
    assert inst.p_max == 0
    assert phi_at(inst, 0) == 1
    assert load_profile(inst, Assignment([])).makespan == 0


@pytest.mark.parametrize(
    "p",
    [
        [],
        [[1, 2], [3]],
        [[-1]],
        [[1.5]],
        [[True]],
        [[INFEASIBLE], [INFEASIBLE]],
    ],
)
def test_invalid_matrix(p):
    with pytest.raises(InvalidInstance):
        Instance.unrelated(p)


def test_kind_invariants():
    with pytest.raises(InvalidInstance):
        Instance(InstanceKind.Identical, [[1, 2], [1, 3]])
    with pytest.raises(InvalidInstance):
        Instance(InstanceKind.Restricted, [[1, 2], [2, INFEASIBLE]])
    with pytest.raises(InvalidInstance):
        Instance.restricted([1, 2], [[0]], m=1)
    with pytest.raises(InvalidInstance):
        Instance.uniform([1, 2], [1, 0])
    with pytest.raises(InvalidInstance):
        Instance.uniform([0], [1])


def test_uniform_processing_times():
    inst = Instance.uniform([4, 3], [2, Fraction(1, 2)])
    assert inst.p == ((2, Fraction(3, 2)), (8, 6))
    assert inst.sizes == (4, 3)


def test_size_undefined_for_unrelated():
    with pytest.raises(KindMismatch):
        Instance.unrelated([[1]]).size(0)
    with pytest.raises(KindMismatch):
        require_kind(Instance.unrelated([[1]]), InstanceKind.Restricted)


def test_assignment_helpers():
    a = Assignment([0, 1, 0])
    assert a.jobs_on(0) == [0, 2]
    moved = a.move(2, 1)
    assert moved.sigma == (0, 1, 1)
    assert a.sigma == (0, 1, 0)
    assert moved == Assignment([0, 1, 1])


@any_instance
def test_average_load_is_total_over_m(inst):
    a = Assignment(inst.machines_for(j)[0] for j in range(inst.n))
    profile = load_profile(inst, a)
    total = sum(inst.p[i][j] for j, i in enumerate(a))
    assert inst.m * profile.avg_load == total
    assert profile.makespan == max(profile.load)
