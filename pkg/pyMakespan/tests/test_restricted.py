import math
from fractions import Fraction

import pytest

from pyMakespan import (
    Assignment,
    Generator,
    GeneratorSpec,
    Instance,
    InstanceFile,
    KindMismatch,
    exact_makespan,
    feasibility_parameter,
    load_profile,
    schedule_restricted,
)
from pyMakespan.restricted import (
    PushGraph,
    balance_restricted,
    initial_feasible,
    restricted_delta,
    restricted_ratio_guarantee,
    ubf,
)

from .conftest import restricted


def restricted_bound(inst):
    l_opt = Fraction(sum(inst.sizes), inst.m)
    return inst.p_max + math.floor(l_opt / feasibility_parameter(inst))


def test_initial_feasible_takes_lowest_index():
    inst = Instance.restricted([2, 3], [[0, 1], [1]], m=2)
    assert initial_feasible(inst).sigma == (0, 1)
    assert initial_feasible(Instance.identical(3, [1, 2])).sigma == (0, 0)


def test_ubf_keeps_balanced_schedule():
    inst = Instance.identical(2, [1, 1])
    sigma0 = Assignment([0, 1])
    assert ubf(inst, sigma0, 1) == sigma0


def test_ubf_pushes_unit_jobs():
    inst = Instance.identical(2, [1, 1, 1, 1])
    graph = PushGraph(inst, Assignment([0, 0, 0, 0]), 1)
    graph.balance()
    assert graph.loads == [2, 2]
    assert graph.pushes == 2
    assert not graph.partition().overloaded


def test_ubf_never_moves_pinned_job():
    inst = Instance.restricted([5, 1], [[0], [0, 1]], m=2)
    a = ubf(inst, Assignment([0, 0]), 0)
    assert a[0] == 0


def test_ubf_rejects_unrelated():
    inst = Instance.unrelated([[1, 2], [2, 1]])
    with pytest.raises(KindMismatch):
        ubf(inst, Assignment([0, 0]), 1)


def test_identical_two_jobs():
    inst = Instance.identical(2, [3, 3])
    assert restricted_delta(inst) == 3
    assert load_profile(inst, schedule_restricted(inst)).makespan <= 6


def test_single_machine():
    inst = Instance.identical(1, [2, 4])
    assert load_profile(inst, schedule_restricted(inst)).makespan == 6


def test_two_machine_restricted():
    inst = Instance.restricted([2, 3], [[0, 1], [1]], m=2)
    assert feasibility_parameter(inst) == Fraction(1, 2)
    assert restricted_delta(inst) == 5
    makespan = load_profile(inst, schedule_restricted(inst)).makespan
    assert makespan <= 8
    assert exact_makespan(inst).T_opt == 3


def test_ratio_guarantee():
    # d = 2, p_max = 4, sum = 6: r > 1 + 6/8
    inst = Instance.restricted([4, 1, 1], [[0, 1], [1, 2], [0, 2]], m=3)
    assert restricted_ratio_guarantee(inst) == Fraction(7, 4)
    # sum too large for any r below 2
    inst = Instance.identical(2, [1, 1, 1])
    assert restricted_ratio_guarantee(inst) is None
    assert restricted_ratio_guarantee(Instance.identical(2, [5])) == Fraction(3, 2)


@restricted
def test_bound_on_fixtures(inst):
    graph = balance_restricted(inst)
    makespan = load_profile(inst, Assignment(graph.sigma)).makespan
    assert makespan <= restricted_bound(inst)
    assert graph.pushes <= inst.n


@pytest.mark.corpus(67)
def test_bound_on_generated(seeds):
    for seed in seeds:
        for d in (1, 2, 4):
            payloads = Generator.generate(
                GeneratorSpec("restricted_random", seed=seed, m=4, n=10, d=d)
            )
            inst = InstanceFile.decode_instance(payloads["instance"])
            graph = balance_restricted(inst)
            assert not graph.partition().overloaded
            sigma = Assignment(graph.sigma)
            assert load_profile(inst, sigma).makespan <= restricted_bound(inst)
            assert graph.pushes <= inst.n


@pytest.mark.corpus(100)
def test_ratio_against_oracle(seeds):
    for seed in seeds:
        payloads = Generator.generate(
            GeneratorSpec("restricted_random", seed=seed, m=3, n=4, d=3, p_max=6)
        )
        inst = InstanceFile.decode_instance(payloads["instance"])
        ratio = restricted_ratio_guarantee(inst)
        if ratio is None:
            continue
        makespan = load_profile(inst, schedule_restricted(inst)).makespan
        assert makespan <= ratio * exact_makespan(inst).T_opt
