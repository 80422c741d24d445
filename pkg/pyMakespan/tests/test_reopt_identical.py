import random
from fractions import Fraction

import pytest

from pyMakespan import (
    Assignment,
    Generator,
    GeneratorSpec,
    Instance,
    InstanceFile,
    KindMismatch,
    ReoptInput,
    exact_makespan,
    exact_reopt,
    load_profile,
    reoptimize_identical,
    transition_cost,
)
from pyMakespan.reopt_identical import (
    ConfigurationBudgetExceeded,
    ItemScale,
    RelaxedPackingFailed,
    enumerate_configurations,
    lpt_schedule,
    match_and_cost,
    ptas_target,
    relaxed_first_fit,
)

from .conftest import reopt_identical

EPS = Fraction(1, 2)


def test_lpt_schedule():
    inst = Instance.identical(2, [2, 3, 3, 2])
    assert lpt_schedule(inst).sigma == (0, 0, 1, 1)


@pytest.mark.parametrize("sizes, optimum", [([2, 2], 2), ([7], 7), ([3, 3, 2], 5)])
def test_ptas_target_brackets_optimum(sizes, optimum):
    eps0 = Fraction(1, 8)
    T = ptas_target(Instance.identical(2, sizes), eps0)
    assert optimum <= T <= (1 + eps0) * optimum


def test_ptas_target_empty():
    assert ptas_target(Instance.identical(2, []), Fraction(1, 8)) == 0


@pytest.mark.corpus(100)
def test_ptas_target_on_generated(seeds):
    eps0 = Fraction(1, 8)
    for seed in seeds:
        payloads = Generator.generate(
            GeneratorSpec("reopt_perturbation", seed=seed, m=3, n=7)
        )
        inst = InstanceFile.decode_reopt(payloads["reopt"]).new
        optimum = exact_makespan(inst).T_opt
        assert optimum <= ptas_target(inst, eps0) <= (1 + eps0) * optimum


def test_no_large_items_gives_one_empty_configuration():
    items = ItemScale(Instance.identical(2, [1, 1]), 10, Fraction(1, 4))
    configs = list(enumerate_configurations(items, 2))
    assert len(configs) == 1
    assert configs[0].bins == ((), ())


def test_one_large_item():
    items = ItemScale(Instance.identical(2, [5]), 10, Fraction(1, 4))
    assert items.rounded == {0: Fraction(1, 2)}
    configs = list(enumerate_configurations(items, 2))
    assert [c.bins for c in configs] == [((1,), (0,))]
    assert configs[0].load(0) == Fraction(1, 2)


def test_two_items_that_do_not_share_a_bin():
    items = ItemScale(Instance.identical(2, [6, 6]), 10, Fraction(1, 4))
    assert items.classes == [Fraction(9, 16)]
    configs = list(enumerate_configurations(items, 2))
    assert [c.bins for c in configs] == [((1,), (1,))]


def test_configuration_cap():
    items = ItemScale(Instance.identical(3, [3, 3, 3]), 10, Fraction(1, 4))
    with pytest.raises(ConfigurationBudgetExceeded):
        list(enumerate_configurations(items, 3, cap=1))


def test_relaxed_first_fit():
    items = ItemScale(Instance.identical(2, [1, 2]), 10, Fraction(1, 4))
    loads = [Fraction(1), Fraction(1, 2)]
    assert relaxed_first_fit(items, loads, [0, 1]) == {1: 0, 0: 1}
    assert loads == [Fraction(6, 5), Fraction(3, 5)]

    items = ItemScale(Instance.identical(1, [1]), 10, Fraction(1, 4))
    with pytest.raises(RelaxedPackingFailed):
        relaxed_first_fit(items, [Fraction(5, 4)], [0])


def test_matching_keeps_old_layout():
    # one large item on machine 0 and two small ones on machine 1
    inst = Instance.identical(2, [6, 3, 3])
    reopt = ReoptInput(inst, inst, Assignment([0, 1, 1]))
    items = ItemScale(inst, 20, Fraction(1, 4))
    assert items.large == [0]
    configs = list(enumerate_configurations(items, 2))
    assert [c.bins for c in configs] == [((1,), (0,))]
    result = match_and_cost(reopt, items, configs[0])
    assert result.cost == 0
    assert result.assignment.sigma == (0, 1, 1)


def test_omitted_small_items_are_repacked():
    # the new large item pushes the largest small one out of the unit bin,
    # First-Fit puts it back within 1 + eps0
    old = Instance.identical(1, [4, 3, 2])
    new = Instance.identical(1, [4, 3, 2, 12])
    reopt = ReoptInput(old, new, Assignment([0, 0, 0]))
    items = ItemScale(new, 20, Fraction(1, 4))
    assert items.large == [3]
    config = list(enumerate_configurations(items, 1))[0]
    result = match_and_cost(reopt, items, config)
    assert result.assignment.sigma == (0, 0, 0, 0)
    assert result.cost == 1
    assert result.makespan == 21


def test_identity_costs_nothing():
    inst = Instance.identical(2, [3, 3, 2])
    reopt = ReoptInput(inst, inst, Assignment([0, 1, 1]))
    a, cost = reoptimize_identical(reopt, EPS)
    assert cost == 0
    assert load_profile(inst, a).makespan == 5


def test_all_jobs_new():
    old = Instance.identical(2, [4])
    new = Instance.identical(2, [3, 3, 2])
    reopt = ReoptInput(old, new, Assignment([0]), [0], [1, 2, 3])
    a, cost = reoptimize_identical(reopt, EPS)
    assert cost == 3
    assert cost == transition_cost(reopt, a)


def test_empty_new_instance():
    old = Instance.identical(2, [4])
    new = Instance.identical(2, [])
    reopt = ReoptInput(old, new, Assignment([0]), [0], [])
    assert reoptimize_identical(reopt, EPS) == (Assignment([]), 0)


def test_rejects_bad_input():
    inst = Instance.uniform([1], [1])
    with pytest.raises(KindMismatch):
        reoptimize_identical(ReoptInput(inst, inst, Assignment([0])), EPS)
    inst = Instance.identical(1, [1])
    with pytest.raises(ValueError):
        reoptimize_identical(ReoptInput(inst, inst, Assignment([0])), 0)


@reopt_identical
def test_fixture_new_job(reopt):
    a, cost = reoptimize_identical(reopt, EPS)
    assert cost == 1
    assert load_profile(reopt.new, a).makespan <= (1 + EPS) * 5


def test_removed_machine_against_oracle():
    old = Instance.identical(3, [4, 3, 3, 2, 2, 1])
    new = Instance.identical(2, [4, 3, 3, 2, 2, 1])
    reopt = ReoptInput(old, new, Assignment([0, 1, 2, 0, 1, 2]))
    a, cost = reoptimize_identical(reopt, EPS)
    optimum = exact_makespan(new).T_opt
    assert load_profile(new, a).makespan <= (1 + EPS) * optimum
    assert cost <= exact_reopt(reopt).cost


@pytest.mark.corpus(100)
def test_perturbations_against_oracle(seeds):
    for seed in seeds:
        payloads = Generator.generate(
            GeneratorSpec(
                "reopt_perturbation",
                seed=seed,
                m=3,
                n=6,
                add_jobs=1,
                remove_jobs=1,
                add_machines=seed % 2,
                remove_machines=1 - seed % 2,
            )
        )
        reopt = InstanceFile.decode_reopt(payloads["reopt"])
        a, cost = reoptimize_identical(reopt, EPS)
        optimum = exact_makespan(reopt.new).T_opt
        assert load_profile(reopt.new, a).makespan <= (1 + EPS) * optimum
        assert cost <= exact_reopt(reopt).cost


@pytest.mark.corpus(100)
def test_identity_perturbations(seeds):
    for seed in seeds:
        payloads = Generator.generate(
            GeneratorSpec(
                "reopt_perturbation", seed=seed, m=3, n=6, add_jobs=0, remove_jobs=0
            )
        )
        reopt = InstanceFile.decode_reopt(payloads["reopt"])
        assert reoptimize_identical(reopt, EPS)[1] == 0


@pytest.mark.corpus(500)
def test_scaled_sizes_fit_the_machines(seeds):
    eps0 = Fraction(1, 8)
    for seed in seeds:
        payloads = Generator.generate(
            GeneratorSpec("reopt_perturbation", seed=seed, m=3, n=7)
        )
        inst = InstanceFile.decode_reopt(payloads["reopt"]).new
        assert sum(ItemScale.for_instance(inst, eps0).alpha) <= inst.m


@pytest.mark.corpus(500)
def test_relaxed_first_fit_places_small_items_that_fit_in_volume(seeds):
    eps0 = Fraction(1, 4)
    for seed in seeds:
        rng = random.Random(seed)
        m = rng.randint(1, 4)
        loads = [Fraction(rng.randint(0, 8), 8) for _ in range(m)]
        room = m - sum(loads)
        sizes = []
        while True:
            size = rng.randint(1, 10)
            if Fraction(sum(sizes) + size, 40) > room:
                break
            sizes.append(size)
        items = ItemScale(Instance.identical(m, sizes), 40, eps0)
        assert items.large == []
        placed = relaxed_first_fit(items, loads, range(len(sizes)))
        assert sorted(placed) == list(range(len(sizes)))
        assert max(loads) <= 1 + eps0
