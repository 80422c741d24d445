import pytest

from pyMakespan import (
    Generator,
    GeneratorSpec,
    InstanceFile,
    InstanceKind,
    feasibility_parameter,
    load_profile,
)
from pyMakespan.graphbalancing import validate_decomposition


@pytest.mark.parametrize("family", GeneratorSpec.FAMILIES)
def test_same_seed_same_payloads(family):
    first = Generator.generate(GeneratorSpec(family, seed=3))
    second = Generator.generate(GeneratorSpec(family, seed=3))
    assert InstanceFile.canonical(first) == InstanceFile.canonical(second)


def test_seeds_differ():
    first = Generator.generate(GeneratorSpec("restricted_random", seed=1, n=12))
    second = Generator.generate(GeneratorSpec("restricted_random", seed=2, n=12))
    assert first != second


@pytest.mark.parametrize("d", [1, 2, 3])
def test_restricted_eligibility(d):
    payloads = Generator.generate(GeneratorSpec("restricted_random", m=3, d=d))
    inst = InstanceFile.decode_instance(payloads["instance"])
    assert inst.kind == InstanceKind.Restricted
    assert all(len(inst.machines_for(j)) == d for j in range(inst.n))


def test_restricted_full_eligibility_is_fully_feasible():
    payloads = Generator.generate(GeneratorSpec("restricted_random", m=3, d=3))
    inst = InstanceFile.decode_instance(payloads["instance"])
    assert feasibility_parameter(inst) == 1


def test_planted_feasibility(seeds):
    for seed in seeds:
        spec = GeneratorSpec("fully_feasible_planted", seed=seed, m=4, n=6, d=2)
        inst = InstanceFile.decode_instance(Generator.generate(spec)["instance"])
        assert inst.kind == InstanceKind.Unrelated
        assert len(inst.machines_for(0)) == 2


def test_uniform_speeds_within_ratio(seeds):
    for seed in seeds:
        spec = GeneratorSpec("uniform_bounded_ratio", seed=seed, m=4, b=3)
        inst = InstanceFile.decode_instance(Generator.generate(spec)["instance"])
        assert max(inst.speeds) <= 3 * min(inst.speeds)
        assert all(s >= 1 for s in inst.speeds)


def test_graph_payloads():
    spec = GeneratorSpec("graph_balancing_random", m=4, edges=7)
    payloads = Generator.generate(spec)
    g = InstanceFile.decode_graph(payloads["graph"])
    td = InstanceFile.decode_decomposition(payloads["decomposition"])
    assert len(g.edges) == 7
    assert validate_decomposition(g, td) is None


def test_perturbation_keeps_old_ids(seeds):
    for seed in seeds:
        spec = GeneratorSpec(
            "reopt_perturbation", seed=seed, m=3, n=6, add_jobs=2, remove_jobs=1
        )
        reopt = InstanceFile.decode_reopt(Generator.generate(spec)["reopt"])
        assert reopt.new.n == 6 - 1 + 2
        assert set(reopt.job_ids_new[:5]) <= set(reopt.job_ids_old)
        assert reopt.job_ids_new[5:] == (6, 7)
        assert load_profile(reopt.old, reopt.sigma0).makespan > 0


def test_perturbation_machine_changes():
    spec = GeneratorSpec(
        "reopt_perturbation", m=3, n=4, add_machines=1, remove_machines=2
    )
    reopt = InstanceFile.decode_reopt(Generator.generate(spec)["reopt"])
    assert reopt.m == 2
    assert reopt.machine_map == (0, None, None)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="nonsense"),
        dict(family="restricted_random", m=0),
        dict(family="restricted_random", m=2, d=3),
        dict(family="uniform_bounded_ratio", b="1/2"),
        dict(family="graph_balancing_random", decomposition="star"),
        dict(family="reopt_perturbation", kind="unrelated"),
        dict(family="reopt_perturbation", m=2, remove_machines=2),
    ],
)
def test_invalid_knobs(kwargs):
    with pytest.raises(ValueError):
        GeneratorSpec(**kwargs)
