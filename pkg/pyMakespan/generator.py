"""Seeded instance generators with planted structure.

Every family draws from its own random.Random(seed), so the same GeneratorSpec
always produces the same payloads.
"""
import logging
import random
from fractions import Fraction
from typing import Dict, List, Optional

from .graphbalancing import (
    GraphBalancingInstance,
    TreeDecomposition,
    path_decomposition,
)
from .instance import INFEASIBLE, Assignment, Instance, InstanceKind
from .instancefile import InstanceFile
from .oracle import exact_makespan, within_cap
from .reopt import ReoptInput
from .reopt_identical import lpt_schedule
from .reopt_uniform import list_schedule

_LOGGER = logging.getLogger(__name__)


class GeneratorSpec:
    """Family name, seed and size knobs of one generated instance."""

    FAMILIES = (
        "fully_feasible_planted",
        "restricted_random",
        "uniform_bounded_ratio",
        "graph_balancing_random",
        "reopt_perturbation",
    )

    def __init__(
        self,
        family: str,
        seed: int = 0,
        m: int = 3,
        n: int = 6,
        p_max: int = 10,
        d: Optional[int] = None,
        b=2,
        edges: Optional[int] = None,
        decomposition: str = "path",
        kind: str = "identical",
        add_jobs: int = 1,
        remove_jobs: int = 1,
        add_machines: int = 0,
        remove_machines: int = 0,
    ) -> None:
        if family not in self.FAMILIES:
            raise ValueError("unknown family %r" % family)
        if m < 1 or n < 0 or p_max < 1:
            raise ValueError("need m >= 1, n >= 0 and p_max >= 1")
        if d is not None and not 1 <= d <= m:
            raise ValueError("d must lie in [1, %s], got %s" % (m, d))
        if Fraction(b) < 1:
            raise ValueError("speed ratio bound must be at least 1, got %s" % b)
        if decomposition not in ("single", "path"):
            raise ValueError("decomposition is 'single' or 'path'")
        if kind not in ("identical", "uniform"):
            raise ValueError("reopt kind is 'identical' or 'uniform'")
        if remove_machines >= m + add_machines:
            raise ValueError("at least one machine has to survive")
        self.family = family
        self.seed = seed
        self.m = m
        self.n = n
        self.p_max = p_max
        self.d = d if d is not None else m
        self.b = Fraction(b)
        self.edges = edges if edges is not None else n
        self.decomposition = decomposition
        self.kind = kind
        self.add_jobs = add_jobs
        self.remove_jobs = min(remove_jobs, n)
        self.add_machines = add_machines
        self.remove_machines = remove_machines

    def __repr__(self):
        return "<GeneratorSpec %s seed=%s m=%s n=%s>" % (
            self.family,
            self.seed,
            self.m,
            self.n,
        )


class Generator:
    """Build the payloads of a GeneratorSpec.

    generate() returns a dict that maps a payload name ("instance", "reopt",
    "graph", "decomposition") to its JSON data.
    """

    @staticmethod
    def generate(spec: GeneratorSpec) -> Dict[str, Dict]:
        rng = random.Random(spec.seed)
        build = getattr(Generator, spec.family)
        payloads = build(spec, rng)
        _LOGGER.debug("generated %s: %s", spec, sorted(payloads))
        return payloads

    @staticmethod
    def fully_feasible_planted(spec: GeneratorSpec, rng: random.Random) -> Dict:
        """Unrelated instance in which every finite entry is at most T_opt.

        A planted assignment fixes T_plant; job 0 then takes T_plant on d
        machines and is infeasible elsewhere, which forces T_opt >= T_plant
        and phi = d/m.
        """
        m, n = spec.m, spec.n
        if n == 0:
            inst = Instance.unrelated([[] for _ in range(m)])
            return {"instance": InstanceFile.encode_instance(inst)}
        planted = [rng.randrange(m) for _ in range(n)]
        p = [[0] * n for _ in range(m)]  # type: List[List[Optional[int]]]
        loads = [0] * m
        for j, i in enumerate(planted):
            p[i][j] = rng.randint(1, spec.p_max)
            loads[i] += p[i][j]
        t_plant = max(loads)
        for i in range(m):
            for j in range(n):
                if planted[j] != i:
                    p[i][j] = rng.randint(1, t_plant)
        anchor = set(rng.sample(range(m), spec.d))
        for i in range(m):
            p[i][0] = t_plant if i in anchor else INFEASIBLE
        return {"instance": InstanceFile.encode_instance(Instance.unrelated(p))}

    @staticmethod
    def restricted_random(spec: GeneratorSpec, rng: random.Random) -> Dict:
        sizes = [rng.randint(1, spec.p_max) for _ in range(spec.n)]
        machine_sets = [rng.sample(range(spec.m), spec.d) for _ in range(spec.n)]
        inst = Instance.restricted(sizes, machine_sets, spec.m)
        return {"instance": InstanceFile.encode_instance(inst)}

    @staticmethod
    def _speeds(spec: GeneratorSpec, rng: random.Random, count: int) -> List:
        # multiples of 1/4 in [1, b]
        top = int(spec.b * 4)
        return [Fraction(rng.randint(4, top), 4) for _ in range(count)]

    @staticmethod
    def uniform_bounded_ratio(spec: GeneratorSpec, rng: random.Random) -> Dict:
        base_times = [rng.randint(1, spec.p_max) for _ in range(spec.n)]
        inst = Instance.uniform(base_times, Generator._speeds(spec, rng, spec.m))
        return {"instance": InstanceFile.encode_instance(inst)}

    @staticmethod
    def graph_balancing_random(spec: GeneratorSpec, rng: random.Random) -> Dict:
        """Random multigraph on m vertices, loops included, with a decomposition."""
        edges = []
        for _ in range(spec.edges):
            u = rng.randrange(spec.m)
            v = u if rng.random() < 0.2 else rng.randrange(spec.m)
            edges.append((u, v, rng.randint(1, spec.p_max)))
        g = GraphBalancingInstance(spec.m, edges)
        if spec.decomposition == "single":
            td = TreeDecomposition([list(range(spec.m))], [])
        else:
            td = path_decomposition(g)
        return {
            "graph": InstanceFile.encode_graph(g),
            "decomposition": InstanceFile.encode_decomposition(td),
        }

    @staticmethod
    def _initial_schedule(inst: Instance) -> Assignment:
        if within_cap(inst):
            return exact_makespan(inst).witness
        if inst.kind == InstanceKind.Identical:
            return lpt_schedule(inst)
        return list_schedule(inst)

    @staticmethod
    def reopt_perturbation(spec: GeneratorSpec, rng: random.Random) -> Dict:
        """Old instance with a good schedule, then jobs and machines change.

        Old jobs keep their IDs and added jobs get fresh ones. Removed machines
        are the highest-indexed ones.
        """
        uniform = spec.kind == "uniform"
        sizes = [rng.randint(1, spec.p_max) for _ in range(spec.n)]
        old_speeds = Generator._speeds(spec, rng, spec.m) if uniform else None
        old = (
            Instance.uniform(sizes, old_speeds)
            if uniform
            else Instance.identical(spec.m, sizes)
        )
        sigma0 = Generator._initial_schedule(old)

        removed = set(rng.sample(range(spec.n), spec.remove_jobs))
        job_ids_new = [j for j in range(spec.n) if j not in removed]
        new_sizes = [sizes[j] for j in job_ids_new]
        for k in range(spec.add_jobs):
            job_ids_new.append(spec.n + k)
            new_sizes.append(rng.randint(1, spec.p_max))

        surviving = spec.m - spec.remove_machines
        machine_ids_new = list(range(surviving)) + [
            spec.m + k for k in range(spec.add_machines)
        ]
        m_new = len(machine_ids_new)
        if uniform:
            added = Generator._speeds(spec, rng, spec.add_machines)
            new = Instance.uniform(new_sizes, list(old_speeds[:surviving]) + added)
        else:
            new = Instance.identical(m_new, new_sizes)

        reopt = ReoptInput(
            old,
            new,
            sigma0,
            job_ids_old=list(range(spec.n)),
            job_ids_new=job_ids_new,
            speed_ratio_bound=spec.b if uniform else None,
            machine_map=[i if i < surviving else None for i in range(spec.m)],
        )
        return {"reopt": InstanceFile.encode_reopt(reopt)}
