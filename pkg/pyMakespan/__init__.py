"""
This module provides makespan scheduling algorithms for unrelated, restricted,
identical and uniform machines, together with exact oracles that check their
proven bounds.

Instances are built through the `Instance` class and scheduled with one of the
algorithm entry points::

    inst = Instance.restricted([3, 2, 2], [[0], [0, 1], [1]], m=2)
    sigma = schedule_restricted(inst)
    print(load_profile(inst, sigma).makespan)

All arithmetic is exact. Module-specific errors are raised as subclasses of
`SchedulingException` and are expected to be handled by the user of the library.
"""
# flake8: noqa
from .instance import (
    INFEASIBLE,
    Assignment,
    BudgetExceeded,
    InfeasiblePairAssigned,
    Instance,
    InstanceKind,
    InvalidInstance,
    KindMismatch,
    SchedulingException,
    feasibility_parameter,
    load_profile,
    phi_at,
)
from .lp import minimal_TL
from .unrelated import schedule_fully_feasible
from .restricted import balance_restricted, schedule_restricted
from .milp import minimal_T_for_scheme, solve_milp_scheme
from .graphbalancing import (
    GraphBalancingInstance,
    InvalidDecomposition,
    TreeDecomposition,
    balance,
    path_decomposition,
)
from .reopt import ReoptInput, transition_cost
from .reopt_identical import reoptimize_identical
from .reopt_uniform import reoptimize_uniform
from .oracle import exact_makespan, exact_orientation, exact_reopt
from .instancefile import InstanceFile
from .generator import Generator, GeneratorSpec
from .runner import ALGORITHMS, OracleMode, RunOptions, RunReport, Runner
