"""Run an algorithm on a payload and check its proven bounds.

Every verdict is recomputed from the loads of the returned schedule in exact
arithmetic; oracle values are added when the instance is small enough.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .generator import Generator, GeneratorSpec
from .graphbalancing import DEFAULT_TABLE_CAP, balance
from .instance import (
    Assignment,
    BudgetExceeded,
    Instance,
    InstanceKind,
    feasibility_parameter,
    load_profile,
    phi_at,
    require_kind,
)
from .instancefile import InstanceFile
from .lp import DEFAULT_MAX_BITS
from .milp import DEFAULT_K_CAP, large_pairs, minimal_T_for_scheme
from .milp import solve_milp_scheme
from .oracle import (
    DEFAULT_ORACLE_CAP,
    DEFAULT_ORIENTATION_EDGES,
    exact_makespan,
    exact_orientation,
    exact_reopt,
    within_cap,
)
from .reopt import transition_cost
from .reopt_identical import DEFAULT_CONFIG_CAP, reoptimize_identical
from .reopt_uniform import reoptimize_uniform
from .restricted import balance_restricted, restricted_delta
from .restricted import restricted_ratio_guarantee
from .unrelated import schedule_fully_feasible

_LOGGER = logging.getLogger(__name__)

ALGORITHMS = ("a_um", "a_res", "fpt", "gb", "reopt_id", "reopt_un")

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET = 3


class OracleMode(Enum):
    On = "on"
    Off = "off"
    Auto = "auto"


def _num(value) -> Any:
    """JSON form of an exact number: int when integral, else "p/q"."""
    value = Fraction(value)
    return value.numerator if value.denominator == 1 else str(value)


class RunOptions:
    def __init__(
        self,
        eps=Fraction(1, 2),
        b=None,
        k_cap: int = DEFAULT_K_CAP,
        config_cap: int = DEFAULT_CONFIG_CAP,
        oracle: OracleMode = OracleMode.Auto,
        oracle_cap: int = DEFAULT_ORACLE_CAP,
        max_bits: int = DEFAULT_MAX_BITS,
        timing: bool = False,
    ) -> None:
        self.eps = Fraction(eps)
        self.b = Fraction(b) if b is not None else None
        self.k_cap = k_cap
        self.config_cap = config_cap
        self.oracle = OracleMode(oracle)
        self.oracle_cap = oracle_cap
        self.max_bits = max_bits
        self.timing = timing

    def use_oracle(self, small_enough: bool) -> bool:
        """Whether to consult the oracle; On fails with BudgetExceeded past the cap."""
        if self.oracle == OracleMode.Auto:
            return small_enough
        return self.oracle == OracleMode.On


class Verdict:
    """Comparison of a measured value against a bound."""

    def __init__(self, name: str, value, bound, relation: str = "<=") -> None:
        self.name = name
        self.value = value
        self.bound = bound
        self.relation = relation
        if relation == "<=":
            self.passed = value <= bound
        elif relation == "==":
            self.passed = value == bound
        else:
            raise ValueError("unknown relation %r" % relation)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "value": _num(self.value),
            "bound": _num(self.bound),
            "relation": self.relation,
            "passed": self.passed,
        }

    def __repr__(self):
        return "<Verdict %s %s %s %s: %s>" % (
            self.name,
            self.value,
            self.relation,
            self.bound,
            "pass" if self.passed else "FAIL",
        )


class RunReport:
    """Outcome of one algorithm run with its verdicts."""

    def __init__(self, algorithm: str, digest: str) -> None:
        self.algorithm = algorithm
        self.digest = digest
        self.makespan = None
        self.verdicts = []  # type: List[Verdict]
        self.oracle = None  # type: Optional[Dict[str, Any]]
        self.details = {}  # type: Dict[str, Any]
        self.wall_time = None  # type: Optional[float]
        self.error = None  # type: Optional[str]

    def check(self, name: str, value, bound, relation: str = "<=") -> Verdict:
        verdict = Verdict(name, value, bound, relation)
        if not verdict.passed:
            _LOGGER.warning("%s: %s", self.algorithm, verdict)
        self.verdicts.append(verdict)
        return verdict

    @property
    def passed(self) -> bool:
        return self.error is None and all(v.passed for v in self.verdicts)

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return EXIT_BUDGET
        return EXIT_PASS if self.passed else EXIT_VIOLATION

    def to_dict(self) -> Dict:
        data = {
            "algorithm": self.algorithm,
            "digest": self.digest,
            "makespan": _num(self.makespan) if self.makespan is not None else None,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "oracle": self.oracle,
            "details": self.details,
            "passed": self.passed,
        }  # type: Dict[str, Any]
        if self.error is not None:
            data["error"] = self.error
        if self.wall_time is not None:
            data["wall_time"] = round(self.wall_time, 6)
        return data

    def to_json(self) -> str:
        return InstanceFile.canonical(self.to_dict())

    def table_row(self) -> str:
        makespan = "-" if self.makespan is None else str(self.makespan)
        status = "error" if self.error else ("pass" if self.passed else "FAIL")
        return "%-9s %-12s %10s %3s/%-3s %s" % (
            self.algorithm,
            self.digest[:12],
            makespan,
            sum(1 for v in self.verdicts if v.passed),
            len(self.verdicts),
            status,
        )

    def __repr__(self):
        return "<RunReport %s %s>" % (self.algorithm, self.table_row())


class Runner:
    """Dispatch an algorithm name to its run method."""

    @staticmethod
    def run(
        algorithm: str, payloads: Dict[str, Dict], options: Optional[RunOptions] = None
    ) -> RunReport:
        """Run algorithm on the decoded payloads.

        :param payloads: "instance", "reopt" or "graph" plus "decomposition"
        :raises SchedulingException: on input or budget errors
        """
        if algorithm not in ALGORITHMS:
            raise ValueError("unknown algorithm %r" % algorithm)
        options = options or RunOptions()
        report = RunReport(algorithm, InstanceFile.digest(payloads))
        started = time.perf_counter()
        getattr(Runner, "_run_" + algorithm)(payloads, options, report)
        if options.timing:
            report.wall_time = time.perf_counter() - started
        _LOGGER.debug("%r", report)
        return report

    @staticmethod
    def _instance(payloads: Dict) -> Instance:
        try:
            return InstanceFile.decode_instance(payloads["instance"])
        except KeyError:
            raise ValueError("an instance payload is required") from None

    @staticmethod
    def _makespan_oracle(inst: Instance, options: RunOptions, report: RunReport):
        if not options.use_oracle(within_cap(inst, options.oracle_cap)):
            return None
        result = exact_makespan(inst, options.oracle_cap)
        report.oracle = {"T_opt": _num(result.T_opt), "L_opt": _num(result.L_opt)}
        return result

    @staticmethod
    def _run_a_um(payloads, options: RunOptions, report: RunReport) -> None:
        inst = Runner._instance(payloads)
        a = schedule_fully_feasible(inst, max_bits=options.max_bits)
        report.makespan = load_profile(inst, a).makespan
        oracle = Runner._makespan_oracle(inst, options, report)
        if oracle is not None and inst.n:
            phi = phi_at(inst, oracle.T_opt)
            guard = oracle.L_opt / oracle.T_opt if oracle.T_opt else Fraction(0)
            report.oracle["phi"] = _num(phi)
            report.oracle["L_opt/T_opt"] = _num(guard)
            if phi < guard:
                # the bound only holds when phi >= L/T
                report.details["unguarded"] = "phi < L_opt/T_opt"
                _LOGGER.info(
                    "phi %s below L_opt/T_opt %s, bound not checked", phi, guard
                )
                return
            report.check(
                "T_opt + L_opt/phi", report.makespan, oracle.T_opt + oracle.L_opt / phi
            )

    @staticmethod
    def _run_a_res(payloads, options: RunOptions, report: RunReport) -> None:
        inst = Runner._instance(payloads)
        require_kind(inst, InstanceKind.Restricted, InstanceKind.Identical)
        graph = balance_restricted(inst)
        report.makespan = load_profile(inst, Assignment(graph.sigma)).makespan
        report.details = {
            "delta": restricted_delta(inst),
            "phi": _num(feasibility_parameter(inst)),
            "pushes": graph.pushes,
        }
        report.check("overloaded machines", len(graph.partition().overloaded), 0, "==")
        report.check("pushes", graph.pushes, inst.n)
        if inst.n:
            l_opt = Fraction(sum(inst.sizes), inst.m)
            bound = inst.p_max + math.floor(l_opt / feasibility_parameter(inst))
            report.check("p_max + floor(L_opt/phi)", report.makespan, bound)
        oracle = Runner._makespan_oracle(inst, options, report)
        ratio = restricted_ratio_guarantee(inst)
        if oracle is not None and ratio is not None:
            report.details["ratio"] = _num(ratio)
            report.check("ratio * T_opt", report.makespan, ratio * oracle.T_opt)

    @staticmethod
    def _run_fpt(payloads, options: RunOptions, report: RunReport) -> None:
        inst = Runner._instance(payloads)
        eps = options.eps
        T = minimal_T_for_scheme(inst, eps, options.k_cap, options.max_bits)
        a = solve_milp_scheme(inst, eps, T, options.k_cap, options.max_bits)
        report.makespan = load_profile(inst, a).makespan
        report.details = {
            "T": T,
            "eps": _num(eps),
            "k": len(large_pairs(inst, eps, T)),
        }
        report.check("(1+eps) T", report.makespan, (1 + eps) * T)
        oracle = Runner._makespan_oracle(inst, options, report)
        if oracle is not None:
            report.check("(1+eps) T_opt", report.makespan, (1 + eps) * oracle.T_opt)

    @staticmethod
    def _run_gb(payloads, options: RunOptions, report: RunReport) -> None:
        try:
            g = InstanceFile.decode_graph(payloads["graph"])
            td = InstanceFile.decode_decomposition(payloads["decomposition"])
        except KeyError:
            raise ValueError("graph and decomposition payloads are required") from None
        heads, makespan = balance(g, td, DEFAULT_TABLE_CAP)
        report.makespan = makespan
        report.details = {"width": td.width}
        report.check(
            "reconstructed makespan", max(g.loads(heads), default=0), makespan, "=="
        )
        free = sum(1 for e in range(len(g.edges)) if not g.is_loop(e))
        if options.use_oracle(free <= DEFAULT_ORIENTATION_EDGES):
            optimum, _ = exact_orientation(g)
            report.oracle = {"T_opt": optimum}
            report.check("exact orientation", makespan, optimum, "==")

    @staticmethod
    def _run_reopt(payloads, options, report, solve) -> None:
        try:
            reopt = InstanceFile.decode_reopt(payloads["reopt"])
        except KeyError:
            raise ValueError("a reopt payload is required") from None
        a, cost = solve(reopt)
        inst = reopt.new
        report.makespan = load_profile(inst, a).makespan
        report.details = {"cost": cost, "eps": _num(options.eps)}
        report.check("cost recount", cost, transition_cost(reopt, a), "==")
        cap = options.oracle_cap
        if options.use_oracle(within_cap(inst, options.oracle_cap)):
            c_max = exact_makespan(inst, cap).T_opt
            least = exact_reopt(reopt, 1, cap).cost
            report.oracle = {"C_max": _num(c_max), "cost": least}
            report.check("(1+eps) C*max", report.makespan, (1 + options.eps) * c_max)
            report.check("optimal transition cost", cost, least)

    @staticmethod
    def _run_reopt_id(payloads, options: RunOptions, report: RunReport) -> None:
        Runner._run_reopt(
            payloads,
            options,
            report,
            lambda reopt: reoptimize_identical(reopt, options.eps, options.config_cap),
        )

    @staticmethod
    def _run_reopt_un(payloads, options: RunOptions, report: RunReport) -> None:
        Runner._run_reopt(
            payloads,
            options,
            report,
            lambda reopt: reoptimize_uniform(reopt, options.eps, options.b),
        )

    @staticmethod
    def verify(
        inst: Instance, a, options: Optional[RunOptions] = None, digest: str = ""
    ) -> RunReport:
        """Recompute the loads of a stored schedule, against the oracle if on.

        :raises InfeasiblePairAssigned: if the schedule does not fit inst
        """
        options = options or RunOptions()
        report = RunReport("verify", digest)
        profile = load_profile(inst, a)
        report.makespan = profile.makespan
        report.details = {
            "loads": [_num(x) for x in profile.load],
            "avg_load": _num(profile.avg_load),
        }
        oracle = Runner._makespan_oracle(inst, options, report)
        if oracle is not None:
            report.details["ratio"] = _num(
                Fraction(profile.makespan) / oracle.T_opt if oracle.T_opt else 1
            )
        return report

    SUITE_PLAN = (
        ("a_um", dict(family="fully_feasible_planted", m=3, n=6)),
        ("a_res", dict(family="restricted_random", m=3, n=8, d=2)),
        ("fpt", dict(family="fully_feasible_planted", m=2, n=4)),
        ("gb", dict(family="graph_balancing_random", m=4, edges=8)),
        ("reopt_id", dict(family="reopt_perturbation", m=3, n=6)),
        ("reopt_un", dict(family="reopt_perturbation", kind="uniform", m=2, n=4)),
    )  # type: Tuple[Tuple[str, Dict[str, Any]], ...]

    @staticmethod
    def suite(
        seeds: Sequence[int],
        options: Optional[RunOptions] = None,
        jobs: int = 1,
        algorithms: Sequence[str] = ALGORITHMS,
    ) -> List[RunReport]:
        """Run every algorithm on generated instances for every seed.

        Runs go through a thread pool; reports come back in plan order.
        """
        options = options or RunOptions()
        plan = [
            (algorithm, GeneratorSpec(seed=seed, **knobs))
            for seed in seeds
            for algorithm, knobs in Runner.SUITE_PLAN
            if algorithm in algorithms
        ]

        def execute(item: Tuple[str, GeneratorSpec]) -> RunReport:
            algorithm, spec = item
            payloads = Generator.generate(spec)
            try:
                return Runner.run(algorithm, payloads, options)
            except BudgetExceeded as ex:
                report = RunReport(algorithm, InstanceFile.digest(payloads))
                report.error = str(ex)
                return report

        if jobs <= 1:
            return [execute(item) for item in plan]
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(execute, plan))
