import json
import os
from fractions import Fraction

import pytest
from voluptuous import Any, Optional, Required, Schema

from pyMakespan import (
    INFEASIBLE,
    Assignment,
    Instance,
    InstanceFile,
    KindMismatch,
    OracleMode,
    RunOptions,
    RunReport,
    Runner,
)
from pyMakespan.runner import EXIT_BUDGET, EXIT_PASS, EXIT_VIOLATION

FIXTURE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

Number = Any(int, str)

VERDICT_SCHEMA = Schema(
    {
        Required("name"): str,
        Required("value"): Number,
        Required("bound"): Number,
        Required("relation"): Any("<=", "=="),
        Required("passed"): bool,
    }
)

REPORT_SCHEMA = Schema(
    {
        Required("algorithm"): str,
        Required("digest"): str,
        Required("makespan"): Any(None, Number),
        Required("verdicts"): [VERDICT_SCHEMA],
        Required("oracle"): Any(None, dict),
        Required("details"): dict,
        Required("passed"): bool,
        Optional("error"): str,
        Optional("wall_time"): float,
    }
)


def payload(name):
    return InstanceFile.load(os.path.join(FIXTURE_DIR, name + ".json"))


def check_report(report):
    data = json.loads(report.to_json())
    REPORT_SCHEMA(data)
    return data


def test_a_um_on_planted_fixture():
    report = Runner.run("a_um", {"instance": payload("unrelated-planted-3x6")})
    data = check_report(report)
    assert report.passed
    assert report.exit_code == EXIT_PASS
    assert data["oracle"]["phi"] == 1
    assert [v["name"] for v in data["verdicts"]] == ["T_opt + L_opt/phi"]


def test_a_um_skips_unguarded_bound():
    inst = Instance.unrelated([[2, 2], [INFEASIBLE, 2]])
    report = Runner.run("a_um", {"instance": InstanceFile.encode_instance(inst)})
    data = check_report(report)
    assert data["oracle"]["phi"] == "1/2"
    assert data["oracle"]["L_opt/T_opt"] == 1
    assert data["verdicts"] == []
    assert data["details"] == {"unguarded": "phi < L_opt/T_opt"}


def test_a_res_on_fixture():
    report = Runner.run("a_res", {"instance": payload("restricted-3x5")})
    data = check_report(report)
    assert report.passed
    assert data["details"]["pushes"] <= 5
    assert "T_opt" in data["oracle"]


def test_a_res_rejects_unrelated():
    with pytest.raises(KindMismatch):
        Runner.run("a_res", {"instance": payload("unrelated-2x3")})


def test_fpt_on_fixture():
    report = Runner.run(
        "fpt", {"instance": payload("restricted-2x2")}, RunOptions(eps=1)
    )
    check_report(report)
    assert report.passed
    assert report.details["eps"] == 1


def test_gb_on_fixture():
    payloads = {
        "graph": payload("graph-path-loops"),
        "decomposition": payload("decomposition-path-loops"),
    }
    report = Runner.run("gb", payloads)
    data = check_report(report)
    assert report.passed
    assert data["details"] == {"width": 1}
    assert data["makespan"] == data["oracle"]["T_opt"]


def test_reopt_id_on_fixture():
    report = Runner.run("reopt_id", {"reopt": payload("reopt-identical-new-job")})
    data = check_report(report)
    assert report.passed
    assert data["details"]["cost"] == 1
    assert data["oracle"]["cost"] == 1


def test_reopt_un_on_fixture():
    report = Runner.run("reopt_un", {"reopt": payload("reopt-uniform-identity")})
    data = check_report(report)
    assert report.passed
    assert data["details"]["cost"] == 0
    assert data["makespan"] == 3


def test_oracle_off():
    options = RunOptions(oracle=OracleMode.Off)
    report = Runner.run("a_res", {"instance": payload("restricted-2x2")}, options)
    assert report.oracle is None
    assert "ratio" not in report.details


def test_missing_payload():
    with pytest.raises(ValueError):
        Runner.run("a_um", {"reopt": {}})
    with pytest.raises(ValueError):
        Runner.run("gb", {"graph": payload("graph-triangle")})


def test_unknown_algorithm():
    with pytest.raises(ValueError):
        Runner.run("simplex", {"instance": payload("unrelated-2x3")})


def test_verify():
    inst = Instance.identical(2, [3, 3, 2])
    report = Runner.verify(inst, Assignment([0, 1, 1]))
    data = check_report(report)
    assert data["makespan"] == 5
    assert data["details"] == {"loads": [3, 5], "avg_load": 4, "ratio": 1}
    assert data["oracle"] == {"T_opt": 5, "L_opt": 4}


def test_verify_reports_fractions():
    inst = Instance.uniform([3], [2])
    report = Runner.verify(inst, Assignment([0]), RunOptions(oracle="off"))
    assert check_report(report)["details"]["loads"] == ["3/2"]


def test_failed_verdict():
    report = RunReport("a_um", "0" * 64)
    assert report.check("bound", 5, 4).passed is False
    assert report.exit_code == EXIT_VIOLATION
    assert check_report(report)["passed"] is False


def test_error_report():
    report = RunReport("reopt_id", "0" * 64)
    report.error = "more than 1 configurations for 2 bins"
    data = check_report(report)
    assert report.exit_code == EXIT_BUDGET
    assert data["error"] == report.error
    assert not data["passed"]


def test_timing_adds_wall_time():
    instance = {"instance": payload("identical-3-3-2")}
    assert "wall_time" not in Runner.run("a_res", instance).to_dict()
    data = check_report(Runner.run("a_res", instance, RunOptions(timing=True)))
    assert data["wall_time"] >= 0


def test_options():
    options = RunOptions(eps="1/4", b=2, oracle="on")
    assert options.eps == Fraction(1, 4)
    assert options.oracle == OracleMode.On
    assert options.use_oracle(False)
    assert not RunOptions(oracle="off").use_oracle(True)


def test_suite_is_deterministic():
    algorithms = ("a_res", "gb", "reopt_id")
    serial = Runner.suite(range(3), algorithms=algorithms)
    pooled = Runner.suite(range(3), jobs=2, algorithms=algorithms)
    assert len(serial) == 9
    assert [r.to_json() for r in serial] == [r.to_json() for r in pooled]
    assert [r.algorithm for r in serial[:3]] == list(algorithms)


def test_suite_reports_budget_errors():
    reports = Runner.suite([0], RunOptions(config_cap=0), algorithms=("reopt_id",))
    assert reports[0].exit_code == EXIT_BUDGET
    assert "configurations" in reports[0].error
