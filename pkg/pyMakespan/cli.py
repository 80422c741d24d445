"""pyMakespan cli tool."""
import logging
import os
import sys
from contextlib import contextmanager
from fractions import Fraction

import click

from pyMakespan import (
    ALGORITHMS,
    BudgetExceeded,
    Generator,
    GeneratorSpec,
    InfeasiblePairAssigned,
    InstanceFile,
    InvalidInstance,
    KindMismatch,
    OracleMode,
    RunOptions,
    Runner,
    SchedulingException,
)
from pyMakespan.lp import DEFAULT_MAX_BITS
from pyMakespan.milp import DEFAULT_K_CAP
from pyMakespan.reopt_identical import DEFAULT_CONFIG_CAP
from pyMakespan.runner import EXIT_BUDGET, EXIT_INPUT_ERROR, EXIT_VIOLATION

pass_options = click.make_pass_decorator(RunOptions)


class FractionType(click.ParamType):
    """Exact rational option such as 1/2 or 0.25."""

    name = "fraction"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            self.fail("%r is not a rational number" % value, param, ctx)


FRACTION = FractionType()


@contextmanager
def exit_codes():
    """Map library errors onto the documented exit codes."""
    try:
        yield
    except BudgetExceeded as ex:
        click.echo(click.style("budget exceeded: %s" % ex, fg="red"), err=True)
        sys.exit(EXIT_BUDGET)
    except (InvalidInstance, KindMismatch, InfeasiblePairAssigned, ValueError) as ex:
        click.echo(click.style("input error: %s" % ex, fg="red"), err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except SchedulingException as ex:
        click.echo(click.style("check failed: %s" % ex, fg="red"), err=True)
        sys.exit(EXIT_VIOLATION)


def emit(reports, out) -> int:
    """Write JSON lines and the table; return the worst exit code."""
    lines = [report.to_json() for report in reports]
    if out:
        with open(out, "w") as f:
            f.write("".join(line + "\n" for line in lines))
    else:
        for line in lines:
            click.echo(line)
    header = "%-9s %-12s %10s %7s %s" % (
        "algorithm",
        "digest",
        "makespan",
        "checks",
        "status",
    )
    click.echo(click.style(header, bold=True))
    for report in reports:
        click.echo(
            click.style(report.table_row(), fg="green" if report.passed else "red")
        )
    return max((report.exit_code for report in reports), default=0)


@click.group()
@click.option("--debug/--normal", default=False)
@click.option(
    "--eps",
    envvar="PYMAKESPAN_EPS",
    type=FRACTION,
    default="1/2",
    help="Accuracy of the approximation schemes.",
)
@click.option(
    "--b",
    "b",
    envvar="PYMAKESPAN_B",
    type=FRACTION,
    default=None,
    help="Speed ratio bound for uniform reoptimization.",
)
@click.option("--k-cap", envvar="PYMAKESPAN_K_CAP", type=int, default=DEFAULT_K_CAP)
@click.option(
    "--config-cap", envvar="PYMAKESPAN_CONFIG_CAP", type=int, default=DEFAULT_CONFIG_CAP
)
@click.option(
    "--oracle",
    envvar="PYMAKESPAN_ORACLE",
    type=click.Choice([mode.value for mode in OracleMode]),
    default="auto",
    help="Compare against exact optima: always, never or when m^n is small.",
)
@click.option(
    "--max-bits",
    envvar="PYMAKESPAN_MAX_BITS",
    type=int,
    default=DEFAULT_MAX_BITS,
    help="Bit bound on the exact LP solver entries.",
)
@click.option("--timing", is_flag=True, help="Add wall times to the reports.")
@click.pass_context
def cli(ctx, debug, eps, b, k_cap, config_cap, oracle, max_bits, timing):
    """A cli tool for makespan scheduling algorithms and their bounds."""
    if debug:
        logging.basicConfig(level=logging.DEBUG)
    else:
        logging.basicConfig(level=logging.INFO)

    ctx.obj = RunOptions(
        eps=eps,
        b=b,
        k_cap=k_cap,
        config_cap=config_cap,
        oracle=OracleMode(oracle),
        max_bits=max_bits,
        timing=timing,
    )


@cli.command()
@click.argument("family", type=click.Choice(GeneratorSpec.FAMILIES))
@click.option("--seed", default=0, type=int)
@click.option("--m", "m", default=3, type=int)
@click.option("--n", "n", default=6, type=int)
@click.option("--p-max", default=10, type=int)
@click.option("--d", "d", default=None, type=int)
@click.option("--b", "b", default="2", type=FRACTION)
@click.option("--edges", default=None, type=int)
@click.option("--decomposition", default="path", type=click.Choice(["single", "path"]))
@click.option(
    "--kind", default="identical", type=click.Choice(["identical", "uniform"])
)
@click.option("--add-jobs", default=1, type=int)
@click.option("--remove-jobs", default=1, type=int)
@click.option("--add-machines", default=0, type=int)
@click.option("--remove-machines", default=0, type=int)
@click.option("--out", default=".", type=click.Path(file_okay=False))
def generate(family, seed, out, **knobs):
    """Generate instance files for a family and seed."""
    with exit_codes():
        payloads = Generator.generate(GeneratorSpec(family, seed=seed, **knobs))
        os.makedirs(out, exist_ok=True)
        for name, data in sorted(payloads.items()):
            path = os.path.join(out, "%s-%s-%s.json" % (family, seed, name))
            InstanceFile.dump(path, data)
            click.echo(path)


@cli.command()
@click.argument("algorithm", type=click.Choice(ALGORITHMS))
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--decomposition",
    type=click.Path(exists=True, dir_okay=False),
    help="Tree decomposition file, required for gb.",
)
@click.option("--out", default=None, help="Write JSON lines here.")
@pass_options
def run(options, algorithm, path, decomposition, out):
    """Run ALGORITHM on the file at PATH and check its bounds."""
    with exit_codes():
        data = InstanceFile.load(path)
        if algorithm == "gb":
            if decomposition is None:
                raise ValueError("gb needs --decomposition")
            payloads = {
                "graph": data,
                "decomposition": InstanceFile.load(decomposition),
            }
        elif algorithm.startswith("reopt"):
            payloads = {"reopt": data}
        else:
            payloads = {"instance": data}
        report = Runner.run(algorithm, payloads, options)
    sys.exit(emit([report], out))


@cli.command()
@click.argument("instance", type=click.Path(exists=True, dir_okay=False))
@click.argument("assignment", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, help="Write JSON lines here.")
@pass_options
def verify(options, instance, assignment, out):
    """Recompute the loads of a stored ASSIGNMENT for INSTANCE."""
    with exit_codes():
        data = InstanceFile.load(instance)
        inst = InstanceFile.decode_instance(data)
        a = InstanceFile.load(assignment, InstanceFile.decode_assignment)
        report = Runner.verify(inst, a, options, InstanceFile.digest(data))
    click.echo(click.style("== Loads ==", bold=True))
    for i, load in enumerate(report.details["loads"]):
        click.echo("machine %s: %s" % (i, load))
    sys.exit(emit([report], out))


@cli.command()
@click.option("--seeds", default=5, type=int, help="Number of seeds to run.")
@click.option("--seed-start", default=0, type=int)
@click.option("--jobs", default=1, type=int, help="Parallel runs.")
@click.option(
    "--algorithm",
    "algorithms",
    multiple=True,
    type=click.Choice(ALGORITHMS),
    help="Restrict the suite, may be repeated.",
)
@click.option("--out", default=None, help="Write JSON lines here.")
@pass_options
def suite(options, seeds, seed_start, jobs, algorithms, out):
    """Run every algorithm on generated instances over a seed range."""
    with exit_codes():
        reports = Runner.suite(
            range(seed_start, seed_start + seeds),
            options,
            jobs=jobs,
            algorithms=algorithms or ALGORITHMS,
        )
    sys.exit(emit(reports, out))


if __name__ == "__main__":
    cli()
