import glob
import os
from os.path import basename

import pytest

from pyMakespan import InstanceFile

FIXTURES = sorted(
    glob.glob(os.path.dirname(os.path.abspath(__file__)) + "/fixtures/*.json")
)

MATRIX_KINDS = {"unrelated", "restricted", "identical"}
ALL_KINDS = MATRIX_KINDS | {"uniform"}


def filter_kind(kinds):
    return [f for f in FIXTURES if basename(f).split("-")[0] in kinds]


def filter_name(prefix):
    return [f for f in FIXTURES if basename(f).startswith(prefix)]


any_instance = pytest.mark.parametrize("inst", filter_kind(ALL_KINDS), indirect=True)
matrix = pytest.mark.parametrize("inst", filter_kind(MATRIX_KINDS), indirect=True)
small_matrix = pytest.mark.parametrize(
    "inst",
    [f for f in filter_kind(MATRIX_KINDS) if "planted" not in basename(f)],
    indirect=True,
)
restricted = pytest.mark.parametrize(
    "inst", filter_kind({"restricted", "identical"}), indirect=True
)
graphs = pytest.mark.parametrize("graph", filter_name("graph-"), indirect=True)
reopt_identical = pytest.mark.parametrize(
    "reopt", filter_name("reopt-identical"), indirect=True
)
reopt_uniform = pytest.mark.parametrize(
    "reopt", filter_name("reopt-uniform"), indirect=True
)

DEFAULT_CORPUS = 20

# eps values the approximation schemes are exercised with
scheme_eps = pytest.mark.parametrize("eps", ["1/4", "1/2", "1"])


@pytest.fixture
def inst(request):
    return InstanceFile.load(request.param, InstanceFile.decode_instance)


@pytest.fixture
def reopt(request):
    return InstanceFile.load(request.param, InstanceFile.decode_reopt)


@pytest.fixture
def graph(request):
    """Graph fixture with the decomposition stored next to it."""
    g = InstanceFile.load(request.param, InstanceFile.decode_graph)
    name = basename(request.param)[len("graph-"):]
    path = os.path.join(os.path.dirname(request.param), "decomposition-" + name)
    td = InstanceFile.load(path, InstanceFile.decode_decomposition)
    return g, td


@pytest.fixture
def seeds(request):
    """Seeds of a property test: its corpus size, raised by --seed-count."""
    marker = request.node.get_closest_marker("corpus")
    count = marker.args[0] if marker else DEFAULT_CORPUS
    return range(max(count, request.config.getoption("--seed-count")))


def pytest_addoption(parser):
    parser.addoption(
        "--seed-count",
        action="store",
        type=int,
        default=0,
        help="least number of generated instances per property test",
    )


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "corpus(count): generated instances a property test draws"
    )
