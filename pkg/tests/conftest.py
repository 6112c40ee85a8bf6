import pytest

from metafold import kernels
from metafold.core import TMG, Connection, Edge, Target, TypeRegistry, make_dtmg

REG = TypeRegistry({"A": [], "B": "A", "C": "A", "D": []})


def binary(eid, t="A", a="A", b="A"):
    return Edge(eid, t, (Target(1, a), Target(2, b)))


def chain(n, reg=REG, prefix="E"):
    """n binary edges E0 -> E1 -> ... as a DTMG from E0.1 to E{n-1}.2."""
    ids = [f"{prefix}{i}" for i in range(n)]
    g = TMG(reg, [binary(i) for i in ids],
            [Connection(ids[i], 2, ids[i + 1], 1) for i in range(n - 1)])
    return make_dtmg(g, [(ids[0], 1)], [(ids[-1], 2)])


@pytest.fixture
def reg():
    return REG


@pytest.fixture(params=["python", "cython"])
def backend(request, monkeypatch):
    """Run a test against each kernel implementation that is available."""
    if request.param == "cython" and kernels.compiled is None:
        pytest.skip("compiled kernels not built")
    if request.param == "python":
        monkeypatch.setattr(kernels, "compiled", None)
    return request.param


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: the nine acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
