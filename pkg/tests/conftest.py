from __future__ import annotations

import re

import pytest

from malrel import load_corpus, make_algebra

CORPUS = {a.name: a for a in load_corpus()}
TRIVIAL = make_algebra("trivial", 1, [("f", 2, [0])])
CHAIN3 = make_algebra("chain3", 3, [("meet", 2, [min(a, b) for a in range(3) for b in range(3)])])


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


@pytest.fixture(scope="session")
def z2():
    return CORPUS["z2"]


@pytest.fixture(scope="session")
def z3():
    return CORPUS["z3"]


@pytest.fixture(scope="session")
def sl2():
    return CORPUS["semilattice2"]


@pytest.fixture(scope="session")
def sl3():
    return CORPUS["semilattice3"]


@pytest.fixture(scope="session")
def lat2():
    return CORPUS["lattice2"]


# one PASS/FAIL line per acceptance criterion at the end of the run

_CRITERIA: dict[int, list[str]] = {}
_TITLES = {
    1: "exact Mal'cev recovery",
    2: "modulo-closure positive case",
    3: "route equivalence consistency",
    4: "consequence soundness sweep",
    5: "triple pointwise square operators",
    6: "closure-algebra laws",
    7: "free-algebra sizes",
    8: "homomorphism-property gate",
}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        num = int(m.group(1))
        _CRITERIA.setdefault(num, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        ok = all(o == "passed" for o in _CRITERIA[num])
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  ({_TITLES.get(num, '')})")
