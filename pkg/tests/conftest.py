import json
from importlib import resources

import pytest

from weakconj.graph_core import load_graph, load_vertex_function
from weakconj.groupconv import load_character, load_measure

CORPUS = resources.files("weakconj") / "corpus"


def corpus_path(name: str) -> str:
    return str(CORPUS / name)


def corpus_json(name: str):
    return json.loads((CORPUS / name).read_text())


def graph(name: str):
    return load_graph(corpus_json(name + ".json"))


def vfun(name: str):
    return load_vertex_function(corpus_json(name + ".json"))


def measure(name: str):
    return load_measure(corpus_json(name + ".json"))


def character(name: str):
    return load_character(corpus_json(name + ".json"))


@pytest.fixture
def z():
    return graph("z_lattice")


@pytest.fixture
def z2():
    return graph("z2_lattice")


@pytest.fixture
def bc2():
    return graph("bc2_chain")


@pytest.fixture
def k3():
    return graph("k3")


@pytest.fixture
def p3():
    return graph("p3")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
