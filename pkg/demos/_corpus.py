"""Small loader shared by the demo scripts."""

import json
from importlib import resources

from weakconj.graph_core import load_graph, load_vertex_function
from weakconj.groupconv import load_character, load_measure

CORPUS = resources.files("weakconj") / "corpus"


def _read(name):
    return json.loads((CORPUS / f"{name}.json").read_text())


def graph(name):
    return load_graph(_read(name))


def vfun(name):
    return load_vertex_function(_read(name))


def measure(name):
    return load_measure(_read(name))


def character(name):
    return load_character(_read(name))
