"""Finite and Z^d-periodic simple graphs.

A periodic graph is a finite cell of vertex labels plus translation-tagged
edges. The edge ``(u, v, t)`` joins every vertex instance ``(u, n)`` to
``(v, n + t)``. A vertex instance is the pair ``(label, n)`` with ``n`` an
integer tuple of length ``rank``; ``rank == 0`` is an ordinary finite graph.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .gaussq import format_rational, parse_rational

Vertex = tuple  # (label, translation tuple)
Edge = tuple  # (u index, v index, translation tuple)


class GraphError(ValueError):
    """Malformed graph document or violated graph invariant."""


class UnorientedEdgeError(GraphError):
    pass


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vneg(a):
    return tuple(-x for x in a)


@dataclass(frozen=True)
class Orientation:
    """Direction tag per canonical edge.

    ``sons[e]`` is True when the ``v``-side of ``e = (u, v, t)`` is a son of the
    ``u``-side, False when it is the father. Missing edges are unoriented.
    """

    sons: Mapping[Edge, bool]

    def is_complete(self, g: "PeriodicGraph") -> bool:
        return all(e in self.sons for e in g.edges)

    def require_complete(self, g: "PeriodicGraph"):
        missing = [e for e in g.edges if e not in self.sons]
        if missing:
            u, v, t = missing[0]
            raise UnorientedEdgeError(f"edge ({g.cell[u]}, {g.cell[v]}, {list(t)}) carries no orientation")


@dataclass(frozen=True)
class PeriodicGraph:
    rank: int
    cell: tuple
    edges: tuple
    orientation: Orientation | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(set(self.cell)) != len(self.cell):
            raise GraphError("duplicate cell labels")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.cell)})
        inc: list[list[tuple[int, tuple]]] = [[] for _ in self.cell]
        for u, v, t in self.edges:
            inc[u].append((v, t))
            inc[v].append((u, _vneg(t)))
        object.__setattr__(self, "_incident", tuple(tuple(x) for x in inc))

    # --- construction -------------------------------------------------

    @classmethod
    def build(cls, rank: int, cell: Sequence, edges: Iterable, orientation_tags: Mapping | None = None) -> "PeriodicGraph":
        """Validate and canonicalise ``(u_label, v_label, t[, tag])`` edges.

        ``tag`` is ``"son"`` (v-side is son of u-side), ``"father"`` or None.
        """
        cell = tuple(cell)
        if rank < 0:
            raise GraphError("rank must be >= 0")
        index = {lab: i for i, lab in enumerate(cell)}
        if len(index) != len(cell):
            raise GraphError("duplicate cell labels")
        seen: dict = {}
        tags: dict = {}
        any_tag = False
        for raw in edges:
            if len(raw) not in (3, 4):
                raise GraphError(f"edge must be [u, v, t] or [u, v, t, tag]: {raw!r}")
            ul, vl, t = raw[0], raw[1], raw[2]
            tag = raw[3] if len(raw) == 4 else None
            if ul not in index or vl not in index:
                raise GraphError(f"edge {raw!r} references a vertex outside the cell")
            if not isinstance(t, (list, tuple)) or len(t) != rank or not all(isinstance(x, int) and not isinstance(x, bool) for x in t):
                raise GraphError(f"edge {raw!r}: translation must be {rank} integers")
            if tag not in (None, "son", "father"):
                raise GraphError(f"edge {raw!r}: orientation tag must be 'son', 'father' or null")
            u, v, t = index[ul], index[vl], tuple(t)
            if u == v and not any(t):
                raise GraphError(f"loop edge ({ul}, {vl}, {list(t)}) is not allowed")
            e, flipped = canonical_edge(u, v, t)
            if e in seen:
                raise GraphError(f"duplicate edge ({ul}, {vl}, {list(t)})")
            seen[e] = True
            if tag is not None:
                any_tag = True
                son = tag == "son"
                tags[e] = (not son) if flipped else son
        if orientation_tags:
            for e, son in orientation_tags.items():
                tags[e] = son
            any_tag = True
        orientation = Orientation(tags) if any_tag else None
        return cls(rank, cell, tuple(sorted(seen)), orientation)

    def with_orientation(self, orientation: Orientation | None) -> "PeriodicGraph":
        return PeriodicGraph(self.rank, self.cell, self.edges, orientation)

    # --- basic queries ------------------------------------------------

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise GraphError(f"unknown cell vertex {label!r}") from None

    def origin(self, label) -> Vertex:
        return (label, (0,) * self.rank)

    def representatives(self) -> list[Vertex]:
        return [self.origin(lab) for lab in self.cell]

    def degree_of_cell_vertex(self, label) -> int:
        return len(self._incident[self.index(label)])

    @property
    def degree(self) -> int:
        """deg(X): max number of neighbours, attained on the cell by periodicity."""
        return max((len(x) for x in self._incident), default=0)

    def vertex_key(self, x: Vertex):
        """Deterministic sort key for vertex instances."""
        return (self.index(x[0]), tuple(x[1]))

    def _check_vertex(self, x: Vertex):
        lab, n = x
        self.index(lab)
        if len(n) != self.rank:
            raise GraphError(f"vertex {x!r} has translation of wrong length")

    def incident(self, label) -> tuple:
        return self._incident[self.index(label)]

    def to_json(self) -> dict:
        edges = []
        for e in self.edges:
            u, v, t = e
            tag = None
            if self.orientation is not None and e in self.orientation.sons:
                tag = "son" if self.orientation.sons[e] else "father"
            edges.append([self.cell[u], self.cell[v], list(t), tag])
        return {"rank": self.rank, "cell": list(self.cell), "edges": edges}


def canonical_edge(u: int, v: int, t: tuple) -> tuple[Edge, bool]:
    """Lexicographically smaller of ``(u, v, t)`` and its mirror ``(v, u, -t)``.

    The flag tells whether the mirror was chosen.
    """
    a = (u, v, tuple(t))
    b = (v, u, _vneg(t))
    return (a, False) if a <= b else (b, True)


def load_graph(document) -> PeriodicGraph:
    """Parse the graph JSON format (string, bytes or already-decoded dict)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphError(f"parse error: {exc}") from exc
    if not isinstance(document, dict):
        raise GraphError("graph document must be a JSON object")
    try:
        rank = document["rank"]
        cell = document["cell"]
        edges = document["edges"]
    except KeyError as exc:
        raise GraphError(f"missing field {exc.args[0]!r}") from None
    if not isinstance(rank, int) or isinstance(rank, bool):
        raise GraphError("rank must be an integer")
    if not isinstance(cell, list) or not cell:
        raise GraphError("cell must be a non-empty list of labels")
    if not isinstance(edges, list):
        raise GraphError("edges must be a list")
    return PeriodicGraph.build(rank, cell, edges)


def neighbors(g: PeriodicGraph, x: Vertex) -> list[Vertex]:
    """N(x), sorted deterministically."""
    g._check_vertex(x)
    lab, n = x
    out = {(g.cell[w], _vadd(n, t)) for w, t in g.incident(lab)}
    return sorted(out, key=g.vertex_key)


def fathers_and_sons(g: PeriodicGraph, x: Vertex, o: Orientation | None = None) -> tuple[list[Vertex], list[Vertex]]:
    """``(N^-(x), N^+(x))`` under the orientation ``o`` (default: the graph's)."""
    o = o if o is not None else g.orientation
    if o is None:
        raise UnorientedEdgeError("graph has no orientation")
    g._check_vertex(x)
    lab, n = x
    i = g.index(lab)
    fathers, sons = set(), set()
    for e in g.edges:
        u, v, t = e
        if u != i and v != i:
            continue
        if e not in o.sons:
            raise UnorientedEdgeError(f"edge ({g.cell[u]}, {g.cell[v]}, {list(t)}) carries no orientation")
        v_is_son = o.sons[e]
        if u == i:
            y = (g.cell[v], _vadd(n, t))
            (sons if v_is_son else fathers).add(y)
        if v == i:
            y = (g.cell[u], _vadd(n, _vneg(t)))
            (fathers if v_is_son else sons).add(y)
    key = g.vertex_key
    return sorted(fathers, key=key), sorted(sons, key=key)


def distances(g: PeriodicGraph, center: Vertex, radius: int) -> dict:
    """Path distance from ``center`` for every vertex within ``radius`` (BFS order)."""
    if radius < 0:
        raise GraphError("radius must be >= 0")
    g._check_vertex(center)
    center = (center[0], tuple(center[1]))
    dist = {center: 0}
    queue = deque([center])
    while queue:
        x = queue.popleft()
        if dist[x] == radius:
            continue
        for y in neighbors(g, x):
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def ball(g: PeriodicGraph, center: Vertex, radius: int) -> list[Vertex]:
    """Vertex instances within path distance ``radius``, in BFS order."""
    return list(distances(g, center, radius))


@dataclass(frozen=True)
class VertexFunction:
    """Affine vertex function ``phi(v, n) = offsets[v] + slope . n`` with exact rationals."""

    offsets: Mapping
    slope: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "offsets", {k: Fraction(v) for k, v in self.offsets.items()})
        object.__setattr__(self, "slope", tuple(Fraction(s) for s in self.slope))

    def __call__(self, x: Vertex) -> Fraction:
        lab, n = x
        return self.offsets[lab] + sum((w * k for w, k in zip(self.slope, n)), Fraction(0))

    def scaled(self, lam, shift=0) -> "VertexFunction":
        lam, shift = Fraction(lam), Fraction(shift)
        return VertexFunction({k: lam * v + shift for k, v in self.offsets.items()}, tuple(lam * s for s in self.slope))

    def is_constant(self, g: PeriodicGraph) -> bool:
        return not any(self.slope) and len({self.offsets[lab] for lab in g.cell}) <= 1

    def check_domain(self, g: PeriodicGraph):
        missing = [lab for lab in g.cell if lab not in self.offsets]
        if missing:
            raise GraphError(f"vertex function has no offset for {missing[0]!r}")
        if len(self.slope) != g.rank:
            raise GraphError(f"vertex function slope has length {len(self.slope)}, graph rank is {g.rank}")

    def edge_bound(self, g: PeriodicGraph) -> Fraction:
        """max |phi(x) - phi(y)| over edges; finitely many values by periodicity."""
        best = Fraction(0)
        for u, v, t in g.edges:
            diff = self.offsets[g.cell[v]] + sum((w * k for w, k in zip(self.slope, t)), Fraction(0)) - self.offsets[g.cell[u]]
            best = max(best, abs(diff))
        return best

    def to_json(self) -> dict:
        return {"offsets": {k: format_rational(v) for k, v in self.offsets.items()},
                "slope": [format_rational(s) for s in self.slope]}

    @classmethod
    def constant(cls, g: PeriodicGraph, c=0) -> "VertexFunction":
        return cls({lab: c for lab in g.cell}, (0,) * g.rank)

    @classmethod
    def position(cls, g: PeriodicGraph, direction: int = 0) -> "VertexFunction":
        """phi(v, n) = n[direction]."""
        slope = [0] * g.rank
        slope[direction] = 1
        return cls({lab: 0 for lab in g.cell}, tuple(slope))


def load_vertex_function(document) -> VertexFunction:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GraphError(f"parse error: {exc}") from exc
    if not isinstance(document, dict) or "offsets" not in document:
        raise GraphError("vertex function document needs an 'offsets' object")
    try:
        offsets = {k: parse_rational(v) for k, v in document["offsets"].items()}
        slope = tuple(parse_rational(s) for s in document.get("slope", []))
    except ValueError as exc:
        raise GraphError(str(exc)) from exc
    return VertexFunction(offsets, slope)
