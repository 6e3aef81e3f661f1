"""Admissibility of directed periodic graphs and (semi-)adapted vertex functions.

Every check is exact. Conditions quantified over all pairs of vertices are
evaluated for ``x`` among the cell representatives and ``y`` within distance
two of ``x``: farther pairs have no common neighbour, and periodicity
covers every other ``x``.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Sequence

from . import linalg
from .certificate import Certificate
from .graph_core import (
    GraphError,
    Orientation,
    PeriodicGraph,
    UnorientedEdgeError,
    VertexFunction,
    _vadd,
    _vneg,
    ball,
    fathers_and_sons,
    neighbors,
)


def _orientation(g: PeriodicGraph, o: Orientation | None) -> Orientation:
    o = o if o is not None else g.orientation
    if o is None:
        raise UnorientedEdgeError("graph has no orientation")
    o.require_complete(g)
    return o


def _pairs(g: PeriodicGraph, radius: int = 2):
    for x in g.representatives():
        for y in sorted(ball(g, x, radius), key=g.vertex_key):
            yield x, y


def common_neighbors(g: PeriodicGraph, x, y) -> list:
    ny = set(neighbors(g, y))
    return [z for z in neighbors(g, x) if z in ny]


# --- position functions and uniformity ---------------------------------


def _quotient_components(g: PeriodicGraph) -> list[list[int]]:
    adj = {i: set() for i in range(len(g.cell))}
    for u, v, _ in g.edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, comps = set(), []
    for start in range(len(g.cell)):
        if start in seen:
            continue
        comp, queue = [], deque([start])
        seen.add(start)
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j in sorted(adj[i]):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        comps.append(sorted(comp))
    return comps


def _tree_path(parent, v):
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]][0])
    return path[::-1]


def find_position_function(g: PeriodicGraph, o: Orientation | None = None) -> Certificate:
    """Search for Phi with Phi(father) + 1 == Phi(son) on every edge.

    Breadth-first propagation over the quotient graph fixes Phi at the
    tree instances; each non-tree edge closes a walk whose net translation
    ``s`` and index give one linear equation ``w . s = index`` for the slope.
    A position function exists iff the system is consistent.
    """
    o = _orientation(g, o)
    d = g.rank
    components = []
    failure = None
    all_eqs = []
    for comp in _quotient_components(g):
        root = comp[0]
        height = {root: 0}
        place = {root: (0,) * d}
        parent = {root: None}
        tree = set()
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for e in g.edges:
                u, v, t = e
                if e in tree or (u != i and v != i):
                    continue
                step = 1 if o.sons[e] else -1
                # walk the edge away from i
                if u == i and v not in height:
                    height[v], place[v], parent[v] = height[u] + step, _vadd(place[u], t), (u, e)
                elif v == i and u not in height:
                    height[u], place[u], parent[u] = height[v] - step, _vadd(place[v], _vneg(t)), (v, e)
                else:
                    continue
                tree.add(e)
                queue.append(u if v == i else v)
        eqs = []
        for e in g.edges:
            u, v, t = e
            if e in tree or u not in height:
                continue
            step = 1 if o.sons[e] else -1
            s = tuple(a - b for a, b in zip(_vadd(place[u], t), place[v]))
            index = height[u] + step - height[v]
            eqs.append({"edge": e, "translation": s, "index": index})
        bad = next((q for q in eqs if not any(q["translation"]) and q["index"] != 0), None)
        if bad is not None and failure is None:
            u, v, t = bad["edge"]
            pu = _tree_path(parent, u)
            pv = _tree_path(parent, v)
            walk = [(g.cell[k], place[k]) for k in pu] + [(g.cell[k], place[k]) for k in reversed(pv)]
            failure = {"reason": "closed walk with nonzero index",
                       "edge": (g.cell[u], g.cell[v], t), "cycle": walk, "index": bad["index"]}
        slope = None
        if bad is None:
            slope, witness = _solve_slope([q for q in eqs if any(q["translation"])], d)
            if slope is None and failure is None:
                failure = dict(witness, reason="cycle translations force contradictory slopes")
                failure["edges"] = [(g.cell[e[0]], g.cell[e[1]], e[2]) for e in witness["edges"]]
        components.append({"cells": [g.cell[i] for i in comp], "height": height, "place": place, "slope": slope})
        all_eqs.extend(q for q in eqs if any(q["translation"]))

    if failure is not None:
        return Certificate("position_function", False, witness=failure)

    joint, _ = _solve_slope(all_eqs, d)
    flags = []
    if joint is None:
        flags.append("component-slopes-differ")
        phi = None
    else:
        offsets = {}
        for comp in components:
            for i_lab in comp["cells"]:
                i = g.index(i_lab)
                offsets[i_lab] = Fraction(comp["height"][i]) - sum((w * p for w, p in zip(joint, comp["place"][i])), Fraction(0))
        phi = VertexFunction(offsets, tuple(joint))
        if any(v.denominator != 1 for v in offsets.values()) or any(w.denominator != 1 for w in joint):
            flags.append("rational-values")
    if len(components) > 1:
        flags.append("disconnected-quotient")
    data = {"phi": phi,
            "components": [{"cells": c["cells"], "slope": c["slope"]} for c in components]}
    return Certificate("position_function", True, data=data, flags=flags)


def _solve_slope(eqs: list[dict], d: int):
    """Solve ``w . s_k = index_k``; free coordinates set to 0."""
    if not eqs:
        return tuple(Fraction(0) for _ in range(d)), None
    rows = [list(q["translation"]) + [q["index"]] for q in eqs]
    m, pivots = linalg.rref(rows, d + 1)
    if d in pivots:
        # inconsistent: a rational combination of cycles has zero translation but nonzero index
        left = linalg.nullspace([[q["translation"][j] for q in eqs] for j in range(d)], len(eqs))
        for c in left:
            total = sum((ck * q["index"] for ck, q in zip(c, eqs)), Fraction(0))
            if total:
                denom = 1
                for ck in c:
                    denom = denom * ck.re.denominator // _gcd(denom, ck.re.denominator)
                mult = [int(ck.re * denom) for ck in c]
                used = [(q["edge"], k) for q, k in zip(eqs, mult) if k]
                return None, {"edges": [e for e, _ in used], "multiplicities": [k for _, k in used],
                              "index": sum(k * q["index"] for q, k in zip(eqs, mult))}
        return None, {"edges": [], "multiplicities": [], "index": None}
    w = [Fraction(0)] * d
    for r, pc in enumerate(pivots):
        w[pc] = m[r][d].re
    return tuple(w), None


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def check_position_function(g: PeriodicGraph, phi: VertexFunction, o: Orientation | None = None) -> Certificate:
    """Independent re-check of Phi(father) + 1 == Phi(son) on every edge class."""
    o = _orientation(g, o)
    for e in g.edges:
        u, v, t = e
        x, y = (g.cell[u], (0,) * g.rank), (g.cell[v], t)
        father, son = (x, y) if o.sons[e] else (y, x)
        if phi(father) + 1 != phi(son):
            return Certificate("position_function_recheck", False,
                               witness={"father": father, "son": son, "phi_father": phi(father), "phi_son": phi(son)})
    return Certificate("position_function_recheck", True)


def common_parent_counts(g: PeriodicGraph, x, y, o: Orientation | None = None) -> tuple[int, int]:
    """(#common fathers, #common sons) of x and y."""
    fx, sx = fathers_and_sons(g, x, o)
    fy, sy = fathers_and_sons(g, y, o)
    return len(set(fx) & set(fy)), len(set(sx) & set(sy))


def check_uniform(g: PeriodicGraph, o: Orientation | None = None) -> Certificate:
    o = _orientation(g, o)
    checked = 0
    for x, y in _pairs(g):
        nf, ns = common_parent_counts(g, x, y, o)
        checked += 1
        if nf != ns:
            return Certificate("uniform", False, witness={"x": x, "y": y, "common_fathers": nf, "common_sons": ns})
    return Certificate("uniform", True, data={"pairs_checked": checked})


def check_admissible(g: PeriodicGraph, o: Orientation | None = None) -> Certificate:
    pos = find_position_function(g, o)
    if not pos:
        return Certificate("admissible", False, witness={"failed": "position_function", **pos.witness},
                           data={"position_function": pos})
    uni = check_uniform(g, o)
    if not uni:
        return Certificate("admissible", False, witness={"failed": "uniform", **uni.witness},
                           data={"position_function": pos, "uniform": uni})
    return Certificate("admissible", True, data={"phi": pos.data["phi"], "position_function": pos, "uniform": uni},
                       flags=list(pos.flags))


# --- adapted functions ---------------------------------------------------


def semi_sum(g: PeriodicGraph, phi: VertexFunction, x, y) -> Fraction:
    px, py = phi(x), phi(y)
    return sum((2 * phi(z) - px - py for z in common_neighbors(g, x, y)), Fraction(0))


def full_sum(g: PeriodicGraph, phi: VertexFunction, x, y) -> Fraction:
    px, py = phi(x), phi(y)
    total = Fraction(0)
    for z in common_neighbors(g, x, y):
        pz = phi(z)
        total += (pz - px) * (pz - py) * (2 * pz - px - py)
    return total


def _check_sums(g: PeriodicGraph, phi: VertexFunction, full: bool) -> Certificate:
    phi.check_domain(g)
    name = "adapted" if full else "semi_adapted"
    bound = phi.edge_bound(g)
    flags = ["degenerate"] if phi.is_constant(g) else []
    checked = 0
    for x, y in _pairs(g):
        common = common_neighbors(g, x, y)
        if not common:
            continue
        checked += 1
        s = semi_sum(g, phi, x, y)
        if s:
            return Certificate(name, False, witness={"condition": "semi", "x": x, "y": y, "common": common, "sum": s},
                               data={"c": bound})
        if full:
            f = full_sum(g, phi, x, y)
            if f:
                return Certificate(name, False, witness={"condition": "full", "x": x, "y": y, "common": common, "sum": f},
                                   data={"c": bound})
    return Certificate(name, True, data={"c": bound, "pairs_checked": checked}, flags=flags)


def check_semi_adapted(g: PeriodicGraph, phi: VertexFunction) -> Certificate:
    """Bounded differences along edges (reported as ``c``) plus the linear pair condition."""
    return _check_sums(g, phi, full=False)


def check_adapted(g: PeriodicGraph, phi: VertexFunction) -> Certificate:
    """Semi-adapted plus the cubic pair condition. Constant Phi is flagged degenerate."""
    return _check_sums(g, phi, full=True)


def semi_adapted_system(g: PeriodicGraph) -> list[list[Fraction]]:
    """One linear equation in the vertex values per unordered pair with common neighbours."""
    if g.rank != 0:
        raise GraphError("the semi-adapted solver needs a finite graph (rank 0)")
    n = len(g.cell)
    rows = []
    for i in range(n):
        for j in range(i, n):
            x, y = g.origin(g.cell[i]), g.origin(g.cell[j])
            common = common_neighbors(g, x, y)
            if not common:
                continue
            row = [Fraction(0)] * n
            for z in common:
                row[g.index(z[0])] += 2
            row[i] -= len(common)
            row[j] -= len(common)
            rows.append(row)
    return rows


def solve_semi_adapted(g: PeriodicGraph) -> list[VertexFunction]:
    """Basis of all semi-adapted functions on a finite graph (exact nullspace)."""
    rows = semi_adapted_system(g)
    basis = linalg.nullspace(rows, len(g.cell))
    out = []
    for vec in basis:
        if any(not c.is_real() for c in vec):
            raise ArithmeticError("rational system produced a non-real basis vector")
        out.append(VertexFunction({lab: c.re for lab, c in zip(g.cell, vec)}, ()))
    return out


def filter_adapted(g: PeriodicGraph, candidates: Sequence[VertexFunction]) -> list[VertexFunction]:
    if g.rank != 0:
        raise GraphError("filter_adapted works on finite graphs (rank 0)")
    return [phi for phi in candidates if check_adapted(g, phi)]
