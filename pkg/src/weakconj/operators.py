"""Local operators on finitely supported vectors, exactly.

H is the adjacency operator, K = i[H, Phi] has kernel
``K(x, y) = i (Phi(y) - Phi(x))`` on edges, and A = (Phi K + K Phi) / 2.
Identities such as [H, K] = 0 and i[H, A] = K^2 are verified on delta
vectors at the cell representatives; the operators are periodic and have
finite propagation, so this settles them on all of l^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .certificate import Certificate
from .certify import check_semi_adapted
from .gaussq import GaussQ, I, ONE, ZERO
from .graph_core import (
    GraphError,
    Orientation,
    PeriodicGraph,
    VertexFunction,
    ball,
    distances,
    fathers_and_sons,
    neighbors,
)


class FinVector:
    """Finitely supported vector with Gaussian-rational entries; zeros are not stored."""

    __slots__ = ("data",)

    def __init__(self, data: Mapping | None = None):
        clean = {}
        for x, c in (data or {}).items():
            c = GaussQ.coerce(c)
            if c:
                clean[(x[0], tuple(x[1]))] = c
        self.data = clean

    @classmethod
    def delta(cls, x, c=1) -> "FinVector":
        return cls({x: c})

    def support(self):
        return list(self.data)

    def __getitem__(self, x):
        return self.data.get((x[0], tuple(x[1])), ZERO)

    def __add__(self, other: "FinVector") -> "FinVector":
        out = dict(self.data)
        for x, c in other.data.items():
            out[x] = out.get(x, ZERO) + c
        return FinVector(out)

    def __neg__(self):
        return FinVector({x: -c for x, c in self.data.items()})

    def __sub__(self, other: "FinVector") -> "FinVector":
        return self + (-other)

    def __mul__(self, c) -> "FinVector":
        c = GaussQ.coerce(c)
        return FinVector({x: v * c for x, v in self.data.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FinVector):
            return NotImplemented
        return self.data == other.data

    def __bool__(self):
        return bool(self.data)

    def inner(self, other: "FinVector") -> GaussQ:
        """<self, other>, antilinear in the first slot."""
        return sum((c.conjugate() * other[x] for x, c in self.data.items()), ZERO)

    def norm2(self) -> Fraction:
        return sum((c.norm2() for c in self.data.values()), Fraction(0))

    def items(self, g: PeriodicGraph | None = None):
        if g is None:
            return sorted(self.data.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))
        return sorted(self.data.items(), key=lambda kv: g.vertex_key(kv[0]))

    def to_json(self):
        return [{"vertex": [x[0], list(x[1])], "value": c} for x, c in self.items()]

    def __repr__(self):
        return "FinVector(" + ", ".join(f"{x}: {c}" for x, c in self.items()) + ")"


@dataclass(frozen=True)
class LocalOperator:
    """Operator given by its kernel columns.

    ``column(y)`` lists the ``(x, k(x, y))`` with ``k(x, y) != 0``; all of them
    lie within ``radius`` of ``y``.
    """

    column: Callable
    radius: int
    selfadjoint: bool = False
    name: str = ""

    def __call__(self, f: FinVector) -> FinVector:
        out: dict = {}
        for y, fy in f.data.items():
            for x, k in self.column(y):
                out[x] = out.get(x, ZERO) + k * fy
        return FinVector(out)

    def kernel(self, x, y) -> GaussQ:
        x = (x[0], tuple(x[1]))
        return next((k for z, k in self.column(y) if z == x), ZERO)


def adjacency_op(g: PeriodicGraph) -> LocalOperator:
    return LocalOperator(lambda y: [(x, ONE) for x in neighbors(g, y)], 1, True, "H")


def multiplication_op(g: PeriodicGraph, phi: VertexFunction) -> LocalOperator:
    phi.check_domain(g)
    return LocalOperator(lambda y: [((y[0], tuple(y[1])), GaussQ(phi(y)))], 0, True, "Phi")


def k_op(g: PeriodicGraph, phi: VertexFunction) -> LocalOperator:
    phi.check_domain(g)

    def column(y):
        py = phi(y)
        return [(x, GaussQ(0, py - phi(x))) for x in neighbors(g, y) if py != phi(x)]

    return LocalOperator(column, 1, True, "K")


def a_op(g: PeriodicGraph, phi: VertexFunction) -> LocalOperator:
    """A as a kernel: ``A(x, y) = (Phi(x) + Phi(y)) K(x, y) / 2``."""
    phi.check_domain(g)

    def column(y):
        py = phi(y)
        out = []
        for x in neighbors(g, y):
            px = phi(x)
            if px != py:
                out.append((x, GaussQ(0, (py - px) * (px + py) / 2)))
        return out

    return LocalOperator(column, 1, True, "A")


def apply_H(g: PeriodicGraph, f: FinVector) -> FinVector:
    return adjacency_op(g)(f)


def apply_K(g: PeriodicGraph, phi: VertexFunction, f: FinVector) -> FinVector:
    return k_op(g, phi)(f)


def apply_A(g: PeriodicGraph, phi: VertexFunction, f: FinVector) -> FinVector:
    mult, K = multiplication_op(g, phi), k_op(g, phi)
    return (mult(K(f)) + K(mult(f))) * Fraction(1, 2)


def _support_within(g: PeriodicGraph, f: FinVector, center, radius: int) -> bool:
    near = set(ball(g, center, radius))
    return all(x in near for x in f.data)


def verify_HK_commute(g: PeriodicGraph, phi: VertexFunction, radius: int = 4) -> Certificate:
    """(HK - KH) delta_x == 0 for every cell representative x."""
    if radius < 2:
        raise ValueError("radius must be >= 2")
    H, K = adjacency_op(g), k_op(g, phi)
    for x in g.representatives():
        d = FinVector.delta(x)
        res = H(K(d)) - K(H(d))
        if not _support_within(g, res, x, radius):
            raise AssertionError("commutator residual escaped the computation ball")
        if res:
            return Certificate("HK_commute", False, witness={"x": x, "residual": res})
    return Certificate("HK_commute", True, data={"representatives": len(g.cell), "radius": radius})


def verify_B_equals_K2(g: PeriodicGraph, phi: VertexFunction, radius: int = 4) -> Certificate:
    """i(HA - AH) delta_x == K(K delta_x) for every cell representative x."""
    if radius < 2:
        raise ValueError("radius must be >= 2")
    H, K = adjacency_op(g), k_op(g, phi)
    A = lambda f: apply_A(g, phi, f)  # noqa: E731
    for x in g.representatives():
        d = FinVector.delta(x)
        lhs = (H(A(d)) - A(H(d))) * I
        rhs = K(K(d))
        if not (_support_within(g, lhs, x, radius) and _support_within(g, rhs, x, radius)):
            raise AssertionError("commutator residual escaped the computation ball")
        if lhs != rhs:
            return Certificate("B_equals_K2", False, witness={"x": x, "i[H,A]delta": lhs, "K^2delta": rhs})
    return Certificate("B_equals_K2", True, data={"representatives": len(g.cell), "radius": radius})


def _near_support(g: PeriodicGraph, f: FinVector) -> list:
    xs = set()
    for y in f.data:
        xs.update(ball(g, y, 1))
    return sorted(xs, key=g.vertex_key)


def father_son_sums(g: PeriodicGraph, f: FinVector, x, o: Orientation | None = None) -> tuple[GaussQ, GaussQ]:
    fathers, sons = fathers_and_sons(g, x, o)
    return sum((f[y] for y in fathers), ZERO), sum((f[y] for y in sons), ZERO)


def kernel_H_membership(g: PeriodicGraph, o: Orientation | None, f: FinVector) -> Certificate:
    """Sum of f over the fathers and over the sons of every x vanishes."""
    xs = _near_support(g, f)
    for x in xs:
        fs, ss = father_son_sums(g, f, x, o)
        if fs or ss:
            return Certificate("kernel_H", False, witness={"x": x, "father_sum": fs, "son_sum": ss})
    return Certificate("kernel_H", True, data={"vertices_checked": len(xs)})


def kernel_K_membership(g: PeriodicGraph, phi: VertexFunction, f: FinVector) -> Certificate:
    """sum_{y~x} Phi(y) f(y) == Phi(x) sum_{y~x} f(y) for every x."""
    xs = _near_support(g, f)
    for x in xs:
        nb = neighbors(g, x)
        lhs = sum((f[y] * phi(y) for y in nb), ZERO)
        rhs = sum((f[y] for y in nb), ZERO) * phi(x)
        if lhs != rhs:
            return Certificate("kernel_K", False, witness={"x": x, "lhs": lhs, "rhs": rhs})
    return Certificate("kernel_K", True, data={"vertices_checked": len(xs)})


def truncate(op: LocalOperator, vertices: list) -> np.ndarray:
    """Dense float matrix ``M[i, j] = k(v_i, v_j)`` restricted to ``vertices``."""
    if not op.selfadjoint:
        raise ValueError("truncate expects a selfadjoint operator")
    pos = {(x[0], tuple(x[1])): i for i, x in enumerate(vertices)}
    n = len(vertices)
    M = np.zeros((n, n), dtype=complex)
    for j, y in enumerate(vertices):
        for x, k in op.column(y):
            i = pos.get(x)
            if i is not None:
                M[i, j] = complex(k)
    return M


def virial_check(g: PeriodicGraph, phi: VertexFunction, tol: float = 1e-9, require_semi_adapted: bool = True) -> Certificate:
    """Every eigenvector f of H on a finite graph satisfies ||K f|| <= tol ||f||."""
    if g.rank != 0:
        raise GraphError("virial_check needs a finite graph (rank 0)")
    if require_semi_adapted:
        semi = check_semi_adapted(g, phi)
        if not semi:
            raise ValueError(f"vertex function is not semi-adapted: {semi.witness}")
    verts = g.representatives()
    H = truncate(adjacency_op(g), verts)
    K = truncate(k_op(g, phi), verts)
    evals, evecs = np.linalg.eigh(H)
    worst, worst_j = 0.0, None
    for j in range(len(evals)):
        f = evecs[:, j]
        ratio = float(np.linalg.norm(K @ f) / np.linalg.norm(f))
        if ratio > worst:
            worst, worst_j = ratio, j
    data = {"eigenvalues": evals, "max_ratio": worst, "tol": tol}
    if worst > tol:
        return Certificate("virial", False, witness={"eigenvalue": float(evals[worst_j]), "ratio": worst,
                                                     "eigenvector": evecs[:, worst_j].real}, data=data)
    return Certificate("virial", True, data=data)
