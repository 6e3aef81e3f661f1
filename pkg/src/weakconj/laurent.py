"""Laurent polynomials in torus variables and matrices of them.

A monomial ``z^t`` (``t`` an integer vector) stands for ``exp(i t.theta)`` on the
torus, so ``|z_j| = 1`` and the torus adjoint of ``z^t`` is ``z^-t``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gaussq import GaussQ, ONE, ZERO
from . import linalg

Exps = tuple


class LaurentPoly:
    """Finite sum of monomials ``c_t z^t`` with Gaussian-rational coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exps, object] | None = None):
        self.nvars = nvars
        clean = {}
        for t, c in (terms or {}).items():
            t = tuple(int(x) for x in t)
            if len(t) != nvars:
                raise ValueError(f"exponent {t} has wrong length for {nvars} variables")
            c = GaussQ.coerce(c)
            if c:
                clean[t] = clean.get(t, ZERO) + c
                if not clean[t]:
                    del clean[t]
        self.terms = clean

    @classmethod
    def constant(cls, nvars: int, c=1) -> "LaurentPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1) -> "LaurentPoly":
        return cls(len(exps), {tuple(exps): c})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, t: Sequence[int]) -> GaussQ:
        return self.terms.get(tuple(t), ZERO)

    def _check(self, other: "LaurentPoly"):
        if other.nvars != self.nvars:
            raise ValueError("Laurent polynomials live in different variable sets")

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, ZERO) + c
        return LaurentPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.nvars, {t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            c = GaussQ.coerce(other)
            return LaurentPoly(self.nvars, {t: a * c for t, a in self.terms.items()})
        self._check(other)
        out: dict = {}
        for t1, c1 in self.terms.items():
            for t2, c2 in other.terms.items():
                t = tuple(a + b for a, b in zip(t1, t2))
                out[t] = out.get(t, ZERO) + c1 * c2
        return LaurentPoly(self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def torus_adjoint(self) -> "LaurentPoly":
        """Pointwise complex conjugate on the torus: ``c_t z^t -> conj(c_t) z^-t``."""
        return LaurentPoly(self.nvars, {tuple(-x for x in t): c.conjugate() for t, c in self.terms.items()})

    def theta_derivative(self, w: Sequence) -> "LaurentPoly":
        """``d/ds p(theta + s w)`` at ``s = 0``: each ``z^t`` picks up ``i (w.t)``."""
        out = {}
        for t, c in self.terms.items():
            wt = sum((GaussQ.coerce(wi) * ti for wi, ti in zip(w, t)), ZERO)
            out[t] = GaussQ(0, 1) * wt * c
        return LaurentPoly(self.nvars, out)

    def evaluate(self, z: Sequence) -> GaussQ:
        """Exact evaluation at a point of ``(Q(i)^*)^d``."""
        z = [GaussQ.coerce(x) for x in z]
        acc = ZERO
        for t, c in self.terms.items():
            term = c
            for zj, tj in zip(z, t):
                term = term * (zj ** tj)
            acc = acc + term
        return acc

    def exponent_span(self) -> list[int]:
        """Per-variable max exponent minus min exponent."""
        if not self.terms:
            return [0] * self.nvars
        cols = list(zip(*self.terms))
        return [max(c) - min(c) for c in cols]

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for t in sorted(self.terms):
            c = self.terms[t]
            mono = "*".join(f"z{j}^{e}" for j, e in enumerate(t) if e)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


class LaurentMatrix:
    """Square matrix of Laurent polynomials in ``nvars`` torus variables."""

    def __init__(self, entries: Sequence[Sequence[LaurentPoly]], nvars: int):
        self.nvars = nvars
        self.size = len(entries)
        self.entries = [list(row) for row in entries]
        for row in self.entries:
            if len(row) != self.size:
                raise ValueError("LaurentMatrix must be square")
            for p in row:
                if p.nvars != nvars:
                    raise ValueError("entry has the wrong number of variables")

    @classmethod
    def zeros(cls, m: int, nvars: int) -> "LaurentMatrix":
        return cls([[LaurentPoly(nvars) for _ in range(m)] for _ in range(m)], nvars)

    @classmethod
    def identity(cls, m: int, nvars: int, c=1) -> "LaurentMatrix":
        return cls([[LaurentPoly.constant(nvars, c if p == q else 0) for q in range(m)] for p in range(m)], nvars)

    @classmethod
    def from_coefficients(cls, coeffs: Mapping[Exps, Sequence[Sequence]], m: int, nvars: int) -> "LaurentMatrix":
        """Build ``sum_t C_t z^t`` from exponent -> m x m coefficient matrices."""
        terms = [[{} for _ in range(m)] for _ in range(m)]
        for t, mat in coeffs.items():
            for p in range(m):
                for q in range(m):
                    if mat[p][q]:
                        terms[p][q][tuple(t)] = mat[p][q]
        return cls([[LaurentPoly(nvars, terms[p][q]) for q in range(m)] for p in range(m)], nvars)

    def __getitem__(self, pq):
        p, q = pq
        return self.entries[p][q]

    def __eq__(self, other):
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.nvars == other.nvars and self.entries == other.entries

    def __add__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)], self.nvars)

    def __sub__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)], self.nvars)

    def __mul__(self, other):
        if isinstance(other, LaurentMatrix):
            if other.size != self.size:
                raise ValueError("size mismatch")
            m = self.size
            out = []
            for p in range(m):
                row = []
                for q in range(m):
                    acc = LaurentPoly(self.nvars)
                    for k in range(m):
                        a, b = self.entries[p][k], other.entries[k][q]
                        if a.terms and b.terms:
                            acc = acc + a * b
                    row.append(acc)
                out.append(row)
            return LaurentMatrix(out, self.nvars)
        return LaurentMatrix([[a * other for a in row] for row in self.entries], self.nvars)

    __rmul__ = __mul__

    def shift(self, lam) -> "LaurentMatrix":
        """``M - lam * I``."""
        return self - LaurentMatrix.identity(self.size, self.nvars, lam)

    def adjoint(self) -> "LaurentMatrix":
        """Hermitian adjoint on the torus."""
        m = self.size
        return LaurentMatrix([[self.entries[q][p].torus_adjoint() for q in range(m)] for p in range(m)], self.nvars)

    def is_hermitian(self) -> bool:
        """Coefficient criterion: ``c_t(p, q) == conj(c_{-t}(q, p))`` for all t, p, q."""
        return self == self.adjoint()

    def exponents(self) -> list[Exps]:
        return sorted({t for row in self.entries for p in row for t in p.terms})

    def coefficient_matrices(self) -> dict[Exps, list[list[GaussQ]]]:
        out = {}
        for t in self.exponents():
            out[t] = [[p.coefficient(t) for p in row] for row in self.entries]
        return out

    def exponent_span(self) -> list[int]:
        exps = self.exponents()
        if not exps:
            return [0] * self.nvars
        cols = list(zip(*exps))
        return [max(c) - min(c) for c in cols]

    def monomial_count(self) -> int:
        return sum(len(p.terms) for row in self.entries for p in row)

    def evaluate(self, z: Sequence) -> list[list[GaussQ]]:
        return [[p.evaluate(z) for p in row] for row in self.entries]

    def det(self) -> LaurentPoly:
        """Exact determinant by row-wise Laplace expansion memoised on column subsets.

        Division free, so it stays inside the Laurent ring; cost is O(2^m m)
        polynomial products.
        """
        m = self.size
        if m == 0:
            return LaurentPoly.constant(self.nvars, 1)
        layer = {0: LaurentPoly.constant(self.nvars, 1)}
        for k in range(m):
            nxt: dict[int, LaurentPoly] = {}
            row = self.entries[k]
            for mask, sub in layer.items():
                for j in range(m):
                    if mask >> j & 1 or row[j].is_zero():
                        continue
                    sign = -1 if bin(mask >> (j + 1)).count("1") % 2 else 1
                    term = row[j] * sub * sign
                    key = mask | (1 << j)
                    nxt[key] = nxt[key] + term if key in nxt else term
            layer = {k2: v for k2, v in nxt.items() if not v.is_zero()}
            if not layer:
                return LaurentPoly(self.nvars)
        return layer.get((1 << m) - 1, LaurentPoly(self.nvars))

    def charpoly(self) -> dict[Exps, list[GaussQ]]:
        """``det(lam I - M)`` grouped by torus monomial.

        Returns ``{t: [a_0, a_1, ...]}`` meaning ``sum_t z^t sum_k a_k lam^k``.
        """
        n = self.nvars
        m = self.size

        def lift(p: LaurentPoly) -> LaurentPoly:
            return LaurentPoly(n + 1, {t + (0,): c for t, c in p.terms.items()})

        lam = LaurentPoly(n + 1, {(0,) * n + (1,): 1})
        lifted = [[(lam if p == q else LaurentPoly(n + 1)) - lift(self.entries[p][q]) for q in range(m)] for p in range(m)]
        d = LaurentMatrix(lifted, n + 1).det()
        out: dict[Exps, list[GaussQ]] = {}
        for t, c in d.terms.items():
            zt, k = t[:n], t[n]
            coeffs = out.setdefault(zt, [])
            while len(coeffs) <= k:
                coeffs.append(ZERO)
            coeffs[k] = coeffs[k] + c
        return {t: linalg.poly_trim(v) for t, v in sorted(out.items())}

    def eval_grid(self, grid: int) -> np.ndarray:
        """Float evaluation at ``theta = 2 pi k / grid`` in every variable.

        Shape ``(grid**d, m, m)``, grid points in row-major order.
        """
        m, d = self.size, self.nvars
        npts = grid ** d if d else 1
        out = np.zeros((npts, m, m), dtype=complex)
        if d:
            axes = np.meshgrid(*[2 * np.pi * np.arange(grid) / grid] * d, indexing="ij")
            thetas = np.stack([a.ravel() for a in axes], axis=1)
        else:
            thetas = np.zeros((1, 0))
        for t, mat in self.coefficient_matrices().items():
            phase = np.exp(1j * (thetas @ np.asarray(t, dtype=float))) if d else np.ones(1)
            c = np.array([[complex(x) for x in row] for row in mat])
            out += phase[:, None, None] * c[None, :, :]
        return out

    def __repr__(self):
        return f"LaurentMatrix(size={self.size}, nvars={self.nvars}, entries={self.entries!r})"


def unit_circle_points(count: int) -> list[GaussQ]:
    """``count`` distinct exact points of Q(i) with modulus 1.

    Stereographic parametrisation ``((1 - s^2) + 2 s i) / (1 + s^2)`` at
    s = 0, 1, -1, 2, -2, ...; the map is injective so the points are distinct.
    """
    pts = []
    k = 0
    while len(pts) < count:
        for s in ((0,) if k == 0 else (k, -k)):
            d = 1 + s * s
            pts.append(GaussQ(Fraction(1 - s * s, d), Fraction(2 * s, d)))
        k += 1
    return pts[:count]


def generic_rank(M: LaurentMatrix, *more: LaurentMatrix, min_points: int | None = None) -> int:
    """Rank over the field of rational functions in the torus variables.

    Extra matrices are stacked below ``M`` (same column count). Evaluated
    exactly on a product grid of unit-circle points: every minor of a
    monomial multiple of the stack is a polynomial of degree at most
    ``m * span_j`` in variable j, so a grid with more points than that per
    variable cannot miss a nonvanishing minor.
    """
    mats = (M,) + more
    m, d = M.size, M.nvars
    if m == 0:
        return 0
    span = [max(s) for s in zip(*(A.exponent_span() for A in mats))] if d else []
    per_dim = [max(2 * m + 1, m * s + 1) for s in span]
    if min_points:
        per_dim = [max(p, min_points) for p in per_dim]
    axes = [unit_circle_points(p) for p in per_dim]
    best = 0
    for z in itertools.product(*axes):
        rows = [row for A in mats for row in A.evaluate(z)]
        best = max(best, linalg.rank(rows, m))
        if best == m:
            break
    return best


def generic_kernel_at(M: LaurentMatrix, z: Sequence) -> list[list[GaussQ]]:
    return linalg.nullspace(M.evaluate(z), M.size)


def constant_kernel(M: LaurentMatrix) -> list[list[GaussQ]]:
    """Basis of constant vectors ``v`` with ``M(z) v = 0`` identically in z."""
    rows = [row for mat in M.coefficient_matrices().values() for row in mat]
    return linalg.nullspace(rows, M.size)


def stack_rows(mats: Iterable[Sequence[Sequence]]) -> list:
    return [row for mat in mats for row in mat]
