"""Exact linear algebra over Q and Q(i): row reduction, rank, nullspace, polynomial gcd.

Matrices are plain lists of rows. Entries may be ``int``, ``Fraction`` or
:class:`~weakconj.gaussq.GaussQ`; everything is promoted to ``GaussQ``.
"""

from __future__ import annotations

from typing import Sequence

from .gaussq import GaussQ, ONE, ZERO


def _promote(rows):
    return [[GaussQ.coerce(x) for x in row] for row in rows]


def _independent_rows(rows, ncols: int) -> list[list[GaussQ]]:
    """Echelon basis of the row space, built one sparse row at a time.

    Tall systems (many more equations than unknowns) are the common case for
    the vertex-pair conditions, and most of their rows are dependent.
    """
    basis: dict[int, dict[int, GaussQ]] = {}
    for row in rows:
        v = {j: GaussQ.coerce(x) for j, x in enumerate(row) if x}
        for pc in sorted(basis):
            f = v.get(pc)
            if not f:
                continue
            for j, b in basis[pc].items():
                c = v.get(j, ZERO) - f * b
                if c:
                    v[j] = c
                else:
                    v.pop(j, None)
        if not v:
            continue
        lead = min(v)
        inv = v[lead].inverse()
        basis[lead] = {j: x * inv for j, x in v.items()}
        if len(basis) == ncols:
            break
    return [[basis[pc].get(j, ZERO) for j in range(ncols)] for pc in sorted(basis)]


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form. Returns ``(matrix, pivot_columns)``."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if len(rows) > ncols:
        m = _independent_rows(rows, ncols)
    else:
        m = _promote(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[GaussQ]]:
    """Basis of ``{v : rows @ v = 0}``, one vector per free column."""
    if not rows:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    m, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * ncols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fc]
        basis.append(v)
    return basis


def same_span(a: Sequence[Sequence], b: Sequence[Sequence], ncols: int) -> bool:
    """True when two lists of vectors span the same subspace."""
    ra = rank(a, ncols) if a else 0
    rb = rank(b, ncols) if b else 0
    if ra != rb:
        return False
    both = list(a) + list(b)
    return (rank(both, ncols) if both else 0) == ra


# univariate polynomials: coefficient lists, lowest degree first, no trailing zeros

def poly_trim(p: list) -> list:
    p = [GaussQ.coerce(c) for c in p]
    while p and not p[-1]:
        p.pop()
    return p


def poly_divmod(a: list, b: list):
    a, b = poly_trim(a), poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [ZERO] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lead_inv = b[-1].inverse()
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        f = r[-1] * lead_inv
        q[k] = f
        for i, c in enumerate(b):
            r[k + i] = r[k + i] - f * c
        r = poly_trim(r)
    return poly_trim(q), r


def poly_monic(p: list) -> list:
    p = poly_trim(p)
    if not p:
        return p
    inv = p[-1].inverse()
    return [c * inv for c in p]


def poly_gcd(a: list, b: list) -> list:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return poly_monic(a)


def poly_eval(p: list, x):
    acc = ZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def root_multiplicity(p: list, x) -> int:
    """Multiplicity of ``x`` as a root of ``p`` (0 if not a root)."""
    p = poly_trim(p)
    if not p:
        raise ValueError("the zero polynomial has every root")
    x = GaussQ.coerce(x)
    k = 0
    while True:
        q, r = poly_divmod(p, [-x, ONE])
        if r:
            return k
        p = q
        k += 1
