"""Convolution operators on Z^d and F x Z^d (F finite) with finitely supported measures.

Fourier convention: the mass ``mu(t)`` at ``t in Z^d`` contributes ``z^-t`` to
the symbol, so ``fiber(Phi mu) = i * d_w fiber(mu)`` for the character
``Phi(f, t) = w . t``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .bloch import band_samples, flat_band_polynomial
from .certificate import Certificate, encode
from .gaussq import GaussQ, ZERO, from_json as gauss_from_json, parse_rational
from .laurent import LaurentMatrix, LaurentPoly, constant_kernel, generic_rank, unit_circle_points


class GroupError(ValueError):
    pass


class HypothesisError(ValueError):
    """A theorem's hypothesis fails; ``witness`` names the violating data."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class DiscreteGroup:
    """``F x Z^d`` with F given by its multiplication table; Z^d is the case |F| = 1."""

    def __init__(self, table: Sequence[Sequence[int]], d: int, names: Sequence[str] | None = None):
        n = len(table)
        if n == 0 or any(len(row) != n for row in table):
            raise GroupError("multiplication table must be square and non-empty")
        if any(not (0 <= x < n) for row in table for x in row):
            raise GroupError("multiplication table entries out of range")
        self.table = [list(row) for row in table]
        self.d = d
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        if len(set(self.names)) != n:
            raise GroupError("element names must be distinct")
        ids = [e for e in range(n) if all(self.table[e][x] == x and self.table[x][e] == x for x in range(n))]
        if len(ids) != 1:
            raise GroupError("multiplication table has no two-sided identity")
        self.identity = ids[0]
        inv = []
        for x in range(n):
            ys = [y for y in range(n) if self.table[x][y] == self.identity and self.table[y][x] == self.identity]
            if len(ys) != 1:
                raise GroupError(f"element {self.names[x]} has no inverse")
            inv.append(ys[0])
        self.inverse_table = inv
        for a in range(n):
            for b in range(n):
                ab = self.table[a][b]
                for c in range(n):
                    if self.table[ab][c] != self.table[a][self.table[b][c]]:
                        raise GroupError(f"multiplication is not associative at ({self.names[a]}, {self.names[b]}, {self.names[c]})")

    @classmethod
    def zd(cls, d: int) -> "DiscreteGroup":
        return cls([[0]], d, ["e"])

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def is_zd(self) -> bool:
        return self.order == 1

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    def mul(self, x, y):
        return (self.table[x[0]][y[0]], tuple(a + b for a, b in zip(x[1], y[1])))

    def inv(self, x):
        return (self.inverse_table[x[0]], tuple(-a for a in x[1]))

    def element(self, name, t=None):
        t = tuple(t) if t is not None else (0,) * self.d
        if len(t) != self.d:
            raise GroupError(f"translation {t} does not have length {self.d}")
        try:
            return (self.names.index(name), t)
        except ValueError:
            raise GroupError(f"unknown element {name!r}") from None

    def conjugacy_classes(self) -> list[list[int]]:
        n, seen, out = self.order, set(), []
        for x in range(n):
            if x in seen:
                continue
            cls_ = sorted({self.table[self.table[g][x]][self.inverse_table[g]] for g in range(n)})
            seen.update(cls_)
            out.append(cls_)
        return out

    def class_of(self, names: Sequence[str]) -> list[int]:
        return [self.names.index(n) for n in names]

    def to_json(self) -> dict:
        if self.is_zd:
            return {"kind": "Zd", "d": self.d}
        return {"kind": "FxZd", "d": self.d, "names": self.names,
                "table": [[self.names[x] for x in row] for row in self.table]}


def symmetric_group_s3(d: int = 1) -> DiscreteGroup:
    """S_3 x Z^d with a = (0 1), b = (1 2); elements e, a, b, ab, ba, aba."""
    a, b = (1, 0, 2), (0, 2, 1)

    def compose(p, q):  # (p q)(i) = p(q(i))
        return tuple(p[q[i]] for i in range(3))

    words = {"e": (0, 1, 2), "a": a, "b": b, "ab": compose(a, b), "ba": compose(b, a), "aba": compose(compose(a, b), a)}
    names = list(words)
    perms = [words[n] for n in names]
    table = [[perms.index(compose(p, q)) for q in perms] for p in perms]
    return DiscreteGroup(table, d, names)


class Measure:
    """Finitely supported complex measure on a DiscreteGroup; zero masses are dropped."""

    def __init__(self, group: DiscreteGroup, data: Mapping | None = None):
        self.group = group
        clean = {}
        for (f, t), c in (data or {}).items():
            t = tuple(t)
            if len(t) != group.d or not (0 <= f < group.order):
                raise GroupError(f"support point {(f, t)} is not in the group")
            c = GaussQ.coerce(c)
            if c:
                key = (f, t)
                clean[key] = clean.get(key, ZERO) + c
                if not clean[key]:
                    del clean[key]
        self.data = clean

    @classmethod
    def delta(cls, group: DiscreteGroup, x, c=1) -> "Measure":
        return cls(group, {x: c})

    @classmethod
    def indicator(cls, group: DiscreteGroup, points) -> "Measure":
        return cls(group, {p: 1 for p in points})

    def support(self) -> list:
        return sorted(self.data)

    def __getitem__(self, x):
        return self.data.get((x[0], tuple(x[1])), ZERO)

    def __add__(self, other: "Measure") -> "Measure":
        out = dict(self.data)
        for x, c in other.data.items():
            out[x] = out.get(x, ZERO) + c
        return Measure(self.group, out)

    def __mul__(self, c) -> "Measure":
        return Measure(self.group, {x: v * GaussQ.coerce(c) for x, v in self.data.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return self.data == other.data

    def is_zero(self) -> bool:
        return not self.data

    def total_variation(self) -> float:
        return float(sum(abs(complex(c)) for c in self.data.values()))

    def is_selfadjoint(self) -> bool:
        return self == adjoint_measure(self.group, self)

    def to_json(self) -> dict:
        G = self.group
        supp = []
        for f, t in self.support():
            c = self.data[(f, t)]
            entry = {"t": list(t), **encode(c)}
            if not G.is_zd:
                entry = {"f": G.names[f], **entry}
            supp.append(entry)
        return {"group": G.to_json(), "support": supp}

    def __repr__(self):
        G = self.group
        return "Measure(" + ", ".join(f"({G.names[f]},{list(t)}): {c}" for (f, t), c in sorted(self.data.items())) + ")"


@dataclass(frozen=True)
class Character:
    """Real character ``Phi(f, t) = slope . t``; the finite part maps to 0."""

    slope: tuple

    def __post_init__(self):
        object.__setattr__(self, "slope", tuple(Fraction(s) for s in self.slope))

    def __call__(self, x) -> Fraction:
        return sum((w * k for w, k in zip(self.slope, x[1])), Fraction(0))

    def to_json(self):
        return {"slope": [str(s) for s in self.slope]}


# --- measure algebra ------------------------------------------------------


def convolve(G: DiscreteGroup, mu: Measure, nu: Measure) -> Measure:
    """``(mu * nu)(x) = sum_y mu(y) nu(y^-1 x)``."""
    out: dict = {}
    for y, a in mu.data.items():
        for z, b in nu.data.items():
            x = G.mul(y, z)
            out[x] = out.get(x, ZERO) + a * b
    return Measure(G, out)


def adjoint_measure(G: DiscreteGroup, mu: Measure) -> Measure:
    """``mu*(x) = conj(mu(x^-1))``."""
    return Measure(G, {G.inv(x): c.conjugate() for x, c in mu.data.items()})


def phi_measure(phi: Character, mu: Measure, power: int = 1) -> Measure:
    if power not in (1, 2, 3):
        raise ValueError("power must be 1, 2 or 3")
    return Measure(mu.group, {x: c * phi(x) ** power for x, c in mu.data.items()})


def _require_selfadjoint(G, mu, name="mu"):
    if not mu.is_selfadjoint():
        adj = adjoint_measure(G, mu)
        bad = next(x for x in sorted(set(mu.data) | set(adj.data)) if mu[x] != adj[x])
        raise HypothesisError(f"{name} is not selfadjoint", witness={"point": _fmt(G, bad), "value": mu[bad], "adjoint_value": adj[bad]})


def _fmt(G: DiscreteGroup, x):
    return [G.names[x[0]], list(x[1])]


def _compare(G, name, left: Measure, right: Measure) -> Certificate:
    for x in sorted(set(left.data) | set(right.data)):
        if left[x] != right[x]:
            return Certificate(name, False, witness={"point": _fmt(G, x), "left": left[x], "right": right[x]})
    return Certificate(name, True)


def check_hom1(G: DiscreteGroup, phi: Character, mu: Measure) -> Certificate:
    """``(Phi mu) * mu == mu * (Phi mu)``."""
    _require_selfadjoint(G, mu)
    pm = phi_measure(phi, mu, 1)
    return _compare(G, "hom1", convolve(G, pm, mu), convolve(G, mu, pm))


def check_hom2(G: DiscreteGroup, phi: Character, mu: Measure) -> Certificate:
    """``(Phi mu) * (Phi^2 mu) == (Phi^2 mu) * (Phi mu)``."""
    _require_selfadjoint(G, mu)
    p1, p2 = phi_measure(phi, mu, 1), phi_measure(phi, mu, 2)
    return _compare(G, "hom2", convolve(G, p1, p2), convolve(G, p2, p1))


def conv_fiber(G: DiscreteGroup, mu: Measure) -> LaurentMatrix:
    """Partial Fourier transform of ``f -> mu * f`` in the Z^d variable.

    Entry ``(x, y)`` carries ``mu(x y^-1, t) z^-t``.
    """
    n, d = G.order, G.d
    terms = [[{} for _ in range(n)] for _ in range(n)]
    for (h, t), c in mu.data.items():
        exp = tuple(-a for a in t)
        for y in range(n):
            x = G.table[h][y]
            terms[x][y][exp] = terms[x][y].get(exp, ZERO) + c
    return LaurentMatrix([[LaurentPoly(d, terms[x][y]) for y in range(n)] for x in range(n)], d)


def fiber_norm_bound_ok(G: DiscreteGroup, mu: Measure, grid: int = 64, tol: float = 1e-9) -> tuple[bool, float, float]:
    """Sampled spectral radius of the fiber against the total variation of mu."""
    ev = band_samples(conv_fiber(G, mu), grid)
    top = float(np.abs(ev).max()) if ev.size else 0.0
    bound = mu.total_variation()
    return top <= bound + tol, top, bound


def _kernel_description(M: LaurentMatrix) -> dict:
    det = M.det()
    grank = generic_rank(M)
    return {"det_identically_zero": det.is_zero(), "det_monomials": len(det.terms),
            "generic_kernel_dim": M.size - grank, "constant_kernel": constant_kernel(M)}


def k_subspace_report(G: DiscreteGroup, mu: Measure, phi: Character) -> Certificate:
    """Decide whether ker(H_{Phi mu}) is trivial; verdict True means trivial.

    The fiber determinant of Phi mu is a real-analytic function on the torus;
    if it is not identically zero it vanishes only on a null set, so the
    multiplication operator is injective.
    """
    h1 = check_hom1(G, phi, mu)
    h2 = check_hom2(G, phi, mu) if h1 else Certificate("hom2", False, witness={"reason": "hom1 failed"})
    M = conv_fiber(G, phi_measure(phi, mu, 1))
    desc = _kernel_description(M)
    trivial = not desc["det_identically_zero"]
    conclusions = []
    if trivial and h1:
        conclusions.append("no point spectrum")
    if trivial and h2:
        conclusions.append("purely absolutely continuous")
    if not trivial:
        conclusions.append("ker(H_{Phi mu}) nontrivial: no information from this character")
    return Certificate("k_subspace", trivial, data={"hom1": h1, "hom2": h2, "fiber_phi_mu": repr(M.entries), **desc,
                                                   "conclusions": conclusions},
                       flags=[] if any(phi.slope) else ["degenerate-character"])


@dataclass
class ConvSpectralReport:
    conclusion: str
    grid: int
    band_ranges: list = field(default_factory=list)
    flat_polynomial: list = field(default_factory=list)
    hac_nontrivial: bool | None = None
    kernel_dim: int | None = None
    samples: np.ndarray | None = None
    statement: str = ""

    def to_json(self) -> dict:
        return encode({"conclusion": self.conclusion, "statement": self.statement, "grid": self.grid,
                       "band_ranges": [[round(a, 12), round(b, 12)] for a, b in self.band_ranges],
                       "flat_polynomial": self.flat_polynomial, "hac_nontrivial": self.hac_nontrivial,
                       "kernel_dim": self.kernel_dim})


def _bands(M: LaurentMatrix, grid: int):
    ev = band_samples(M, grid)
    return ev, [(float(ev[:, j].min()), float(ev[:, j].max())) for j in range(ev.shape[1])]


def corollary_precis_check(G: DiscreteGroup, mu: Measure, phi: Character, grid: int = 257):
    """Hypotheses: Phi adapted to mu and Phi^2 a nonzero constant on supp(mu).

    Conclusion: purely a.c. spectrum except possibly the eigenvalue 0 with
    ker(H_mu) = ker(H_{Phi mu}); the kernel equality is checked exactly on
    the fibers.
    """
    _require_selfadjoint(G, mu)
    h1 = check_hom1(G, phi, mu)
    if not h1:
        raise HypothesisError("character is not semi-adapted to mu", witness=h1.witness)
    h2 = check_hom2(G, phi, mu)
    if not h2:
        raise HypothesisError("character is not adapted to mu", witness=h2.witness)
    squares = {}
    for x in mu.support():
        v = phi(x) ** 2
        if v == 0:
            raise HypothesisError("Phi^2 vanishes on the support of mu", witness={"point": _fmt(G, x)})
        squares.setdefault(v, x)
    if len(squares) > 1:
        (v1, x1), (v2, x2) = list(squares.items())[:2]
        raise HypothesisError("Phi^2 is not constant on the support of mu",
                              witness={"points": [_fmt(G, x1), _fmt(G, x2)], "values": [v1, v2]})
    M = conv_fiber(G, mu)
    N = conv_fiber(G, phi_measure(phi, mu, 1))
    m = M.size
    rk_m, rk_n, rk_both = generic_rank(M), generic_rank(N), generic_rank(M, N)
    equal = rk_m == rk_n == rk_both
    ker_m, ker_n = constant_kernel(M), constant_kernel(N)
    cert = Certificate("corollary_precis", equal, data={
        "phi_squared_on_support": next(iter(squares)),
        "hom1": h1, "hom2": h2,
        "kernel_dim_H_mu": m - rk_m, "kernel_dim_H_phi_mu": m - rk_n, "kernel_dim_intersection": m - rk_both,
        "kernels_equal": equal,
        "constant_kernel_H_mu": ker_m, "constant_kernel_H_phi_mu": ker_n,
    })
    if not equal:
        cert.witness = {"reason": "fiber kernels of H_mu and H_{Phi mu} differ",
                        "ranks": {"H_mu": rk_m, "H_phi_mu": rk_n, "stacked": rk_both}}
    ev, ranges = _bands(M, grid)
    kernel_dim = m - rk_m
    conclusion = "purely absolutely continuous" if kernel_dim == 0 else \
        "purely absolutely continuous except the eigenvalue 0 (infinite multiplicity)"
    report = ConvSpectralReport(conclusion=conclusion, grid=grid, band_ranges=ranges,
                                flat_polynomial=flat_band_polynomial(M), hac_nontrivial=True,
                                kernel_dim=kernel_dim, samples=ev,
                                statement="purely absolutely continuous, possible eigenvalue only at 0")
    return cert, report


def is_central(G: DiscreteGroup, mu: Measure):
    """Return None if mu is constant on F-conjugacy classes at every t, else a witness."""
    ts = sorted({t for _, t in mu.data})
    for t in ts:
        for cls_ in G.conjugacy_classes():
            vals = {mu[(f, t)] for f in cls_}
            if len(vals) > 1:
                return {"t": list(t), "class": [G.names[f] for f in cls_], "values": sorted(vals, key=repr)}
    return None


def centreaza_check(G: DiscreteGroup, mu0: Measure, mu1: Measure, grid: int = 257):
    """Central mu0 reaching outside F x {0} plus mu1 inside F x {0} gives nonzero a.c. part.

    Nontriviality of the a.c. subspace is shown by an exact dispersive band:
    the characteristic polynomial of the fiber depends on z.
    """
    _require_selfadjoint(G, mu0, "mu0")
    _require_selfadjoint(G, mu1, "mu1")
    w = is_central(G, mu0)
    if w is not None:
        raise HypothesisError("mu0 is not central", witness=w)
    if not any(any(t) for _, t in mu0.data):
        raise HypothesisError("supp(mu0) is included in the subgroup generated by compact elements",
                              witness={"support": [_fmt(G, x) for x in mu0.support()]})
    outside = [x for x in mu1.support() if any(x[1])]
    if outside:
        raise HypothesisError("supp(mu1) leaves the subgroup generated by compact elements", witness={"point": _fmt(G, outside[0])})
    M = conv_fiber(G, mu0 + mu1)
    fpoly = flat_band_polynomial(M)
    dispersive = len(fpoly) - 1 < M.size
    ev, ranges = _bands(M, grid)
    cert = Certificate("centreaza", dispersive, data={"flat_polynomial": fpoly, "flat_multiplicity": len(fpoly) - 1,
                                                     "fiber_size": M.size, "fiber_monomials": M.monomial_count()})
    if not dispersive:
        cert.witness = {"reason": "every band is flat"}
    report = ConvSpectralReport(conclusion="H_ac nontrivial" if dispersive else "no dispersive band found",
                                grid=grid, band_ranges=ranges, flat_polynomial=fpoly, hac_nontrivial=dispersive, samples=ev,
                                statement="absolutely continuous subspace is nonzero" if dispersive else "")
    return cert, report


def _right_class_sums(G: DiscreteGroup) -> list[np.ndarray]:
    """Matrices of f -> f * 1_E (right convolution by a class sum) on functions on F."""
    n = G.order
    out = []
    for cls_ in G.conjugacy_classes():
        R = np.zeros((n, n))
        for y in range(n):
            for c in cls_:
                R[G.table[y][c], y] += 1
        out.append(R)
    return out


def band_families(G: DiscreteGroup, mu: Measure, tol: float = 1e-9) -> list[dict] | None:
    """Split the bands into analytic families when the fiber coefficients commute.

    Commuting coefficient matrices (always the case for central measures)
    are diagonalised together with the right class sums, which commute
    with every left convolution and separate the irreducible
    representations of F. Each family is then an explicit trigonometric
    polynomial ``sum_t c_t z^t``. Returns None if the coefficients do not
    commute.
    """
    M = conv_fiber(G, mu)
    coeffs = {t: np.array([[complex(x) for x in row] for row in mat]) for t, mat in M.coefficient_matrices().items()}
    mats = list(coeffs.values())
    for A in mats:
        for B in mats:
            if np.abs(A @ B - B @ A).max() > tol:
                return None
    rng = np.random.default_rng(12345)
    n = G.order
    X = np.zeros((n, n), dtype=complex)
    for A in mats + _right_class_sums(G):
        r, s = rng.standard_normal(2)
        X += r * (A + A.conj().T) + s * 1j * (A - A.conj().T)
    w, V = np.linalg.eigh(X)
    groups: list[list[int]] = []
    for j in range(n):
        if groups and abs(w[j] - w[groups[-1][0]]) < 1e-7:
            groups[-1].append(j)
        else:
            groups.append([j])
    fams = []
    for grp in groups:
        v = V[:, grp[0]]
        symbol = {t: complex(np.vdot(v, A @ v)) for t, A in coeffs.items()}
        symbol = {t: c for t, c in symbol.items() if abs(c) > tol}
        fams.append({"symbol": symbol, "multiplicity": len(grp)})
    return fams


def eval_family(symbol: Mapping, thetas: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_t c_t exp(i t.theta)`` at rows of ``thetas`` (shape (npts, d))."""
    out = np.zeros(len(thetas), dtype=complex)
    for t, c in symbol.items():
        out += c * np.exp(1j * (thetas @ np.asarray(t, dtype=float)))
    return out.real


def symbol(mu: Measure) -> LaurentPoly:
    if not mu.group.is_zd:
        raise GroupError("symbols are defined for Z^d")
    return conv_fiber(mu.group, mu)[0, 0]


def babel_report(G: DiscreteGroup, m0: Measure, m1: Measure, grid: int = 257) -> Certificate:
    """Abelian case: point/singular spectrum of M_{m0+m1} lives in the common kernel of the d_w m0.

    Verdict True means the intersection of kernels is trivial (some
    directional derivative of m0 is not identically zero), hence H is purely
    absolutely continuous.
    """
    if not G.is_zd:
        raise GroupError("babel_report needs G = Z^d")
    _require_selfadjoint(G, m0, "mu0")
    _require_selfadjoint(G, m1, "mu1")
    off = [x for x in m1.support() if any(x[1])]
    if off:
        raise HypothesisError("mu1 must be supported at 0 (a constant symbol)", witness={"point": list(off[0][1])})
    s0 = symbol(m0)
    derivs = []
    for j in range(G.d):
        e = [0] * G.d
        e[j] = 1
        dj = s0.theta_derivative(e)
        derivs.append({"direction": e, "derivative": repr(dj), "identically_zero": dj.is_zero()})
    trivial = any(not x["identically_zero"] for x in derivs)
    shift = m1[(0, (0,) * G.d)]
    ev = band_samples(conv_fiber(G, m0 + m1), grid)
    data = {"derivatives": derivs, "shift": shift,
            "spectrum_range": [round(float(ev.min()), 12), round(float(ev.max()), 12)] if ev.size else None,
            "conclusion": "purely absolutely continuous" if trivial else "no conclusion: every derivative symbol vanishes"}
    return Certificate("babel", trivial, data=data)


# --- JSON ------------------------------------------------------------------


def load_group(doc) -> DiscreteGroup:
    kind = doc.get("kind")
    d = doc.get("d", 0)
    if not isinstance(d, int) or d < 0:
        raise GroupError("d must be a non-negative integer")
    if kind == "Zd":
        return DiscreteGroup.zd(d)
    if kind == "FxZd":
        names = doc.get("names")
        table = doc.get("table")
        if not names or not table:
            raise GroupError("FxZd group needs 'names' and 'table'")
        idx = {n: i for i, n in enumerate(names)}
        try:
            tab = [[x if isinstance(x, int) else idx[x] for x in row] for row in table]
        except KeyError as exc:
            raise GroupError(f"table refers to unknown element {exc.args[0]!r}") from None
        return DiscreteGroup(tab, d, names)
    if kind == "S3xZd":
        return symmetric_group_s3(d)
    raise GroupError(f"unknown group kind {kind!r}")


def load_measure(document, group: DiscreteGroup | None = None) -> Measure:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GroupError(f"parse error: {exc}") from exc
    if not isinstance(document, dict):
        raise GroupError("measure document must be a JSON object")
    G = group if group is not None else load_group(document.get("group") or {})
    data = {}
    for entry in document.get("support", []):
        f = G.element(entry.get("f", G.names[G.identity]), entry.get("t"))
        try:
            c = gauss_from_json(entry)
        except ValueError as exc:
            raise GroupError(str(exc)) from exc
        if f in data:
            raise GroupError(f"duplicate support point {entry!r}")
        data[f] = c
    return Measure(G, data)


def load_character(document) -> Character:
    if isinstance(document, (str, bytes)):
        document = json.loads(document)
    try:
        return Character(tuple(parse_rational(s) for s in document["slope"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise GroupError(f"bad character document: {exc}") from exc
