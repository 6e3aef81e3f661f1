"""Bloch fibers of periodic graphs, band sampling and exact flat-band certification.

The fiber of a Z^d-periodic adjacency operator is the m x m Laurent matrix
whose (p, q) entry is ``sum z^t`` over edges ``(cell[p], cell[q], t)``. Band
functions are real-analytic in theta, so each one is either constant (a flat
band: an infinitely degenerate eigenvalue) or contributes absolutely
continuous spectrum.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .certificate import Certificate
from .certify import check_adapted, check_admissible, check_semi_adapted
from .gaussq import GaussQ, ZERO
from .graph_core import Orientation, PeriodicGraph, VertexFunction
from .laurent import LaurentMatrix, LaurentPoly, constant_kernel, generic_rank
from .operators import FinVector, apply_H, kernel_H_membership, kernel_K_membership

DEFAULT_GRID = 257
DEFAULT_TOL = 1e-6
MAX_DENOMINATOR = 64


def fiber_matrix(g: PeriodicGraph) -> LaurentMatrix:
    m, d = len(g.cell), g.rank
    terms = [[{} for _ in range(m)] for _ in range(m)]
    for u, v, t in g.edges:
        neg = tuple(-x for x in t)
        terms[u][v][t] = terms[u][v].get(t, 0) + 1
        terms[v][u][neg] = terms[v][u].get(neg, 0) + 1
    return LaurentMatrix([[LaurentPoly(d, terms[p][q]) for q in range(m)] for p in range(m)], d)


def _threads() -> int:
    try:
        n = int(os.environ.get("WEAKCONJ_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def band_samples(M: LaurentMatrix, grid: int, threads: int | None = None) -> np.ndarray:
    """Sorted eigenvalues at ``theta = 2 pi k / grid``; shape ``(grid**d, m)``."""
    if grid < 1:
        raise ValueError("grid must be >= 1")
    mats = M.eval_grid(grid)
    if M.size == 0:
        return np.zeros((len(mats), 0))
    threads = threads or _threads()
    chunks = np.array_split(np.arange(len(mats)), max(1, min(threads, len(mats) // 4096 + 1)))
    if len(chunks) == 1:
        return np.linalg.eigvalsh(mats)
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda idx: np.linalg.eigvalsh(mats[idx]), chunks))
    return np.concatenate(parts, axis=0)


def flat_band_candidates(M: LaurentMatrix, grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL,
                         samples: np.ndarray | None = None) -> list[Fraction]:
    """Rational guesses for constant band functions (screening only).

    A value is kept when every grid point has an eigenvalue within ``tol`` of
    it. Branches are not paired by sorted order because a flat band crossing
    a dispersive one swaps sorted positions.
    """
    ev = band_samples(M, grid) if samples is None else samples
    if ev.shape[1] == 0:
        return []
    out = set()
    for seed in ev[0]:
        dist = np.abs(ev - seed).min(axis=1)
        if dist.max() > tol:
            continue
        nearest = ev[np.arange(len(ev)), np.abs(ev - seed).argmin(axis=1)]
        mean = float(nearest.mean())
        r = Fraction(mean).limit_denominator(MAX_DENOMINATOR)
        if abs(float(r) - mean) <= tol:
            out.add(r)
    return sorted(out)


def certify_flat_band(M: LaurentMatrix, lam) -> Certificate:
    """Flat iff det(M - lam I) vanishes identically; multiplicity from the generic rank."""
    lam = GaussQ.coerce(lam if not isinstance(lam, float) else Fraction(lam))
    shifted = M.shift(lam)
    det = shifted.det()
    data = {"eigenvalue": lam, "det_monomials": len(det.terms)}
    if not det.is_zero():
        return Certificate("flat_band", False, witness={"det": repr(det), "det_monomials": len(det.terms)}, data=data)
    mult = M.size - generic_rank(shifted)
    data["multiplicity"] = mult
    return Certificate("flat_band", True, data=data)


def flat_band_polynomial(M: LaurentMatrix) -> list[GaussQ]:
    """Monic gcd over torus monomials of the coefficients of det(lam I - M(z)).

    Its roots, with multiplicity, are exactly the flat bands: a constant
    eigenvalue c makes (lam - c) divide the characteristic polynomial for
    every z, and nothing else can.
    """
    cp = M.charpoly()
    g: list = []
    for coeffs in cp.values():
        g = linalg.poly_gcd(g, coeffs) if g else linalg.poly_monic(coeffs)
    return g


def has_dispersive_band(M: LaurentMatrix) -> bool:
    """True iff some band function is non-constant, decided exactly."""
    return len(flat_band_polynomial(M)) - 1 < M.size


def closed_walk_counts(g: PeriodicGraph, k: int) -> int:
    """Closed walks of length k summed over the cell representatives (combinatorial)."""
    from .graph_core import neighbors

    total = 0
    for x in g.representatives():
        layer = {x: 1}
        for _ in range(k):
            nxt: dict = {}
            for y, c in layer.items():
                for z in neighbors(g, y):
                    nxt[z] = nxt.get(z, 0) + c
            layer = nxt
        total += layer.get(x, 0)
    return total


def trace_moment(M: LaurentMatrix, grid: int, k: int) -> float:
    """Grid average of trace(M(theta)^k)."""
    mats = M.eval_grid(grid)
    return float(np.trace(np.linalg.matrix_power(mats, k), axis1=1, axis2=2).real.mean())


@dataclass
class SpectralReport:
    """Spectral classification of a periodic adjacency operator.

    ``band_ranges`` come from sampling and are approximate; everything about
    flat bands is exact.
    """

    rank: int
    cell_size: int
    grid: int
    tol: float
    flat_bands: list = field(default_factory=list)
    band_ranges: list = field(default_factory=list)
    flat_polynomial: list = field(default_factory=list)
    ac_present: bool = False
    point_spectrum: list | None = None
    admissible: Certificate | None = None
    phi_check: Certificate | None = None
    errors: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def flat_values(self) -> list[Fraction]:
        return [fb["eigenvalue"] for fb in self.flat_bands]

    def to_json(self) -> dict:
        from .certificate import encode

        return encode({
            "rank": self.rank,
            "cell_size": self.cell_size,
            "grid": self.grid,
            "tol": self.tol,
            "flat_bands": self.flat_bands,
            "band_ranges": [[round(a, 12), round(b, 12)] for a, b in self.band_ranges],
            "band_ranges_note": "sampled on the grid; approximate",
            "flat_polynomial": self.flat_polynomial,
            "ac_present": self.ac_present,
            "point_spectrum": None if self.point_spectrum is None else [round(x, 12) for x in self.point_spectrum],
            "admissible": None if self.admissible is None else self.admissible.verdict,
            "certificates": [c for c in (self.admissible, self.phi_check) if c is not None],
            "errors": self.errors,
            "flags": self.flags,
        })


def _remove_flat(ev: np.ndarray, flats: list[tuple[float, int]]) -> np.ndarray:
    keep = np.ones(ev.shape, dtype=bool)
    for lam, mult in flats:
        dist = np.where(keep, np.abs(ev - lam), np.inf)
        idx = np.argsort(dist, axis=1)[:, :mult]
        np.put_along_axis(keep, idx, False, axis=1)
    rows = [row[k] for row, k in zip(ev, keep)]
    return np.array(rows)


def _cell_pattern(g: PeriodicGraph, vec) -> FinVector:
    return FinVector({g.origin(lab): c for lab, c in zip(g.cell, vec)})


def classify_spectrum(g: PeriodicGraph, o: Orientation | None = None, phi: VertexFunction | None = None,
                      grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL) -> SpectralReport:
    """Flat bands (exact), dispersive band ranges (sampled) and theorem cross-checks.

    With an orientation, admissibility is checked; an admissible graph may only
    have a flat band at 0, and each exact flat-band pattern must satisfy the
    father/son sum conditions. With an adapted (or semi-adapted) Phi, or the
    position function of an admissible graph, flat-band patterns must lie in
    ker(K). A violation is recorded as THEOREM-INCONSISTENCY.
    """
    M = fiber_matrix(g)
    m = M.size
    ev = band_samples(M, grid)
    report = SpectralReport(rank=g.rank, cell_size=m, grid=grid, tol=tol)

    fpoly = flat_band_polynomial(M)
    report.flat_polynomial = fpoly
    report.ac_present = g.rank > 0 and len(fpoly) - 1 < m

    adm = None
    if o is not None or g.orientation is not None:
        adm = check_admissible(g, o)
        report.admissible = adm
    k_phi = phi
    if phi is not None:
        report.phi_check = check_adapted(g, phi)
        if not report.phi_check:
            semi = check_semi_adapted(g, phi)
            if not semi:
                report.flags.append("phi-not-semi-adapted")
                k_phi = None
    elif adm is not None and adm.verdict and adm.data.get("phi") is not None:
        k_phi = adm.data["phi"]

    certified_mult = 0
    for lam in flat_band_candidates(M, grid, tol, samples=ev):
        cert = certify_flat_band(M, lam)
        if not cert:
            continue
        mult = cert.data["multiplicity"]
        poly_mult = linalg.root_multiplicity(fpoly, lam)
        if poly_mult != mult:
            report.errors.append({"code": "INTERNAL", "message": f"multiplicity mismatch at {lam}: rank {mult}, polynomial {poly_mult}"})
        certified_mult += mult
        patterns = constant_kernel(M.shift(lam))
        entry = {"eigenvalue": lam, "multiplicity": mult, "certificate": cert, "patterns": [], "pattern_dim": len(patterns)}
        if len(patterns) < mult:
            entry["note"] = "some eigenfunctions are not single-cell patterns"
        for vec in patterns:
            f = _cell_pattern(g, vec)
            pat = {"vector": vec, "eigen_equation": apply_H(g, f) == f * GaussQ.coerce(lam)}
            if not pat["eigen_equation"]:
                report.errors.append({"code": "INTERNAL", "message": f"pattern for {lam} is not an eigenvector"})
            if adm is not None and adm.verdict:
                kh = kernel_H_membership(g, o, f)
                pat["kernel_H"] = kh
                if lam == 0 and not kh:
                    report.errors.append({"code": "THEOREM-INCONSISTENCY", "message": "flat-band pattern violates the father/son sum conditions", "witness": kh.witness})
            if k_phi is not None:
                kk = kernel_K_membership(g, k_phi, f)
                pat["kernel_K"] = kk
                if not kk:
                    report.errors.append({"code": "THEOREM-INCONSISTENCY", "message": "eigenvector outside ker(K)", "witness": kk.witness})
            entry["patterns"].append(pat)
        report.flat_bands.append(entry)

    if certified_mult < len(fpoly) - 1:
        report.flags.append("uncertified-flat-bands")
    if adm is not None and adm.verdict and g.rank > 0:
        k = len(fpoly) - 1
        if any(c for c in fpoly[:k]):
            report.errors.append({"code": "THEOREM-INCONSISTENCY", "message": "admissible graph has a flat band away from 0",
                                  "flat_polynomial": fpoly})

    if g.rank == 0:
        report.point_spectrum = [float(x) for x in ev[0]]
    else:
        flats = [(float(fb["eigenvalue"]), fb["multiplicity"]) for fb in report.flat_bands]
        rest = _remove_flat(ev, flats) if flats else ev
        if rest.shape[1]:
            report.band_ranges = [(float(rest[:, j].min()), float(rest[:, j].max())) for j in range(rest.shape[1])]
    return report
