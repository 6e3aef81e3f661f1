"""Command-line entry point. Every subcommand writes one JSON report.

Exit status: 0 when a verdict was computed (whatever it is), otherwise one
of the codes in ``EXIT_CODES``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .bloch import DEFAULT_GRID, DEFAULT_TOL, band_samples, classify_spectrum, fiber_matrix, flat_band_polynomial
from .certificate import Certificate, encode
from .certify import check_adapted, check_admissible, check_semi_adapted
from .graph_core import GraphError, UnorientedEdgeError, load_graph, load_vertex_function
from .groupconv import (
    GroupError,
    HypothesisError,
    Measure,
    babel_report,
    band_families,
    centreaza_check,
    check_hom1,
    check_hom2,
    conv_fiber,
    corollary_precis_check,
    k_subspace_report,
    load_character,
    load_measure,
)
from .operators import verify_B_equals_K2, verify_HK_commute, virial_check

EXIT_CODES = {"ok": 0, "usage": 2, "io_error": 3, "parse_error": 4, "hypothesis_error": 5, "theorem_inconsistency": 6}


class CliError(Exception):
    def __init__(self, code: str, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


@dataclass
class RunConfig:
    command: list
    graph: str | None = None
    phi: str | None = None
    measure: str | None = None
    char: str | None = None
    centreaza: list | None = None
    full: bool = False
    orient: bool = False
    precis: bool = False
    babel: bool = False
    grid: int = DEFAULT_GRID
    tol: float | None = None
    radius: int = 4
    seed: int = 0
    output: str | None = None
    include_samples: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.grid < 3:
            raise CliError("usage", "grid must be >= 3")
        if self.tol is not None and not self.tol > 0:
            raise CliError("usage", "tolerances must be > 0")
        if self.radius < 3:
            raise CliError("usage", "radius must be >= 3")


def _read_json(path: str | None, what: str):
    if path is None:
        raise CliError("usage", f"--{what} is required")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError("io_error", f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError("parse_error", f"{path}: {exc}") from None


def _graph(cfg: RunConfig, keep_orientation: bool = True):
    try:
        g = load_graph(_read_json(cfg.graph, "graph"))
    except GraphError as exc:
        raise CliError("parse_error", str(exc)) from None
    return g if keep_orientation else g.with_orientation(None)


def _phi(cfg: RunConfig, required: bool = True):
    if cfg.phi is None and not required:
        return None
    try:
        return load_vertex_function(_read_json(cfg.phi, "phi"))
    except GraphError as exc:
        raise CliError("parse_error", str(exc)) from None


def _measure(path, what, group=None) -> Measure:
    try:
        return load_measure(_read_json(path, what), group)
    except GroupError as exc:
        raise CliError("parse_error", str(exc)) from None


# --- subcommands -----------------------------------------------------------


def cmd_certify(cfg: RunConfig) -> dict:
    g = _graph(cfg)
    if cfg.phi is None:
        try:
            cert = check_admissible(g)
        except UnorientedEdgeError as exc:
            raise CliError("hypothesis_error", str(exc)) from None
        return {"certificates": [cert], "result": {"admissible": cert.verdict}}
    phi = _phi(cfg)
    try:
        cert = check_adapted(g, phi) if cfg.full else check_semi_adapted(g, phi)
    except GraphError as exc:
        raise CliError("parse_error", str(exc)) from None
    key = "adapted" if cfg.full else "semi_adapted"
    return {"certificates": [cert], "result": {key: cert.verdict, "degenerate": "degenerate" in cert.flags}}


def cmd_commutator(cfg: RunConfig) -> dict:
    g, phi = _graph(cfg), _phi(cfg)
    try:
        hk = verify_HK_commute(g, phi, cfg.radius)
        bk = verify_B_equals_K2(g, phi, cfg.radius) if hk else None
    except GraphError as exc:
        raise CliError("parse_error", str(exc)) from None
    certs = [c for c in (hk, bk) if c is not None]
    return {"certificates": certs, "result": {"HK_commute": hk.verdict, "B_equals_K2": None if bk is None else bk.verdict}}


def cmd_virial(cfg: RunConfig) -> dict:
    g, phi = _graph(cfg), _phi(cfg)
    try:
        cert = virial_check(g, phi, cfg.tol if cfg.tol is not None else 1e-9)
    except GraphError as exc:
        raise CliError("parse_error", str(exc)) from None
    except ValueError as exc:
        raise CliError("hypothesis_error", str(exc)) from None
    return {"certificates": [cert], "result": {"virial": cert.verdict, "max_ratio": cert.data["max_ratio"]}}


def cmd_bands(cfg: RunConfig) -> dict:
    g = _graph(cfg)
    M = fiber_matrix(g)
    ev = band_samples(M, cfg.grid)
    result = {"grid": cfg.grid, "cell": list(g.cell), "fiber_monomials": M.monomial_count(),
              "band_min": [round(float(x), 12) for x in ev.min(axis=0)],
              "band_max": [round(float(x), 12) for x in ev.max(axis=0)],
              "samples": [[round(float(x), 12) for x in row] for row in ev]}
    return {"certificates": [], "result": result}


def cmd_classify(cfg: RunConfig) -> dict:
    g = _graph(cfg, keep_orientation=cfg.orient)
    if cfg.orient and g.orientation is None:
        raise CliError("hypothesis_error", "--orient given but the graph carries no orientation tags")
    phi = _phi(cfg, required=False)
    try:
        rep = classify_spectrum(g, None, phi, cfg.grid, cfg.tol if cfg.tol is not None else DEFAULT_TOL)
    except UnorientedEdgeError as exc:
        raise CliError("hypothesis_error", str(exc)) from None
    except GraphError as exc:
        raise CliError("parse_error", str(exc)) from None
    body = rep.to_json()
    det_monomials = [fb["certificate"].data["det_monomials"] for fb in rep.flat_bands]
    body["det_monomials"] = det_monomials
    body["fiber_monomials"] = fiber_matrix(g).monomial_count()
    certs = body.pop("certificates")
    if rep.errors and any(e["code"] == "THEOREM-INCONSISTENCY" for e in rep.errors):
        raise CliError("theorem_inconsistency", "theorem cross-check failed", witness=body["errors"])
    return {"certificates": certs, "result": body}


def cmd_conv(cfg: RunConfig) -> dict:
    mu = _measure(cfg.measure, "measure")
    G = mu.group
    certs: list = []
    result: dict = {"group": G.to_json(), "selfadjoint": mu.is_selfadjoint(), "norm_bound": mu.total_variation()}
    M = conv_fiber(G, mu)
    result["fiber_size"] = M.size
    result["fiber_monomials"] = M.monomial_count()
    ev = band_samples(M, cfg.grid)
    result["band_ranges"] = [[round(float(ev[:, j].min()), 12), round(float(ev[:, j].max()), 12)] for j in range(ev.shape[1])]
    result["flat_polynomial"] = flat_band_polynomial(M)
    try:
        if cfg.char is not None:
            try:
                phi = load_character(_read_json(cfg.char, "char"))
            except GroupError as exc:
                raise CliError("parse_error", str(exc)) from None
            if len(phi.slope) != G.d:
                raise CliError("parse_error", f"character slope has length {len(phi.slope)}, group rank is {G.d}")
            h1 = check_hom1(G, phi, mu)
            h2 = check_hom2(G, phi, mu) if h1 else None
            ks = k_subspace_report(G, phi=phi, mu=mu)
            certs += [c for c in (h1, h2, ks) if c is not None]
            result["hom1"], result["hom2"] = h1.verdict, None if h2 is None else h2.verdict
            result["k_subspace_trivial"] = ks.verdict
            if cfg.precis:
                cert, rep = corollary_precis_check(G, mu, phi, cfg.grid)
                certs.append(cert)
                result["precis"] = rep.to_json()
        elif cfg.precis:
            raise CliError("usage", "--precis needs --char")
        if cfg.centreaza:
            mu0 = _measure(cfg.centreaza[0], "centreaza mu0", G)
            mu1 = _measure(cfg.centreaza[1], "centreaza mu1", G)
            cert, rep = centreaza_check(G, mu0, mu1, cfg.grid)
            certs.append(cert)
            result["centreaza"] = rep.to_json()
            result["hac_nontrivial"] = rep.hac_nontrivial
            fams = band_families(G, mu0 + mu1)
            if fams is None:
                result["band_families"] = _families(rep.samples)
                result["band_families_method"] = "sorted branches"
            else:
                result["band_families"] = [{"symbol": [{"exponent": list(t), "re": round(c.real, 12), "im": round(c.imag, 12)}
                                                       for t, c in sorted(f["symbol"].items())],
                                            "multiplicity": f["multiplicity"]} for f in fams]
                result["band_families_method"] = "simultaneous diagonalisation"
        if cfg.babel:
            at0 = {x: c for x, c in mu.data.items() if not any(x[1])}
            m1 = Measure(G, at0)
            m0 = Measure(G, {x: c for x, c in mu.data.items() if x not in at0})
            cert = babel_report(G, m0, m1, cfg.grid)
            certs.append(cert)
            result["babel"] = {"purely_ac": cert.verdict, "spectrum_range": cert.data["spectrum_range"]}
    except HypothesisError as exc:
        raise CliError("hypothesis_error", str(exc), witness=exc.witness) from None
    except GroupError as exc:
        raise CliError("parse_error", str(exc)) from None
    return {"certificates": certs, "result": result}


def _families(ev):
    """Group sampled branches that coincide at every grid point."""
    fams: list = []
    for j in range(ev.shape[1]):
        for fam in fams:
            if abs(ev[:, j] - ev[:, fam["branches"][0]]).max() < 1e-9:
                fam["branches"].append(j)
                break
        else:
            fams.append({"branches": [j]})
    for fam in fams:
        col = ev[:, fam["branches"][0]]
        fam["multiplicity"] = len(fam["branches"])
        fam["range"] = [round(float(col.min()), 12), round(float(col.max()), 12)]
    return fams


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=DEFAULT_GRID)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--radius", type=int, default=4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--json", action="store_true", help="JSON output (the only mode)")

    p = argparse.ArgumentParser(prog="weakconj", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"weakconj {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("certify", parents=[common], help="admissibility or (semi-)adapted check")
    c.add_argument("--graph", required=True)
    c.add_argument("--phi")
    c.add_argument("--full", action="store_true", help="check the cubic condition too")

    cm = sub.add_parser("commutator", help="exact commutator identities")
    cms = cm.add_subparsers(dest="sub", required=True)
    v = cms.add_parser("verify", parents=[common])
    v.add_argument("--graph", required=True)
    v.add_argument("--phi", required=True)

    vi = sub.add_parser("virial", parents=[common], help="eigenvectors of H lie in ker(K)")
    vi.add_argument("--graph", required=True)
    vi.add_argument("--phi", required=True)

    sp = sub.add_parser("spectrum", help="Bloch fiber analysis")
    sps = sp.add_subparsers(dest="sub", required=True)
    b = sps.add_parser("bands", parents=[common])
    b.add_argument("--graph", required=True)
    cl = sps.add_parser("classify", parents=[common])
    cl.add_argument("--graph", required=True)
    cl.add_argument("--orient", action="store_true", help="use the orientation tags in the graph file")
    cl.add_argument("--phi")

    cv = sub.add_parser("conv", help="convolution operators on F x Z^d")
    cvs = cv.add_subparsers(dest="sub", required=True)
    a = cvs.add_parser("analyze", parents=[common])
    a.add_argument("--measure", required=True)
    a.add_argument("--char")
    a.add_argument("--precis", action="store_true")
    a.add_argument("--centreaza", nargs=2, metavar=("MU0", "MU1"))
    a.add_argument("--babel", action="store_true")
    return p


DISPATCH = {
    ("certify", None): cmd_certify,
    ("commutator", "verify"): cmd_commutator,
    ("virial", None): cmd_virial,
    ("spectrum", "bands"): cmd_bands,
    ("spectrum", "classify"): cmd_classify,
    ("conv", "analyze"): cmd_conv,
}


# Fixed invocations over the bundled corpus (paths relative to the corpus
# directory). Expected values live in corpus/expected_reports.json.
CORPUS_SUITE = {
    "certify_z": ["certify", "--graph", "z_lattice.json"],
    "certify_bc2": ["certify", "--graph", "bc2_chain.json"],
    "certify_odd_cycle": ["certify", "--graph", "odd_cycle_directed.json"],
    "adapted_z": ["certify", "--graph", "z_lattice.json", "--phi", "z_position.json", "--full"],
    "adapted_bc2": ["certify", "--graph", "bc2_chain.json", "--phi", "bc2_position.json", "--full"],
    "semi_k3_bad": ["certify", "--graph", "k3.json", "--phi", "k3_bad.json"],
    "semi_p3_constant": ["certify", "--graph", "p3.json", "--phi", "p3_constant.json"],
    "commutator_z": ["commutator", "verify", "--graph", "z_lattice.json", "--phi", "z_position.json"],
    "commutator_bc2": ["commutator", "verify", "--graph", "bc2_chain.json", "--phi", "bc2_position.json"],
    "commutator_k3_bad": ["commutator", "verify", "--graph", "k3.json", "--phi", "k3_bad.json"],
    "virial_k3": ["virial", "--graph", "k3.json", "--phi", "k3_constant.json", "--tol", "1e-9"],
    "bands_z": ["spectrum", "bands", "--graph", "z_lattice.json", "--grid", "4"],
    "bands_bc2": ["spectrum", "bands", "--graph", "bc2_chain.json", "--grid", "4"],
    "classify_z": ["spectrum", "classify", "--graph", "z_lattice.json", "--orient", "--phi", "z_position.json"],
    "classify_z2": ["spectrum", "classify", "--graph", "z2_lattice.json", "--orient", "--grid", "65"],
    "classify_bc2": ["spectrum", "classify", "--graph", "bc2_chain.json", "--orient", "--phi", "bc2_position.json"],
    "classify_k3": ["spectrum", "classify", "--graph", "k3.json"],
    "classify_p3": ["spectrum", "classify", "--graph", "p3.json"],
    "classify_odd_cycle": ["spectrum", "classify", "--graph", "odd_cycle_directed.json"],
    "conv_example1": ["conv", "analyze", "--measure", "s3z_example1.json",
                      "--centreaza", "s3z_example1.json", "s3z_zero.json"],
    "conv_z_hop": ["conv", "analyze", "--measure", "z_hop.json", "--char", "char_unit.json", "--precis", "--babel"],
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    command = [ns.cmd] + ([ns.sub] if getattr(ns, "sub", None) else [])
    return RunConfig(
        command=command,
        graph=getattr(ns, "graph", None),
        phi=getattr(ns, "phi", None),
        measure=getattr(ns, "measure", None),
        char=getattr(ns, "char", None),
        centreaza=getattr(ns, "centreaza", None),
        full=getattr(ns, "full", False),
        orient=getattr(ns, "orient", False),
        precis=getattr(ns, "precis", False),
        babel=getattr(ns, "babel", False),
        grid=ns.grid, tol=ns.tol, radius=ns.radius, seed=ns.seed, output=ns.output,
    )


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one configuration; returns ``(exit status, report)``."""
    report = {"tool": "weakconj", "version": __version__, "config": {k: v for k, v in asdict(cfg).items() if k != "extra"}}
    try:
        cfg.validate()
        fn = DISPATCH[(cfg.command[0], cfg.command[1] if len(cfg.command) > 1 else None)]
        body = fn(cfg)
    except CliError as exc:
        report["error"] = {"code": exc.code, "message": str(exc), "witness": encode(exc.witness)}
        return EXIT_CODES[exc.code], report
    report["certificates"] = encode(body["certificates"])
    report["result"] = encode(body["result"])
    return 0, report


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    status, report = run(cfg)
    text = dumps(report)
    if cfg.output:
        try:
            Path(cfg.output).write_text(text)
        except OSError as exc:
            sys.stderr.write(f"cannot write {cfg.output}: {exc.strerror}\n")
            return EXIT_CODES["io_error"]
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
