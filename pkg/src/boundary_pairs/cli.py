"""Command-line front end: parse model files, run the library, write reports.

Reports are canonical JSON (sorted keys, floats with 17 significant
digits) so identical inputs give byte-identical output apart from
``meta.timestamp``.  Exit status is 0 when every check passes, 1 when some
check fails and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import re
import sys
import tempfile
from importlib import metadata

import numpy as np

from . import analytic as an
from . import constructions as co
from . import numcore as nc
from . import pair_core as pc
from . import spectral as sp
from .errors import BoundaryPairError, GraphModelError, ParseError, SchemaViolation
from .pair_core import GraphModel

TOOL = "boundary-pairs"
DEFAULT_Z = ("-1", "0.5+1i", "2+1i")
HERGLOTZ_Z = (1j, 1 + 1j, 3 + 0.5j)
EXTRA_THRESHOLDS = {
    "gamma_norm_agreement": 1e-10,
    "completeness": 1e-8,
    "ground_truth": 1e-8,
    "robin_shift": 1e-13,
    "glue_sum_law": 1e-12,
    "coupled_krein": 1e-10,
    "direct_sum_blocks": 1e-14,
    "dcouple_direct": 1e-11,
    "bounded_identity": 1e-12,
    "bounded_norm": 0.0,
    "interval_dtn_zero": 1e-12,
    "norm_identity": 1e-12,
}


# --------------------------------------------------------------------------
# parsing


_COMPLEX = re.compile(
    r"^\s*(?:(?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"(?P<im>[+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i"
    r"|(?P<only_re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<only_im>[+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i)\s*$"
)


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``bi`` or ``a+bi`` / ``a-bi`` with decimal parts."""
    m = _COMPLEX.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"invalid complex value {text!r}; expected a, bi or a+bi")

    def imag(s):
        return float(s + "1") if s in ("", "+", "-") else float(s)

    if m.group("only_re") is not None:
        return complex(float(m.group("only_re")), 0.0)
    if m.group("re") is not None:
        return complex(float(m.group("re")), imag(m.group("im")))
    return complex(0.0, imag(m.group("only_im")))


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field {field}: expected a number, got {type(value).__name__}")
    return float(value)


def _field(obj, name: str, where: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    if name not in obj:
        raise ParseError(f"{where}: missing field {name!r}")
    return obj[name]


def _list(value, field: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"field {field}: expected a list")
    return value


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def graph_from_json(data) -> GraphModel:
    verts = []
    for i, v in enumerate(_list(_field(data, "vertices", "graph"), "vertices")):
        vid = _field(v, "id", f"vertices[{i}]")
        if not isinstance(vid, str):
            raise ParseError(f"field vertices[{i}].id: expected a string")
        verts.append((vid, _number(_field(v, "mu", f"vertices[{i}]"), f"vertices[{i}].mu")))
    edges = []
    for i, e in enumerate(_list(_field(data, "edges", "graph"), "edges")):
        a, b = _field(e, "a", f"edges[{i}]"), _field(e, "b", f"edges[{i}]")
        if not isinstance(a, str) or not isinstance(b, str):
            raise ParseError(f"field edges[{i}]: endpoints must be strings")
        edges.append((a, b, _number(_field(e, "rho", f"edges[{i}]"), f"edges[{i}].rho")))
    boundary = _list(_field(data, "boundary", "graph"), "boundary")
    if not all(isinstance(b, str) for b in boundary):
        raise ParseError("field boundary: expected a list of vertex ids")
    try:
        return GraphModel(tuple(verts), tuple(edges), tuple(boundary))
    except GraphModelError as exc:
        raise SchemaViolation(str(exc)) from exc


def graph_to_json(g: GraphModel) -> dict:
    return {
        "vertices": [{"id": v, "mu": mu} for v, mu in g.vertices],
        "edges": [{"a": a, "b": b, "rho": rho} for a, b, rho in g.edges],
        "boundary": list(g.boundary),
    }


def chain_from_json(data) -> an.ChainPair:
    lengths = [_number(x, f"lengths[{i}]") for i, x in enumerate(_list(_field(data, "lengths", "chain"), "lengths"))]
    rhos = [_number(x, f"rhos[{i}]") for i, x in enumerate(_list(_field(data, "rhos", "chain"), "rhos"))]
    if not lengths:
        raise SchemaViolation("lengths must be nonempty")
    if len(lengths) != len(rhos):
        raise SchemaViolation("lengths and rhos must have the same size")
    if not all(math.isfinite(x) and x > 0 for x in lengths):
        raise SchemaViolation("lengths must be positive")
    if not all(math.isfinite(x) and x > 0 for x in rhos):
        raise SchemaViolation("rhos must be positive")
    return an.ChainPair(tuple(lengths), tuple(rhos))


def interval_from_json(data) -> an.IntervalPair:
    length = _number(_field(data, "length", "interval"), "length")
    if not (math.isfinite(length) and length > 0):
        raise SchemaViolation("length must be positive")
    return an.IntervalPair(length)


_PARSERS = {"graph": graph_from_json, "chain": chain_from_json, "interval": interval_from_json}


def parse_input(path: str, kind: str):
    """Read and validate a model file of the given kind.

    Raises
    ------
    ParseError
        Unreadable file, malformed JSON (with line/column) or a missing or
        mistyped field.
    SchemaViolation
        Well-formed data violating a model invariant.
    """
    if kind not in _PARSERS:
        raise ValueError(f"unknown input kind {kind!r}")
    return _PARSERS[kind](_load_json(path))


# --------------------------------------------------------------------------
# canonical serialization


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(x, ".17g")


def _prepare(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(np.real(obj)), "im": float(np.imag(obj))}
    if isinstance(obj, np.ndarray):
        return [_prepare(x) for x in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_prepare(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    return obj


def _encode(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + _encode(x, indent + 1) for x in obj) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items())
        return "{\n" + ",\n".join(f"{inner}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    return _encode(_prepare(report), 0) + "\n"


def _write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# report assembly


class Report:
    def __init__(self, command: str, inputs: list[str]):
        digest = hashlib.sha256()
        for path in inputs:
            with open(path, "rb") as fh:
                digest.update(fh.read())
        self.meta = {
            "tool": TOOL,
            "version": _version(),
            "command": command,
            "input_digest": digest.hexdigest() if inputs else None,
            "timestamp": _timestamp(),
        }
        self.checks: list[sp.Check] = []
        self.spectra: list[dict] = []
        self.constants: dict = {}
        self.extra: dict = {}
        self.notes: list[str] = []

    def check(self, name: str, residual: float, threshold: float) -> None:
        self.checks.append(sp.Check(name, float(residual), float(threshold)))

    def extend(self, suite: sp.SuiteReport, prefix: str = "") -> None:
        for c in suite.checks:
            self.checks.append(sp.Check(prefix + c.name, c.residual, c.threshold))
        self.notes.extend(f"skipped: {s}" for s in suite.skipped)

    def spectrum(self, label: str, values, multiplicities=None, flags=None) -> None:
        values = [float(v) for v in values]
        mults = [1] * len(values) if multiplicities is None else [int(m) for m in multiplicities]
        entries = [{"value": v, "multiplicity": m} for v, m in zip(values, mults)]
        if flags is not None:
            for e, f in zip(entries, flags):
                e["at_dirichlet"] = bool(f)
        self.spectra.append({"label": label, "values": entries})

    def hits(self, label: str, hits: list[sp.SpectralHit]) -> None:
        self.spectrum(label, [h.eigenvalue for h in hits], [h.multiplicity for h in hits], [h.at_dirichlet for h in hits])

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        out = {
            "meta": self.meta,
            "checks": [c.as_dict() for c in self.checks],
            "spectra": self.spectra,
            "constants": self.constants,
            "notes": self.notes,
            "passed": self.passed,
        }
        out.update(self.extra)
        return out


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch else _dt.datetime.now(_dt.timezone.utc)
    return now.isoformat()


def _zstr(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _rel(diff, *terms) -> float:
    scale = max([1.0] + [float(np.linalg.norm(t, 2)) for t in terms])
    return float(np.linalg.norm(diff, 2)) / scale


def _gap_samples(pr: sp.DtnProvider, window) -> list[tuple[float, float]]:
    gaps, _ = sp.dirichlet_free_gaps(pr, window)
    out = []
    for lo, hi in gaps:
        margin = max(1e-6 * (hi - lo), 10 * pr.delta)
        if hi - lo > 4 * margin:
            out.append((lo + margin, hi - margin))
    return out


def _monotonicity(rep: Report, pr: sp.DtnProvider, window) -> None:
    for lo, hi in _gap_samples(pr, window):
        suite = sp.monotonicity_suite(pr, (lo, hi), 64)
        rep.extend(suite, prefix=f"[{lo:.6g},{hi:.6g}] ")


def _herglotz(rep: Report, pr: sp.DtnProvider, zs) -> None:
    samples = [z if z.imag > 0 else z.conjugate() for z in zs if z.imag != 0] or list(HERGLOTZ_Z)
    rep.extend(sp.herglotz_suite(pr, samples))


def _search(rep: Report, pr: sp.DtnProvider, window, grid: int, tol: float) -> list[sp.SpectralHit]:
    hits = sp.find_neumann_eigenvalues(pr, window, grid, tol)
    _, tubes = sp.dirichlet_free_gaps(pr, window)
    rep.extra["excised"] = [list(t) for t in tubes]
    rep.extra["window"] = [float(window[0]), float(window[1])]
    rep.hits("pencil_hits", hits)
    for h in hits:
        thresh = tol if not h.at_dirichlet else sp.TUBE_KERNEL_TOL * (1 + abs(h.eigenvalue))
        rep.check(f"root_residual[{h.eigenvalue:.12g}]", h.min_eig_residual, thresh)
    return hits


def _compare_multisets(rep: Report, name: str, found, expected, rel: bool) -> None:
    found, expected = sorted(found), sorted(expected)
    if len(found) != len(expected):
        rep.check(name, math.inf, EXTRA_THRESHOLDS[name])
        rep.notes.append(f"{name}: found {len(found)} values, expected {len(expected)}")
        return
    if not found:
        rep.check(name, 0.0, EXTRA_THRESHOLDS[name])
        return
    f, e = np.array(found), np.array(expected)
    err = np.abs(f - e) / (np.maximum(np.abs(e), 1.0) if rel else 1.0)
    rep.check(name, float(np.max(err)), EXTRA_THRESHOLDS[name])


def _graph_constants(rep: Report, p: pc.FiniteBoundaryPair, zs) -> None:
    cc = pc.classification_constants(p)
    bm = co.bounded_modification_dtn(p)
    samples = []
    for z in zs:
        try:
            samples.append({"z": _zstr(z), "value": bm.bound(z)})
        except BoundaryPairError:
            rep.notes.append(f"L(z) skipped at z={_zstr(z)}")
    rep.constants = {
        "c_pos": cc.c_pos,
        "C_ell": cc.C_ell,
        "gamma_norm": cc.gamma_norm,
        "gamma_norm_from_dtn": cc.gamma_norm_from_dtn,
        "L(z)": samples,
    }
    rep.check("gamma_norm_agreement", cc.gamma_norm_agreement, EXTRA_THRESHOLDS["gamma_norm_agreement"])


def _schur(rep: Report, p: pc.FiniteBoundaryPair, zs) -> None:
    for z in zs:
        try:
            lam = pc.dtn(p, z)
            rep.check(f"schur[{_zstr(z)}]", _rel(lam - pc.schur_dtn(p, z), lam), sp.THRESHOLDS["schur"])
        except pc.TooCloseToDirichletSpectrum:
            rep.notes.append(f"schur skipped at z={_zstr(z)}")


def analyze_graph(args, g: GraphModel, rep: Report) -> None:
    p = pc.graph_pair(g, args.delta)
    pr = sp.matrix_provider(p, "graph")
    ev = p.neumann_spectrum
    window = args.window or (-0.5, float(ev[-1]) + 0.5)
    hits = _search(rep, pr, window, args.grid, args.tol)
    dspec = p.decomposition.dirichlet_spectrum
    rep.spectrum("neumann_eigensolve", ev)
    rep.spectrum("dirichlet", dspec)
    a, b = window
    off = [e for e in ev if a <= e <= b and (dspec.size == 0 or np.min(np.abs(dspec - e)) > 1e-6 * (1 + abs(e)))]
    found = [h.eigenvalue for h in hits if not h.at_dirichlet for _ in range(h.multiplicity)]
    _compare_multisets(rep, "completeness", found, off, rel=False)
    for h in hits:
        if not h.at_dirichlet:
            res = sp.kernel_transport_residual(p, h.eigenvalue, h.multiplicity)
            rep.check(f"kernel_transport[{h.eigenvalue:.12g}]", res, sp.THRESHOLDS["kernel_transport"])
    rep.extend(sp.identity_suite(p, args.z, args.seed))
    _schur(rep, p, args.z)
    _graph_constants(rep, p, args.z)


def analyze_chain(args, c: an.ChainPair, rep: Report) -> None:
    pr = an.chain_provider(c, args.delta)
    window = args.window or (0.0, 0.9 * c.lowest_dirichlet)
    hits = _search(rep, pr, window, args.grid, args.tol)
    a, b = window
    kmax = int(np.ceil(np.sqrt(max(b, 0.0)) * c.total_length / np.pi)) + 2
    truth = [e for e in c.neumann_spectrum(kmax) if a <= e <= b]
    rep.spectrum("closed_form", truth)
    rep.spectrum("dirichlet_truncated", c.dirichlet_points(a, b))
    found = [h.eigenvalue for h in hits for _ in range(h.multiplicity)]
    _compare_multisets(rep, "ground_truth", found, truth, rel=True)
    _herglotz(rep, pr, args.z)
    _monotonicity(rep, pr, window)


def analyze_interval(args, it: an.IntervalPair, rep: Report) -> None:
    ell = it.length
    pr = an.interval_provider(it, args.delta)
    window = args.window or (-0.5, 100.0)
    hits = _search(rep, pr, window, args.grid, args.tol)
    a, b = window
    kmax = int(np.ceil(np.sqrt(max(b, 0.0)) * ell / np.pi)) + 1
    truth = [e for e in (np.arange(kmax + 1) * np.pi / ell) ** 2 if a <= e <= b]
    rep.spectrum("closed_form", truth)
    rep.spectrum("determinant_zeros", sp.determinant_zeros(pr, window))
    found = [h.eigenvalue for h in hits for _ in range(h.multiplicity)]
    _compare_multisets(rep, "ground_truth", found, truth, rel=True)
    lam0 = np.linalg.eigvalsh(pr.hermitian(0.0))
    rep.check("interval_dtn_zero", float(np.max(np.abs(lam0 - [0.0, 2.0 / ell]))), EXTRA_THRESHOLDS["interval_dtn_zero"])
    lam_m1 = np.linalg.eigvalsh(pr.hermitian(-1.0))
    coth = 1.0 / math.tanh(ell / 2)
    rep.check("norm_identity", abs(1.0 / lam_m1[0] - coth) / coth, EXTRA_THRESHOLDS["norm_identity"])
    rep.constants = {"gamma_norm_squared": 1.0 / float(lam_m1[0])}
    _herglotz(rep, pr, args.z)
    _monotonicity(rep, pr, window)


def verify_pair(args, p: pc.FiniteBoundaryPair, rep: Report) -> None:
    pr = sp.matrix_provider(p)
    rep.extend(sp.identity_suite(p, args.z, args.seed))
    _herglotz(rep, pr, args.z)
    window = args.window or (-1.0, float(p.neumann_spectrum[-1]) + 1.0)
    _monotonicity(rep, pr, window)
    cc = pc.classification_constants(p)
    rep.check("gamma_norm_agreement", cc.gamma_norm_agreement, EXTRA_THRESHOLDS["gamma_norm_agreement"])


def verify_graph(args, g: GraphModel, rep: Report) -> None:
    p = pc.graph_pair(g, args.delta)
    verify_pair(args, p, rep)
    _schur(rep, p, args.z)


def verify_analytic(args, pr: sp.DtnProvider, rep: Report, default_window) -> None:
    _herglotz(rep, pr, args.z)
    _monotonicity(rep, pr, args.window or default_window)


def _dtn_table(rep: Report, fn, zs) -> list[dict]:
    rows = []
    for z in zs:
        try:
            lam = fn(z)
        except BoundaryPairError as exc:
            rep.notes.append(f"z={_zstr(z)} skipped: {exc}")
            continue
        rows.append({"z": _zstr(z), "re": np.real(lam), "im": np.imag(lam)})
    rep.extra["dtn_table"] = rows
    return rows


def construct(args, rep: Report) -> None:
    g1 = parse_input(args.input, "graph")
    zs = args.z
    kind = args.kind
    if kind in ("glue", "sum", "dcouple"):
        if args.input2 is None:
            raise ParseError(f"construct {kind} needs --input2")
        g2 = parse_input(args.input2, "graph")
    p1 = pc.graph_pair(g1, args.delta)
    if kind == "robin":
        pa = co.robin(p1, args.a)
        rep.extra["robin_parameter"] = args.a
        _dtn_table(rep, lambda z: pc.dtn(pa, z), zs)
        for z in zs:
            lam = pc.dtn(p1, z)
            rep.check(f"robin_shift[{_zstr(z)}]", _rel(pc.dtn(pa, z) - lam - args.a * np.eye(p1.m), lam), EXTRA_THRESHOLDS["robin_shift"])
    elif kind == "glue":
        glued = co.glue_graphs(g1, g2)
        p = pc.graph_pair(glued.graph, args.delta)
        rep.extra["model"] = graph_to_json(glued.graph)
        _dtn_table(rep, lambda z: pc.dtn(p, z), zs)
        for z in zs:
            l1, l2 = co.part_dtns_on_glued_boundary(g1, g2, z)
            lam = pc.dtn(p, z)
            rep.check(f"glue_sum_law[{_zstr(z)}]", _rel(lam - l1 - l2, lam), EXTRA_THRESHOLDS["glue_sum_law"])
            rn = pc.neumann_resolvent(p, z)
            res = co.coupled_krein_residual(g1, g2, z) / max(1.0, nc.operator_norm(rn, p.state, p.state))
            rep.check(f"coupled_krein[{_zstr(z)}]", res, EXTRA_THRESHOLDS["coupled_krein"])
    elif kind == "sum":
        union = disjoint_union(g1, g2)
        p2 = pc.graph_pair(g2, args.delta)
        ps = co.direct_sum(p1, p2)
        rep.extra["model"] = graph_to_json(union)
        _dtn_table(rep, lambda z: pc.dtn(ps, z), zs)
        for z in zs:
            lam = pc.dtn(ps, z)
            off = max(np.max(np.abs(lam[: p1.m, p1.m:]), initial=0.0), np.max(np.abs(lam[p1.m:, : p1.m]), initial=0.0))
            blocks = max(np.max(np.abs(lam[: p1.m, : p1.m] - pc.dtn(p1, z))), np.max(np.abs(lam[p1.m:, p1.m:] - pc.dtn(p2, z))))
            rep.check(f"direct_sum_blocks[{_zstr(z)}]", max(off, blocks), EXTRA_THRESHOLDS["direct_sum_blocks"])
        rep.spectrum("neumann", ps.neumann_spectrum)
    elif kind == "dcouple":
        p2 = pc.graph_pair(g2, args.delta)
        prov = co.dirichlet_couple_ntd(sp.matrix_provider(p1), sp.matrix_provider(p2))
        direct = co.dirichlet_coupled_pair(p1, p2)
        _dtn_table(rep, prov.dtn_at, zs)
        for z in zs:
            lam = prov.dtn_at(z)
            rep.check(f"dcouple_direct[{_zstr(z)}]", _rel(lam - pc.dtn(direct, z), lam), EXTRA_THRESHOLDS["dcouple_direct"])
        rep.spectrum("neumann_direct", direct.neumann_spectrum)
    elif kind == "boundedmod":
        bm = co.bounded_modification_dtn(p1)
        _dtn_table(rep, bm, zs)
        rep.check("bounded_identity", float(np.max(np.abs(bm(-1.0) - np.eye(p1.m)))), EXTRA_THRESHOLDS["bounded_identity"])
        samples = []
        for z in zs:
            norm, bound = bm.norm(z), bm.bound(z)
            samples.append({"z": _zstr(z), "norm": norm, "bound": bound})
            rep.check(f"bounded_norm[{_zstr(z)}]", max(0.0, norm - bound * (1 + 1e-12)), EXTRA_THRESHOLDS["bounded_norm"])
        rep.constants = {"L(z)": samples}


def disjoint_union(g1: GraphModel, g2: GraphModel) -> GraphModel:
    """Graph of the direct sum; clashing ids of ``g2`` get a ``'`` suffix."""
    taken = {v for v, _ in g1.vertices}
    rename = {}
    for v, _ in g2.vertices:
        new = v
        while new in taken:
            new = f"{new}'"
        rename[v] = new
        taken.add(new)
    return GraphModel(
        tuple(g1.vertices) + tuple((rename[v], mu) for v, mu in g2.vertices),
        tuple(g1.edges) + tuple((rename[a], rename[b], rho) for a, b, rho in g2.edges),
        tuple(g1.boundary) + tuple(rename[v] for v in g2.boundary),
    )


# --------------------------------------------------------------------------
# csv tables


def _csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.get("dtn_table"):
        w.writerow(["z", "row", "col", "re", "im"])
        for row in report["dtn_table"]:
            re_, im_ = np.atleast_2d(row["re"]), np.atleast_2d(row["im"])
            for i in range(re_.shape[0]):
                for j in range(re_.shape[1]):
                    w.writerow([row["z"], i, j, format(float(re_[i, j]), ".17g"), format(float(im_[i, j]), ".17g")])
    else:
        w.writerow(["label", "value", "multiplicity", "at_dirichlet"])
        for s in report["spectra"]:
            for e in s["values"]:
                w.writerow([s["label"], format(e["value"], ".17g"), e["multiplicity"], e.get("at_dirichlet", "")])
    return buf.getvalue()


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundary-pairs",
        description="Spectral analysis and identity verification for finite boundary pairs.",
        epilog="Complex values are written a, bi or a+bi / a-bi with decimal parts, e.g. -1, 2i, 0.5+1i, 1e-3-2.5i.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, kinds):
        p.add_argument("kind", choices=kinds)
        p.add_argument("--input", help="model file (JSON)")
        p.add_argument("--input2", help="second model file for two-part constructions")
        p.add_argument("--window", nargs=2, type=float, metavar=("A", "B"))
        p.add_argument("--grid", type=int, default=256, help="samples per Dirichlet-free gap (default 256)")
        p.add_argument("--tol", type=float, default=1e-10, help="root residual tolerance (default 1e-10)")
        p.add_argument("--delta", type=float, default=1e-8, help="pole exclusion radius (default 1e-8)")
        p.add_argument("--z", type=parse_complex, action="append", help="spectral parameter, repeatable")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        return p

    common(sub.add_parser("analyze", help="locate Neumann eigenvalues and report spectra"), ("graph", "chain", "interval"))
    v = common(sub.add_parser("verify", help="run the identity and property suites"), ("graph", "chain", "interval", "random"))
    v.add_argument("--n", type=int, default=8, help="state dimension for random pairs")
    v.add_argument("--m", type=int, default=3, help="boundary dimension for random pairs")
    c = common(sub.add_parser("construct", help="build a derived pair and tabulate its DtN"), ("robin", "glue", "sum", "dcouple", "boundedmod"))
    c.add_argument("--a", type=float, default=1.0, help="Robin parameter (default 1)")
    return parser


def _dispatch(args, rep: Report) -> None:
    if args.command == "construct":
        construct(args, rep)
        return
    if args.kind == "random":
        if not 1 <= args.m <= args.n:
            raise SchemaViolation("need 1 <= m <= n")
        p = pc.random_pair(args.n, args.m, np.random.default_rng(args.seed)).with_delta(args.delta)
        rep.extra["model"] = {"n": args.n, "m": args.m, "seed": args.seed}
        verify_pair(args, p, rep)
        return
    model = parse_input(args.input, args.kind)
    if args.command == "analyze":
        {"graph": analyze_graph, "chain": analyze_chain, "interval": analyze_interval}[args.kind](args, model, rep)
    elif args.kind == "graph":
        verify_graph(args, model, rep)
    elif args.kind == "chain":
        verify_analytic(args, an.chain_provider(model, args.delta), rep, (0.0, 0.9 * model.lowest_dirichlet))
    else:
        verify_analytic(args, an.interval_provider(model, args.delta), rep, (-1.0, 100.0))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.z = args.z or [parse_complex(s) for s in DEFAULT_Z]
    if args.window is not None and not args.window[0] < args.window[1]:
        print("error: --window needs A < B", file=sys.stderr)
        return 2
    needs_input = not (args.command == "verify" and args.kind == "random")
    if needs_input and args.input is None:
        print(f"error: {args.command} {args.kind} needs --input", file=sys.stderr)
        return 2
    try:
        inputs = [p for p in (args.input, args.input2) if p is not None] if needs_input else []
        for path in inputs:
            if not os.path.isfile(path):
                raise ParseError(f"{path}: no such file")
        rep = Report(f"{args.command} {args.kind}", inputs)
        _dispatch(args, rep)
    except BoundaryPairError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    report = rep.as_dict()
    text = dumps_report(report) if args.format == "json" else _csv(report)
    _write_atomic(args.out, text)
    for c in rep.checks:
        if not c.passed:
            print(f"check failed: {c.name} residual={c.residual:.3e} threshold={c.threshold:.1e}", file=sys.stderr)
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())
