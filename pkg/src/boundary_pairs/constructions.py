"""Boundary pairs built from other boundary pairs.

Robin perturbation, Neumann gluing of graphs along shared boundary
vertices, Dirichlet coupling at the DtN level, direct sums and the bounded
modification (renorming the boundary space by the DtN operator at -1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numcore as nc
from . import pair_core as pc
from .errors import BoundaryMismatch, NegativeRobinParameter, SingularSum
from .numcore import WeightedSpace
from .pair_core import FiniteBoundaryPair, GraphModel
from .spectral import DtnProvider


def robin(p: FiniteBoundaryPair, a: float) -> FiniteBoundaryPair:
    """Pair for the form ``h(f) + a ||Gamma f||^2``; Gamma and spaces unchanged."""
    a = float(a)
    if not a >= 0:
        raise NegativeRobinParameter(f"Robin parameter must be >= 0, got {a}")
    ga = nc.weighted_adjoint(p.gamma, p.state, p.boundary)
    return FiniteBoundaryPair(p.state, p.boundary, p.neumann_op + a * ga @ p.gamma, p.gamma, p.delta, p.labels)


# --------------------------------------------------------------------------
# Neumann gluing


@dataclass(frozen=True)
class Gluing:
    """Glued graph plus the bookkeeping needed to compare with the parts."""

    graph: GraphModel
    inner_1: tuple
    inner_2: tuple
    rename_2: dict


def _identification(g1: GraphModel, g2: GraphModel, identify: dict | None) -> dict:
    if identify is None:
        identify = {v: v for v in g2.boundary}
    targets = list(identify.values())
    if set(identify) != set(g2.boundary) or len(set(targets)) != len(targets) or set(targets) != set(g1.boundary):
        raise BoundaryMismatch("identification must be a bijection between the two boundary sets")
    return dict(identify)


def glue_graphs(g1: GraphModel, g2: GraphModel, identify: dict | None = None) -> Gluing:
    """Identify ``g2``'s boundary with ``g1``'s, adding the vertex weights.

    ``identify`` maps boundary ids of ``g2`` to boundary ids of ``g1``
    (default: equal ids).  Inner vertices of ``g2`` whose ids clash with
    ``g1`` are renamed with a ``'`` suffix.
    """
    ident = _identification(g1, g2, identify)
    taken = {v for v, _ in g1.vertices}
    rename = dict(ident)
    for v, _ in g2.vertices:
        if v in rename:
            continue
        new = v
        while new in taken:
            new = f"{new}'"
        rename[v] = new
        taken.add(new)
    mu = dict(g1.vertices)
    for v, w in g2.vertices:
        mu[rename[v]] = mu.get(rename[v], 0.0) + w
    order = [v for v, _ in g1.vertices] + [rename[v] for v, _ in g2.vertices if v not in ident]
    edges = tuple(g1.edges) + tuple((rename[a], rename[b], rho) for a, b, rho in g2.edges)
    glued = GraphModel(tuple((v, mu[v]) for v in order), edges, g1.boundary)
    bd1, bd2 = set(g1.boundary), set(g2.boundary)
    inner_1 = tuple(v for v, _ in g1.vertices if v not in bd1)
    inner_2 = tuple(rename[v] for v, _ in g2.vertices if v not in bd2)
    return Gluing(glued, inner_1, inner_2, rename)


def glue_neumann(g1: GraphModel, g2: GraphModel, identify: dict | None = None) -> FiniteBoundaryPair:
    """Neumann-coupled pair: shared boundary, decoupled Dirichlet part."""
    return pc.graph_pair(glue_graphs(g1, g2, identify).graph)


def part_dtns_on_glued_boundary(g1: GraphModel, g2: GraphModel, z: complex, identify: dict | None = None):
    """DtN matrices of the two parts, both represented w.r.t. the glued ``nu``.

    Rows/columns follow ``g1.boundary``.  Their sum equals the glued DtN.
    """
    ident = _identification(g1, g2, identify)
    p1, p2 = pc.graph_pair(g1), pc.graph_pair(g2)
    perm = [list(g2.boundary).index(next(k for k, v in ident.items() if v == b)) for b in g1.boundary]
    nu1 = p1.boundary.weights
    nu2 = p2.boundary.weights[perm]
    nu = nu1 + nu2
    lam1 = pc.dtn(p1, z)
    lam2 = pc.dtn(p2, z)[np.ix_(perm, perm)]
    # the form matrix diag(nu_i) Lambda_i is independent of the boundary weights
    return (nu1[:, None] * lam1) / nu[:, None], (nu2[:, None] * lam2) / nu[:, None]


def coupled_krein_residual(g1: GraphModel, g2: GraphModel, z: complex, identify: dict | None = None) -> float:
    """Glued resolvent vs. Dirichlet resolvents and solution operators of the parts."""
    glu = glue_graphs(g1, g2, identify)
    p = pc.graph_pair(glu.graph)
    p1, p2 = pc.graph_pair(g1), pc.graph_pair(g2)
    ident = glu.rename_2
    pos = {v: i for i, v in enumerate(p.labels)}
    m = p.m
    n = p.n

    def embed_inner(part: FiniteBoundaryPair, names) -> np.ndarray:
        rows = np.zeros((n, part.n - part.m))
        for k, v in enumerate(names):
            rows[pos[v], k] = 1.0
        return rows

    e1 = embed_inner(p1, p1.labels[p1.m:])
    e2 = embed_inner(p2, [ident[v] for v in p2.labels[p2.m:]])
    perm2 = [list(g2.boundary).index(next(k for k, v in ident.items() if v == b)) for b in g1.boundary]

    def assemble(zz: complex) -> np.ndarray:
        s1 = pc.solution_operator(p1, zz)
        s2 = pc.solution_operator(p2, zz)[:, perm2]
        s = np.zeros((n, m), complex)
        s[:m] = np.eye(m)
        s += e1 @ s1[p1.m:] + e2 @ s2[p2.m:]
        return s

    rd = np.zeros((n, n), complex)
    for part, e in ((p1, e1), (p2, e2)):
        r = pc.dirichlet_resolvent(part, z)[part.m:, part.m:]
        rd += e @ r @ e.T
    lam1, lam2 = part_dtns_on_glued_boundary(g1, g2, z, identify)
    s_z = assemble(z)
    s_conj = assemble(np.conj(z))
    rhs = rd + s_z @ nc.inverse(lam1 + lam2) @ nc.weighted_adjoint(s_conj, p.boundary, p.state)
    return nc.operator_norm(pc.neumann_resolvent(p, z) - rhs, p.state, p.state)


# --------------------------------------------------------------------------
# Dirichlet coupling


def dirichlet_coupled_pair(p1: FiniteBoundaryPair, p2: FiniteBoundaryPair) -> FiniteBoundaryPair:
    """Direct construction with ``Gamma f = Gamma_1 f_1 - Gamma_2 f_2`` on the disjoint union."""
    if p1.m != p2.m or not np.allclose(p1.boundary.weights, p2.boundary.weights, rtol=1e-14, atol=0):
        raise BoundaryMismatch("Dirichlet coupling needs equal boundary spaces")
    state = p1.state.direct_sum(p2.state)
    neumann = _block_diag(p1.neumann_op, p2.neumann_op)
    gamma = np.hstack([p1.gamma, -p2.gamma])
    return FiniteBoundaryPair(state, p1.boundary, neumann, gamma, max(p1.delta, p2.delta))


def dirichlet_couple_ntd(pr1: DtnProvider, pr2: DtnProvider, dirichlet_points=None) -> DtnProvider:
    """Provider for the Dirichlet-coupled pair via ``Lt(z)^-1 = L1(z)^-1 + L2(z)^-1``.

    The poles of the coupled DtN are the eigenvalues of the coupled Dirichlet
    operator.  When both providers wrap matrix pairs they are computed from
    the direct construction; otherwise ``dirichlet_points`` may be supplied
    (callable ``(lo, hi) -> points``) and defaults to the union of the parts'
    Dirichlet points.
    """
    if pr1.boundary.dim != pr2.boundary.dim or not np.allclose(pr1.boundary.weights, pr2.boundary.weights):
        raise BoundaryMismatch("Dirichlet coupling needs equal boundary spaces")
    pair = None
    if pr1.pair is not None and pr2.pair is not None:
        pair = dirichlet_coupled_pair(pr1.pair, pr2.pair)
    if dirichlet_points is None:
        if pair is not None:
            spec = pair.decomposition.dirichlet_spectrum

            def dirichlet_points(lo, hi):
                return spec[(spec >= lo) & (spec <= hi)]
        else:
            def dirichlet_points(lo, hi):
                return np.sort(np.concatenate([pr1.dirichlet_points(lo, hi), pr2.dirichlet_points(lo, hi)]))

    def dtn_at(z):
        ntd_sum = nc.inverse(pr1.dtn_at(z)) + nc.inverse(pr2.dtn_at(z))
        try:
            return nc.inverse(ntd_sum)
        except nc.Singular as exc:
            raise SingularSum(f"NtD sum is singular at z={z}") from exc

    return DtnProvider(
        dtn_at, dirichlet_points, pr1.boundary, max(pr1.delta, pr2.delta), f"dcouple({pr1.label},{pr2.label})", pair
    )


# --------------------------------------------------------------------------
# direct sum and bounded modification


def _block_diag(a, b) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), complex)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def direct_sum(p1: FiniteBoundaryPair, p2: FiniteBoundaryPair) -> FiniteBoundaryPair:
    labels = None
    if p1.labels is not None and p2.labels is not None:
        labels = tuple(p1.labels) + tuple(p2.labels)
    return FiniteBoundaryPair(
        p1.state.direct_sum(p2.state),
        p1.boundary.direct_sum(p2.boundary),
        _block_diag(p1.neumann_op, p2.neumann_op),
        _block_diag(p1.gamma, p2.gamma),
        max(p1.delta, p2.delta),
        labels,
    )


def empty_pair() -> FiniteBoundaryPair:
    """Zero-dimensional pair; the neutral element of :func:`direct_sum`."""
    return FiniteBoundaryPair(WeightedSpace(np.ones(0)), WeightedSpace(np.ones(0)), np.zeros((0, 0)), np.zeros((0, 0)))


class BoundedModification:
    """DtN family of the boundary space renormed by ``||phi||_1/2 = ||S(-1) phi||_1``.

    Calling the object returns ``Lambda(-1)^-1 Lambda(z)``.  Norms are taken
    in the renormed space, where the family is bounded by
    ``L(z) = 1 + |z + 1| ||S(z)||_{1/2 -> 1}``.
    """

    def __init__(self, p: FiniteBoundaryPair):
        self.pair = p
        self._lam_inv = nc.inverse(pc.dtn(p, -1.0))
        half = p.boundary.weights[:, None] * pc.dtn(p, -1.0)
        self._half_sqrt, self._half_isqrt = _sqrt_pair(0.5 * (half + half.conj().T))
        self._h1_sqrt, _ = _sqrt_pair(pc.h1_gram(p))

    def __call__(self, z: complex) -> np.ndarray:
        return self._lam_inv @ pc.dtn(self.pair, z)

    def norm(self, z: complex) -> float:
        return float(np.linalg.norm(self._half_sqrt @ self(z) @ self._half_isqrt, 2))

    def spectral_radius(self, z: complex) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self(z)))))

    def bound(self, z: complex) -> float:
        s = pc.solution_operator(self.pair, z)
        return 1.0 + abs(z + 1) * float(np.linalg.norm(self._h1_sqrt @ s @ self._half_isqrt, 2))


def _sqrt_pair(g: np.ndarray):
    vals, vecs = np.linalg.eigh(g)
    root = np.sqrt(vals)
    return (vecs * root) @ vecs.conj().T, (vecs / root) @ vecs.conj().T


def bounded_modification_dtn(p: FiniteBoundaryPair) -> BoundedModification:
    return BoundedModification(p)
