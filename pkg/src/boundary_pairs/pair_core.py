"""Finite-dimensional boundary pairs and their derived operators.

A pair consists of a state space ``C^n`` with vertex weights ``mu``, a
boundary space ``C^m`` with weights ``nu``, a non-negative operator ``N``
(self-adjoint w.r.t. ``mu``) and a surjective boundary map ``Gamma``.  In
finite dimension ``ker Gamma`` is never dense unless ``Gamma = 0``, so the
Dirichlet operator lives on the proper subspace ``ker Gamma`` and its
resolvent is extended by zero on the orthogonal complement.

All operators below are matrices in the coordinates of the state and
boundary spaces; "adjoint" always means the weighted adjoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import numcore as nc
from .errors import (
    GammaNotSurjective,
    GraphModelError,
    NotBlockStructured,
    NotPSD,
    NotSelfAdjoint,
    TooCloseToDirichletSpectrum,
    TooCloseToNeumannSpectrum,
)
from .numcore import WeightedSpace

DEFAULT_DELTA = 1e-8
PSD_TOL = 1e-10
KERNEL_REL_TOL = 1e-8


@dataclass(frozen=True)
class DirichletDecomposition:
    kernel_basis: np.ndarray
    dirichlet_op: np.ndarray
    dirichlet_spectrum: np.ndarray


@dataclass(frozen=True)
class PairDiagnostics:
    psd_margin: float
    symmetry_residual: float
    gamma_rank: int


@dataclass(frozen=True, eq=False)
class FiniteBoundaryPair:
    """State/boundary spaces, Neumann operator matrix and boundary map.

    ``delta`` is the pole-exclusion radius used by every resolvent-touching
    operation.  ``labels`` optionally names the state coordinates (graph
    vertex ids for pairs built by :func:`graph_pair`).
    """

    state: WeightedSpace
    boundary: WeightedSpace
    neumann_op: np.ndarray
    gamma: np.ndarray
    delta: float = DEFAULT_DELTA
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        n, m = self.state.dim, self.boundary.dim
        object.__setattr__(self, "neumann_op", _frozen(nc.as_matrix(self.neumann_op, n, n) if n else np.zeros((0, 0), complex)))
        g = np.zeros((m, n), complex) if m * n == 0 else nc.as_matrix(self.gamma, m, n)
        object.__setattr__(self, "gamma", _frozen(g))
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def n(self) -> int:
        return self.state.dim

    @property
    def m(self) -> int:
        return self.boundary.dim

    @cached_property
    def decomposition(self) -> DirichletDecomposition:
        return dirichlet_decompose(self)

    @cached_property
    def neumann_spectrum(self) -> np.ndarray:
        return nc.eigvals_self_adjoint(self.neumann_op, self.state)

    @cached_property
    def default_lift(self) -> np.ndarray:
        """Minimum-norm right inverse ``Gamma° (Gamma Gamma°)^-1`` of Gamma."""
        ga = nc.weighted_adjoint(self.gamma, self.state, self.boundary)
        return ga @ nc.inverse(self.gamma @ ga)

    def with_delta(self, delta: float) -> "FiniteBoundaryPair":
        return FiniteBoundaryPair(self.state, self.boundary, self.neumann_op, self.gamma, delta, self.labels)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def make_pair(mu, nu, neumann_op, gamma, delta: float = DEFAULT_DELTA) -> FiniteBoundaryPair:
    return FiniteBoundaryPair(WeightedSpace(mu), WeightedSpace(nu), neumann_op, gamma, delta)


def with_boundary_weights(p: FiniteBoundaryPair, nu) -> FiniteBoundaryPair:
    """Same form and boundary map, boundary space re-weighted by ``nu``."""
    return FiniteBoundaryPair(p.state, WeightedSpace(nu), p.neumann_op, p.gamma, p.delta, p.labels)


def validate_pair(p: FiniteBoundaryPair) -> PairDiagnostics:
    """Check the boundary-pair invariants and return diagnostics.

    Raises
    ------
    NotSelfAdjoint, NotPSD, GammaNotSurjective
    """
    sym = nc.symmetry_residual(p.neumann_op, p.state)
    if sym > nc.SYMMETRY_TOL:
        raise NotSelfAdjoint(f"Neumann operator symmetry residual {sym:.3e}")
    evs = nc.eigvals_self_adjoint(p.neumann_op, p.state)
    margin = float(evs[0]) if evs.size else 0.0
    scale = 1.0 + (float(np.max(np.abs(evs))) if evs.size else 0.0)
    if margin < -PSD_TOL * scale:
        raise NotPSD(f"Neumann operator has eigenvalue {margin:.3e} < 0")
    if p.m > p.n:
        raise GammaNotSurjective(f"boundary dimension {p.m} exceeds state dimension {p.n}")
    rank = int(np.linalg.matrix_rank(p.gamma)) if p.m else 0
    if rank < p.m:
        raise GammaNotSurjective(f"rank of Gamma is {rank}, boundary dimension is {p.m}")
    return PairDiagnostics(margin, sym, rank)


# --------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class GraphModel:
    """Finite weighted graph with a set of boundary vertices.

    ``vertices`` holds ``(id, mu)``, ``edges`` holds ``(a, b, rho)``.
    Parallel edges are allowed and add up.
    """

    vertices: tuple
    edges: tuple
    boundary: tuple

    def __post_init__(self):
        verts = tuple((v, float(mu)) for v, mu in self.vertices)
        edges = tuple((a, b, float(rho)) for a, b, rho in self.edges)
        bd = tuple(self.boundary)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "boundary", bd)
        ids = [v for v, _ in verts]
        if len(set(ids)) != len(ids):
            raise GraphModelError("vertex ids must be unique")
        if any(not (mu > 0 and np.isfinite(mu)) for _, mu in verts):
            raise GraphModelError("vertex weights mu must be positive")
        known = set(ids)
        for a, b, rho in edges:
            if a not in known or b not in known:
                raise GraphModelError(f"edge ({a!r}, {b!r}) has an unknown endpoint")
            if a == b:
                raise GraphModelError(f"self-loop at {a!r}")
            if not (rho > 0 and np.isfinite(rho)):
                raise GraphModelError("edge weights rho must be positive")
        if not bd:
            raise GraphModelError("boundary must be nonempty")
        if len(set(bd)) != len(bd) or not set(bd) <= known:
            raise GraphModelError("boundary must list distinct existing vertices")

    @classmethod
    def from_edges(cls, edges: Sequence, boundary: Sequence, mu: dict | None = None, rho: float = 1.0):
        """Unit-weight convenience constructor from an edge list of id pairs."""
        ids: list = []
        for a, b in edges:
            for v in (a, b):
                if v not in ids:
                    ids.append(v)
        mu = mu or {}
        return cls(tuple((v, mu.get(v, 1.0)) for v in ids), tuple((a, b, rho) for a, b in edges), tuple(boundary))

    def normalised(self) -> "GraphModel":
        """Same graph with ``mu(v) = deg v`` and unit edge weights."""
        deg = {v: 0 for v, _ in self.vertices}
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        if any(d == 0 for d in deg.values()):
            raise GraphModelError("normalised Laplacian needs every vertex to have an edge")
        return GraphModel(
            tuple((v, float(deg[v])) for v, _ in self.vertices),
            tuple((a, b, 1.0) for a, b, _ in self.edges),
            self.boundary,
        )

    @property
    def ordering(self) -> list:
        """Boundary vertices first (in boundary order), then inner vertices."""
        bd = set(self.boundary)
        return list(self.boundary) + [v for v, _ in self.vertices if v not in bd]

    def laplacian_form(self) -> np.ndarray:
        """Matrix of the energy form ``sum_e rho(e) |f(a) - f(b)|^2``."""
        order = self.ordering
        idx = {v: i for i, v in enumerate(order)}
        form = np.zeros((len(order), len(order)))
        for a, b, rho in self.edges:
            i, j = idx[a], idx[b]
            form[i, i] += rho
            form[j, j] += rho
            form[i, j] -= rho
            form[j, i] -= rho
        return form


def graph_pair(g: GraphModel, delta: float = DEFAULT_DELTA) -> FiniteBoundaryPair:
    """Boundary pair of a discrete weighted graph.

    ``N = diag(mu)^-1 L`` with ``L`` the rho-weighted Laplacian form,
    ``Gamma`` is restriction to the boundary vertices and the boundary
    space carries ``nu = mu`` restricted to the boundary.
    """
    order = g.ordering
    mu_of = dict(g.vertices)
    mu = np.array([mu_of[v] for v in order])
    m = len(g.boundary)
    neumann = g.laplacian_form() / mu[:, None]
    gamma = np.zeros((m, len(order)))
    gamma[:, :m] = np.eye(m)
    p = FiniteBoundaryPair(WeightedSpace(mu), WeightedSpace(mu[:m]), neumann, gamma, delta, tuple(order))
    validate_pair(p)
    return p


# --------------------------------------------------------------------------
# Dirichlet part


def dirichlet_decompose(p: FiniteBoundaryPair) -> DirichletDecomposition:
    """mu-orthonormal basis ``K`` of ``ker Gamma`` and ``H^D = K° N K``."""
    k = nc.weighted_orthonormal_kernel(p.gamma, p.state)
    if k.shape[1] == 0:
        return DirichletDecomposition(k, np.zeros((0, 0), complex), np.zeros(0))
    # K° = K^H M, so K° N K = K^H (M N) K is Hermitian in the orthonormal coordinates
    hd = (k.conj().T * p.state.weights[None, :]) @ p.neumann_op @ k
    hd = 0.5 * (hd + hd.conj().T)
    spec = np.linalg.eigvalsh(hd)
    return DirichletDecomposition(k, hd, spec)


def dirichlet_distance(p: FiniteBoundaryPair, z: complex) -> float:
    spec = p.decomposition.dirichlet_spectrum
    return float(np.min(np.abs(spec - z))) if spec.size else np.inf


def neumann_distance(p: FiniteBoundaryPair, z: complex) -> float:
    spec = p.neumann_spectrum
    return float(np.min(np.abs(spec - z))) if spec.size else np.inf


def _check_dirichlet(p: FiniteBoundaryPair, z: complex) -> None:
    d = dirichlet_distance(p, z)
    if d < p.delta:
        raise TooCloseToDirichletSpectrum(
            f"z={z} lies within {d:.3e} of the Dirichlet spectrum (exclusion radius delta={p.delta:.1e})"
        )


def _check_neumann(p: FiniteBoundaryPair, z: complex) -> None:
    d = neumann_distance(p, z)
    if d < p.delta:
        raise TooCloseToNeumannSpectrum(
            f"z={z} lies within {d:.3e} of the Neumann spectrum (exclusion radius delta={p.delta:.1e})"
        )


def dirichlet_resolvent(p: FiniteBoundaryPair, z: complex) -> np.ndarray:
    """``(H^D - z)^-1`` on ``ker Gamma``, extended by zero on its complement."""
    _check_dirichlet(p, z)
    dec = p.decomposition
    k = dec.kernel_basis
    if k.shape[1] == 0:
        return np.zeros((p.n, p.n), complex)
    inner = nc.inverse(dec.dirichlet_op - z * np.eye(k.shape[1]))
    return k @ inner @ (k.conj().T * p.state.weights[None, :])


def neumann_resolvent(p: FiniteBoundaryPair, z: complex) -> np.ndarray:
    _check_neumann(p, z)
    return nc.inverse(p.neumann_op - z * np.eye(p.n))


# --------------------------------------------------------------------------
# solution operators and DtN


def solution_operator(p: FiniteBoundaryPair, z: complex, lift: np.ndarray | None = None) -> np.ndarray:
    """Dirichlet solution operator ``S(z) = (I - R^D(z)(N - z)) L``.

    ``lift`` is any right inverse of Gamma; the result does not depend on it.
    """
    lift = p.default_lift if lift is None else np.asarray(lift, complex)
    rd = dirichlet_resolvent(p, z)
    shifted = p.neumann_op - z * np.eye(p.n)
    return lift - rd @ (shifted @ lift)


def transfer(p: FiniteBoundaryPair, z: complex, w: complex) -> np.ndarray:
    """``U(z, w) = I + (z - w) R^D(z)``; maps weak solutions at ``w`` to ``z``."""
    _check_dirichlet(p, w)
    return np.eye(p.n) + (z - w) * dirichlet_resolvent(p, z)


def projection(p: FiniteBoundaryPair, z: complex) -> np.ndarray:
    """Projection ``P(z) = S(z) Gamma`` onto weak solutions along ``ker Gamma``."""
    return solution_operator(p, z) @ p.gamma


def dtn(p: FiniteBoundaryPair, z: complex, lift: np.ndarray | None = None) -> np.ndarray:
    """DtN matrix: the nu-representative of ``(phi, psi) -> <(N-z) S(z) phi, L psi>``."""
    lift = p.default_lift if lift is None else np.asarray(lift, complex)
    s = solution_operator(p, z, lift)
    residual = (p.neumann_op - z * np.eye(p.n)) @ s
    return nc.weighted_adjoint(lift, p.boundary, p.state) @ residual


def dtn_derivative(p: FiniteBoundaryPair, z: complex) -> np.ndarray:
    """Analytic derivative ``-S(conj z)° S(z)`` of the DtN family."""
    s = solution_operator(p, z)
    s_conj = solution_operator(p, np.conj(z))
    return -nc.weighted_adjoint(s_conj, p.boundary, p.state) @ s


def block_structure(p: FiniteBoundaryPair) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Blocks ``A, B, C, D`` of ``N`` for a boundary-first coordinate pair.

    Raises
    ------
    NotBlockStructured
        Unless ``Gamma = [I, 0]`` and ``nu`` is ``mu`` on the first ``m`` slots.
    """
    m = p.m
    expected = np.zeros((m, p.n))
    expected[:, :m] = np.eye(m)
    if not np.array_equal(p.gamma, expected) or not np.allclose(
        p.boundary.weights, p.state.weights[:m], rtol=1e-14, atol=0
    ):
        raise NotBlockStructured("pair is not in boundary-first coordinate form")
    n_ = p.neumann_op
    return n_[:m, :m], n_[:m, m:], n_[m:, :m], n_[m:, m:]


def schur_dtn(p: FiniteBoundaryPair, z: complex) -> np.ndarray:
    """DtN as the Schur complement ``(A - z) - B (D - z)^-1 C`` of ``N - z``."""
    a, b, c, d = block_structure(p)
    _check_dirichlet(p, z)
    m = p.m
    if d.shape[0] == 0:
        return a - z * np.eye(m)
    return a - z * np.eye(m) - b @ nc.solve(d - z * np.eye(d.shape[0]), c)


def ntd(p: FiniteBoundaryPair, z: complex) -> np.ndarray:
    """NtD matrix ``Gamma (N - z)^-1 Gamma°``; finite on the Dirichlet spectrum too."""
    rn = neumann_resolvent(p, z)
    return p.gamma @ rn @ nc.weighted_adjoint(p.gamma, p.state, p.boundary)


def gamma_prime(p: FiniteBoundaryPair, f) -> np.ndarray:
    """Weak normal derivative: ``Gamma' f = L° N f`` for the default lift ``L``.

    For graph pairs this is ``A f_bd + B f_0``, the flux at the boundary
    vertices.  Green's identity ``h(f,g) = <pi N f, g> + <Gamma'f, Gamma g>``
    holds with ``pi`` the mu-orthogonal projection onto ``ker Gamma``.
    """
    f = np.asarray(f, complex)
    return nc.weighted_adjoint(p.default_lift, p.boundary, p.state) @ (p.neumann_op @ f)


def kernel_projection(p: FiniteBoundaryPair) -> np.ndarray:
    k = p.decomposition.kernel_basis
    return k @ (k.conj().T * p.state.weights[None, :])


def form(p: FiniteBoundaryPair, f, g) -> complex:
    """Energy form ``h(f, g) = <N f, g>_mu``."""
    return p.state.inner(p.neumann_op @ np.asarray(f, complex), g)


def green_residual(p: FiniteBoundaryPair, f, g) -> float:
    f = np.asarray(f, complex)
    g = np.asarray(g, complex)
    lhs = form(p, f, g)
    rhs = p.state.inner(kernel_projection(p) @ (p.neumann_op @ f), g) + p.boundary.inner(gamma_prime(p, f), p.gamma @ g)
    return abs(lhs - rhs)


def krein_residual(p: FiniteBoundaryPair, z: complex) -> float:
    """Weighted operator norm of ``R^N(z) - R^D(z) - S(z) Lambda(z)^-1 S(conj z)°``."""
    rn = neumann_resolvent(p, z)
    rd = dirichlet_resolvent(p, z)
    s = solution_operator(p, z)
    s_conj = solution_operator(p, np.conj(z))
    lam_inv = nc.inverse(dtn(p, z))
    diff = rn - rd - s @ lam_inv @ nc.weighted_adjoint(s_conj, p.boundary, p.state)
    return nc.operator_norm(diff, p.state, p.state)


def kernel_threshold(lam: np.ndarray) -> float:
    """Relative threshold below which an eigenvalue of ``lam`` counts as zero."""
    return KERNEL_REL_TOL * (1.0 + (np.linalg.norm(lam, 2) if np.size(lam) else 0.0))


# --------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class ClassificationConstants:
    c_pos: float
    C_ell: float
    gamma_norm: float
    gamma_norm_from_dtn: float

    @property
    def gamma_norm_agreement(self) -> float:
        return abs(self.gamma_norm - self.gamma_norm_from_dtn) / self.gamma_norm


def h1_gram(p: FiniteBoundaryPair) -> np.ndarray:
    """Gram matrix of the form norm ``||u||^2_mu + h(u)``."""
    g = p.state.weights[:, None] * (np.eye(p.n) + p.neumann_op)
    return 0.5 * (g + g.conj().T)


def _inv_sqrt_psd(g: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(g)
    return (vecs / np.sqrt(vals)[None, :]) @ vecs.conj().T


def classification_constants(p: FiniteBoundaryPair) -> ClassificationConstants:
    """Ellipticity/positivity constants and ``||Gamma||_{1->0}`` computed two ways."""
    s = solution_operator(p, -1.0)
    q = nc.weighted_adjoint(s, p.boundary, p.state) @ s
    qv = nc.eigvals_self_adjoint(q, p.boundary)
    c_pos, c_ell = float(np.sqrt(max(qv[0], 0.0))), float(np.sqrt(qv[-1]))
    direct = nc.operator_norm(p.gamma @ _inv_sqrt_psd(h1_gram(p)), WeightedSpace.uniform(p.n), p.boundary)
    lam_min = nc.eigvals_self_adjoint(dtn(p, -1.0), p.boundary)[0]
    return ClassificationConstants(c_pos, c_ell, direct, float(1.0 / np.sqrt(lam_min)))


# --------------------------------------------------------------------------
# random models


def random_pair(n: int, m: int, rng: np.random.Generator, complex_entries: bool = False) -> FiniteBoundaryPair:
    """Random pair with ``N = G°G + jitter`` and a full-rank random ``Gamma``."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    mu = rng.uniform(0.5, 2.0, n)
    nu = rng.uniform(0.5, 2.0, m)
    g = rng.standard_normal((n, n))
    gamma = rng.standard_normal((m, n))
    if complex_entries:
        g = g + 1j * rng.standard_normal((n, n))
        gamma = gamma + 1j * rng.standard_normal((m, n))
    sp = WeightedSpace(mu)
    neumann = nc.weighted_adjoint(g, sp, sp) @ g / n + np.diag(rng.uniform(0.0, 0.1, n))
    p = make_pair(mu, nu, neumann, gamma)
    validate_pair(p)
    return p


def random_graph(n: int, m: int, rng: np.random.Generator, extra_edges: int | None = None) -> GraphModel:
    """Connected random graph on ``n`` vertices with ``m`` boundary vertices."""
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    ids = [f"v{i}" for i in range(n)]
    edges = []
    perm = rng.permutation(n)
    for k in range(1, n):
        j = perm[rng.integers(0, k)]
        edges.append((ids[perm[k]], ids[j], float(rng.uniform(0.5, 2.0))))
    extra = n // 2 if extra_edges is None else extra_edges
    for _ in range(extra):
        a, b = rng.choice(n, 2, replace=False)
        edges.append((ids[a], ids[b], float(rng.uniform(0.5, 2.0))))
    verts = tuple((v, float(rng.uniform(0.5, 2.0))) for v in ids)
    boundary = tuple(ids[i] for i in sorted(rng.choice(n, m, replace=False)))
    return GraphModel(verts, tuple(edges), boundary)


def path_graph(length: int = 3) -> GraphModel:
    """Unit-weight path ``v0 - v1 - ... `` with both endpoints on the boundary."""
    ids = [chr(ord("a") + i) for i in range(length)]
    return GraphModel.from_edges(list(zip(ids[:-1], ids[1:])), [ids[0], ids[-1]])
