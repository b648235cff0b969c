"""Neumann eigenvalues as zeros of the DtN pencil, plus property suites.

The DtN family is sampled on real Dirichlet-free gaps.  Every ordered
eigenvalue branch is non-increasing there, so a sign change of a branch
from positive to non-positive brackets exactly one zero of that branch.
Zeros are located per branch with Brent's method; the determinant is never
used because poles and zeros of different branches cancel in it.

Neumann eigenvalues sitting exactly on a Dirichlet eigenvalue ``d`` are
invisible to gap sampling.  They are detected by a tube analysis: with
``Lambda(z) ~ P/(z-d) + R0`` near ``d``, a hit at ``d`` corresponds to a
kernel of ``R0`` compressed to ``ker P``.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import numcore as nc
from . import pair_core as pc
from .errors import (
    GridDensityWarning,
    NotAnIsolatedHit,
    TooCloseToDirichletSpectrum,
    TooCloseToNeumannSpectrum,
    WindowInsideDirichletPoint,
)
from .numcore import WeightedSpace
from .pair_core import FiniteBoundaryPair

THRESHOLDS = {
    "transfer_inverse": 1e-10,
    "transfer_solution": 1e-10,
    "projection_idempotent": 1e-10,
    "dtn_difference": 1e-10,
    "ntd_difference": 1e-10,
    "derivative_fd": 1e-6,
    "green": 1e-10,
    "krein": 1e-10,
    "lift_independence": 1e-10,
    "dtn_symmetry": 1e-10,
    "schur": 1e-12,
    "herglotz_dtn": 1e-12,
    "herglotz_ntd": 1e-12,
    "monotonicity": 1e-10,
    "psd_nonpositive": 1e-10,
    "kernel_transport": 1e-8,
    "root_residual": 1e-10,
}

DERIVATIVE_STEP = 1e-5
TUBE_KERNEL_TOL = 1e-7
POLE_TOL = 1e-6
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Check:
    """One verified property; the verdict follows from residual vs threshold only."""

    name: str
    residual: float
    threshold: float

    @property
    def verdict(self) -> str:
        return "pass" if self.residual <= self.threshold else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "threshold": self.threshold, "verdict": self.verdict}


@dataclass
class SuiteReport:
    checks: list[Check] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, residual: float, key: str | None = None) -> None:
        self.checks.append(Check(name, float(residual), THRESHOLDS[key or name]))


# --------------------------------------------------------------------------
# providers


@dataclass(frozen=True)
class DtnProvider:
    """A DtN family ``z -> Lambda(z)`` together with its pole set.

    ``dirichlet_points(lo, hi)`` returns the sorted Dirichlet eigenvalues in
    ``[lo, hi]`` with multiplicity.  ``pair`` is set for matrix providers.
    """

    dtn_at: Callable[[complex], np.ndarray]
    dirichlet_points: Callable[[float, float], np.ndarray]
    boundary: WeightedSpace
    delta: float = pc.DEFAULT_DELTA
    label: str = ""
    pair: FiniteBoundaryPair | None = None

    def dirichlet_distance(self, z: complex, reach: float = 1.0) -> float:
        x = float(np.real(z))
        pts = self.dirichlet_points(x - reach - abs(np.imag(z)), x + reach + abs(np.imag(z)))
        return float(np.min(np.abs(pts - z))) if len(pts) else np.inf

    def hermitian(self, lam: float) -> np.ndarray:
        """Euclidean-similar Hermitian representative of ``Lambda(lam)`` for real ``lam``."""
        e = nc.to_euclidean(self.dtn_at(lam), self.boundary)
        return 0.5 * (e + e.conj().T)

    def branches(self, lam: float) -> np.ndarray:
        return np.linalg.eigvalsh(self.hermitian(lam))


def matrix_provider(p: FiniteBoundaryPair, label: str = "pair") -> DtnProvider:
    spec = p.decomposition.dirichlet_spectrum

    def points(lo, hi):
        return spec[(spec >= lo) & (spec <= hi)]

    return DtnProvider(lambda z: pc.dtn(p, z), points, p.boundary, p.delta, label, p)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BOUNDARY_PAIRS_THREADS", "1")))
    except ValueError:
        return 1


def _sample_branches(pr: DtnProvider, xs: np.ndarray) -> np.ndarray:
    # order of evaluation does not matter; results are stored by index
    workers = min(_threads(), len(xs))
    if workers <= 1:
        rows = [pr.branches(x) for x in xs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(pr.branches, xs))
    return np.array(rows).reshape(len(xs), pr.boundary.dim)


# --------------------------------------------------------------------------
# root finding


@dataclass(frozen=True)
class SpectralHit:
    eigenvalue: float
    multiplicity: int
    min_eig_residual: float
    bracket: tuple[float, float]
    at_dirichlet: bool = False

    def as_dict(self) -> dict:
        return {
            "eigenvalue": self.eigenvalue,
            "multiplicity": self.multiplicity,
            "min_eig_residual": self.min_eig_residual,
            "bracket": list(self.bracket),
            "at_dirichlet": self.at_dirichlet,
        }


def dirichlet_free_gaps(pr: DtnProvider, window) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Split ``window`` into Dirichlet-free gaps; also return the excised tubes."""
    a, b = map(float, window)
    if not a < b:
        raise ValueError("window must satisfy a < b")
    d = pr.delta
    pts = np.unique(np.asarray(pr.dirichlet_points(a - d, b + d), float))
    # pad so that rounding of x -/+ d never lands inside the tube
    pad = [d * (1 + 1e-6) + 8 * np.finfo(float).eps * (1 + abs(x)) for x in pts]
    tubes = [(max(a, x - r), min(b, x + r)) for x, r in zip(pts, pad)]
    gaps = []
    lo = a
    for x, r in zip(pts, pad):
        if x - r > lo:
            gaps.append((lo, x - r))
        lo = max(lo, x + r)
    if b > lo:
        gaps.append((lo, b))
    if not gaps:
        raise WindowInsideDirichletPoint(f"window [{a}, {b}] lies inside the excision tube of a Dirichlet point")
    return gaps, tubes


def _warn_if_steep(vals: np.ndarray, i: int, k: int) -> None:
    diffs = np.abs(np.diff(vals[:, k]))
    local = np.concatenate([diffs[max(0, i - 4):i], diffs[i + 1:i + 5]])
    med = float(np.median(local)) if local.size else 0.0
    if med > 0 and diffs[i] > 10.0 * med:
        warnings.warn(
            f"branch {k} drops by {diffs[i]:.3e} across a sign change (running median step {med:.3e}); "
            "consider a denser grid",
            GridDensityWarning,
            stacklevel=3,
        )


def _gap_roots(pr: DtnProvider, lo: float, hi: float, grid: int, tol: float) -> list[tuple[float, int, tuple]]:
    xs = np.linspace(lo, hi, grid)
    vals = _sample_branches(pr, xs)
    roots = []
    for k in range(vals.shape[1]):
        col = vals[:, k]
        if abs(col[0]) <= tol:
            roots.append((xs[0], k, (xs[0], xs[0])))
        for i in range(grid - 1):
            if col[i] > 0 >= col[i + 1]:
                _warn_if_steep(vals, i, k)
                if col[i + 1] == 0:
                    root = xs[i + 1]
                else:
                    root = brentq(lambda x: pr.branches(x)[k], xs[i], xs[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps)
                roots.append((root, k, (xs[i], xs[i + 1])))
    return roots


def _probe_radius(pr: DtnProvider, d: float, neighbours: np.ndarray) -> float | None:
    r = max(1e-6 * (1.0 + abs(d)), 100.0 * pr.delta)
    others = neighbours[np.abs(neighbours - d) > pr.delta]
    if others.size:
        r = min(r, float(np.min(np.abs(others - d))) / 3.0)
    return r if r > 2.0 * pr.delta else None


def tube_analysis(pr: DtnProvider, d: float, radius: float) -> SpectralHit | None:
    """Neumann eigenvalue sitting on the Dirichlet point ``d``, if any."""
    plus = nc.to_euclidean(pr.dtn_at(d + radius), pr.boundary)
    minus = nc.to_euclidean(pr.dtn_at(d - radius), pr.boundary)
    residue = 0.5 * radius * (plus - minus)
    residue = 0.5 * (residue + residue.conj().T)
    regular = 0.25 * (plus + minus + plus.conj().T + minus.conj().T)
    pv, pvec = np.linalg.eigh(residue)
    scale = max(1.0, float(np.max(np.abs(pv))))
    basis = pvec[:, np.abs(pv) <= POLE_TOL * scale]
    if basis.shape[1] == 0:
        return None
    compressed = basis.conj().T @ regular @ basis
    ev = np.linalg.eigvalsh(0.5 * (compressed + compressed.conj().T))
    thresh = TUBE_KERNEL_TOL * (1.0 + float(np.max(np.abs(ev))))
    small = np.sort(np.abs(ev))
    mult = int(np.sum(small <= thresh))
    if mult == 0:
        return None
    return SpectralHit(float(d), mult, float(small[mult - 1]), (d - radius, d + radius), True)


def find_neumann_eigenvalues(pr: DtnProvider, window, grid: int = 256, tol: float = 1e-10) -> list[SpectralHit]:
    """Real ``lam`` in ``window`` with ``0 in spec Lambda(lam)``, sorted.

    Hits off the Dirichlet set come from branch sign changes; hits on it from
    :func:`tube_analysis` and are flagged ``at_dirichlet``.
    """
    if grid < 16:
        raise ValueError("grid must be at least 16")
    gaps, _ = dirichlet_free_gaps(pr, window)
    a, b = map(float, window)
    found = []
    for lo, hi in gaps:
        found.extend(_gap_roots(pr, lo, hi, grid, tol))

    # tube hits at Dirichlet points inside the window
    wide = np.unique(np.asarray(pr.dirichlet_points(a - 1.0, b + 1.0), float))
    tube_hits = {}
    for d in wide[(wide >= a) & (wide <= b)]:
        r = _probe_radius(pr, d, wide)
        if r is None:
            continue
        hit = tube_analysis(pr, float(d), r)
        if hit is not None:
            tube_hits[float(d)] = (hit, r)

    roots = []
    for root, k, br in found:
        near = [d for d, (_, r) in tube_hits.items() if abs(root - d) <= r]
        if not near:
            roots.append((root, k, br))
    roots.sort()

    hits = [h for h, _ in tube_hits.values()]
    i = 0
    while i < len(roots):
        j = i + 1
        while j < len(roots) and roots[j][0] - roots[i][0] <= MERGE_TOL * (1.0 + abs(roots[i][0])):
            j += 1
        cluster = roots[i:j]
        lam = float(np.mean([c[0] for c in cluster]))
        h = pr.hermitian(lam)
        small = np.sort(np.abs(np.linalg.eigvalsh(h)))
        mult = max(1, int(np.sum(small <= pc.kernel_threshold(h))))
        lo = min(c[2][0] for c in cluster)
        hi = max(c[2][1] for c in cluster)
        hits.append(SpectralHit(lam, mult, float(small[mult - 1]), (float(lo), float(hi))))
        i = j
    return sorted(hits, key=lambda hit: hit.eigenvalue)


def determinant_zeros(pr: DtnProvider, window, samples: int = 2048) -> list[float]:
    """Zeros of ``det Lambda(lam)`` found by sign changes on the Dirichlet-free gaps.

    Near a pole the determinant is a product of a huge and a tiny factor and
    its computed sign is meaningless; samples whose relative error estimate
    exceeds 1/2 are dropped before counting sign changes.
    """
    gaps, _ = dirichlet_free_gaps(pr, window)
    eps = np.finfo(float).eps

    def det(x):
        ev = pr.branches(x)
        return float(np.prod(ev)), float(np.sum(eps * np.max(np.abs(ev)) / np.maximum(np.abs(ev), 1e-300)))

    zeros = []
    for lo, hi in gaps:
        xs = np.linspace(lo, hi, samples)
        kept = [(x, v) for x, (v, err) in ((x, det(x)) for x in xs) if err <= 0.5]
        for (x0, d0), (x1, d1) in zip(kept, kept[1:]):
            if d0 == 0:
                zeros.append(float(x0))
            elif d0 * d1 < 0:
                zeros.append(float(brentq(lambda x: det(x)[0], x0, x1, xtol=1e-14)))
        if kept and kept[-1][1] == 0:
            zeros.append(float(kept[-1][0]))
    return zeros


def kernel_transport_residual(p: FiniteBoundaryPair, lam: float, multiplicity: int) -> float:
    """``max ||(N - lam) S(lam) k||`` over a nu-orthonormal basis of the near-kernel of ``Lambda(lam)``."""
    e = nc.to_euclidean(pc.dtn(p, lam), p.boundary)
    vals, vecs = np.linalg.eigh(0.5 * (e + e.conj().T))
    order = np.argsort(np.abs(vals))[:multiplicity]
    ks = vecs[:, order] / np.sqrt(p.boundary.weights)[:, None]
    out = (p.neumann_op - lam * np.eye(p.n)) @ pc.solution_operator(p, lam) @ ks
    return max(p.state.norm(out[:, j]) for j in range(out.shape[1]))


# --------------------------------------------------------------------------
# suites


@dataclass
class MonotonicityReport(SuiteReport):
    max_violation: float = 0.0
    min_eig_nonpositive: float | None = None


def monotonicity_suite(pr: DtnProvider, interval, samples: int = 64) -> MonotonicityReport:
    """Ordered branches non-increasing; ``Lambda(lam) >= 0`` for sampled ``lam <= 0``."""
    lo, hi = map(float, interval)
    if pr.dirichlet_points(lo - pr.delta, hi + pr.delta).size:
        raise TooCloseToDirichletSpectrum(f"interval [{lo}, {hi}] meets the Dirichlet set (delta={pr.delta:.1e})")
    xs = np.linspace(lo, hi, samples)
    vals = _sample_branches(pr, xs)
    scale = 1.0 + np.max(np.abs(vals), axis=1)
    rise = np.diff(vals, axis=0) / np.maximum(scale[:-1], scale[1:])[:, None]
    viol = float(max(np.max(rise), 0.0)) if rise.size else 0.0
    rep = MonotonicityReport(max_violation=viol)
    rep.add("monotonicity", viol)
    nonpos = xs <= 0
    if np.any(nonpos):
        worst = float(np.min(vals[nonpos, 0] / scale[nonpos]))
        rep.min_eig_nonpositive = worst
        rep.add("psd_nonpositive", max(-worst, 0.0))
    return rep


@dataclass
class HerglotzReport(SuiteReport):
    max_im_dtn: float = -np.inf
    min_im_ntd: float = np.inf
    conjugate_residual: float = 0.0


def _im_part(e: np.ndarray) -> np.ndarray:
    return (e - e.conj().T) / 2j


def herglotz_suite(pr: DtnProvider, z_samples) -> HerglotzReport:
    """Sign of ``Im Lambda(z)`` and ``Im Lambda(z)^-1`` in the upper half-plane."""
    rep = HerglotzReport()
    for z in z_samples:
        z = complex(z)
        if not z.imag > 0:
            raise ValueError("Herglotz samples need Im z > 0")
        e = nc.to_euclidean(pr.dtn_at(z), pr.boundary)
        e_bar = nc.to_euclidean(pr.dtn_at(z.conjugate()), pr.boundary)
        rep.max_im_dtn = max(rep.max_im_dtn, float(np.max(np.linalg.eigvalsh(_im_part(e)))))
        rep.min_im_ntd = min(rep.min_im_ntd, float(np.min(np.linalg.eigvalsh(_im_part(np.linalg.inv(e))))))
        conj = float(np.linalg.norm(_im_part(e) + _im_part(e_bar), 2))
        rep.conjugate_residual = max(rep.conjugate_residual, conj)
    rep.add("herglotz_dtn", max(rep.max_im_dtn, 0.0))
    rep.add("herglotz_ntd", max(-rep.min_im_ntd, 0.0))
    rep.checks.append(Check("herglotz_conjugate", rep.conjugate_residual, THRESHOLDS["herglotz_dtn"]))
    return rep


@dataclass
class PoleProbeReport(SuiteReport):
    eigenvalue: float = 0.0
    radii: list[float] = field(default_factory=list)
    scaled_norms: list[float] = field(default_factory=list)
    slope: float = 0.0
    bounded: bool = False
    pole_present: bool = False

    @property
    def verdict(self) -> str:
        return "pole" if self.pole_present else "no pole"


def pole_probe(pr: DtnProvider, lam: float, radii=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6), growth_limit: float = 10.0) -> PoleProbeReport:
    """``r ||Lambda(lam + r)^-1||`` along decreasing radii.

    For a first-order pole of the inverse the sequence is bounded and the
    log-log slope of ``||Lambda^-1||`` is close to -1.
    """
    radii = [float(r) for r in radii]
    if pr.dirichlet_distance(lam, max(radii) + 1.0) <= max(radii) + pr.delta:
        raise NotAnIsolatedHit(f"probe radii around {lam} reach the Dirichlet set")
    norms = []
    for r in radii:
        e = nc.to_euclidean(pr.dtn_at(lam + r), pr.boundary)
        norms.append(1.0 / float(np.linalg.svd(e, compute_uv=False)[-1]))
    scaled = [r * nrm for r, nrm in zip(radii, norms)]
    slope = float(np.polyfit(np.log(radii), np.log(norms), 1)[0])
    rep = PoleProbeReport(eigenvalue=float(lam), radii=radii, scaled_norms=scaled, slope=slope)
    rep.bounded = max(scaled) <= growth_limit * scaled[0]
    rep.pole_present = slope < -0.5
    return rep


@dataclass
class IsolationReport(SuiteReport):
    eigenvalue: float = 0.0
    ring_min: float = 0.0
    center_sigma_min: float = 0.0
    center_threshold: float = 0.0

    @property
    def isolated(self) -> bool:
        return self.ring_min > 0.0

    @property
    def in_pencil_spectrum(self) -> bool:
        return self.center_sigma_min <= self.center_threshold


def isolation_probe(pr: DtnProvider, lam: float, ring_radius: float, ring_samples: int = 64) -> IsolationReport:
    """Smallest singular value of ``Lambda(z)`` on a circle around ``lam`` and at ``lam``."""
    if pr.dirichlet_distance(lam, ring_radius + 1.0) <= ring_radius + pr.delta:
        raise TooCloseToDirichletSpectrum(f"ring of radius {ring_radius} around {lam} touches the Dirichlet set")
    thetas = 2 * np.pi * np.arange(ring_samples) / ring_samples
    ring = min(
        float(np.linalg.svd(nc.to_euclidean(pr.dtn_at(lam + ring_radius * np.exp(1j * t)), pr.boundary), compute_uv=False)[-1])
        for t in thetas
    )
    center = pr.hermitian(lam)
    sig = float(np.min(np.abs(np.linalg.eigvalsh(center))))
    return IsolationReport(eigenvalue=float(lam), ring_min=ring, center_sigma_min=sig, center_threshold=pc.kernel_threshold(center))


def _rel(diff: np.ndarray, *terms: np.ndarray) -> float:
    scale = max([1.0] + [float(np.linalg.norm(t, 2)) for t in terms if np.size(t)])
    return float(np.linalg.norm(diff, 2)) / scale if np.size(diff) else 0.0


def identity_suite(p: FiniteBoundaryPair, z_samples, seed: int = 0) -> SuiteReport:
    """Residuals of the structural identities of a matrix pair.

    Checks involving two spectral parameters use consecutive samples
    (cyclically, with -1 appended when only one sample is given).  Samples
    too close to a spectrum for a given identity are listed in ``skipped``.
    Residuals are relative to ``max(1, norms of the terms)`` except for
    Green's identity, which is relative to the vector norms.
    """
    rep = SuiteReport()
    zs = [complex(z) for z in z_samples]
    if not zs:
        raise ValueError("need at least one sample")
    pairs_with = zs[1:] + zs[:1] if len(zs) > 1 else [(-1.0 + 0j) if zs[0] != -1 else (-2.0 + 0j)]
    eye = np.eye(p.n)
    nu, mu = p.boundary, p.state
    rng = np.random.default_rng(seed)

    def adj_bm(a):
        return nc.weighted_adjoint(a, nu, mu)

    for z, w in zip(zs, pairs_with):
        tag = f"z={z:.6g}, w={w:.6g}"
        try:
            u_zw = pc.transfer(p, z, w)
            u_wz = pc.transfer(p, w, z)
            s_z, s_w = pc.solution_operator(p, z), pc.solution_operator(p, w)
            s_zbar = pc.solution_operator(p, np.conj(z))
            lam_z, lam_w = pc.dtn(p, z), pc.dtn(p, w)
        except TooCloseToDirichletSpectrum:
            rep.skipped.append(f"dirichlet-based identities at {tag}")
            continue
        rep.add(f"transfer_inverse[{tag}]", _rel(u_zw @ u_wz - eye, u_zw, u_wz), "transfer_inverse")
        rep.add(f"transfer_solution[{tag}]", _rel(u_zw @ s_w - s_z, s_z, u_zw @ s_w), "transfer_solution")
        proj = s_z @ p.gamma
        rep.add(f"projection_idempotent[{tag}]", _rel(proj @ proj - proj, proj), "projection_idempotent")
        diff = lam_z - lam_w + (z - w) * adj_bm(s_zbar) @ s_w
        rep.add(f"dtn_difference[{tag}]", _rel(diff, lam_z, lam_w), "dtn_difference")
        lam_zbar = pc.dtn(p, np.conj(z))
        rep.add(f"dtn_symmetry[{tag}]", _rel(lam_zbar - nc.weighted_adjoint(lam_z, nu, nu), lam_z), "dtn_symmetry")
        lift = p.default_lift + pc.kernel_projection(p) @ rng.standard_normal((p.n, p.m))
        rep.add(f"lift_independence[{tag}]", _rel(pc.dtn(p, z, lift) - lam_z, lam_z), "lift_independence")
        h = DERIVATIVE_STEP
        try:
            fd = (pc.dtn(p, z + h) - pc.dtn(p, z - h)) / (2 * h)
            exact = pc.dtn_derivative(p, z)
            rep.add(f"derivative_fd[{tag}]", float(np.linalg.norm(fd - exact, 2) / max(np.linalg.norm(exact, 2), 1e-300)), "derivative_fd")
        except TooCloseToDirichletSpectrum:
            rep.skipped.append(f"derivative at {tag}")
        try:
            rn_z, rn_w = pc.neumann_resolvent(p, z), pc.neumann_resolvent(p, w)
            rn_zbar = pc.neumann_resolvent(p, np.conj(z))
        except TooCloseToNeumannSpectrum:
            rep.skipped.append(f"neumann-based identities at {tag}")
            continue
        inv_z, inv_w = nc.inverse(lam_z), nc.inverse(lam_w)
        gr_w = p.gamma @ rn_w
        gr_zbar = p.gamma @ rn_zbar
        rhs = (z - w) * gr_w @ nc.weighted_adjoint(gr_zbar, mu, nu)
        rep.add(f"ntd_difference[{tag}]", _rel(inv_z - inv_w - rhs, inv_z, inv_w), "ntd_difference")
        rd = pc.dirichlet_resolvent(p, z)
        krein = rn_z - rd - s_z @ inv_z @ adj_bm(s_zbar)
        rep.add(f"krein[{tag}]", _rel(krein, rn_z), "krein")

    for j in range(3):
        f = rng.standard_normal(p.n) + 1j * rng.standard_normal(p.n)
        g = rng.standard_normal(p.n) + 1j * rng.standard_normal(p.n)
        scale = max(1.0, abs(pc.form(p, f, f)), mu.norm(f) * mu.norm(g) * max(1.0, np.linalg.norm(p.neumann_op, 2)))
        rep.add(f"green[{j}]", pc.green_residual(p, f, g) / scale, "green")
    return rep
