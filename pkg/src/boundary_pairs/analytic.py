"""Pairs with closed-form DtN: a single interval and finite interval chains.

For the interval ``[0, l]`` with boundary values ``(f(0), f(l))`` the DtN
matrix is ``(k / sin(k l)) [[cos(k l), -1], [-1, cos(k l)]]`` with
``k = sqrt(z)``.  All entries are even in ``k``, so they are computed from
the two entire functions ``k cot(k l)`` and ``k / sin(k l)`` of ``z``.
Near ``z = 0`` those are evaluated by their Taylor series.

A chain has boundary points ``x_1 < ... < x_N`` with ``x_0 = 0`` carrying a
Dirichlet condition and a free end at ``x_N``; interval ``n`` joins
``x_n`` and ``x_{n+1}`` and has length ``lengths[n]``.  The trace is
``(Gamma f)_n = rho_n^1/2 f(x_n)`` with unit boundary weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import OutOfDomain, TooCloseToDirichletSpectrum
from .numcore import WeightedSpace
from .pair_core import DEFAULT_DELTA
from .spectral import DtnProvider

SERIES_THRESHOLD = 1e-3

# x = z l^2; y cot y and y / sin y in powers of x = y^2
COT_SERIES = (1.0, -1.0 / 3, -1.0 / 45, -2.0 / 945, -1.0 / 4725, -2.0 / 93555)
CSC_SERIES = (1.0, 1.0 / 6, 7.0 / 360, 31.0 / 15120, 127.0 / 604800, 73.0 / 3421440)
# sin(y) / y and cos(y)
SINC_SERIES = (1.0, -1.0 / 6, 1.0 / 120, -1.0 / 5040, 1.0 / 362880, -1.0 / 39916800)


def _poly(coeffs, x):
    out = 0j
    for c in reversed(coeffs):
        out = out * x + c
    return out


def cot_term(z: complex, length: float, branch: int = 1, series: bool | None = None) -> complex:
    """``sqrt(z) cot(sqrt(z) l)``, independent of the square-root branch."""
    z = complex(z)
    if series is None:
        series = abs(z) * length**2 < SERIES_THRESHOLD
    if series:
        return _poly(COT_SERIES, z * length**2) / length
    k = branch * np.sqrt(z)
    return k * np.cos(k * length) / np.sin(k * length)


def csc_term(z: complex, length: float, branch: int = 1, series: bool | None = None) -> complex:
    """``sqrt(z) / sin(sqrt(z) l)``, independent of the square-root branch."""
    z = complex(z)
    if series is None:
        series = abs(z) * length**2 < SERIES_THRESHOLD
    if series:
        return _poly(CSC_SERIES, z * length**2) / length
    k = branch * np.sqrt(z)
    return k / np.sin(k * length)


def _sinc(x: complex) -> complex:
    """``sin(sqrt x) / sqrt x`` as an entire function of ``x``."""
    if abs(x) < SERIES_THRESHOLD:
        return _poly(SINC_SERIES, x)
    k = np.sqrt(x)
    return np.sin(k) / k


# --------------------------------------------------------------------------
# single interval


@dataclass(frozen=True)
class IntervalPair:
    length: float

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError("length must be positive and finite")

    def dirichlet_points(self, lo: float, hi: float) -> np.ndarray:
        return interval_dirichlet_points(self.length, lo, hi)


def interval_dirichlet_points(length: float, lo: float, hi: float) -> np.ndarray:
    """``k^2 pi^2 / l^2`` for ``k >= 1`` lying in ``[lo, hi]``."""
    if hi <= 0:
        return np.zeros(0)
    kmax = int(np.floor(np.sqrt(hi) * length / np.pi)) + 1
    pts = (np.arange(1, kmax + 1) * np.pi / length) ** 2
    return pts[(pts >= lo) & (pts <= hi)]


def _guard(z: complex, points: np.ndarray, delta: float) -> None:
    if points.size:
        d = float(np.min(np.abs(points - z)))
        if d < delta:
            raise TooCloseToDirichletSpectrum(
                f"z={z} lies within {d:.3e} of the Dirichlet spectrum (exclusion radius delta={delta:.1e})"
            )


def _nearby(z: complex, delta: float, points_fn) -> np.ndarray:
    x = float(np.real(z))
    return points_fn(x - 2 * delta - 1.0, x + 2 * delta + 1.0)


def interval_dtn(length: float, z: complex, delta: float = DEFAULT_DELTA, branch: int = 1) -> np.ndarray:
    """2x2 DtN matrix of ``[0, l]`` w.r.t. boundary values at ``0`` and ``l``."""
    z = complex(z)
    _guard(z, _nearby(z, delta, lambda a, b: interval_dirichlet_points(length, a, b)), delta)
    c, s = cot_term(z, length, branch), csc_term(z, length, branch)
    return np.array([[c, -s], [-s, c]])


def interval_solution(length: float, z: complex, phi, s: float, delta: float = DEFAULT_DELTA) -> complex:
    """Solution of ``-h'' = z h`` on ``[0, l]`` with ``h(0), h(l) = phi``."""
    if not 0 <= s <= length:
        raise OutOfDomain(f"s={s} outside [0, {length}]")
    z = complex(z)
    _guard(z, _nearby(z, delta, lambda a, b: interval_dirichlet_points(length, a, b)), delta)
    phi0, phi1 = phi
    if s == 0:
        return complex(phi0)
    if s == length:
        return complex(phi1)
    base = _sinc(z * length**2)
    # sin(k a) / sin(k l) = (a / l) sinc(z a^2) / sinc(z l^2)
    left = (length - s) / length * _sinc(z * (length - s) ** 2) / base
    right = s / length * _sinc(z * s**2) / base
    return complex(phi0 * left + phi1 * right)


def interval_provider(pair: IntervalPair | float, delta: float = DEFAULT_DELTA) -> DtnProvider:
    length = pair.length if isinstance(pair, IntervalPair) else float(pair)
    return DtnProvider(
        lambda z: interval_dtn(length, z, delta),
        lambda lo, hi: interval_dirichlet_points(length, lo, hi),
        WeightedSpace.uniform(2),
        delta,
        f"interval(l={length:g})",
    )


# --------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class ChainPair:
    lengths: tuple
    rhos: tuple

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        rhos = tuple(float(x) for x in self.rhos)
        if not lengths:
            raise ValueError("a chain needs at least one interval")
        if len(lengths) != len(rhos):
            raise ValueError("lengths and rhos must have the same size")
        if not all(np.isfinite(x) and x > 0 for x in lengths):
            raise ValueError("lengths must be positive")
        if not all(np.isfinite(x) and x > 0 for x in rhos):
            raise ValueError("rhos must be positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "rhos", rhos)

    @classmethod
    def uniform(cls, count: int, total_length: float = 1.0, rho: float | None = None) -> "ChainPair":
        """``count`` equal intervals; ``rho`` defaults to the interval length."""
        ell = total_length / count
        return cls((ell,) * count, ((ell if rho is None else rho),) * count)

    @property
    def size(self) -> int:
        return len(self.lengths)

    @property
    def total_length(self) -> float:
        return float(sum(self.lengths))

    @property
    def lowest_dirichlet(self) -> float:
        return float((np.pi / max(self.lengths)) ** 2)

    def dirichlet_points(self, lo: float, hi: float) -> np.ndarray:
        if hi <= 0:
            return np.zeros(0)
        pts = np.concatenate([interval_dirichlet_points(ell, lo, hi) for ell in self.lengths])
        return np.sort(pts)

    def neumann_spectrum(self, count: int) -> np.ndarray:
        """Lowest eigenvalues ``(k + 1/2)^2 pi^2 / L^2`` of the Dirichlet/Neumann Laplacian on ``[0, L]``."""
        return ((np.arange(count) + 0.5) * np.pi / self.total_length) ** 2


def chain_dirichlet_spectrum(c: ChainPair, cutoff: float) -> np.ndarray:
    """All ``k^2 pi^2 / l_n^2 <= cutoff`` with multiplicity, sorted."""
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    return c.dirichlet_points(0.0, cutoff)


def chain_dtn(c: ChainPair, z: complex, delta: float = DEFAULT_DELTA, branch: int = 1) -> np.ndarray:
    """Tridiagonal DtN matrix of the chain."""
    z = complex(z)
    _guard(z, _nearby(z, delta, c.dirichlet_points), delta)
    n = c.size
    rho = np.array(c.rhos)
    cots = np.array([cot_term(z, ell, branch) for ell in c.lengths])
    cscs = np.array([csc_term(z, ell, branch) for ell in c.lengths])
    lam = np.zeros((n, n), complex)
    for i in range(n):
        # point x_{i+1} touches intervals i and i+1 (the latter absent at the free end)
        diag = cots[i] + (cots[i + 1] if i + 1 < n else 0.0)
        lam[i, i] = diag / rho[i]
        if i + 1 < n:
            off = -cscs[i + 1] / np.sqrt(rho[i] * rho[i + 1])
            lam[i, i + 1] = lam[i + 1, i] = off
    return lam


def chain_provider(c: ChainPair, delta: float = DEFAULT_DELTA) -> DtnProvider:
    return DtnProvider(
        lambda z: chain_dtn(c, z, delta),
        c.dirichlet_points,
        WeightedSpace.uniform(c.size),
        delta,
        f"chain(N={c.size})",
    )


def jacobi_coefficients_at_zero(c: ChainPair) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonal and diagonal of ``chain_dtn(c, 0)`` from the closed formulas."""
    ell = np.array(c.lengths)
    rho = np.array(c.rhos)
    off = -1.0 / (ell[1:] * np.sqrt(rho[:-1] * rho[1:]))
    diag = 1.0 / ell
    diag[:-1] += 1.0 / ell[1:]
    return off, diag / rho


# --------------------------------------------------------------------------
# finite differences


def fd_oracle(length: float, left_bc: str, right_bc: str, mesh_points: int, count: int | None = None) -> np.ndarray:
    """Eigenvalues of the central-difference ``-d^2/ds^2`` on ``[0, L]``.

    ``mesh_points`` nodes with spacing ``h = L / (mesh_points - 1)``.
    Dirichlet nodes are removed; Neumann ends use a ghost node and the
    resulting matrix is symmetrised by a diagonal similarity.  Errors are
    ``O(h^2)``.
    """
    if mesh_points < 16:
        raise ValueError("mesh_points must be at least 16")
    for bc in (left_bc, right_bc):
        if bc not in ("dirichlet", "neumann"):
            raise ValueError(f"boundary condition must be 'dirichlet' or 'neumann', got {bc!r}")
    h = length / (mesh_points - 1)
    first = 1 if left_bc == "dirichlet" else 0
    last = mesh_points - 2 if right_bc == "dirichlet" else mesh_points - 1
    size = last - first + 1
    diag = np.full(size, 2.0 / h**2)
    off = np.full(size - 1, -1.0 / h**2)
    # ghost-node rows carry -2/h^2; the similarity splits it as -sqrt(2)/h^2 both ways
    if left_bc == "neumann":
        off[0] = -np.sqrt(2.0) / h**2
    if right_bc == "neumann":
        off[-1] = -np.sqrt(2.0) / h**2
    select = "a" if count is None else "i"
    rng = None if count is None else (0, min(count, size) - 1)
    vals = eigh_tridiagonal(diag, off, eigvals_only=True, select=select, select_range=rng)
    return np.sort(vals)
