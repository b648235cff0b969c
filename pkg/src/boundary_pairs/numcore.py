"""Weighted linear algebra on finite-dimensional Hilbert spaces.

Every space carries a diagonal weight vector ``w`` and the inner product
``<u, v> = sum_k w[k] * u[k] * conj(v[k])``.  Matrices are plain complex
numpy arrays; the helpers here translate between the weighted geometry and
the standard Euclidean kernels of numpy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotSelfAdjoint, Singular

SYMMETRY_TOL = 1e-10
ORTHONORMAL_TOL = 1e-12
SOLVE_RESIDUAL_TOL = 1e-10
CONDITION_LIMIT = 1e14


@dataclass(frozen=True)
class WeightedSpace:
    """C^dim with the inner product induced by positive diagonal weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, dim: int) -> "WeightedSpace":
        return cls(np.ones(dim))

    @property
    def dim(self) -> int:
        return self.weights.size

    def inner(self, u, v) -> complex:
        return complex(np.sum(self.weights * np.asarray(u) * np.conj(v)))

    def norm(self, u) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(np.asarray(u)) ** 2)))

    def direct_sum(self, other: "WeightedSpace") -> "WeightedSpace":
        return WeightedSpace(np.concatenate([self.weights, other.weights]))


@dataclass(frozen=True)
class HermitianSpectrum:
    """Ascending eigenvalues with weighted-orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Validate ``a`` as a finite complex 2-d array of the given shape."""
    m = np.array(a, dtype=complex, ndmin=2)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if rows is not None and m.shape[0] != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionMismatch(f"expected {cols} columns, got {m.shape[1]}")
    return m


def weighted_adjoint(a, sp_in: WeightedSpace, sp_out: WeightedSpace) -> np.ndarray:
    """Adjoint of ``a: sp_in -> sp_out``, i.e. ``W_in^-1 a^H W_out``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape != (sp_out.dim, sp_in.dim):
        raise DimensionMismatch(
            f"matrix of shape {a.shape} does not map C^{sp_in.dim} to C^{sp_out.dim}"
        )
    return (a.conj().T * sp_out.weights[None, :]) / sp_in.weights[:, None]


def to_euclidean(a, sp: WeightedSpace) -> np.ndarray:
    """Similarity ``W^1/2 a W^-1/2``; weighted self-adjoint becomes Hermitian."""
    s = np.sqrt(sp.weights)
    return (s[:, None] * np.asarray(a, dtype=complex)) / s[None, :]


def symmetry_residual(a, sp: WeightedSpace) -> float:
    """Relative spectral-norm distance of ``a`` from its weighted adjoint."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != sp.dim:
        raise DimensionMismatch(f"matrix of shape {a.shape} is not an operator on C^{sp.dim}")
    if a.size == 0:
        return 0.0
    e = to_euclidean(a, sp)
    scale = np.linalg.norm(e, 2)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(e - e.conj().T, 2) / scale)


def eig_self_adjoint(a, sp: WeightedSpace, tol: float = SYMMETRY_TOL) -> HermitianSpectrum:
    """Full eigendecomposition of an operator self-adjoint w.r.t. ``sp``.

    Raises
    ------
    NotSelfAdjoint
        If the relative symmetry residual exceeds ``tol``.
    """
    a = as_matrix(a) if np.asarray(a).size else np.zeros((0, 0), dtype=complex)
    res = symmetry_residual(a, sp)
    if res > tol:
        raise NotSelfAdjoint(f"symmetry residual {res:.3e} exceeds {tol:.1e}")
    if sp.dim == 0:
        return HermitianSpectrum(np.zeros(0), np.zeros((0, 0), dtype=complex))
    e = to_euclidean(a, sp)
    vals, vecs = np.linalg.eigh(0.5 * (e + e.conj().T))
    vecs = vecs / np.sqrt(sp.weights)[:, None]
    return HermitianSpectrum(vals, vecs)


def eigvals_self_adjoint(a, sp: WeightedSpace) -> np.ndarray:
    """Ascending eigenvalues only; the symmetry check is left to the caller."""
    if sp.dim == 0:
        return np.zeros(0)
    e = to_euclidean(a, sp)
    return np.linalg.eigvalsh(0.5 * (e + e.conj().T))


def operator_norm(a, sp_in: WeightedSpace, sp_out: WeightedSpace) -> float:
    """Norm of ``a: sp_in -> sp_out`` between the weighted spaces."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    e = (np.sqrt(sp_out.weights)[:, None] * a) / np.sqrt(sp_in.weights)[None, :]
    return float(np.linalg.norm(e, 2))


def solve(a, b) -> np.ndarray:
    """Solve ``a x = b`` for square ``a``.

    Raises
    ------
    Singular
        If the 2-norm condition number of ``a`` exceeds 1e14.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"solve needs a square matrix, got {a.shape}")
    vector = b.ndim == 1
    b2 = b.reshape(-1, 1) if vector else b
    if b2.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"right-hand side has {b2.shape[0]} rows, expected {a.shape[0]}")
    if a.shape[0] == 0:
        x = np.zeros(b2.shape, dtype=complex)
    else:
        cond = np.linalg.cond(a)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise Singular(f"condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
        x = np.linalg.solve(a, b2)
    return x.reshape(-1) if vector else x


def inverse(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return solve(a, np.eye(a.shape[0], dtype=complex))


def weighted_orthonormal_kernel(a, sp: WeightedSpace, rcond: float = 1e-12) -> np.ndarray:
    """Columns spanning ``ker a``, orthonormal w.r.t. the weights of ``sp``."""
    a = np.asarray(a, dtype=complex)
    if a.shape[1] != sp.dim:
        raise DimensionMismatch(f"matrix with {a.shape[1]} columns on C^{sp.dim}")
    s = np.sqrt(sp.weights)
    scaled = a / s[None, :]
    if scaled.shape[0] == 0:
        y = np.eye(sp.dim, dtype=complex)
    else:
        _, sv, vh = np.linalg.svd(scaled)
        tol = rcond * (sv[0] if sv.size else 0.0) * max(scaled.shape)
        rank = int(np.sum(sv > tol))
        y = vh[rank:].conj().T
    return y / s[:, None]
