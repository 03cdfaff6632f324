"""Dense real linear algebra kernels shared by every other module.

SVD-backed quantities (pseudoinverse, spectral norm, smallest nonzero
singular value, scaled condition number) all flow through :func:`svd`,
which truncates below a numerical-rank tolerance so rank-deficient
inputs behave predictably.  Plain-text matrix and vector files
round-trip float64 values exactly via 17 significant digits.

Everything here is a pure function of immutable inputs; results are
safe to share across threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "as_matrix",
    "as_vector",
    "svd",
    "pseudoinverse",
    "scaled_condition_number",
    "spectral_norm",
    "frobenius_norm",
    "sigma_min_nonzero",
    "orthonormalize_columns",
    "read_matrix",
    "write_matrix",
    "read_vector",
    "write_vector",
]

# Independent columns are declared numerically dependent when a QR pivot
# falls below this fraction of the first pivot.
_DEPENDENT_PIVOT = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a nonempty float64 2-D array with finite entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Coerce ``v`` to a nonempty float64 1-D array with finite entries."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Rank-truncated SVD ``a ~= u @ diag(sigma) @ v.T``.

    ``u`` (m x rank) and ``v`` (n x rank) have orthonormal columns and
    ``sigma`` holds the strictly positive singular values kept by the
    numerical-rank cut, in nonincreasing order.  ``tolerance`` is the
    absolute cutoff that was applied.  A zero matrix yields the empty
    factor set with ``rank == 0``.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank: int
    tolerance: float

    def reconstruct(self) -> np.ndarray:
        """Product ``u @ diag(sigma) @ v.T`` (the rank-truncated matrix)."""
        return (self.u * self.sigma) @ self.v.T

    def pinv(self) -> np.ndarray:
        """Pseudoinverse ``v @ diag(1/sigma) @ u.T`` over kept components."""
        return (self.v / self.sigma) @ self.u.T

    def pinv_apply(self, y: np.ndarray) -> np.ndarray:
        """Apply the pseudoinverse to a vector without forming it."""
        return self.v @ ((self.u.T @ y) / self.sigma)


def svd(a, tol: float | None = None) -> SvdFactors:
    """Singular value decomposition with numerical-rank truncation.

    Singular values at or below ``tol * sigma_1`` are dropped; ``tol``
    defaults to ``max(m, n) * machine epsilon``.  Deterministic for a
    fixed input.
    """
    arr = as_matrix(a)
    u, s, vt = np.linalg.svd(arr, full_matrices=False)
    rel = max(arr.shape) * np.finfo(float).eps if tol is None else float(tol)
    if rel < 0:
        raise ValueError("tolerance must be nonnegative")
    cutoff = rel * (float(s[0]) if s.size else 0.0)
    rank = int(np.count_nonzero(s > cutoff))
    return SvdFactors(
        u=np.ascontiguousarray(u[:, :rank]),
        sigma=s[:rank].copy(),
        v=np.ascontiguousarray(vt[:rank].T),
        rank=rank,
        tolerance=cutoff,
    )


def pseudoinverse(a, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the truncated SVD.

    Satisfies the four Penrose identities to high relative accuracy.
    ``tol`` has the same meaning as in :func:`svd`.
    """
    factors = svd(a, tol)
    if factors.rank == 0:
        arr = as_matrix(a)
        return np.zeros((arr.shape[1], arr.shape[0]))
    return factors.pinv()


def _nonzero_factors(a, op: str) -> SvdFactors:
    factors = a if isinstance(a, SvdFactors) else svd(a)
    if factors.rank == 0:
        raise ValueError(f"{op} is undefined for the zero matrix")
    return factors


def spectral_norm(a) -> float:
    """Largest singular value.  Errors on the zero matrix."""
    return float(_nonzero_factors(a, "spectral norm").sigma[0])


def sigma_min_nonzero(a) -> float:
    """Smallest nonzero singular value.  Errors on the zero matrix."""
    return float(_nonzero_factors(a, "sigma_min").sigma[-1])


def frobenius_norm(a) -> float:
    """Frobenius norm; 0 for the zero matrix."""
    return float(np.linalg.norm(as_matrix(a), "fro"))


def scaled_condition_number(a) -> float:
    """``||pinv(a)||^2 * ||a||_F^2``, i.e. sum(sigma^2) / sigma_min^2.

    Governs the per-iteration contraction of randomized row projection;
    scale invariant and at least the numerical rank.
    """
    factors = _nonzero_factors(a, "scaled condition number")
    s = factors.sigma
    return float(np.sum(s * s) / (s[-1] * s[-1]))


def orthonormalize_columns(a) -> np.ndarray:
    """Orthonormal basis for the column span, column count preserved.

    Raises if the columns are numerically dependent (a QR pivot below
    ``1e-12`` of the first pivot).
    """
    arr = as_matrix(a)
    if arr.shape[0] < arr.shape[1]:
        raise ValueError("matrix has more columns than rows; columns cannot be independent")
    q, r = np.linalg.qr(arr)
    pivots = np.abs(np.diag(r))
    if pivots[0] == 0.0 or np.min(pivots) < _DEPENDENT_PIVOT * pivots[0]:
        raise ValueError("columns are numerically dependent; cannot orthonormalize")
    return q


# ---------------------------------------------------------------------------
# Plain-text file formats.
#
# Matrix: first line "rows cols", then one line per row of space-separated
# decimals.  Vector: first line "dim", then one value per line.  Values are
# written with 17 significant digits so float64 round-trips exactly.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix(path: str | os.PathLike, a) -> None:
    """Write a matrix in the plain-text format described above."""
    arr = as_matrix(a)
    lines = [f"{arr.shape[0]} {arr.shape[1]}"]
    lines.extend(" ".join(_fmt(x) for x in row) for row in arr)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'rows cols' header")
        rows, cols = int(header[0]), int(header[1])
        data = np.loadtxt(fh, dtype=float, ndmin=2)
    if data.shape != (rows, cols):
        raise ValueError(f"{path}: body shape {data.shape} does not match header ({rows}, {cols})")
    return as_matrix(data, name=str(path))


def write_vector(path: str | os.PathLike, v) -> None:
    """Write a vector: a "dim" header line, then one value per line."""
    arr = as_vector(v)
    lines = [str(arr.size)]
    lines.extend(_fmt(x) for x in arr)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vector(path: str | os.PathLike) -> np.ndarray:
    """Read a vector written by :func:`write_vector`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 1:
            raise ValueError(f"{path}: expected 'dim' header")
        dim = int(header[0])
        data = np.loadtxt(fh, dtype=float, ndmin=1)
    if data.shape != (dim,):
        raise ValueError(f"{path}: body length {data.shape} does not match header {dim}")
    return as_vector(data, name=str(path))
