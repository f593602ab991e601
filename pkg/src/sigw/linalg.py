"""Dense symmetric eigendecomposition and positive-diagonal QR.

Thin, contract-enforcing wrappers around LAPACK: descending eigenvalue order,
validated symmetry/finiteness on the way in, and the positive-diagonal QR
convention needed for a well-defined retraction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NonSymmetric, RankDeficient

# fixed, non-configurable tolerances so test contracts stay stable
SYMMETRY_RTOL = 1e-9
RANK_RTOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-d float array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise NonFinite(f"{name} must be 2-d, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return m


@dataclass(frozen=True)
class SymmetricEigen:
    """Eigendecomposition of a symmetric matrix.

    Attributes
    ----------
    eigenvalues : ndarray, shape (d,)
        Sorted descending; ties keep LAPACK's original (ascending-output)
        order, so the decomposition is deterministic.
    eigenvectors : ndarray, shape (d, d)
        Orthogonal; column i pairs with eigenvalues[i].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eigen(m) -> SymmetricEigen:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    m : array_like, shape (d, d)
        Symmetric to within ``1e-9 * ||m||_F``.

    Returns
    -------
    SymmetricEigen
        Satisfies ``V diag(w) V^T == m`` to ``1e-8 * ||m||_F``.

    Raises
    ------
    NonSymmetric
        If the symmetry tolerance is violated.
    NonFinite
        On NaN/Inf input.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NonSymmetric(f"matrix is {m.shape[0]}x{m.shape[1]}, not square")
    scale = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise NonSymmetric("matrix is not symmetric within 1e-9 relative tolerance")
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    order = np.argsort(-w, kind="stable")
    return SymmetricEigen(eigenvalues=w[order], eigenvectors=v[:, order])


def qr_positive(m) -> tuple[np.ndarray, np.ndarray]:
    """QR factorization with strictly positive diagonal of R.

    Parameters
    ----------
    m : array_like, shape (r, c) with r >= c
        Full column rank: every pivot must exceed ``1e-12 * ||m||_F``.

    Returns
    -------
    (q, r)
        q with orthonormal columns, r upper triangular with positive
        diagonal, ``q @ r == m`` to ``1e-10 * ||m||_F``.

    Raises
    ------
    RankDeficient
        When a pivot magnitude falls below the threshold.
    """
    m = as_matrix(m)
    rows, cols = m.shape
    if rows < cols:
        raise RankDeficient(f"need rows >= cols, got {rows}x{cols}")
    q, r = np.linalg.qr(m, mode="reduced")
    diag = np.diag(r)
    scale = np.linalg.norm(m)
    if np.min(np.abs(diag)) <= RANK_RTOL * scale or scale == 0.0:
        raise RankDeficient("pivot magnitude below 1e-12 relative threshold")
    signs = np.where(diag < 0, -1.0, 1.0)
    return q * signs, r * signs[:, None]
