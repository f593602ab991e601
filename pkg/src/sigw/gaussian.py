"""Closed-form IGW and sliced-IGW values for centered Gaussians.

These are the ground-truth oracles used by every validation path: the sliced
squared distance between N(0, S_mu) on R^{d_x} and N(0, S_nu) on R^{d_y}
(d_x <= d_y) is

    ((tr S_mu - tr S_nu)^2 + 2 sum_i (l_i(S_mu) - l_i(S_nu))^2) / (d_y (d_y + 2))

with the mu spectrum zero-padded, attained at delta_star = V J U^T where U, V
diagonalize the covariances with descending eigenvalues and J stacks the
identity over zeros.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DimensionOrder, NotPSD
from .linalg import sym_eigen
from .measures import GaussianMeasure

PSD_CLAMP_RTOL = 1e-8


@dataclass(frozen=True)
class GaussianAlignment:
    """Optimal aligner (on the Stiefel manifold to 1e-10) and the sliced
    squared distance it achieves."""

    delta_star: np.ndarray
    sliced_igw_squared: float


def _clamped_spectrum(g: GaussianMeasure) -> tuple[np.ndarray, np.ndarray]:
    """Descending eigenvalues with tiny negatives clamped to 0, plus the
    eigenvector basis.  Clamping beyond 1e-8 * ||S||_F is a real PSD
    violation."""
    eig = sym_eigen(g.covariance)
    w = eig.eigenvalues
    scale = max(np.linalg.norm(g.covariance), 1e-300)
    if np.min(w) < -PSD_CLAMP_RTOL * scale:
        raise NotPSD(f"eigenvalue {np.min(w)!r} below -1e-8 relative tolerance")
    return np.maximum(w, 0.0), eig.eigenvectors


def sliced_igw_gaussian(sigma_mu: GaussianMeasure, sigma_nu: GaussianMeasure) -> GaussianAlignment:
    """Closed-form sliced squared IGW between centered Gaussians, with the
    optimal aligner.

    Raises
    ------
    DimensionOrder
        If sigma_mu has higher dimension than sigma_nu.
    """
    dx, dy = sigma_mu.dim, sigma_nu.dim
    if dx > dy:
        raise DimensionOrder(f"need d_x <= d_y, got {dx} > {dy}")
    lam_mu, u = _clamped_spectrum(sigma_mu)
    lam_nu, v = _clamped_spectrum(sigma_nu)
    padded = np.concatenate([lam_mu, np.zeros(dy - dx)])
    value = ((padded.sum() - lam_nu.sum()) ** 2 + 2.0 * np.sum((padded - lam_nu) ** 2)) / (
        dy * (dy + 2)
    )
    delta_star = v[:, :dx] @ u.T
    return GaussianAlignment(delta_star=delta_star, sliced_igw_squared=float(value))


def igw_gaussian(sigma_mu: GaussianMeasure, sigma_nu: GaussianMeasure) -> float:
    """Unsliced IGW distance between centered Gaussians: the l2 distance
    between descending spectra, the shorter one zero-padded."""
    lam_mu, _ = _clamped_spectrum(sigma_mu)
    lam_nu, _ = _clamped_spectrum(sigma_nu)
    d = max(lam_mu.shape[0], lam_nu.shape[0])
    a = np.concatenate([lam_mu, np.zeros(d - lam_mu.shape[0])])
    b = np.concatenate([lam_nu, np.zeros(d - lam_nu.shape[0])])
    return float(np.sqrt(np.sum((a - b) ** 2)))


def projected_igw_gaussian(
    sigma_mu: GaussianMeasure, sigma_nu: GaussianMeasure, delta, theta
) -> float:
    """Squared IGW between the two 1-d projections along theta: a perfect
    square (a - b)^2 with a = theta^T Delta S_mu Delta^T theta and
    b = theta^T S_nu theta."""
    delta = np.asarray(delta, dtype=float)
    theta = np.asarray(theta, dtype=float).ravel()
    if delta.shape != (sigma_nu.dim, sigma_mu.dim):
        raise DimensionMismatch(
            f"aligner shape {delta.shape} does not match ({sigma_nu.dim}, {sigma_mu.dim})"
        )
    if theta.shape[0] != sigma_nu.dim:
        raise DimensionMismatch(
            f"direction has length {theta.shape[0]}, expected {sigma_nu.dim}"
        )
    at = delta.T @ theta
    a = at @ sigma_mu.covariance @ at
    b = theta @ sigma_nu.covariance @ theta
    return float((a - b) ** 2)
