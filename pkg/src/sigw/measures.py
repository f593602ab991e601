"""Empirical and centered Gaussian measures: moments, projections, centering.

Weights are stored explicitly even when uniform so the univariate solver's
general quantile path works unchanged for non-uniform inputs; Gaussian
measures are centered only (covariance is the whole parameter).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyMeasure, NonFinite, NotPSD
from .linalg import as_matrix

WEIGHT_SUM_ATOL = 1e-12


def _check_weights(weights: np.ndarray, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise DimensionMismatch(f"weights shape {w.shape} does not match {n} points")
    if not np.all(np.isfinite(w)):
        raise NonFinite("weights contain NaN or Inf")
    if np.any(w < 0):
        raise NonFinite("weights must be nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_ATOL:
        raise NonFinite(f"weights sum to {w.sum()!r}, expected 1 within 1e-12")
    return w


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Finitely supported measure on R^d.

    Attributes
    ----------
    points : ndarray, shape (n, d)
        One sample per row.
    weights : ndarray, shape (n,)
        Nonnegative, summing to 1 within 1e-12.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = as_matrix(self.points, "points")
        if pts.shape[0] == 0:
            raise EmptyMeasure("measure needs at least one point")
        w = _check_weights(self.weights, pts.shape[0])
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points) -> "EmpiricalMeasure":
        pts = as_matrix(points, "points")
        n = pts.shape[0]
        if n == 0:
            raise EmptyMeasure("measure needs at least one point")
        return cls(pts, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GaussianMeasure:
    """Centered Gaussian N(0, covariance)."""

    covariance: np.ndarray

    def __post_init__(self):
        cov = as_matrix(self.covariance, "covariance")
        if cov.shape[0] != cov.shape[1]:
            raise DimensionMismatch(f"covariance is {cov.shape}, not square")
        scale = max(np.linalg.norm(cov), 1e-300)
        if np.linalg.norm(cov - cov.T) > 1e-9 * scale:
            raise NotPSD("covariance is not symmetric within 1e-9 relative tolerance")
        lo = float(np.min(np.linalg.eigvalsh(0.5 * (cov + cov.T))))
        if lo < -1e-9 * scale:
            raise NotPSD(f"covariance has eigenvalue {lo!r} below tolerance")
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]


@dataclass(frozen=True)
class UnivariateSample:
    """Weighted sample on the real line (a projected measure)."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DimensionMismatch(f"values must be 1-d, got ndim={v.ndim}")
        if v.shape[0] == 0:
            raise EmptyMeasure("sample needs at least one value")
        if not np.all(np.isfinite(v)):
            raise NonFinite("values contain NaN or Inf")
        w = _check_weights(self.weights, v.shape[0])
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, values) -> "UnivariateSample":
        v = np.asarray(values, dtype=float).ravel()
        if v.shape[0] == 0:
            raise EmptyMeasure("sample needs at least one value")
        return cls(v, np.full(v.shape[0], 1.0 / v.shape[0]))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def second_moment(m) -> float:
    """Second absolute moment: sum_i w_i ||x_i||^2 (trace of the covariance
    for a centered Gaussian)."""
    if isinstance(m, GaussianMeasure):
        return float(np.trace(m.covariance))
    if isinstance(m, UnivariateSample):
        return float(np.dot(m.weights, m.values**2))
    return float(np.dot(m.weights, np.einsum("ij,ij->i", m.points, m.points)))


def second_moment_matrix(m) -> np.ndarray:
    """Second moment matrix sum_i w_i x_i x_i^T (the covariance itself for a
    centered Gaussian); symmetric PSD with trace equal to second_moment."""
    if isinstance(m, GaussianMeasure):
        return m.covariance
    r = m.points.T @ (m.points * m.weights[:, None])
    return 0.5 * (r + r.T)


def project(m: EmpiricalMeasure, direction, aligner=None) -> UnivariateSample:
    """Project onto a direction, optionally through an aligner.

    With ``aligner`` (shape (d_y, d_x)), points live in R^{d_x} and the
    projection is ``(direction^T aligner) x_i``; without it the points live in
    R^{d_y} and the projection is ``direction^T x_i``.  Weights pass through.
    """
    theta = np.asarray(direction, dtype=float).ravel()
    if aligner is not None:
        delta = as_matrix(aligner, "aligner")
        if theta.shape[0] != delta.shape[0]:
            raise DimensionMismatch(
                f"direction has length {theta.shape[0]}, aligner has {delta.shape[0]} rows"
            )
        if delta.shape[1] != m.dim:
            raise DimensionMismatch(
                f"aligner has {delta.shape[1]} cols, measure has dimension {m.dim}"
            )
        vec = delta.T @ theta
    else:
        if theta.shape[0] != m.dim:
            raise DimensionMismatch(
                f"direction has length {theta.shape[0]}, measure has dimension {m.dim}"
            )
        vec = theta
    return UnivariateSample(m.points @ vec, m.weights)


def center(m: EmpiricalMeasure) -> EmpiricalMeasure:
    """Subtract the weighted mean so the output mean is 0 (to 1e-12)."""
    mean = m.weights @ m.points
    return EmpiricalMeasure(m.points - mean, m.weights)


def empirical_covariance(m: EmpiricalMeasure) -> GaussianMeasure:
    """Centered Gaussian approximation: covariance of the centered measure."""
    return GaussianMeasure(second_moment_matrix(center(m)))
