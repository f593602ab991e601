"""Haar direction sampling, per-slice costs, and the Monte-Carlo estimator.

A slice cost is the squared univariate IGW between the two projections
(theta^T Delta for mu, theta^T for nu); the estimator is the plain mean over
a fixed direction set.  Directions are drawn once per experiment and shared
across every optimizer iteration, never resampled inside the loop.

The evaluation kernel `_slice_pass` batches all directions through matrix
products and row-wise sorts, and can return a subgradient along with the
value; the optimizer module drives it with want_grad=True.  Equal-size
uniform supports take the sorting fast path; anything else falls back to the
general quantile merge per slice.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import DimensionMismatch, DimensionOrder, ZeroDimension
from .gaussian import projected_igw_gaussian
from .measures import EmpiricalMeasure, GaussianMeasure, project, second_moment_matrix
from .univariate import Orientation, _coupling_core, _is_uniform, igw_1d

_UNIT_ATOL = 1e-12


@dataclass(frozen=True)
class DirectionSet:
    """m unit vectors on the sphere S^{d_y - 1} plus the seed that drew them."""

    directions: np.ndarray
    seed: int

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float)
        if d.ndim != 2:
            raise DimensionMismatch("directions must be an (m, d_y) array")
        norms = np.linalg.norm(d, axis=1)
        if not np.all(np.abs(norms - 1.0) <= _UNIT_ATOL):
            raise DimensionMismatch("every direction must have unit norm within 1e-12")
        object.__setattr__(self, "directions", d)

    @property
    def m(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    def to_csv(self, path) -> None:
        """One row per direction; the seed rides along as a comment line."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# seed={self.seed}\n")
            writer = csv.writer(fh)
            for row in self.directions:
                writer.writerow([repr(float(x)) for x in row])


def sample_directions(d_y: int, m: int, seed: int) -> DirectionSet:
    """m i.i.d. Haar directions on S^{d_y - 1}: normalized standard normals,
    deterministic given seed; an (astronomically unlikely) zero draw is
    rejected and redrawn."""
    if d_y < 1 or m < 1:
        raise ZeroDimension(f"need d_y >= 1 and m >= 1, got d_y={d_y}, m={m}")
    gen = rng.generator(seed)
    raw = gen.standard_normal((m, d_y))
    norms = np.linalg.norm(raw, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        raw[bad] = gen.standard_normal((int(bad.sum()), d_y))
        norms = np.linalg.norm(raw, axis=1)
    return DirectionSet(raw / norms[:, None], seed)


@dataclass(frozen=True)
class SliceObjective:
    """A fixed pair of measures plus the direction set they are sliced with;
    the lower-dimensional measure is mu (d_x <= d_y)."""

    mu: EmpiricalMeasure | GaussianMeasure
    nu: EmpiricalMeasure | GaussianMeasure
    directions: DirectionSet

    def __post_init__(self):
        if isinstance(self.mu, GaussianMeasure) != isinstance(self.nu, GaussianMeasure):
            raise TypeError("mu and nu must both be empirical or both Gaussian")
        if self.mu.dim > self.nu.dim:
            raise DimensionOrder(f"need d_x <= d_y, got {self.mu.dim} > {self.nu.dim}")
        if self.directions.dim != self.nu.dim:
            raise DimensionMismatch(
                f"directions have dimension {self.directions.dim}, nu has {self.nu.dim}"
            )

    @property
    def gaussian(self) -> bool:
        return isinstance(self.mu, GaussianMeasure)


def slice_cost(mu, nu, delta, theta) -> float:
    """Squared univariate IGW of the two projections along one direction."""
    if isinstance(mu, GaussianMeasure):
        return projected_igw_gaussian(mu, nu, delta, theta)
    return igw_1d(project(mu, theta, delta), project(nu, theta)).igw_squared


def slice_costs(obj: SliceObjective, delta) -> np.ndarray:
    """Per-direction costs for the whole set, in direction order."""
    costs, _ = _slice_pass(obj, np.asarray(delta, dtype=float), want_grad=False)
    return costs


def mc_estimate(obj: SliceObjective, delta) -> float:
    """Monte-Carlo estimate of the sliced squared distance at this aligner:
    the mean of slice_cost over the direction set."""
    return float(np.mean(slice_costs(obj, delta)))


def _slice_pass(obj: SliceObjective, delta: np.ndarray, want_grad: bool):
    """Evaluate all slice costs, and optionally one subgradient of their mean.

    Returns (costs, grad) with grad None unless requested.  The subgradient
    element picks the quantile coupling chosen per slice (monotone on ties).
    """
    t = obj.directions.directions
    if delta.shape != (obj.nu.dim, obj.mu.dim):
        raise DimensionMismatch(
            f"aligner shape {delta.shape} does not match ({obj.nu.dim}, {obj.mu.dim})"
        )
    if obj.gaussian:
        return _gaussian_pass(obj.mu, obj.nu, delta, t, want_grad)
    return _empirical_pass(obj.mu, obj.nu, delta, t, want_grad)


def _gaussian_pass(mu, nu, delta, t, want_grad):
    a_rows = t @ delta  # rows a_r^T = theta_r^T Delta
    va = a_rows @ mu.covariance
    s = np.einsum("ri,ri->r", a_rows, va)
    b = np.einsum("ri,ri->r", t @ nu.covariance, t)
    costs = (s - b) ** 2
    if not want_grad:
        return costs, None
    # smooth gradient: 4 (a - b) theta (S_mu Delta^T theta)^T per slice
    grad = t.T @ (4.0 * (s - b)[:, None] * va) / t.shape[0]
    return costs, grad


def _empirical_pass(mu, nu, delta, t, want_grad):
    x, wx = mu.points, mu.weights
    y, wy = nu.points, nu.weights
    a_rows = t @ delta
    pa = a_rows @ x.T  # (R, n) projections of mu
    pb = t @ y.T  # (R, m) projections of nu

    fast = x.shape[0] == y.shape[0] and _is_uniform(wx) and _is_uniform(wy)
    if fast:
        n = x.shape[0]
        ia = np.argsort(pa, axis=1, kind="stable")
        sa = np.take_along_axis(pa, ia, axis=1)
        sb = np.sort(pb, axis=1, kind="stable")
        # the same einsum over the same arrays for moments and correlations,
        # so identical projections cancel to an exact 0 cost
        m2a = np.einsum("ri,ri->r", sa, sa) / n
        m2b = np.einsum("ri,ri->r", sb, sb) / n
        corr_mono = np.einsum("ri,ri->r", sa, sb) / n
        corr_anti = np.einsum("ri,ri->r", sa, sb[:, ::-1]) / n
        mono = corr_mono**2 >= corr_anti**2
        c = np.where(mono, corr_mono, corr_anti)
    else:
        m2a = (pa * pa) @ wx
        m2b = (pb * pb) @ wy
        c = np.empty(t.shape[0])
        couplings = []
        for r in range(t.shape[0]):
            cm = _corr(pa[r], wx, pb[r], wy, Orientation.MONOTONE)
            ca = _corr(pa[r], wx, pb[r], wy, Orientation.ANTITONE)
            orient = Orientation.MONOTONE if cm**2 >= ca**2 else Orientation.ANTITONE
            c[r] = cm if orient is Orientation.MONOTONE else ca
            if want_grad:
                couplings.append(_coupling_core(pa[r], wx, pb[r], wy, orient))

    costs = m2a**2 + m2b**2 - 2.0 * c**2
    neg = costs < 0.0
    if np.any(neg):
        # cancellation roundoff only; the bound mirrors the univariate solver
        assert np.all(-costs[neg] < 1e-9 * (m2a[neg] ** 2 + m2b[neg] ** 2))
        costs = np.where(neg, 0.0, costs)
    if not want_grad:
        return costs, None

    va = a_rows @ second_moment_matrix(mu)  # rows (R_mu Delta^T theta)^T
    if fast:
        partner = np.where(mono[:, None], sb, sb[:, ::-1])
        z = np.empty_like(pa)
        np.put_along_axis(z, ia, partner, axis=1)
        u = (z @ x) / x.shape[0]  # rows u_r = sum_i w_i (coupled nu value)_i x_i
    else:
        u = np.empty((t.shape[0], x.shape[1]))
        for r, (ix, iy, mass) in enumerate(couplings):
            u[r] = (mass * pb[r][iy]) @ x[ix]
    grad = t.T @ (4.0 * m2a[:, None] * va - 4.0 * c[:, None] * u) / t.shape[0]
    return costs, grad


def _corr(xv, xw, yv, yw, orientation):
    ix, iy, mass = _coupling_core(xv, xw, yv, yw, orientation)
    return float(np.sum(mass * xv[ix] * yv[iy]))
