"""Downstream analysis: pairwise distance matrices, spectral clustering with a
self-tuning affinity, partition scores, classical MDS, and a CKA baseline.

The clustering pipeline mirrors the usual self-tuning recipe: per-point
bandwidth sigma_i equal to the distance to the 3rd nearest neighbor, then
spectral clustering on the symmetric normalized Laplacian with a
row-normalized eigenvector embedding and seeded k-means.
"""

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DegenerateAffinity,
    DimensionMismatch,
    EmptyFile,
    LengthMismatch,
    NonSymmetric,
    ParseError,
    RaggedRows,
    RowMismatch,
    SigwError,
    TooFewItems,
    ZeroMatrix,
)
from .gaussian import igw_gaussian, sliced_igw_gaussian
from .linalg import as_matrix, sym_eigen
from .measures import EmpiricalMeasure, empirical_covariance
from .optim import OptimizerConfig, run_cd_subgradient, run_riemannian_subgradient
from .rng import child_seed, generator
from .slicing import SliceObjective, sample_directions

SYMMETRY_ATOL = 1e-9
DEGREE_FLOOR = 1e-15
SIGMA_FLOOR = 1e-12


class MdsTruncationWarning(UserWarning):
    """Negative spectrum mass above 1% was truncated during classical MDS."""


@dataclass(frozen=True)
class DistanceMatrix:
    """A labeled symmetric nonnegative matrix with zero diagonal."""

    labels: list
    values: np.ndarray
    metric_name: str

    def __post_init__(self):
        v = as_matrix(self.values, "values")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", list(self.labels))
        n = v.shape[0]
        if v.shape[1] != n:
            raise DimensionMismatch(f"distance matrix is {v.shape[0]}x{v.shape[1]}")
        if len(self.labels) != n:
            raise DimensionMismatch(f"{len(self.labels)} labels for {n} rows")
        tol = SYMMETRY_ATOL * max(1.0, float(np.max(np.abs(v))) if n else 1.0)
        if np.max(np.abs(v - v.T), initial=0.0) > tol:
            raise NonSymmetric("distance matrix is not symmetric within 1e-9")
        if np.max(np.abs(np.diag(v)), initial=0.0) > tol:
            raise DataError("distance matrix has a nonzero diagonal entry")
        if np.any(v < 0):
            raise DataError("distance matrix has a negative entry")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.labels)
            for row in self.values:
                writer.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path, metric_name: str = "loaded") -> "DistanceMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        rows = [r for r in rows if r and any(cell.strip() for cell in r)]
        if not rows:
            raise EmptyFile(f"{path} has no rows")
        labels = [cell.strip() for cell in rows[0]]
        n = len(labels)
        if len(rows) - 1 != n:
            raise RaggedRows(f"expected {n} value rows, found {len(rows) - 1}", len(rows))
        values = np.empty((n, n))
        for i, row in enumerate(rows[1:], start=2):
            if len(row) != n:
                raise RaggedRows(f"row has {len(row)} fields, expected {n}", i)
            for j, cell in enumerate(row):
                try:
                    values[i - 2, j] = float(cell)
                except ValueError:
                    raise ParseError(f"bad number {cell!r}", i, j + 1) from None
        return cls(labels=labels, values=values, metric_name=metric_name)


@dataclass(frozen=True)
class ClusteringResult:
    """Cluster assignments plus agreement scores when ground truth is known."""

    assignments: np.ndarray
    k: int
    ari: float | None = None
    purity: float | None = None

    def as_dict(self) -> dict:
        return {
            "assignments": [int(a) for a in self.assignments],
            "ari": None if self.ari is None else float(self.ari),
            "purity": None if self.purity is None else float(self.purity),
        }


@dataclass(frozen=True)
class SlicedIGW:
    """Pairwise method: optimize the sliced objective per pair.

    Directions are redrawn per unordered pair from the stream
    (seed, i, j); the optimizer defaults to the Riemannian method
    initialized at the Gaussian alignment of the pair.
    """

    m: int = 500
    optimizer: str = "riemannian"
    init: str = "gaussian-alignment"
    beta: float = 100.0
    max_iters: int | None = None
    grad_tol: float = 5e-6

    metric_name = "sliced-igw"

    def config(self) -> OptimizerConfig:
        kwargs = {"beta": self.beta, "grad_tol": self.grad_tol, "init": self.init}
        if self.max_iters is not None:
            kwargs["max_iters"] = self.max_iters
        if self.optimizer == "riemannian":
            return OptimizerConfig.riemannian_defaults(**kwargs)
        if self.optimizer == "cd":
            return OptimizerConfig.cd_defaults(**kwargs)
        raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class GaussianSlicedIGW:
    """Pairwise method: closed-form sliced value on (fitted) covariances."""

    metric_name = "gaussian-sliced-igw"


@dataclass(frozen=True)
class GaussianIGW:
    """Pairwise method: closed-form plain IGW on (fitted) covariances."""

    metric_name = "gaussian-igw"


def _covariance_of(measure):
    if isinstance(measure, EmpiricalMeasure):
        return empirical_covariance(measure)
    return measure


def _pair_distance(a, b, method, seed, i, j):
    mu, nu = (a, b) if a.dim <= b.dim else (b, a)
    if isinstance(method, GaussianIGW):
        return igw_gaussian(_covariance_of(mu), _covariance_of(nu)), None
    if isinstance(method, GaussianSlicedIGW):
        sq = sliced_igw_gaussian(_covariance_of(mu), _covariance_of(nu)).sliced_igw_squared
        return float(np.sqrt(max(sq, 0.0))), None
    directions = sample_directions(nu.dim, method.m, child_seed(seed, i, j))
    obj = SliceObjective(mu, nu, directions)
    cfg = method.config()
    run = run_riemannian_subgradient if method.optimizer == "riemannian" else run_cd_subgradient
    trace = run(obj, cfg)
    return float(np.sqrt(max(trace.final_objective, 0.0))), trace.summary()


def pairwise_distances(measures, method, seed: int, labels=None, on_pair=None) -> DistanceMatrix:
    """Distance matrix over all unordered pairs, each computed once.

    The lower-dimensional measure of each pair is placed first; ``on_pair``
    (when given) receives (i, j, optimizer summary or None) per pair, in
    order.
    """
    n = len(measures)
    if n < 2:
        raise TooFewItems(f"need at least 2 measures, got {n}")
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} measures")
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                dist, summary = _pair_distance(measures[i], measures[j], method, seed, i, j)
            except SigwError as exc:
                exc.args = (f"pair ({labels[i]}, {labels[j]}): {exc}",)
                raise
            values[i, j] = values[j, i] = dist
            if on_pair is not None:
                on_pair(i, j, summary)
    return DistanceMatrix(labels=labels, values=values, metric_name=method.metric_name)


def self_tuning_affinity(d: DistanceMatrix, neighbor_index: int = 3) -> np.ndarray:
    """K_ij = exp(-D_ij^2 / (sigma_i sigma_j)), sigma_i the distance from i to
    its neighbor_index-th nearest neighbor (self excluded), floored at 1e-12."""
    n = d.n
    if n <= neighbor_index:
        raise TooFewItems(f"need more than {neighbor_index} items, got {n}")
    off = d.values[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    sigma = np.maximum(np.sort(off, axis=1)[:, neighbor_index - 1], SIGMA_FLOOR)
    k = np.exp(-(d.values**2) / np.outer(sigma, sigma))
    np.fill_diagonal(k, 1.0)
    return 0.5 * (k + k.T)


def spectral_cluster(affinity, k: int, seed: int) -> ClusteringResult:
    """Normalized spectral clustering on an affinity matrix.

    Embeds items in the k eigenvectors of L_sym = I - D^{-1/2} K D^{-1/2}
    with the smallest eigenvalues, row-normalizes, and runs seeded k-means
    (k-means++ with 10 restarts).
    """
    a = as_matrix(affinity, "affinity")
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionMismatch(f"affinity is {a.shape[0]}x{a.shape[1]}")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_ATOL * max(
        1.0, float(np.max(np.abs(a)) if n else 1.0)
    ):
        raise NonSymmetric("affinity is not symmetric")
    if np.any(a < 0):
        raise DataError("affinity has a negative entry")
    if not 2 <= k <= n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    degrees = a.sum(axis=1)
    if np.min(degrees) <= DEGREE_FLOOR:
        raise DegenerateAffinity("an affinity row sums to (numerically) zero")
    inv_root = 1.0 / np.sqrt(degrees)
    l_sym = np.eye(n) - inv_root[:, None] * a * inv_root[None, :]
    eig = sym_eigen(l_sym)
    embedding = eig.eigenvectors[:, n - k :]  # k smallest eigenvalues
    norms = np.linalg.norm(embedding, axis=1)
    embedding = embedding / np.maximum(norms, 1e-300)[:, None]
    assignments = _kmeans(embedding, k, generator(seed))
    return ClusteringResult(assignments=assignments, k=k)


def _kmeans_pp_centers(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _kmeans(points, k, rng, restarts: int = 10, max_iter: int = 100):
    n = points.shape[0]
    best_labels = None
    best_inertia = np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_centers(points, k, rng)
        labels = None
        for _ in range(max_iter):
            d2 = (
                np.sum(points**2, axis=1)[:, None]
                - 2.0 * points @ centers.T
                + np.sum(centers**2, axis=1)[None, :]
            )
            new_labels = np.argmin(d2, axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for j in range(k):
                members = points[labels == j]
                if members.shape[0]:
                    centers[j] = members.mean(axis=0)
        inertia = float(np.sum((points - centers[labels]) ** 2))
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def _pairs(counts):
    return float(np.sum(counts * (counts - 1))) / 2.0


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index between two partitions."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"partition lengths {a.size} != {b.size}")
    n = a.size
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1.0)
    sum_cells = _pairs(table)
    sum_rows = _pairs(table.sum(axis=1))
    sum_cols = _pairs(table.sum(axis=0))
    expected = sum_rows * sum_cols / _pairs(np.array([n], dtype=float))
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))


def purity(predicted, truth) -> float:
    """Fraction of items whose predicted cluster's majority truth label
    matches their own."""
    predicted = np.asarray(predicted).ravel()
    truth = np.asarray(truth).ravel()
    if predicted.size != truth.size:
        raise LengthMismatch(f"partition lengths {predicted.size} != {truth.size}")
    n = predicted.size
    if n == 0:
        return 1.0
    total = 0
    for cluster in np.unique(predicted):
        _, counts = np.unique(truth[predicted == cluster], return_counts=True)
        total += int(counts.max())
    return total / n


def classical_mds_2d(d: DistanceMatrix) -> np.ndarray:
    """Classical (Torgerson) MDS to 2 coordinates.

    Double-centers the squared distances, takes the top-2 eigenpairs with
    eigenvalues clamped at 0, and fixes signs so each column's first nonzero
    entry is positive.  Warns when the clamped negative spectrum mass exceeds
    1% of the total (sliced IGW is a pseudometric and need not be Euclidean).
    """
    n = d.n
    if n < 3:
        raise TooFewItems(f"need at least 3 items, got {n}")
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d.values**2) @ j
    eig = sym_eigen(0.5 * (b + b.T))
    w = eig.eigenvalues
    negative_mass = float(np.sum(np.abs(w[w < 0])))
    total_mass = float(np.sum(np.abs(w)))
    if total_mass > 0 and negative_mass > 0.01 * total_mass:
        warnings.warn(
            f"truncated {negative_mass / total_mass:.1%} negative spectrum mass",
            MdsTruncationWarning,
            stacklevel=2,
        )
    coords = eig.eigenvectors[:, :2] * np.sqrt(np.maximum(w[:2], 0.0))
    for col in range(2):
        nonzero = np.nonzero(coords[:, col])[0]
        if nonzero.size and coords[nonzero[0], col] < 0:
            coords[:, col] = -coords[:, col]
    return coords


def cka_distance(x, y) -> float:
    """1 - linear CKA between two embedding matrices of the same samples.

    Columns are centered first; the alignment is ||Y^T X||_F^2 /
    (||X^T X||_F ||Y^T Y||_F), which is invariant to orthogonal maps of
    either embedding.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[0] != y.shape[0]:
        raise RowMismatch(f"row counts {x.shape[0]} != {y.shape[0]}")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    den_x = float(np.linalg.norm(xc.T @ xc))
    den_y = float(np.linalg.norm(yc.T @ yc))
    if den_x < 1e-15 or den_y < 1e-15:
        raise ZeroMatrix("an embedding has numerically zero Gram norm")
    alignment = float(np.linalg.norm(yc.T @ xc)) ** 2 / (den_x * den_y)
    return float(min(1.0, max(0.0, 1.0 - alignment)))
