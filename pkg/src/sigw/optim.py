"""Stiefel-manifold optimizers for the sliced objective.

Two methods minimize F(Delta) = mean of squared per-slice IGW costs over a
fixed direction set:

* a constraint-dissolving subgradient method: descend
  H(Delta) = F(A(Delta)) + (beta/4) ||Delta^T Delta - I||_F^2 in the ambient
  space, where A(Delta) = (1/8) Delta (15 I - 10 Delta^T Delta
  + 3 (Delta^T Delta)^2) agrees with the identity on the manifold;
* a Riemannian subgradient method: project a subgradient onto the tangent
  space, backtrack along it, and retract with positive-diagonal QR.

The dissolving method stops on its iteration budget only (a single small
subgradient certifies nothing for a nonsmooth objective); the Riemannian
method stops on a tangent-gradient tolerance, exhausted backtracking, or the
budget.  With the theoretical penalty/step regime, every dissolving iterate
keeps feasibility residual at most 1/6.
"""

import enum
import time
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InfeasibleInit, InfeasiblePoint
from .gaussian import sliced_igw_gaussian
from .linalg import as_matrix, qr_positive
from .measures import EmpiricalMeasure, empirical_covariance, second_moment
from .slicing import SliceObjective, _slice_pass


class ConvergedReason(enum.Enum):
    MAX_ITERS = "max-iters"
    GRAD_TOL = "grad-tol"
    BACKTRACK_EXHAUSTED = "backtrack-exhausted"


@dataclass(frozen=True)
class StiefelPoint:
    """A d_y x d_x matrix with its feasibility residual ||M^T M - I||_F,
    recomputed on construction."""

    matrix: np.ndarray
    feasibility_residual: float = field(init=False)

    def __post_init__(self):
        m = as_matrix(self.matrix, "matrix")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "feasibility_residual", _residual(m))


def _residual(m: np.ndarray) -> float:
    d = m.shape[1]
    return float(np.linalg.norm(m.T @ m - np.eye(d)))


@dataclass(frozen=True)
class PracticalStep:
    """The experiment step rule: eta_k = min(0.01 / max(||G_k||, 1),
    5000 / (k + 1))."""

    def step(self, k: int, grad_norm: float, beta: float) -> float:
        return min(0.01 / max(grad_norm, 1.0), 5000.0 / (k + 1))


@dataclass(frozen=True)
class TheoreticalStep:
    """eta_k = min(1 / (2 beta), c / k): summable squares, divergent sum,
    capped at 1 / (2 beta) as the feasibility guarantee requires."""

    c: float = 1.0

    def step(self, k: int, grad_norm: float, beta: float) -> float:
        return min(1.0 / (2.0 * beta), self.c / k)


@dataclass(frozen=True, eq=False)
class OptimizerConfig:
    """Shared configuration for both methods.

    The defaults are the dissolving method's experiment values; use
    :meth:`riemannian_defaults` for the Riemannian method's budget (500
    iterations, everything else equal).  ``init`` is "padded-identity",
    "gaussian-alignment", or an explicit matrix.
    """

    beta: float = 100.0
    step_rule: PracticalStep | TheoreticalStep = PracticalStep()
    max_iters: int = 2500
    grad_tol: float = 5e-6
    backtrack_max: int = 12
    backtrack_alpha: float = 1e-4
    init: object = "padded-identity"

    @classmethod
    def cd_defaults(cls, **overrides) -> "OptimizerConfig":
        return cls(**overrides)

    @classmethod
    def riemannian_defaults(cls, **overrides) -> "OptimizerConfig":
        overrides.setdefault("max_iters", 500)
        return cls(**overrides)

    def describe(self) -> dict:
        if isinstance(self.init, str):
            init = self.init
        else:
            init = "given"
        rule = (
            {"theoretical": self.step_rule.c}
            if isinstance(self.step_rule, TheoreticalStep)
            else "practical"
        )
        return {
            "beta": self.beta,
            "step_rule": rule,
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
            "backtrack_max": self.backtrack_max,
            "backtrack_alpha": self.backtrack_alpha,
            "init": init,
        }


IterateRecord = namedtuple("IterateRecord", ["iteration", "objective", "residual", "grad_norm"])

TheoreticalConstants = namedtuple("TheoreticalConstants", ["alpha", "l1", "beta_min"])


@dataclass
class OptimizerTrace:
    """Per-iteration records plus the final manifold point.

    For the dissolving method the final point is the QR projection of the
    last (possibly slightly infeasible) iterate; that iterate's residual and
    penalized objective survive in final_raw_residual and raw_h.
    """

    iterates: list
    final: StiefelPoint
    converged_reason: ConvergedReason
    final_objective: float
    config: OptimizerConfig
    wall_time_s: float
    final_raw_residual: float | None = None
    raw_h: float | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("iteration,objective,residual,grad_norm\n")
            for rec in self.iterates:
                fh.write(
                    f"{rec.iteration},{float(rec.objective)!r},"
                    f"{float(rec.residual)!r},{float(rec.grad_norm)!r}\n"
                )

    def summary(self) -> dict:
        out = {
            "final_objective": float(self.final_objective),
            "converged_reason": self.converged_reason.value,
            "iterations": len(self.iterates),
            "wall_time_s": float(self.wall_time_s),
            "config": self.config.describe(),
        }
        if self.final_raw_residual is not None:
            out["final_raw_residual"] = float(self.final_raw_residual)
        if self.raw_h is not None:
            out["raw_h"] = float(self.raw_h)
        return out


def objective_f(obj: SliceObjective, delta) -> float:
    """The sliced objective: mean slice cost at this aligner, defined on all
    of R^{d_y x d_x} (no feasibility requirement)."""
    costs, _ = _slice_pass(obj, np.asarray(delta, dtype=float), want_grad=False)
    return float(np.mean(costs))


def subgrad_f(obj: SliceObjective, delta) -> np.ndarray:
    """One Clarke subgradient element of the sliced objective.

    Per slice: the smooth moment term 4 (theta^T Delta R_mu Delta^T theta)
    (R_mu Delta^T theta theta^T)^T plus the coupling term
    -4 (theta^T Delta C theta) (C theta theta^T)^T with C the cross-moment
    matrix of the quantile coupling the univariate solver selects (monotone
    on ties); for Gaussian inputs the per-slice cost is smooth and this is
    its gradient.
    """
    _, grad = _slice_pass(obj, np.asarray(delta, dtype=float), want_grad=True)
    return grad


def _value_and_subgrad(obj, delta):
    costs, grad = _slice_pass(obj, delta, want_grad=True)
    return float(np.mean(costs)), grad


def dissolve_map(delta) -> np.ndarray:
    """A(Delta) = (1/8) Delta (15 I - 10 Delta^T Delta + 3 (Delta^T Delta)^2);
    the identity on the Stiefel manifold."""
    delta = np.asarray(delta, dtype=float)
    g = delta.T @ delta
    d = g.shape[0]
    return delta @ (15.0 * np.eye(d) - 10.0 * g + 3.0 * (g @ g)) / 8.0


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def dissolve_jacobian_apply(delta, xi) -> np.ndarray:
    """Directional derivative of the dissolving map at delta applied to xi."""
    delta = np.asarray(delta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != delta.shape:
        raise DimensionMismatch(f"xi shape {xi.shape} does not match delta {delta.shape}")
    g = delta.T @ delta
    d = g.shape[0]
    phi = _sym(delta.T @ xi)
    return (
        xi @ (15.0 * np.eye(d) - 10.0 * g + 3.0 * (g @ g)) / 8.0
        - delta @ phi
        + 1.5 * delta @ _sym(phi @ (g - np.eye(d)))
    )


def subgrad_h(obj: SliceObjective, delta, beta: float) -> np.ndarray:
    """Subgradient of the dissolved objective H: the A-Jacobian transport of
    a subgradient of F at A(Delta), plus the penalty beta Delta
    (Delta^T Delta - I)."""
    delta = np.asarray(delta, dtype=float)
    s = subgrad_f(obj, dissolve_map(delta))
    return dissolve_jacobian_apply(delta, s) + beta * delta @ (
        delta.T @ delta - np.eye(delta.shape[1])
    )


def theoretical_constants(mu, nu) -> TheoreticalConstants:
    """The feasibility/Lipschitz constants driving the theoretical regime:
    alpha = 4 M2(mu) sqrt(217/216) (M2(nu) + (217/216) M2(mu)), l1 is the
    single-slice Lipschitz constant 4 M2(mu) sqrt(2) (M2(nu) + 2 M2(mu)),
    and beta_min = max(162 alpha, 2 l1)."""
    m2_mu = second_moment(mu)
    m2_nu = second_moment(nu)
    ratio = 217.0 / 216.0
    alpha = 4.0 * m2_mu * np.sqrt(ratio) * (m2_nu + ratio * m2_mu)
    l1 = 4.0 * m2_mu * np.sqrt(2.0) * (m2_nu + 2.0 * m2_mu)
    return TheoreticalConstants(float(alpha), float(l1), float(max(162.0 * alpha, 2.0 * l1)))


def _covariance_of(measure):
    if isinstance(measure, EmpiricalMeasure):
        return empirical_covariance(measure)
    return measure


def _resolve_init(obj: SliceObjective, cfg: OptimizerConfig) -> np.ndarray:
    dy, dx = obj.nu.dim, obj.mu.dim
    if isinstance(cfg.init, str):
        if cfg.init == "padded-identity":
            return np.eye(dy, dx)
        if cfg.init == "gaussian-alignment":
            return sliced_igw_gaussian(
                _covariance_of(obj.mu), _covariance_of(obj.nu)
            ).delta_star
        raise ValueError(f"unknown init {cfg.init!r}")
    init = as_matrix(cfg.init, "init")
    if init.shape != (dy, dx):
        raise DimensionMismatch(f"init shape {init.shape} does not match ({dy}, {dx})")
    return init


def _degenerate(obj) -> bool:
    # mass concentrated at the origin makes F constant and every subgradient 0
    return second_moment(obj.mu) == 0.0


def run_cd_subgradient(obj: SliceObjective, cfg: OptimizerConfig) -> OptimizerTrace:
    """Constraint-dissolving subgradient descent on H.

    Requires an initial point with ||D^T D - I||_F <= 1/6; runs exactly
    max_iters steps (budget is the only stop) and reports the objective at
    the QR projection of the last iterate, with the raw penalized value in
    raw_h.
    """
    start = time.perf_counter()
    delta = _resolve_init(obj, cfg)
    if _residual(delta) > 1.0 / 6.0:
        raise InfeasibleInit(f"initial residual {_residual(delta)!r} exceeds 1/6")
    if _degenerate(obj):
        return _degenerate_trace(obj, cfg, delta, start)

    records = []
    for k in range(1, cfg.max_iters + 1):
        a = dissolve_map(delta)
        value, s = _value_and_subgrad(obj, a)
        grad = dissolve_jacobian_apply(delta, s) + cfg.beta * delta @ (
            delta.T @ delta - np.eye(delta.shape[1])
        )
        gn = float(np.linalg.norm(grad))
        records.append(IterateRecord(k, value, _residual(delta), gn))
        delta = delta - cfg.step_rule.step(k, gn, cfg.beta) * grad

    raw_res = _residual(delta)
    raw_h = objective_f(obj, dissolve_map(delta)) + 0.25 * cfg.beta * raw_res**2
    projected = qr_positive(delta)[0]
    return OptimizerTrace(
        iterates=records,
        final=StiefelPoint(projected),
        converged_reason=ConvergedReason.MAX_ITERS,
        final_objective=objective_f(obj, projected),
        config=cfg,
        wall_time_s=time.perf_counter() - start,
        final_raw_residual=raw_res,
        raw_h=raw_h,
    )


def riemannian_grad(delta: StiefelPoint, s) -> np.ndarray:
    """Project an ambient (sub)gradient onto the tangent space at delta:
    Z = S - (1/2) D (D^T S + S^T D)."""
    if delta.feasibility_residual > 1e-10:
        raise InfeasiblePoint(
            f"residual {delta.feasibility_residual!r} exceeds 1e-10"
        )
    m = delta.matrix
    s = np.asarray(s, dtype=float)
    return s - 0.5 * m @ (m.T @ s + s.T @ m)


def run_riemannian_subgradient(obj: SliceObjective, cfg: OptimizerConfig) -> OptimizerTrace:
    """Riemannian subgradient descent with QR retraction and backtracking.

    From eta = 1, halve up to backtrack_max times until
    F(retract(D - eta G)) <= F(D) - backtrack_alpha * eta * ||G||_F^2;
    stop on ||G||_F < grad_tol, on exhausted backtracking, or on the budget.
    """
    start = time.perf_counter()
    delta = _resolve_init(obj, cfg)
    if _residual(delta) > 1e-10:
        raise InfeasibleInit(f"initial residual {_residual(delta)!r} exceeds 1e-10")
    if _degenerate(obj):
        return _degenerate_trace(obj, cfg, delta, start)

    records = []
    value = None
    reason = ConvergedReason.MAX_ITERS
    for k in range(1, cfg.max_iters + 1):
        if value is None:
            value, s = _value_and_subgrad(obj, delta)
        else:
            _, s = _value_and_subgrad(obj, delta)
        grad = riemannian_grad(StiefelPoint(delta), s)
        gn = float(np.linalg.norm(grad))
        records.append(IterateRecord(k, value, _residual(delta), gn))
        if gn < cfg.grad_tol:
            reason = ConvergedReason.GRAD_TOL
            break
        eta = 1.0
        accepted = None
        for _ in range(cfg.backtrack_max + 1):
            cand = qr_positive(delta - eta * grad)[0]
            cand_value = objective_f(obj, cand)
            if cand_value <= value - cfg.backtrack_alpha * eta * gn * gn:
                accepted = (cand, cand_value)
                break
            eta *= 0.5
        if accepted is None:
            reason = ConvergedReason.BACKTRACK_EXHAUSTED
            break
        delta, value = accepted

    return OptimizerTrace(
        iterates=records,
        final=StiefelPoint(delta),
        converged_reason=reason,
        final_objective=float(value),
        config=cfg,
        wall_time_s=time.perf_counter() - start,
    )


def _degenerate_trace(obj, cfg, delta, start) -> OptimizerTrace:
    value = objective_f(obj, delta)
    projected = qr_positive(delta)[0] if _residual(delta) > 0 else delta
    return OptimizerTrace(
        iterates=[IterateRecord(1, value, _residual(delta), 0.0)],
        final=StiefelPoint(projected),
        converged_reason=ConvergedReason.GRAD_TOL,
        final_objective=objective_f(obj, projected),
        config=cfg,
        wall_time_s=time.perf_counter() - start,
    )
