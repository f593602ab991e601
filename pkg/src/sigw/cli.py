"""Command-line front end.

``sigw <igw1d|sliced|validate-mc|validate-rate|pairwise|cluster>``: exact 1-d
reports, the sliced estimator, two Monte-Carlo validation studies against the
Gaussian closed form, and the pairwise-distance / clustering pipeline.

Primary outputs are CSV/JSON and byte-deterministic given identical arguments
(wall-time fields aside); every randomized command takes an explicit --seed.
Report commands render a PNG figure next to the primary output unless
--no-figure is given.  Exit codes: 0 success, 2 usage, 3 data error,
4 numerical failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .analysis import (
    DistanceMatrix,
    GaussianIGW,
    GaussianSlicedIGW,
    SlicedIGW,
    adjusted_rand_index,
    classical_mds_2d,
    pairwise_distances,
    purity,
    self_tuning_affinity,
    spectral_cluster,
)
from .errors import DataError, EmptyFile, NumericalError, ParseError, RaggedRows
from .gaussian import sliced_igw_gaussian
from .measures import EmpiricalMeasure, GaussianMeasure, UnivariateSample, second_moment
from .optim import OptimizerConfig, run_cd_subgradient, run_riemannian_subgradient
from .rng import child_generator, child_seed
from .slicing import SliceObjective, mc_estimate, sample_directions
from .univariate import igw_1d

SCHEMA = "sliced-igw/1"

# flag spellings -> library init names
INIT_NAMES = {"identity": "padded-identity", "gaussian": "gaussian-alignment"}


def ingest_csv(path, label_column: bool = False):
    """Read a rectangular numeric CSV as a uniformly weighted measure.

    A single non-numeric first row is treated as a header and skipped.  With
    ``label_column`` the first column holds row labels and ``(measure,
    labels)`` is returned instead of the bare measure.

    Raises
    ------
    EmptyFile, RaggedRows, ParseError
        Parse failures carry 1-based line (and column) positions.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [
            (line_no, row)
            for line_no, row in enumerate(csv.reader(fh), start=1)
            if any(cell.strip() for cell in row)
        ]
    if not rows:
        raise EmptyFile(f"{path} has no rows")
    if not _all_numeric(rows[0][1][1 if label_column else 0 :]):
        rows = rows[1:]
    if not rows:
        raise EmptyFile(f"{path} has no data rows")
    width = len(rows[0][1])
    first_value_col = 1 if label_column else 0
    if width <= first_value_col:
        raise EmptyFile(f"{path} has no value columns")
    points = np.empty((len(rows), width - first_value_col))
    labels = []
    for r, (line_no, row) in enumerate(rows):
        if len(row) != width:
            raise RaggedRows(
                f"line {line_no} has {len(row)} fields, expected {width}", line_no
            )
        if label_column:
            labels.append(row[0].strip())
        for c, cell in enumerate(row[first_value_col:], start=first_value_col):
            try:
                points[r, c - first_value_col] = float(cell)
            except ValueError:
                raise ParseError(
                    f"bad number {cell!r} at line {line_no}, column {c + 1}",
                    line_no,
                    c + 1,
                ) from None
    measure = EmpiricalMeasure.uniform(points)
    return (measure, labels) if label_column else measure


def _all_numeric(cells) -> bool:
    try:
        for cell in cells:
            float(cell)
    except ValueError:
        return False
    return len(cells) > 0


def _note(message: str) -> None:
    print(f"sigw: {message}", file=sys.stderr)


def _warn_duplicates(measure: EmpiricalMeasure, path) -> None:
    dupes = measure.n - np.unique(measure.points, axis=0).shape[0]
    if dupes:
        _note(f"{path}: {dupes} duplicate point(s); ties are coupled in stable order")


def _emit_json(payload: dict, out) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")


def _cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _parse_grid(text: str) -> list:
    try:
        grid = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise DataError(f"bad grid {text!r}: expected comma-separated integers") from None
    if not grid or any(g < 1 for g in grid) or sorted(grid) != grid:
        raise DataError(f"grid {text!r} must be ascending positive integers")
    return grid


def _optimizer_config(args) -> OptimizerConfig:
    kwargs = {"beta": args.beta, "init": INIT_NAMES[args.init]}
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    if args.optimizer == "riemannian":
        return OptimizerConfig.riemannian_defaults(**kwargs)
    return OptimizerConfig.cd_defaults(**kwargs)


def _random_covariance(d: int, rng: np.random.Generator) -> np.ndarray:
    factor = rng.random((d, d))
    cov = factor.T @ factor
    return 0.5 * (cov + cov.T)


def _figure_path(out, suffix: str = ".png") -> Path:
    return Path(out).with_suffix(suffix)


# ---------------------------------------------------------------------------
# subcommands


def _as_univariate(path) -> UnivariateSample:
    measure = ingest_csv(path)
    if measure.dim != 1:
        raise DataError(f"{path}: expected 1 column, got {measure.dim}")
    return UnivariateSample(measure.points[:, 0], measure.weights)


def _cmd_igw1d(args) -> int:
    mu = _as_univariate(args.file_a)
    nu = _as_univariate(args.file_b)
    for sample, path in ((mu, args.file_a), (nu, args.file_b)):
        dupes = sample.n - np.unique(sample.values).shape[0]
        if dupes:
            _note(f"{path}: {dupes} duplicate value(s); ties are coupled in stable order")
    result = igw_1d(mu, nu)
    _emit_json(
        {
            "schema": SCHEMA,
            "igw": float(np.sqrt(result.igw_squared)),
            "igw_squared": float(result.igw_squared),
            "chosen_orientation": result.chosen.value,
            "m2_mu": second_moment(mu),
            "m2_nu": second_moment(nu),
        },
        args.out,
    )
    return 0


def _cmd_sliced(args) -> int:
    mu = ingest_csv(args.file_a)
    nu = ingest_csv(args.file_b)
    n_a, n_b = mu.n, nu.n
    swapped = mu.dim > nu.dim
    if swapped:
        _note(f"swapped inputs: d_a={mu.dim} > d_b={nu.dim}, using {args.file_b} as the base side")
        mu, nu = nu, mu
    _warn_duplicates(mu, args.file_a if not swapped else args.file_b)
    _warn_duplicates(nu, args.file_b if not swapped else args.file_a)
    directions = sample_directions(nu.dim, args.m, args.seed)
    obj = SliceObjective(mu, nu, directions)
    run = run_riemannian_subgradient if args.optimizer == "riemannian" else run_cd_subgradient
    trace = run(obj, _optimizer_config(args))
    estimate_squared = float(max(trace.final_objective, 0.0))
    _emit_json(
        {
            "schema": SCHEMA,
            "estimate": float(np.sqrt(estimate_squared)),
            "estimate_squared": estimate_squared,
            "m": args.m,
            "n_a": n_a,
            "n_b": n_b,
            "d_x": mu.dim,
            "d_y": nu.dim,
            "swapped": swapped,
            "seed": args.seed,
            "optimizer": args.optimizer,
            "trace": trace.summary(),
            "wall_time": float(trace.wall_time_s),
        },
        args.out,
    )
    return 0


def _cmd_validate_mc(args) -> int:
    if args.dx > args.dy:
        raise DataError(f"--dx ({args.dx}) must be <= --dy ({args.dy})")
    m_grid = _parse_grid(args.m_grid)
    sigma_mu = GaussianMeasure(_random_covariance(args.dx, child_generator(args.seed, 0)))
    sigma_nu = GaussianMeasure(_random_covariance(args.dy, child_generator(args.seed, 1)))
    closed = sliced_igw_gaussian(sigma_mu, sigma_nu)
    truth = closed.sliced_igw_squared

    rows = []
    for i_m, m in enumerate(m_grid):
        errors = np.empty(args.reps)
        for rep in range(args.reps):
            directions = sample_directions(args.dy, m, child_seed(args.seed, 2, i_m, rep))
            estimate = mc_estimate(
                SliceObjective(sigma_mu, sigma_nu, directions), closed.delta_star
            )
            errors[rep] = abs(estimate - truth)
        rows.append(
            (
                m,
                float(np.mean(errors)),
                float(np.median(errors)),
                float(np.min(errors)),
                float(np.max(errors)),
            )
        )

    _write_csv(
        args.out,
        ("m", "mean_abs_err", "median_abs_err", "min_abs_err", "max_abs_err"),
        rows,
    )
    log_m = np.log([row[0] for row in rows])
    log_median = np.log(np.maximum([row[2] for row in rows], 1e-300))
    slope, intercept = np.polyfit(log_m, log_median, 1)
    _emit_json(
        {
            "schema": SCHEMA,
            "command": "validate-mc",
            "d_x": args.dx,
            "d_y": args.dy,
            "reps": args.reps,
            "seed": args.seed,
            "closed_form_squared": float(truth),
            "slope": float(slope),
            "intercept": float(intercept),
        },
        _figure_path(args.out, ".json"),
    )
    if not args.no_figure:
        grid = np.array([row[0] for row in rows], dtype=float)
        plots.save_error_curve(
            _figure_path(args.out),
            grid,
            [row[1] for row in rows],
            [row[3] for row in rows],
            [row[4] for row in rows],
            fit=(np.exp(intercept + slope * np.log(grid)), f"slope {slope:.2f}"),
            xlabel="m (directions)",
        )
    return 0


def _cmd_validate_rate(args) -> int:
    if args.dx > args.dy:
        raise DataError(f"--dx ({args.dx}) must be <= --dy ({args.dy})")
    n_grid = _parse_grid(args.n_grid)
    sigma_mu = GaussianMeasure(_random_covariance(args.dx, child_generator(args.seed, 0)))
    sigma_nu = GaussianMeasure(_random_covariance(args.dy, child_generator(args.seed, 1)))
    closed = sliced_igw_gaussian(sigma_mu, sigma_nu)
    truth = float(np.sqrt(max(closed.sliced_igw_squared, 0.0)))
    factor_mu = _symmetric_root(sigma_mu.covariance)
    factor_nu = _symmetric_root(sigma_nu.covariance)
    run = run_riemannian_subgradient if args.optimizer == "riemannian" else run_cd_subgradient

    rows = []
    for i_n, n in enumerate(n_grid):
        errors = np.empty(args.reps)
        for rep in range(args.reps):
            stream = child_generator(args.seed, 3, i_n, rep)
            mu_hat = EmpiricalMeasure.uniform(stream.standard_normal((n, args.dx)) @ factor_mu)
            nu_hat = EmpiricalMeasure.uniform(stream.standard_normal((n, args.dy)) @ factor_nu)
            directions = sample_directions(args.dy, args.m, child_seed(args.seed, 4, i_n, rep))
            trace = run(SliceObjective(mu_hat, nu_hat, directions), _optimizer_config(args))
            estimate = float(np.sqrt(max(trace.final_objective, 0.0)))
            errors[rep] = abs(estimate - truth)
        rows.append(
            (
                n,
                float(np.mean(errors)),
                float(np.median(errors)),
                float(np.min(errors)),
                float(np.max(errors)),
            )
        )

    _write_csv(
        args.out,
        ("n", "mean_abs_err", "median_abs_err", "min_abs_err", "max_abs_err"),
        rows,
    )
    grid = np.array([row[0] for row in rows], dtype=float)
    mean_err = np.array([row[1] for row in rows])
    c1, c2, fitted, r_squared = _fit_rate(grid, mean_err)
    _emit_json(
        {
            "schema": SCHEMA,
            "command": "validate-rate",
            "d_x": args.dx,
            "d_y": args.dy,
            "m": args.m,
            "reps": args.reps,
            "seed": args.seed,
            "closed_form": truth,
            "c1": c1,
            "c2": c2,
            "r_squared": r_squared,
            "residual_norm": float(np.linalg.norm(mean_err - fitted)),
        },
        _figure_path(args.out, ".json"),
    )
    if not args.no_figure:
        plots.save_error_curve(
            _figure_path(args.out),
            grid,
            mean_err,
            [row[3] for row in rows],
            [row[4] for row in rows],
            fit=(fitted, f"C1 + C2 sqrt(log n / n), R^2 {r_squared:.2f}"),
            xlabel="n (samples)",
        )
    return 0


def _symmetric_root(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


def _fit_rate(grid, mean_err):
    basis = np.column_stack([np.ones_like(grid), np.sqrt(np.log(grid) / grid)])
    coef, *_ = np.linalg.lstsq(basis, mean_err, rcond=None)
    fitted = basis @ coef
    ss_res = float(np.sum((mean_err - fitted) ** 2))
    ss_tot = float(np.sum((mean_err - np.mean(mean_err)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), fitted, r_squared


def _cmd_pairwise(args) -> int:
    if len(args.files) < 2:
        raise DataError(f"need at least 2 files, got {len(args.files)}")
    measures = [ingest_csv(path) for path in args.files]
    labels = _unique_stems(args.files)
    if args.method == "sliced-igw":
        method = SlicedIGW(
            m=args.m,
            optimizer=args.optimizer,
            init=INIT_NAMES[args.init],
            beta=args.beta,
            max_iters=args.max_iters,
        )
    elif args.method == "gaussian-sliced-igw":
        method = GaussianSlicedIGW()
    else:
        method = GaussianIGW()
    pair_reports = []

    def record(i, j, summary):
        entry = {"i": i, "j": j, "label_i": labels[i], "label_j": labels[j]}
        if summary is not None:
            entry["optimizer"] = summary
        pair_reports.append(entry)

    matrix = pairwise_distances(measures, method, args.seed, labels=labels, on_pair=record)
    matrix.to_csv(args.out)
    _emit_json(
        {
            "schema": SCHEMA,
            "command": "pairwise",
            "metric": matrix.metric_name,
            "seed": args.seed,
            "labels": labels,
            "pairs": pair_reports,
        },
        _figure_path(args.out, ".json"),
    )
    if not args.no_figure:
        plots.save_distance_heatmap(
            _figure_path(args.out), labels, matrix.values, matrix.metric_name
        )
    return 0


def _unique_stems(paths) -> list:
    stems = [Path(p).stem for p in paths]
    seen = {}
    out = []
    for stem in stems:
        count = seen.get(stem, 0)
        seen[stem] = count + 1
        out.append(stem if count == 0 else f"{stem}#{count + 1}")
    return out


def _read_labels(path) -> list:
    with open(path, encoding="utf-8") as fh:
        labels = [line.strip() for line in fh if line.strip()]
    if not labels:
        raise EmptyFile(f"{path} has no labels")
    return labels


def _cmd_cluster(args) -> int:
    matrix = DistanceMatrix.from_csv(args.distance_csv)
    affinity = self_tuning_affinity(matrix)
    result = spectral_cluster(affinity, args.k, args.seed)
    ari = pur = None
    if args.truth is not None:
        truth = _read_labels(args.truth)
        ari = adjusted_rand_index(result.assignments, truth)
        pur = purity(result.assignments, truth)
    coords = classical_mds_2d(matrix)
    mds_path = Path(args.out).with_name(Path(args.out).stem + "_mds.csv")
    _write_csv(
        mds_path,
        ("label", "x", "y"),
        [
            (label, float(xy[0]), float(xy[1]))
            for label, xy in zip(matrix.labels, coords)
        ],
    )
    _emit_json(
        {
            "schema": SCHEMA,
            "command": "cluster",
            "k": args.k,
            "seed": args.seed,
            "labels": matrix.labels,
            "assignments": [int(a) for a in result.assignments],
            "ari": ari,
            "purity": pur,
            "mds_csv": str(mds_path),
        },
        args.out,
    )
    if not args.no_figure:
        plots.save_embedding_scatter(
            Path(args.out).with_name(Path(args.out).stem + "_mds.png"),
            coords,
            result.assignments,
            matrix.labels,
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_optimizer_flags(parser, m_default: int) -> None:
    parser.add_argument("--m", type=int, default=m_default, help="number of slice directions")
    parser.add_argument("--optimizer", choices=("cd", "riemannian"), default="riemannian")
    parser.add_argument(
        "--init",
        choices=("identity", "gaussian"),
        default="gaussian",
        help="padded identity or the Gaussian-alignment closed form",
    )
    parser.add_argument("--beta", type=float, default=100.0, help="dissolving penalty weight")
    parser.add_argument("--max-iters", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigw",
        description="Sliced inner-product Gromov-Wasserstein distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("igw1d", help="exact 1-d distance between one-column samples")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=_cmd_igw1d)

    p = sub.add_parser("sliced", help="sliced distance estimate between two samples")
    p.add_argument("file_a")
    p.add_argument("file_b")
    _add_optimizer_flags(p, m_default=500)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=_cmd_sliced)

    p = sub.add_parser("validate-mc", help="direction-count error rate study")
    p.add_argument("--dx", type=int, default=5)
    p.add_argument("--dy", type=int, default=10)
    p.add_argument("--m-grid", default="32,64,128,256,512,1024,2048,4096,8192")
    p.add_argument("--reps", type=int, default=25)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV table path (JSON/PNG written beside it)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_validate_mc)

    p = sub.add_parser("validate-rate", help="sample-count error rate study")
    p.add_argument("--dx", type=int, default=5)
    p.add_argument("--dy", type=int, default=10)
    p.add_argument("--n-grid", default="32,64,128,256,512,1024,2048,4096")
    p.add_argument("--reps", type=int, default=25)
    _add_optimizer_flags(p, m_default=3000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV table path (JSON/PNG written beside it)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_validate_rate)

    p = sub.add_parser("pairwise", help="distance matrix over many sample files")
    p.add_argument("files", nargs="+")
    p.add_argument(
        "--method",
        choices=("sliced-igw", "gaussian-sliced-igw", "gaussian-igw"),
        default="sliced-igw",
    )
    _add_optimizer_flags(p, m_default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="distance CSV path (JSON/PNG written beside it)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_pairwise)

    p = sub.add_parser("cluster", help="spectral clustering + MDS from a distance CSV")
    p.add_argument("distance_csv")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--truth", help="file with one ground-truth label per line")
    p.add_argument("--out", required=True, help="JSON report path (MDS CSV/PNG written beside it)")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=_cmd_cluster)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        _note(f"usage error: {exc}")
        return 2
    except DataError as exc:
        _note(f"data error: {exc}")
        return 3
    except NumericalError as exc:
        _note(f"numerical error: {exc}")
        return 4
    except OSError as exc:
        _note(str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
