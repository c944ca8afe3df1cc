"""
The ``safd`` command line.

Exit codes: ``0`` when the command ran and no verdict failed, ``1`` when a verdict failed, ``2`` for usage
and validation errors and ``3`` for computation errors (budget or convergence).
"""

from __future__ import annotations

__all__ = ["main", "build_parser"]

import argparse
import logging
import math
import sys
from typing import Sequence

from safd import __version__, utils
from safd.dim_formulas import (
    affinity_dimension,
    full_dimension_vectors,
    lyapunov_dim_root,
    lyapunov_dimension,
)
from safd.disintegration import (
    build_gamma,
    convolution_check,
    h_rw_closed_form,
    h_rw_finite,
    kappa_estimate,
    reduction_bound,
    sample_mu_omega,
)
from safd.errors import (
    BudgetExceeded,
    DegenerateAffinity,
    InsufficientResolution,
    SafdError,
)
from safd.experiments import EXPERIMENTS, run_experiment
from safd.ifs_core import (
    format_word,
    has_distinct_exponents,
    load_model,
    lyapunov_exponents,
    shannon_entropy,
)
from safd.measure_lab import (
    default_level_band,
    entropy_dimension,
    local_dimension_spread,
    required_depth,
    sample_mu,
    write_svg,
)
from safd.separation import kernel_consistency, separation_report, separation_table
from safd.types.disintegration import Granularity, OmegaPrefix
from safd.types.ifs import WeightedModel
from safd.types.reports import ExperimentConfig, Report, Table, Verdict

_logger = logging.getLogger(__name__)

_LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO}
_LYAPUNOV_ROUTES_TOL = 1e-9
_LOCAL_BASE_POINTS = 20


def _load(args: argparse.Namespace) -> WeightedModel:
    return load_model(args.model, exact=True if args.exact else None)


def _user_vector(model: WeightedModel, values: Sequence) -> tuple:
    return model.to_user_order(tuple(values))


def cmd_dim(args: argparse.Namespace) -> Report:
    model = _load(args)
    chi = _user_vector(model, lyapunov_exponents(model))
    dim_l = lyapunov_dimension(model)
    root = lyapunov_dim_root(model)
    dim_a = affinity_dimension(model.ifs)
    rows = [
        ("d", model.d),
        ("maps", model.ifs.size),
        ("entropy", shannon_entropy(model.p)),
        *((f"chi_{j + 1}", c) for j, c in enumerate(chi)),
        ("distinct_exponents", has_distinct_exponents(model)),
        ("lyapunov_dimension", dim_l),
        ("lyapunov_dim_root", root),
        ("min_d_lyapunov_dimension", min(float(model.d), dim_l)),
        ("affinity_dimension", dim_a.value),
    ]
    tables = [Table.of("dimensions", ("quantity", "value"), rows)]
    if model.d == 2:
        try:
            vectors = full_dimension_vectors(model.ifs)
        except DegenerateAffinity as e:
            _logger.info("No full-dimension vectors: %s", e.message)
        else:
            tables.append(
                Table.of(
                    "full_dimension",
                    ("sigma", "p", "distinct_exponents", "lyapunov_dimension"),
                    (
                        (
                            ",".join(str(model.coordinate_order[j] + 1) for j in v.sigma),
                            " ".join(f"{w:.12g}" for w in v.p),
                            v.distinct_exponents,
                            v.lyapunov_dimension,
                        )
                        for v in vectors
                    ),
                )
            )
    return Report(
        experiment="dim",
        config={"model": model.name, "mode": model.mode},
        tables=tuple(tables),
        verdicts=(
            Verdict.within(
                "closed form and root of the Lyapunov dimension agree",
                root,
                dim_l,
                _LYAPUNOV_ROUTES_TOL,
            ),
        ),
    )


def cmd_sep(args: argparse.Namespace) -> Report:
    model = _load(args)
    coord = None if args.coord is None else model.sorted_coord(args.coord - 1)
    report = separation_report(model.ifs, args.max_n, coord=coord, budget=args.budget)
    verdicts = [
        Verdict.observation("c_hat", report.c_hat),
        Verdict.observation("c_fit", report.c_fit),
        Verdict.observation("rate estimates disagree", report.unreliable),
        Verdict.observation("no exact overlaps", report.no_exact_overlaps),
        Verdict.observation("diophantine evidence", report.diophantine_evidence),
    ]
    if model.d > 1:
        kernel = kernel_consistency(model.ifs, args.max_n, budget=args.budget)
        verdicts.append(
            Verdict.observation(
                "coordinate overlaps are full overlaps",
                kernel.consistent
                if kernel.violation is None
                else f"level {kernel.violation[0]}: {format_word(kernel.violation[2])} vs "
                f"{format_word(kernel.violation[3])} in coordinate "
                f"{model.coordinate_order[kernel.violation[1]] + 1}",
            )
        )
    return Report(
        experiment="sep",
        config={"model": model.name, "coord": args.coord, "max_n": args.max_n, "mode": model.mode},
        tables=(separation_table(report),),
        verdicts=tuple(verdicts),
    )


def cmd_estimate(args: argparse.Namespace) -> Report:
    model = _load(args)
    lo, hi = args.levels or default_level_band(args.samples, model.d)
    theta = sample_mu(
        model,
        args.samples,
        max(args.depth, required_depth(model.ifs, hi)),
        args.seed,
        target_level=hi,
        workers=args.workers,
    )
    est = entropy_dimension(theta, range(lo, hi + 1))
    rows = [
        ("entropy_dimension", est.value),
        ("entropy_dimension_stderr", est.stderr),
        ("min_d_lyapunov_dimension", min(float(model.d), lyapunov_dimension(model))),
    ]
    try:
        mean, spread, _ = local_dimension_spread(
            theta,
            [2.0**-t for t in range(lo, hi + 1)],
            n_base=_LOCAL_BASE_POINTS,
            seed=utils.derive_seed(args.seed, 1),
        )
        rows += [("local_dimension_mean", mean), ("local_dimension_spread", spread)]
    except InsufficientResolution as e:
        _logger.info("Skipping local dimensions: %s", e.message)
    if args.svg:
        write_svg(theta, args.svg, title=model.name)
    return Report(
        experiment="estimate",
        config={"model": model.name, "samples": args.samples, "levels": (lo, hi), "depth": args.depth},
        tables=(
            Table.of("dimensions", ("quantity", "value"), rows),
            Table.of(
                "entropy_profile",
                ("level", "entropy", "occupied", "biased"),
                ((lv.level, lv.entropy, lv.occupied, lv.biased) for lv in est.profile),
            ),
        ),
        verdicts=(Verdict.observation("entropy dimension", est.value, sample_size=args.samples),),
        seed=args.seed,
    )


def cmd_disint(args: argparse.Namespace) -> Report:
    model = _load(args)
    gamma = build_gamma(model, args.N, Granularity(args.granularity), budget=args.budget)
    classes = Table.of(
        "gamma",
        ("class", "linear_part", "words", "mass"),
        (
            (
                c.id,
                " ".join(str(r) for r in _user_vector(model, c.linear_part)),
                " ".join(format_word(w) for w in c.words),
                c.mass,
            )
            for c in gamma
        ),
    )
    h_rows = []
    for k in range(1, args.n + 1):
        try:
            h_rows.append((k, h_rw_finite(model, gamma, k, budget=args.budget)))
        except BudgetExceeded as e:
            _logger.warning("Stopping the h_RW table at n=%d: %s", k, e.message)
            break
    coarse_bound, exact_bound = reduction_bound(model, args.N, gamma)
    target = default_level_band(args.samples, model.d)[1]
    omega_mu = sample_mu_omega(
        model,
        gamma,
        OmegaPrefix(),
        args.samples,
        max(args.depth, required_depth(model.ifs, target)),
        utils.derive_seed(args.seed, 1),
        target_level=target,
        workers=args.workers,
    )
    dim_omega = entropy_dimension(omega_mu)
    kappa = kappa_estimate(model, dim_omega.value, h_rows[-1][1] if h_rows else None)
    check = convolution_check(
        model,
        gamma,
        None,
        args.n,
        args.samples,
        utils.derive_seed(args.seed, 2),
        budget=args.budget,
        workers=args.workers,
    )
    return Report(
        experiment="disint",
        config={
            "model": model.name,
            "N": args.N,
            "n": args.n,
            "granularity": args.granularity,
            "samples": args.samples,
        },
        tables=(
            classes,
            Table.of("h_rw", ("n", "h_rw"), h_rows),
            Table.of(
                "kappa",
                ("quantity", "value"),
                (
                    ("entropy", shannon_entropy(model.p)),
                    ("h_rw_no_overlap", h_rw_closed_form(model, gamma)),
                    ("reduction_bound", coarse_bound),
                    ("reduction_bound_exact", exact_bound),
                    ("dim_omega_estimate", kappa.dim_estimate),
                    ("kappa", kappa.kappa),
                    ("predicted_dim", kappa.predicted_dim),
                    ("predicted_kappa", kappa.predicted_kappa),
                ),
            ),
            Table.of(
                "convolution",
                ("level", "entropy_direct", "entropy_convolved", "gap"),
                check.levels,
            ),
        ),
        verdicts=(
            Verdict.at_most(
                "convolution identity: largest entropy gap",
                check.max_gap,
                0.0,
                tolerance=check.tolerance,
                sample_size=check.samples,
            ),
            Verdict.observation("sliced Wasserstein distance", check.sliced_distance, check.samples),
        ),
        seed=args.seed,
    )


def cmd_experiment(args: argparse.Namespace) -> Report:
    config = ExperimentConfig.from_dict(
        {k: v for k, v in vars(args).items() if v is not None},
        experiment=args.name,
        levels=tuple(args.levels) if args.levels else None,
    )
    return run_experiment(config)


def _emit(report: Report, args: argparse.Namespace) -> None:
    if args.json:
        if args.json == "-":
            sys.stdout.write(report.to_json())
        else:
            report.write_json(args.json)
    if args.csv:
        if args.csv == "-":
            for t in report.tables:
                sys.stdout.write(t.to_csv())
        else:
            report.write_csv(args.csv)
    if not args.json and not args.csv:
        for t in report.tables:
            sys.stdout.write(f"# {t.name}\n{t.to_csv()}\n")
    for v in report.verdicts:
        value = f"{v.value:.6g}" if isinstance(v.value, float) and math.isfinite(v.value) else v.value
        sys.stderr.write(f"{v.status.value.upper():<11} {v.name}: {value}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="root seed (default: 0)")
    parser.add_argument(
        "--json", nargs="?", const="-", metavar="PATH", help="write the JSON report (stdout without PATH)"
    )
    parser.add_argument(
        "--csv", nargs="?", const="-", metavar="PATH", help="write the tables as CSV (stdout without PATH)"
    )
    parser.add_argument("--svg", metavar="PATH", help="write a scatter plot of the sample")
    parser.add_argument("--exact", action="store_true", help="force exact rational arithmetic")
    parser.add_argument(
        "--budget", type=int, default=utils.DEFAULT_BUDGET, help="cap on exact enumerations"
    )
    parser.add_argument(
        "--workers", type=int, default=utils.DEFAULT_WORKERS, help="sampling threads (never changes results)"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common)
    parser = argparse.ArgumentParser(
        prog="safd",
        description="Dimension, separation and entropy of diagonal self-affine measures.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    dim = sub.add_parser("dim", parents=[common], help="closed-form dimensions of a model")
    dim.add_argument("model", help="model JSON file or bundled fixture name")
    dim.set_defaults(func=cmd_dim)

    sep = sub.add_parser("sep", parents=[common], help="separation table of a coordinate system")
    sep.add_argument("model")
    sep.add_argument("--coord", type=int, help="1-based coordinate (required when d > 1)")
    sep.add_argument("--max-n", type=int, default=6, help="largest word length (default: 6)")
    sep.set_defaults(func=cmd_sep)

    estimate = sub.add_parser("estimate", parents=[common], help="sampled entropy dimension")
    estimate.add_argument("model")
    estimate.add_argument("--samples", type=int, default=200_000)
    estimate.add_argument("--depth", type=int, default=48)
    estimate.add_argument("--levels", type=int, nargs=2, metavar=("LO", "HI"))
    estimate.set_defaults(func=cmd_estimate)

    disint = sub.add_parser("disint", parents=[common], help="disintegration by linear parts")
    disint.add_argument("model")
    disint.add_argument("--N", type=int, default=2, help="block length (default: 2)")
    disint.add_argument("--n", type=int, default=4, help="number of blocks (default: 4)")
    disint.add_argument(
        "--granularity", choices=[g.value for g in Granularity], default=Granularity.LINEAR.value
    )
    disint.add_argument("--samples", type=int, default=100_000)
    disint.add_argument("--depth", type=int, default=48)
    disint.set_defaults(func=cmd_disint)

    experiment = sub.add_parser("experiment", parents=[common], help="run a canned experiment")
    experiment.add_argument("name", choices=sorted(EXPERIMENTS))
    experiment.add_argument("--model", help="model override (fixture name or path)")
    experiment.add_argument("--samples", type=int)
    experiment.add_argument("--depth", type=int)
    experiment.add_argument("--levels", type=int, nargs=2, metavar=("LO", "HI"))
    experiment.add_argument("--trials", type=int)
    experiment.add_argument("--N", type=int)
    experiment.add_argument("--n", type=int)
    experiment.add_argument("--M", type=int)
    experiment.add_argument("--lam", help="counterexample contraction ratio (default: 3/4)")
    experiment.add_argument("--eps", type=float, help="entropy-increase: bits per block of the smoothing measure")
    experiment.add_argument("--tolerance", type=float)
    experiment.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_LOG_LEVELS.get(args.verbose, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        report = args.func(args)
    except SafdError as e:
        sys.stderr.write(f"safd: {e.message}\n")
        _logger.debug("Error details: %r", e)
        return e.__exit_code__
    _emit(report, args)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
