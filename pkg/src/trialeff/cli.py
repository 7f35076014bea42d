"""Command-line interface: estimators, sample sizes, curve data, simulation.

Machine-readable output only: JSON documents on stdout for point
results, CSV for tables and curves (LF line endings, ``.`` decimal
separator).  Human diagnostics go to stderr.  Exit codes: 0 success,
2 domain/validation error, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .classical import fisher_rr_interval, wald_efficacy_interval
from .diagnostics import npv, ppv, prevalence_threshold
from .errors import DegenerateDataError, DomainError, EstimationError
from .posterior import (
    PosteriorGrid,
    cramer_rao_at_prevalence,
    cramer_rao_interval,
    credible_interval,
    posterior,
    posterior_at_prevalence,
)
from .sample_size import (
    DEFAULT_DELTA_GRID,
    DEFAULT_PI_GRID,
    DEFAULT_VE_GRID,
    SampleSizeSpec,
    cramer_rao_sample_size,
    sample_size_table,
    wald_sample_size,
)
from .simulate import SimulationConfig, coverage_study, replicates_to_csv
from .trial import TRIAL_PRESETS, DiagnosticProfile, TrialCounts

_ALL_ESTIMATE_METHODS = ("conditional", "wald", "cramer-rao", "fisher-rr")

_CURVE_PI_DEFAULT = (0.5, 0.1, 0.05, 0.01, 0.005, 0.001)
_FIG3_PI_DEFAULT = (0.1, 0.05, 0.01, 0.005, 0.001)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trialeff",
        description="Prevalence-aware efficacy estimation for two-arm trials.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="interval estimates from trial counts")
    est.add_argument("--trial", choices=sorted(TRIAL_PRESETS), help="named preset counts")
    est.add_argument("--tv", type=int, help="cases in vaccinated arm")
    est.add_argument("--nv", type=int, help="participants in vaccinated arm")
    est.add_argument("--tc", type=int, help="cases in control arm")
    est.add_argument("--nc", type=int, help="participants in control arm")
    est.add_argument("--se", type=float, default=1.0, help="diagnostic sensitivity")
    est.add_argument("--sp", type=float, default=1.0, help="diagnostic specificity")
    est.add_argument(
        "--pi",
        type=float,
        default=None,
        help="assumed prevalence; the observed totals are reanalysed as if "
        "drawn from a cohort of size t/T (default: t/n, the observed rate)",
    )
    est.add_argument(
        "--method",
        choices=_ALL_ESTIMATE_METHODS + ("all",),
        default="all",
    )
    est.add_argument("--level", type=float, default=0.95)
    est.add_argument("--grid", type=int, default=20001)
    est.add_argument(
        "--interval", choices=("equal-tailed", "hpd"), default="equal-tailed",
        help="credible-interval rule for the conditional method",
    )
    est.add_argument("--output", type=Path, default=None)
    est.set_defaults(handler=_cmd_estimate)

    size = sub.add_parser("sample-size", help="trial-design sample sizes")
    size.add_argument("--ve", type=str, help="anticipated efficacy (comma list with --table)")
    size.add_argument("--delta", type=str, help="detectable difference (comma list with --table)")
    size.add_argument("--pi", type=str, help="event rate (comma list with --table)")
    size.add_argument("--alpha", type=float, default=0.05)
    size.add_argument("--beta", type=float, default=0.2)
    size.add_argument("--method", choices=("wald", "cramer-rao"), default="cramer-rao")
    size.add_argument(
        "--exact-z", action="store_true",
        help="use full-precision normal quantiles instead of the "
        "conventional two-decimal z-scores",
    )
    size.add_argument("--table", action="store_true", help="emit the full grid as CSV")
    size.add_argument("--output", type=Path, default=None)
    size.set_defaults(handler=_cmd_sample_size)

    curve = sub.add_parser("curve", help="CSV curve data for the standard figures")
    curve.add_argument(
        "--figure", type=int, default=None, choices=(1, 2, 3, 4),
        help="figure to reproduce; omit to dump one posterior from counts",
    )
    curve.add_argument("--trial", choices=sorted(TRIAL_PRESETS), default=None)
    curve.add_argument("--tv", type=int, help="cases in vaccinated arm (posterior dump)")
    curve.add_argument("--nv", type=int, help="participants in vaccinated arm (posterior dump)")
    curve.add_argument("--tc", type=int, help="cases in control arm (posterior dump)")
    curve.add_argument("--nc", type=int, help="participants in control arm (posterior dump)")
    curve.add_argument("--pi", type=float, default=None, help="assumed prevalence (posterior dump)")
    curve.add_argument("--pi-list", type=str, default=None, help="comma-separated prevalences")
    curve.add_argument("--ve", type=float, default=None, help="true efficacy override")
    curve.add_argument("--n", type=int, default=50000, help="population size (figures 1 and 3)")
    curve.add_argument("--t", type=int, default=2000, help="total cases (figure 1, fixed-cases panel)")
    curve.add_argument("--se", type=float, default=None, help="sensitivity override (figure 3)")
    curve.add_argument("--sp", type=float, default=None, help="specificity override (figure 3)")
    curve.add_argument("--delta", type=float, default=0.1, help="effect size (figure 4)")
    curve.add_argument("--grid", type=int, default=2001)
    curve.add_argument("--output", type=Path, default=None)
    curve.set_defaults(handler=_cmd_curve)

    cov = sub.add_parser("coverage", help="Monte Carlo coverage study")
    cov.add_argument("--n-per-arm", type=int, required=True)
    cov.add_argument("--pi-c", type=float, required=True, help="true control-arm prevalence")
    cov.add_argument("--ve", type=float, required=True, help="true efficacy")
    cov.add_argument("--se", type=float, default=1.0)
    cov.add_argument("--sp", type=float, default=1.0)
    cov.add_argument("--replicates", type=int, default=1000)
    cov.add_argument("--seed", type=int, default=0)
    cov.add_argument("--methods", type=str, default="conditional,wald")
    cov.add_argument("--level", type=float, default=0.95)
    cov.add_argument("--grid", type=int, default=2001)
    cov.add_argument("--workers", type=int, default=1)
    cov.add_argument(
        "--dump", type=Path, default=None,
        help="also write per-replicate outcomes to this CSV file",
    )
    cov.add_argument("--output", type=Path, default=None)
    cov.set_defaults(handler=_cmd_coverage)

    diag = sub.add_parser("diagnostics", help="predictive values and prevalence threshold")
    diag.add_argument("--se", type=float, required=True)
    diag.add_argument("--sp", type=float, required=True)
    diag.add_argument("--pi", type=float, default=None)
    diag.add_argument("--curve", action="store_true", help="emit a prevalence sweep as CSV")
    diag.add_argument("--output", type=Path, default=None)
    diag.set_defaults(handler=_cmd_diagnostics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, EstimationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


# ---------------------------------------------------------------------------
# output helpers


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _emit_json(doc: dict, output: Path | None) -> None:
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", output)


def _csv_text(fieldnames: list[str], rows: list[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"{flag} expects comma-separated numbers, got {text!r}") from exc
    if not values:
        raise DomainError(f"{flag} received an empty list")
    return values


# ---------------------------------------------------------------------------
# estimate


def _resolve_counts(args) -> TrialCounts:
    explicit = [args.tv, args.nv, args.tc, args.nc]
    if args.trial is not None:
        if any(v is not None for v in explicit):
            raise DomainError("give either --trial or explicit counts, not both")
        return TRIAL_PRESETS[args.trial]
    if any(v is None for v in explicit):
        raise DomainError("provide --trial or all of --tv --nv --tc --nc")
    return TrialCounts(n_v=args.nv, t_v=args.tv, n_c=args.nc, t_c=args.tc)


def _efficacy_block(est) -> dict:
    return {
        "method": est.method,
        "point": est.point,
        "lower": est.lower,
        "upper": est.upper,
        "level": est.level,
        "warnings": list(est.warnings),
    }


def _estimate_one(
    method: str,
    counts: TrialCounts,
    d: DiagnosticProfile,
    args,
) -> dict:
    # An explicit --pi reanalyses the observed totals at that prevalence
    # (population rescaled to t/T); the default keeps the trial's own
    # population size with the observed rate as prevalence.
    if method == "conditional":
        if args.pi is None:
            post = posterior(counts, None, d, args.grid)
        else:
            post = posterior_at_prevalence(counts, args.pi, d, args.grid)
        return _efficacy_block(credible_interval(post, args.level, args.interval))
    if method == "wald":
        return _efficacy_block(wald_efficacy_interval(counts, args.level))
    if method == "cramer-rao":
        if args.pi is None:
            return _efficacy_block(cramer_rao_interval(counts, None, d, args.level))
        return _efficacy_block(cramer_rao_at_prevalence(counts, args.pi, d, args.level))
    if method == "fisher-rr":
        est = fisher_rr_interval(counts, args.level)
        return {
            "method": est.method,
            "scale": "risk-ratio",
            "point": est.point,
            "lower": est.lower,
            "upper": est.upper,
            "lower_undetermined": est.lower_undetermined,
            "efficacy": {
                "point": est.efficacy_point,
                "lower": est.efficacy_lower,
                "upper": est.efficacy_upper,
            },
            "level": est.level,
            "warnings": list(est.warnings),
        }
    raise DomainError(f"unknown method {method!r}")


def _cmd_estimate(args) -> int:
    counts = _resolve_counts(args)
    d = DiagnosticProfile(sensitivity=args.se, specificity=args.sp)
    prevalence = args.pi if args.pi is not None else counts.overall_rate
    requested = _ALL_ESTIMATE_METHODS if args.method == "all" else (args.method,)
    results = []
    for method in requested:
        if args.method == "all":
            # A single undefined method should not sink the other blocks.
            try:
                results.append(_estimate_one(method, counts, d, args))
            except DegenerateDataError:
                raise
            except (DomainError, EstimationError) as exc:
                results.append({"method": method, "error": str(exc)})
        else:
            results.append(_estimate_one(method, counts, d, args))
    doc = {
        "command": "estimate",
        "method": args.method,
        "inputs": {
            "n_v": counts.n_v,
            "t_v": counts.t_v,
            "n_c": counts.n_c,
            "t_c": counts.t_c,
            "sensitivity": args.se,
            "specificity": args.sp,
            "prevalence": prevalence,
            "level": args.level,
            "grid_size": args.grid,
            "interval": args.interval,
        },
        "results": results,
        "warnings": [],
    }
    _emit_json(doc, args.output)
    return 0


# ---------------------------------------------------------------------------
# sample-size


def _cmd_sample_size(args) -> int:
    if args.table:
        ve = _parse_float_list(args.ve, "--ve") if args.ve else list(DEFAULT_VE_GRID)
        delta = _parse_float_list(args.delta, "--delta") if args.delta else list(DEFAULT_DELTA_GRID)
        pi = _parse_float_list(args.pi, "--pi") if args.pi else list(DEFAULT_PI_GRID)
        rows = sample_size_table(
            ve, delta, pi,
            alpha=args.alpha,
            beta=args.beta,
            method=args.method,
            rounded_z=not args.exact_z,
        )
        fieldnames = ["ve", "delta", "pi", "alpha", "beta", "method", "n"]
        csv_rows = [
            {
                "ve": row.ve,
                "delta": row.delta,
                "pi": row.pi,
                "alpha": row.alpha,
                "beta": row.beta,
                "method": row.method,
                "n": "" if row.n is None else row.n,
            }
            for row in rows
        ]
        _emit(_csv_text(fieldnames, csv_rows), args.output)
        return 0

    if args.ve is None or args.delta is None or args.pi is None:
        raise DomainError("provide --ve, --delta and --pi (or use --table)")
    spec = SampleSizeSpec(
        ve=float(args.ve),
        delta=float(args.delta),
        pi=float(args.pi),
        alpha=args.alpha,
        beta=args.beta,
    )
    calculator = cramer_rao_sample_size if args.method == "cramer-rao" else wald_sample_size
    total = calculator(spec, rounded_z=not args.exact_z)
    doc = {
        "command": "sample-size",
        "method": args.method,
        "inputs": {
            "ve": spec.ve,
            "delta": spec.delta,
            "pi": spec.pi,
            "alpha": spec.alpha,
            "beta": spec.beta,
            "rounded_z": not args.exact_z,
        },
        "results": {"total_sample_size": total},
        "warnings": [],
    }
    _emit_json(doc, args.output)
    return 0


# ---------------------------------------------------------------------------
# curve


def _density_rows(post: PosteriorGrid, fixed: dict) -> list[dict]:
    rows = []
    for alpha, density in zip(post.efficacies, post.density):
        row = dict(fixed)
        row["alpha"] = float(alpha)
        row["density"] = float(density)
        rows.append(row)
    return rows


def _split_cases(total_cases: int, ve: float) -> tuple[int, int]:
    t_c = int(round(total_cases / (2.0 - ve)))
    t_c = min(max(t_c, 1), total_cases)
    return total_cases - t_c, t_c


def _figure1(args) -> tuple[list[str], list[dict]]:
    pis = _parse_float_list(args.pi_list, "--pi-list") if args.pi_list else list(_CURVE_PI_DEFAULT)
    rows: list[dict] = []
    # Fixed-population panel: the case totals scale with the prevalence.
    ve = args.ve if args.ve is not None else 0.7
    n = args.n
    half = n // 2
    for pi in pis:
        total_cases = int(round(n * pi))
        t_v, t_c = _split_cases(total_cases, ve)
        counts = TrialCounts(n_v=half, t_v=t_v, n_c=n - half, t_c=t_c)
        post = posterior(counts, pi=pi, grid_size=args.grid)
        rows.extend(_density_rows(post, {"panel": "fixed-population", "pi": pi, "n": n}))
    # Fixed-cases panel: the same totals reanalysed at each prevalence.
    ve_fixed = args.ve if args.ve is not None else 0.9
    t = args.t
    t_v, t_c = _split_cases(t, ve_fixed)
    for pi in pis:
        n_arm = max(t_c, t_v, math.ceil(t / (2.0 * pi)))
        counts = TrialCounts(n_v=n_arm, t_v=t_v, n_c=n_arm, t_c=t_c)
        post = posterior_at_prevalence(counts, pi, grid_size=args.grid)
        rows.extend(
            _density_rows(post, {"panel": "fixed-cases", "pi": pi, "n": round(t / pi)})
        )
    return ["panel", "pi", "n", "alpha", "density"], rows


def _figure2(args) -> tuple[list[str], list[dict]]:
    names = [args.trial] if args.trial else sorted(TRIAL_PRESETS)
    rows: list[dict] = []
    for name in names:
        counts = TRIAL_PRESETS[name]
        post = posterior(counts, grid_size=args.grid)
        rows.extend(_density_rows(post, {"trial": name, "curve": "conditional"}))
        limit = posterior_at_prevalence(counts, 1.0, grid_size=args.grid)
        rows.extend(_density_rows(limit, {"trial": name, "curve": "wald-limit"}))
    return ["trial", "curve", "alpha", "density"], rows


def _figure3(args) -> tuple[list[str], list[dict]]:
    if (args.se is None) != (args.sp is None):
        raise DomainError("override --se and --sp together for figure 3")
    if args.se is not None:
        panels = [("custom", DiagnosticProfile(args.se, args.sp))]
    else:
        panels = [
            ("specificity-loss", DiagnosticProfile(sensitivity=1.0, specificity=0.999)),
            ("sensitivity-loss", DiagnosticProfile(sensitivity=0.95, specificity=1.0)),
        ]
    pis = _parse_float_list(args.pi_list, "--pi-list") if args.pi_list else list(_FIG3_PI_DEFAULT)
    ve = args.ve if args.ve is not None else 0.7
    half = args.n // 2
    rows: list[dict] = []
    for label, profile in panels:
        for pi in pis:
            rate_c = 2.0 * pi / (2.0 - ve)
            rate_v = (1.0 - ve) * rate_c
            if rate_c > 1.0:
                raise DomainError(f"prevalence {pi} infeasible at efficacy {ve}")
            t_c = int(round(half * (profile.sensitivity * rate_c
                                    + profile.false_positive_rate * (1.0 - rate_c))))
            t_v = int(round(half * (profile.sensitivity * rate_v
                                    + profile.false_positive_rate * (1.0 - rate_v))))
            counts = TrialCounts(n_v=half, t_v=t_v, n_c=half, t_c=t_c)
            post = posterior(counts, d=profile, grid_size=args.grid)
            rows.extend(
                _density_rows(
                    post,
                    {
                        "panel": label,
                        "se": profile.sensitivity,
                        "sp": profile.specificity,
                        "pi": pi,
                    },
                )
            )
    return ["panel", "se", "sp", "pi", "alpha", "density"], rows


def _figure4(args) -> tuple[list[str], list[dict]]:
    pis = _parse_float_list(args.pi_list, "--pi-list") if args.pi_list else list(DEFAULT_PI_GRID)
    ve_values = [args.ve] if args.ve is not None else list(DEFAULT_VE_GRID)
    rows: list[dict] = []
    for method, calculator in (
        ("wald", wald_sample_size),
        ("cramer-rao", cramer_rao_sample_size),
    ):
        for ve in ve_values:
            for pi in pis:
                spec = SampleSizeSpec(ve=ve, delta=args.delta, pi=pi)
                rows.append(
                    {
                        "method": method,
                        "ve": ve,
                        "delta": args.delta,
                        "pi": pi,
                        "n": calculator(spec),
                    }
                )
    return ["method", "ve", "delta", "pi", "n"], rows


def _dump_posterior(args) -> tuple[list[str], list[dict]]:
    counts = _resolve_counts(args)
    se = 1.0 if args.se is None else args.se
    sp = 1.0 if args.sp is None else args.sp
    d = DiagnosticProfile(sensitivity=se, specificity=sp)
    prevalence = args.pi if args.pi is not None else counts.overall_rate
    post = posterior_at_prevalence(counts, prevalence, d, args.grid)
    return ["alpha", "density"], _density_rows(post, {})


def _cmd_curve(args) -> int:
    builders = {1: _figure1, 2: _figure2, 3: _figure3, 4: _figure4}
    if args.figure is None:
        fieldnames, rows = _dump_posterior(args)
    else:
        fieldnames, rows = builders[args.figure](args)
    _emit(_csv_text(fieldnames, rows), args.output)
    return 0


# ---------------------------------------------------------------------------
# coverage


def _cmd_coverage(args) -> int:
    config = SimulationConfig(
        n_per_arm=args.n_per_arm,
        prevalence=args.pi_c,
        ve=args.ve,
        diagnostic=DiagnosticProfile(sensitivity=args.se, specificity=args.sp),
        replicates=args.replicates,
        seed=args.seed,
        methods=tuple(part.strip() for part in args.methods.split(",") if part.strip()),
        level=args.level,
        grid_size=args.grid,
        workers=args.workers,
    )
    report = coverage_study(config, keep_replicates=args.dump is not None)
    if args.dump is not None:
        args.dump.write_text(replicates_to_csv(report), encoding="utf-8")
    doc = {
        "command": "coverage",
        "method": "monte-carlo",
        "inputs": report.config.as_dict(),
        "results": {
            "replicates": report.replicates,
            "methods": {name: res.as_dict() for name, res in report.methods.items()},
        },
        "warnings": [],
    }
    _emit_json(doc, args.output)
    return 0


# ---------------------------------------------------------------------------
# diagnostics


def _cmd_diagnostics(args) -> int:
    profile = DiagnosticProfile(sensitivity=args.se, specificity=args.sp)
    if args.curve:
        sweep = [i / 1000 for i in range(1, 1000)]
        rows = [
            {"pi": pi, "ppv": ppv(pi, profile), "npv": npv(pi, profile)}
            for pi in sweep
        ]
        _emit(_csv_text(["pi", "ppv", "npv"], rows), args.output)
        return 0
    if args.pi is None:
        raise DomainError("provide --pi for a point evaluation or --curve for a sweep")
    doc = {
        "command": "diagnostics",
        "method": "predictive-values",
        "inputs": {"sensitivity": args.se, "specificity": args.sp, "pi": args.pi},
        "results": {
            "ppv": ppv(args.pi, profile),
            "npv": npv(args.pi, profile),
            "prevalence_threshold": prevalence_threshold(profile),
        },
        "warnings": [],
    }
    _emit_json(doc, args.output)
    return 0
