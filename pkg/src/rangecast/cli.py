"""Command-line entry points for the full pipeline.

Every command is deterministic given its config and master seed, writes under
the configured output directory, and exits nonzero on any module error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import classify as classify_mod
from . import distfit as distfit_mod
from . import evaluate as evaluate_mod
from .classify import ClassCase, classify_series, monthly_stats
from .config import ConfigError, RunConfig, load_config
from .dataio import MonthlySeries, TimePoint, build_design, covariate_rows, fit_scaling, \
    parse_route_csv, serialize_route_csv
from .forecast import (
    HorizonRequest,
    forecast_route,
    load_ensemble,
    month_summary,
    save_ensemble,
)
from .sieve import derive_seed, sieve_select

_ERRORS = (ValueError, RuntimeError, ConfigError, OSError)


def _load_dataset(config: RunConfig) -> list[MonthlySeries]:
    dataset = parse_route_csv(config.data.read_text())
    if config.routes is not None:
        known = {s.route_id for s in dataset}
        missing = [r for r in config.routes if r not in known]
        if missing:
            raise ValueError(f"unknown route(s) in config filter: {', '.join(missing)}")
        dataset = [s for s in dataset if s.route_id in config.routes]
    if not dataset:
        raise ValueError("dataset contains no (matching) routes")
    return dataset


def _select_route(dataset: list[MonthlySeries], route: str | None) -> list[MonthlySeries]:
    if route is None:
        return dataset
    for series in dataset:
        if series.route_id == route:
            return [series]
    raise ValueError(f"unknown route {route!r}")


def _outdir(config: RunConfig, override: str | None) -> Path:
    out = Path(override) if override else config.out
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(config: RunConfig, out: str | None = None) -> int:
    dataset = _load_dataset(config)
    outdir = _outdir(config, out)
    target = outdir / "dataset.csv"
    target.write_text(serialize_route_csv(dataset))
    print(f"wrote {target}")
    for s in dataset:
        print(f"  {s.route_id}: {s.start}..{s.end} ({len(s)} months, total {sum(s.values)})")
    return 0


def cmd_stats(config: RunConfig, out: str | None = None) -> int:
    dataset = _load_dataset(config)
    table = distfit_mod.class_frequency_table(dataset)
    text = distfit_mod.stats_table_text(table)
    outdir = _outdir(config, out)
    (outdir / "stats.txt").write_text(text)
    print(text, end="")
    return 0


def cmd_classify(config: RunConfig, route: str | None = None, out: str | None = None) -> int:
    dataset = _select_route(_load_dataset(config), route)
    outdir = _outdir(config, out)
    for series in dataset:
        stats = monthly_stats(series)
        classes = classify_series(series, stats)
        path = outdir / f"classes_{series.route_id}.csv"
        path.write_text(classify_mod.class_series_csv(series.route_id, series.start, classes))
        print(f"wrote {path}")
    return 0


def cmd_tune(config: RunConfig, route: str | None = None, out: str | None = None) -> int:
    dataset = _select_route(_load_dataset(config), route)
    outdir = _outdir(config, out)
    grid = config.grid or evaluate_mod.default_grid()
    for series in dataset:
        span = series.through(config.cutoff)
        stats = monthly_stats(span)
        classes = classify_series(span, stats)
        rows = covariate_rows(span, classes)
        cv = dataclasses.replace(config.cv, seed=derive_seed(config.seed, 0))
        result = evaluate_mod.tune_hyperparams(rows, span.values, grid, cv)
        doc = {
            "route": series.route_id,
            "chosen": {
                "layer_sizes": list(result.chosen.layer_sizes),
                "hidden_activation": result.chosen.hidden_activation,
            },
            "grid": [
                {
                    "layer_sizes": list(e.spec.layer_sizes),
                    "hidden_activation": e.spec.hidden_activation,
                    "mean_rmse": e.mean_rmse,
                    "mean_mae": e.mean_mae,
                }
                for e in result.grid
            ],
        }
        path = outdir / f"tune_{series.route_id}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(f"{series.route_id}: chose {result.chosen.layer_sizes} "
              f"{result.chosen.hidden_activation} -> {path}")
    return 0


def cmd_train(
    config: RunConfig, route: str, cutoff: str | None = None, out: str | None = None
) -> int:
    dataset = _select_route(_load_dataset(config), route)
    series = dataset[0]
    cut = TimePoint.parse(cutoff) if cutoff else config.cutoff
    span = series.through(cut)
    stats = monthly_stats(span)
    classes = classify_series(span, stats)
    rows = covariate_rows(span, classes)
    scaling = fit_scaling(rows, span.values)
    X, y = build_design(span, classes, scaling)
    spec = config.spec
    if spec is None:
        grid = config.grid or evaluate_mod.default_grid()
        cv = dataclasses.replace(config.cv, seed=derive_seed(config.seed, 0))
        spec = evaluate_mod.tune_hyperparams(rows, span.values, grid, cv).chosen
    sieve_opts = dataclasses.replace(config.sieve, seed=derive_seed(config.seed, 1))
    ensemble = sieve_select(
        spec,
        X,
        y,
        sieve_opts,
        route_id=series.route_id,
        scaling=scaling,
        monthly_s=stats.s_by_month,
        training_cutoff=cut,
        train_options=config.train,
        workers=config.workers,
    )
    outdir = _outdir(config, out)
    path = save_ensemble(outdir / f"model_{series.route_id}.json", ensemble)
    print(f"trained {len(ensemble)} networks on {series.route_id} through {cut} -> {path}")
    return 0


def _parse_class_vector(raw: str) -> tuple[float, ...]:
    if raw.startswith("@"):
        raw = Path(raw[1:]).read_text()
    parts = [p for chunk in raw.splitlines() for p in chunk.split(",")]
    try:
        return tuple(float(p.strip()) for p in parts if p.strip())
    except ValueError:
        raise ValueError(f"class vector entries must be numbers: {raw!r}") from None


def cmd_forecast(
    artifact: str,
    class_vector: str,
    months: int = 12,
    start: str | None = None,
    seed: int | None = None,
    out: str | None = None,
) -> int:
    ensemble = load_ensemble(artifact)
    vector = _parse_class_vector(class_vector)
    if len(vector) != months:
        raise ValueError(f"class vector has {len(vector)} entries for {months} months")
    begin = TimePoint.parse(start) if start else ensemble.training_cutoff.plus(1)
    request = HorizonRequest(
        route_id=ensemble.route_id, start=begin, class_vector=vector, months=months
    )
    fr = forecast_route(ensemble, request, seed=seed)
    low, high = fr.range
    print(f"{ensemble.route_id} {begin}..{begin.plus(months - 1)}: "
          f"range [{low:.1f}, {high:.1f}]")
    lines = ["month,min,q10,median,q90,max,retained"]
    for i, values in enumerate(fr.per_month):
        s = month_summary(values)
        lines.append(
            f"{begin.plus(i)},{s['min']!r},{s['q10']!r},{s['median']!r},"
            f"{s['q90']!r},{s['max']!r},{s['retained']}"
        )
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"forecast_{ensemble.route_id}.csv"
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    else:
        print("\n".join(lines))
    return 0


def _case_from_flag(case: str) -> ClassCase:
    try:
        return ClassCase(case)
    except ValueError:
        raise ValueError(
            f"unknown case {case!r}; expected precise, mean, or approx"
        ) from None


def cmd_validate(
    config: RunConfig, case: str, route: str | None = None, out: str | None = None
) -> int:
    dataset = _select_route(_load_dataset(config), route)
    class_case = _case_from_flag(case)
    outdir = _outdir(config, out)
    reports = []
    for series in dataset:
        report = evaluate_mod.backtest(series, config.backtest_config(), class_case)
        reports.append(report)
        wpath = outdir / f"windows_{series.route_id}_{class_case.value}.csv"
        wpath.write_text(evaluate_mod.windows_csv(report))
    text = evaluate_mod.validation_table_text(reports)
    (outdir / f"report_{class_case.value}.txt").write_text(text)
    (outdir / f"report_{class_case.value}.csv").write_text(evaluate_mod.metrics_csv(reports))
    print(text, end="")
    return 0


def cmd_sensitivity(config: RunConfig, route: str | None = None, out: str | None = None) -> int:
    dataset = _select_route(_load_dataset(config), route)
    outdir = _outdir(config, out)
    by_route = {}
    flat = []
    for series in dataset:
        reports = evaluate_mod.sensitivity(series, config.backtest_config())
        by_route[series.route_id] = reports
        flat.extend(reports.values())
        for case, report in reports.items():
            wpath = outdir / f"windows_{series.route_id}_{case.value}.csv"
            wpath.write_text(evaluate_mod.windows_csv(report))
    text = evaluate_mod.sensitivity_table_text(by_route)
    (outdir / "sensitivity.txt").write_text(text)
    (outdir / "sensitivity.csv").write_text(evaluate_mod.metrics_csv(flat))
    print(text, end="")
    return 0


def cmd_distfit(config: RunConfig, out: str | None = None) -> int:
    dataset = _load_dataset(config)
    outdir = _outdir(config, out)
    fits = []
    for series in dataset:
        by_month: dict[int, list[int]] = {m: [] for m in range(1, 13)}
        for tp, v in zip(series.timepoints(), series.values):
            by_month[tp.month].append(v)
        for m in range(1, 13):
            fit = distfit_mod.fit_weibull(
                distfit_mod.positive_counts(by_month[m]), route_id=series.route_id, month=m
            )
            fits.append(fit)
    lines = ["route,month,shape,scale,n"]
    lines += [
        f"{f.route_id},{f.month},{f.shape!r},{f.scale!r},{f.sample_n}" for f in fits
    ]
    (outdir / "weibull_fits.csv").write_text("\n".join(lines) + "\n")
    bands = distfit_mod.band_figure_csv(dataset, seed=derive_seed(config.seed, 3))
    (outdir / "class_bands.csv").write_text(bands)
    print(f"wrote {outdir / 'weibull_fits.csv'} and {outdir / 'class_bands.csv'}")
    return 0


def cmd_serve(config: RunConfig, artifacts: str, bind: str = "127.0.0.1:8000") -> int:
    import uvicorn

    from .service import create_app

    app = create_app(config.data, Path(artifacts))
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rangecast",
        description="Annual range forecasts for monthly route-level count series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kwargs)
        return p

    for name, needs_route in [
        ("ingest", False), ("stats", False), ("classify", True), ("tune", True),
        ("validate", True), ("sensitivity", True), ("distfit", False),
    ]:
        p = add(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        if needs_route:
            p.add_argument("--route", default=None)
    sub.choices["validate"].add_argument(
        "--case", required=True, choices=[c.value for c in ClassCase]
    )

    p = add("train")
    p.add_argument("--config", required=True)
    p.add_argument("--route", required=True)
    p.add_argument("--cutoff", default=None, help="training cutoff YYYY-MM")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None, help="override config seed")

    p = add("forecast")
    p.add_argument("--artifact", required=True, help="model artifact JSON")
    p.add_argument("--class-vector", required=True, help="comma list or @file")
    p.add_argument("--months", type=int, default=12)
    p.add_argument("--start", default=None, help="horizon start YYYY-MM")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = add("serve")
    p.add_argument("--config", required=True)
    p.add_argument("--artifacts", required=True, help="directory of model artifacts")
    p.add_argument("--bind", default="127.0.0.1:8000")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "forecast":
            return cmd_forecast(
                args.artifact,
                getattr(args, "class_vector"),
                months=args.months,
                start=args.start,
                seed=args.seed,
                out=args.out,
            )
        config = load_config(args.config)
        if getattr(args, "seed", None) is not None and args.command != "forecast":
            config = dataclasses.replace(config, seed=args.seed)
        if args.command == "ingest":
            return cmd_ingest(config, out=args.out)
        if args.command == "stats":
            return cmd_stats(config, out=args.out)
        if args.command == "classify":
            return cmd_classify(config, route=args.route, out=args.out)
        if args.command == "tune":
            return cmd_tune(config, route=args.route, out=args.out)
        if args.command == "train":
            return cmd_train(config, args.route, cutoff=args.cutoff, out=args.out)
        if args.command == "validate":
            return cmd_validate(config, args.case, route=args.route, out=args.out)
        if args.command == "sensitivity":
            return cmd_sensitivity(config, route=args.route, out=args.out)
        if args.command == "distfit":
            return cmd_distfit(config, out=args.out)
        if args.command == "serve":
            return cmd_serve(config, args.artifacts, bind=args.bind)
        raise ValueError(f"unknown command {args.command!r}")
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
