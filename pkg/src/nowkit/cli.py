"""Batch command-line front end.

One JSON config file drives every command; flags override config scalars.
All randomness flows from the single config seed, fanned out per stage via
hashed stream seeds, so rerunning any command with the same config and seed
produces byte-identical output files.

Commands: validate | train | select | backtest | trace | classify
Exit codes: 0 success, 1 runtime error, 2 validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import evaluation, feasibility, ingest, selection
from .errors import NowkitError
from .lstm import Hyperparams, model_from_json, model_to_json, train
from .pipeline import (
    TransformOptions,
    build_panel,
    growth_by_year,
    panel_span,
    target_growth,
    training_dataset,
)
from .seeds import derive_seed
from .series import TimeSeries, YearRange, observation_count
from .vintage import VintageDate, checkpoint_schedule, full_snapshot, trace_schedule

MIN_OBSERVATIONS = 10


@dataclass
class RunConfig:
    target_series_id: str
    candidate_variable_ids: tuple[str, ...]
    series_csv: Path
    catalog_csv: Path | None
    variables: tuple[str, ...]
    splits: evaluation.SplitSpec
    hyperparams: Hyperparams | None
    search: selection.SearchConfig | None
    options: TransformOptions
    output_dir: Path
    seed: int
    min_obs: int


def _parse_hyper(doc: dict, seed: int = 0) -> Hyperparams:
    return Hyperparams(
        n_timesteps=int(doc["n_timesteps"]),
        hidden_size=int(doc["hidden_size"]),
        learning_rate=float(doc["learning_rate"]),
        epochs=int(doc["epochs"]),
        seed=seed,
        l2_penalty=float(doc.get("l2_penalty", 0.0)),
    )


def load_config(path: Path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    base = path.parent

    splits_doc = doc.get("splits")
    if splits_doc is None:
        splits = evaluation.default_splits()
    else:
        splits = evaluation.SplitSpec(
            train_years=YearRange(*splits_doc["train"]),
            validation_years=YearRange(*splits_doc["validation"]),
            test_years=YearRange(*splits_doc["test"]),
        )

    candidates = tuple(doc["candidate_variable_ids"])
    hyper = _parse_hyper(doc["hyperparams"]) if "hyperparams" in doc else None

    search = None
    if "search" in doc:
        sdoc = doc["search"]
        coarse = tuple(_parse_hyper(h) for h in sdoc.get("coarse_grid", ())) \
            or selection.DEFAULT_COARSE_GRID
        fine = tuple(_parse_hyper(h) for h in sdoc.get("fine_grid", ())) \
            or selection.DEFAULT_FINE_GRID
        search = selection.SearchConfig(
            candidate_variable_ids=candidates,
            n_trials=int(sdoc.get("n_trials", 300)),
            subset_size_range=tuple(sdoc.get("subset_size_range", (4, 12))),
            coarse_grid=coarse,
            fine_grid=fine,
            top_k=int(sdoc.get("top_k", 3)),
            seed=0,  # overwritten per command from the run seed
        )

    tdoc = doc.get("transform", {})
    options = TransformOptions(
        seasonal_adjust=bool(tdoc.get("seasonal_adjust", True)),
        growth=tdoc.get("growth", "simple"),
    )
    return RunConfig(
        target_series_id=doc["target_series_id"],
        candidate_variable_ids=candidates,
        series_csv=base / doc["series_csv"],
        catalog_csv=(base / doc["catalog_csv"]) if "catalog_csv" in doc else None,
        variables=tuple(doc.get("variables", candidates)),
        splits=splits,
        hyperparams=hyper,
        search=search,
        options=options,
        output_dir=base / doc.get("output_dir", "out"),
        seed=int(doc.get("seed", 0)),
        min_obs=int(doc.get("min_obs", MIN_OBSERVATIONS)),
    )


def _load_pool(config: RunConfig) -> dict[str, TimeSeries]:
    return {s.id: s for s in ingest.read_series_csv(config.series_csv)}


def cmd_validate(config: RunConfig) -> int:
    """Check the two data conditions before any run: a sufficiently long
    target series and present, lag-stamped explanatory variables."""
    violations: list[str] = []
    try:
        pool = _load_pool(config)
    except NowkitError as exc:
        print(f"violation: cannot read series file: {exc}")
        return 2

    target = pool.get(config.target_series_id)
    if target is None:
        violations.append(f"target series {config.target_series_id!r} not in pool")
    else:
        n = observation_count(target)
        if n < config.min_obs:
            violations.append(
                f"target series {config.target_series_id!r} has {n} observations; "
                f"nowcasting needs {config.min_obs} data points at a minimum"
            )
        years = [o.period.year for o in target.observations]
        for span_name, span in (
            ("train", config.splits.train_years),
            ("validation", config.splits.validation_years),
            ("test", config.splits.test_years),
        ):
            missing = [y for y in span.years() if y not in years]
            if missing:
                violations.append(
                    f"target series lacks {span_name} years {missing}")
    for var in config.candidate_variable_ids:
        if var not in pool:
            violations.append(f"candidate variable {var!r} not in pool")
    for var in config.variables:
        if var not in pool:
            violations.append(f"selected variable {var!r} not in pool")

    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 2
    print(f"ok: {len(pool)} series, target {config.target_series_id!r}, "
          f"splits {config.splits.train_years.start}-{config.splits.test_years.end}")
    return 0


def _train_final_model(config: RunConfig, pool, span_years: YearRange,
                       stage_tag: str):
    if config.hyperparams is None:
        raise NowkitError("config has no 'hyperparams' entry")
    hyper = replace(
        config.hyperparams, seed=derive_seed(config.seed, stage_tag))
    growths = growth_by_year(
        target_growth(pool, config.target_series_id, config.options))
    span = panel_span(span_years.start, span_years.end, hyper.n_timesteps)
    panel = build_panel(pool, config.variables, span_years, span, config.options)
    snapshot = full_snapshot(pool)
    dataset = training_dataset(panel, growths, span_years, hyper.n_timesteps, snapshot)
    return train(dataset, hyper, standardization=panel.standardization)


def cmd_train(config: RunConfig, span: str) -> int:
    pool = _load_pool(config)
    span_years = (config.splits.train_years if span == "train"
                  else config.splits.final_train_years())
    model = _train_final_model(config, pool, span_years, f"train:{span}")
    out = config.output_dir / "model.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(model_to_json(model), encoding="utf-8", newline="\n")
    print(f"wrote {out} (trained {span_years.start}-{span_years.end}, "
          f"final loss {model.training_loss_curve[-1]!r})")
    return 0


def _write_search_csv(path: Path, trials) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([
            "trial_id", "variables", "hidden_size", "n_timesteps",
            "learning_rate", "epochs", "val_mae", "val_rmse", "status",
        ])
        for t in trials:
            writer.writerow([
                t.trial_id,
                ";".join(t.variables),
                t.hyper.hidden_size,
                t.hyper.n_timesteps,
                repr(t.hyper.learning_rate),
                t.hyper.epochs,
                "" if not t.ok else repr(t.val_mae),
                "" if not t.ok else repr(t.val_rmse),
                t.status,
            ])


def cmd_select(config: RunConfig) -> int:
    if config.search is None:
        raise NowkitError("config has no 'search' entry")
    pool = _load_pool(config)
    search_config = replace(config.search, seed=derive_seed(config.seed, "select"))
    report = selection.random_search(
        search_config, config.splits, pool, config.target_series_id, config.options)
    winner, refined = selection.refine_top_k(
        report.ranked, search_config, config.splits, pool,
        config.target_series_id, config.options)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    search_csv = config.output_dir / "search.csv"
    _write_search_csv(search_csv, report.all_trials() + sorted(
        refined, key=lambda t: t.trial_id))
    winner_doc = {
        "variables": list(winner.variables),
        "hyperparams": {
            "n_timesteps": winner.hyper.n_timesteps,
            "hidden_size": winner.hyper.hidden_size,
            "learning_rate": winner.hyper.learning_rate,
            "epochs": winner.hyper.epochs,
            "l2_penalty": winner.hyper.l2_penalty,
        },
        "val_mae": winner.val_mae,
        "val_rmse": winner.val_rmse,
        "trial_id": winner.trial_id,
    }
    winner_json = config.output_dir / "winner.json"
    winner_json.write_text(
        json.dumps(winner_doc, indent=2, sort_keys=True) + "\n",
        encoding="utf-8", newline="\n")
    print(f"wrote {search_csv} and {winner_json}")
    print(f"winner: {';'.join(winner.variables)} "
          f"val_mae={winner.val_mae!r} val_rmse={winner.val_rmse!r}")
    return 0


def cmd_backtest(config: RunConfig, vintage: VintageDate | None) -> int:
    if config.hyperparams is None:
        raise NowkitError("config has no 'hyperparams' entry")
    pool = _load_pool(config)
    hyper = replace(config.hyperparams, seed=derive_seed(config.seed, "backtest"))
    if vintage is not None:
        schedule_fn = lambda year: [vintage]  # noqa: E731
    else:
        schedule_fn = checkpoint_schedule
    result = evaluation.backtest(
        pool, config.target_series_id, config.variables, hyper,
        config.splits, schedule_fn, config.options)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = config.output_dir / "metrics.csv"
    lines = ["split,vintage,mae,rmse,n"]
    for leg in (result.validation, result.test):
        lines.append(
            f"{leg.split},full,{leg.full_data.mae!r},"
            f"{leg.full_data.rmse!r},{leg.full_data.n}")
        for vm in leg.by_vintage:
            lines.append(
                f"{leg.split},{vm.offset_months:+d}m,{vm.metrics.mae!r},"
                f"{vm.metrics.rmse!r},{vm.metrics.n}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    print(f"wrote {out}")
    print(f"validation full-data mae={result.validation.full_data.mae!r} "
          f"rmse={result.validation.full_data.rmse!r}")
    print(f"test full-data mae={result.test.full_data.mae!r} "
          f"rmse={result.test.full_data.rmse!r}")
    return 0


def cmd_trace(config: RunConfig, target_year: int | None,
              model_path: Path | None) -> int:
    if target_year is None:
        raise NowkitError("trace needs --target-year")
    pool = _load_pool(config)
    if model_path is not None:
        model = model_from_json(Path(model_path).read_text(encoding="utf-8"))
    else:
        model = _train_final_model(
            config, pool, config.splits.final_train_years(), "trace")
    trace = evaluation.nowcast_trace(
        model, pool, config.target_series_id, target_year, config.options)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = config.output_dir / f"trace_{target_year}.csv"
    ingest.write_trace_csv(trace, out)
    print(f"wrote {out} ({len(trace.points)} vintages "
          f"{trace.points[0].vintage}..{trace.points[-1].vintage})")
    return 0


def cmd_classify(config: RunConfig, catalog: Path | None) -> int:
    catalog_path = catalog if catalog is not None else config.catalog_csv
    if catalog_path is None:
        raise NowkitError("classify needs a catalog (config 'catalog_csv' or --catalog)")
    records = ingest.read_catalog_csv(catalog_path)
    derived = []
    for record in records:
        expl, _ = feasibility.classify_explanatory(record)
        overall, trace = feasibility.classify_overall(record)
        derived.append((expl, overall, trace))
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = config.output_dir / "labeled_catalog.csv"
    ingest.write_labeled_catalog_csv(records, derived, out)

    counts = feasibility.aggregate_counts(records, "paper")
    agreement = feasibility.agreement(records)
    print(f"wrote {out}")
    print(f"counts: highly_likely={counts.highly_likely} likely={counts.likely} "
          f"unlikely={counts.unlikely} total={counts.total}")
    print(f"agreement: {agreement!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nowkit",
        description="Mixed-frequency nowcasting toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "check data conditions for the configured run"),
        ("train", "train a model on the configured variables"),
        ("select", "two-stage random variable/hyperparameter search"),
        ("backtest", "vintage-degraded and full-data metrics per split"),
        ("trace", "nowcast-over-time trace for one target year"),
        ("classify", "label an indicator catalog with the rule cascade"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, help="output directory override")
        p.add_argument("--seed", type=int, help="run seed override")
        p.add_argument("--vintage", type=str,
                       help="fixed vintage YYYY-MM (backtest schedule override)")
        p.add_argument("--target-year", type=int, dest="target_year",
                       help="target year (trace)")
        if name == "train":
            p.add_argument("--span", choices=("train", "final"), default="final",
                           help="training span: 'train' years only or train+validation")
        if name == "trace":
            p.add_argument("--model", type=Path,
                           help="reuse a trained model JSON instead of retraining")
        if name == "classify":
            p.add_argument("--catalog", type=Path, help="catalog CSV override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.out is not None:
            config.output_dir = args.out
        if args.seed is not None:
            config.seed = args.seed
        vintage = VintageDate.parse(args.vintage) if args.vintage else None

        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "train":
            return cmd_train(config, args.span)
        if args.command == "select":
            return cmd_select(config)
        if args.command == "backtest":
            return cmd_backtest(config, vintage)
        if args.command == "trace":
            return cmd_trace(config, args.target_year, args.model)
        if args.command == "classify":
            return cmd_classify(config, args.catalog)
        raise AssertionError(f"unhandled command {args.command}")
    except (NowkitError, OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
