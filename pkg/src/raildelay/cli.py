"""Command-line entry point.

Exit status is 0 on success, 2 for bad input (unreadable or inconsistent
files, invalid arguments) and 3 for anything unexpected.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .data import (DEFAULT_BOUNDARY_LON, DEFAULT_TRAIN_FRACTION, DataError, DelayKind,
                   Mode, read_dataset, save_dataset, time_split)
from .ensemble import ModelFormatError, ModelPreset
from .manifest import RunManifest, params_digest
from .pipeline import (discover_models, evaluate_models, generate_pr, read_metrics_table,
                       read_selection, save_models, select_best, selected_models,
                       train_models, write_metrics_table, write_selection)
from .reporting import (export_geojson, regional_rows, reliability_rows, summary_rows,
                        to_csv, to_text)
from .sim import (SCHEMA, ScenarioError, config_digest, default_scenario, load_config,
                  run_simulation)

log = logging.getLogger("raildelay")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
INPUT_ERRORS = (DataError, ScenarioError, ModelFormatError, FileNotFoundError,
                IsADirectoryError, ValueError)


def _kinds(values):
    if not values or "all" in values:
        return list(DelayKind)
    out = []
    for v in values:
        for part in v.split(","):
            kind = DelayKind.from_key(part)
            if kind not in out:
                out.append(kind)
    return out


def _out_file(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _manifest_for(out: Path, command, args, inputs, outputs, seed=None, digest=None):
    params = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(
        command=command,
        config_digest=digest or params_digest(params, inputs),
        seed=seed,
        inputs=[str(p) for p in inputs],
        outputs=[str(p) for p in outputs],
        parameters=params,
    )
    if out.is_dir():
        return manifest.write(out)
    return manifest.write(out.parent, out.name + ".manifest.json")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    if args.schema:
        print(SCHEMA, end="")
        return EXIT_OK
    config = (load_config(args.config, args.seed) if args.config
              else default_scenario(args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_simulation(config)
    bq_path, pr_path = out / "bq.csv", out / "pr.csv"
    save_dataset(result.bq, bq_path)
    save_dataset(result.pr, pr_path)
    inputs = [args.config] if args.config else []
    _manifest_for(out, "simulate", args, inputs, [bq_path, pr_path],
                  seed=config.seed, digest=config_digest(config))
    print(f"simulated {len(result.bq)} s; handovers per operator: "
          + ", ".join(str(int(h)) for h in result.handovers))
    print(f"wrote {bq_path} and {pr_path}")
    return EXIT_OK


def cmd_train(args) -> int:
    dataset = read_dataset(args.data)
    presets = list(ModelPreset) if args.all or not args.preset else [
        ModelPreset.from_name(p) for p in args.preset]
    models, report = train_models(dataset, _kinds(args.delay), presets,
                                  seed=args.seed, train_fraction=args.train_fraction)
    out = Path(args.out)
    paths = save_models(models, out)
    report_path = out / "train_report.csv"
    with open(report_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Delay", "Preset", "Rows", "Train_RMSE", "Seconds", "Path"])
        for row in report:
            w.writerow([row.kind.key, row.preset.value, row.rows, f"{row.train_rmse:.4f}",
                        f"{row.seconds:.2f}", paths[(row.kind, row.preset)].name])
            print(f"{row.kind.key:9s} {row.preset.value:18s} rows={row.rows} "
                  f"train_rmse={row.train_rmse:.3f} ({row.seconds:.1f} s)")
    _manifest_for(out, "train", args, [args.data],
                  list(paths.values()) + [report_path], seed=args.seed)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    found = discover_models(args.models)
    models = {key: model for key, (_, model) in found.items()}
    dataset = read_dataset(args.data)
    table = evaluate_models(models, dataset, args.split, args.train_fraction)
    text = write_metrics_table(table, args.split)
    out = _out_file(args.out)
    out.write_text(text, encoding="utf-8")
    print(f"split: {args.split}" + (f" (last {1 - args.train_fraction:.0%} of records)"
                                   if args.split == "holdout" else ""))
    print(text, end="")
    _manifest_for(out, "evaluate", args, [args.data] + [p for p, _ in found.values()], [out])
    return EXIT_OK


def cmd_select(args) -> int:
    table = read_metrics_table(Path(args.metrics).read_text(encoding="utf-8"))
    selection = select_best(table)
    text = write_selection(selection)
    out = _out_file(args.out)
    out.write_text(text, encoding="utf-8")
    for kind, sel in selection.items():
        print(f"{kind.label}: {sel.chosen.value} (RMSE {sel.rmse[sel.chosen]:.4g})")
    _manifest_for(out, "select", args, [args.metrics], [out])
    return EXIT_OK


def cmd_generate(args) -> int:
    found = discover_models(args.models)
    selection = None
    if args.selection:
        selection = read_selection(Path(args.selection).read_text(encoding="utf-8"))
    chosen = selected_models(found, selection)
    bq = read_dataset(args.data)
    if bq.mode is not Mode.BEST_QUALITY:
        log.warning("input mode is %s, not BQ", bq.mode.code if bq.mode else "empty")
    generated = generate_pr(chosen, bq)
    out = _out_file(args.out)
    save_dataset(generated, out)
    print(f"generated {len(generated)} records for "
          + ", ".join(k.key for k in chosen) + f" into {out}")
    inputs = [args.data] + [p for p, _ in found.values()]
    if args.selection:
        inputs.append(args.selection)
    _manifest_for(out, "generate", args, inputs, [out])
    return EXIT_OK


def cmd_report(args) -> int:
    datasets = [(Path(p).stem, read_dataset(p)) for p in args.data]
    note = None
    if args.holdout is not None:
        datasets = [(name, time_split(ds, args.holdout)[1]) for name, ds in datasets]
        note = (f"statistics over each dataset's chronological hold-out "
                f"(records after the first {args.holdout:.0%})")
    kinds = _kinds(args.delay) if args.delay else None
    if args.report == "reliability":
        header, rows = reliability_rows(datasets, kinds)
    elif args.report == "regional":
        header, rows = regional_rows(datasets, kinds, args.boundary_lon)
    else:
        header, rows = summary_rows(datasets, kinds)
    if note:
        print(note)
    print(to_text(header, rows), end="")
    if args.out:
        out = _out_file(args.out)
        out.write_text(to_csv(header, rows), encoding="utf-8")
        _manifest_for(out, f"report {args.report}", args, args.data, [out])
    return EXIT_OK


def cmd_export_geo(args) -> int:
    kind = DelayKind.from_key(args.delay)
    collection = export_geojson(read_dataset(args.data), kind)
    out = _out_file(args.out)
    out.write_text(json.dumps(collection) + "\n", encoding="utf-8")
    n_crit = sum(f["properties"]["critical"] for f in collection["features"])
    print(f"wrote {len(collection['features'])} points ({n_crit} critical) to {out}")
    _manifest_for(out, "export-geo", args, [args.data], [out])
    return EXIT_OK


def cmd_pipeline(args) -> int:
    """simulate, train every preset, evaluate on the hold-out, select, generate, report."""
    out = Path(args.out)
    steps = [
        ["simulate", "--out", str(out / "data")]
        + (["--config", args.config] if args.config else [])
        + (["--seed", str(args.seed)] if args.seed is not None else []),
        ["train", "--data", str(out / "data" / "pr.csv"), "--all", "--out", str(out / "models"),
         "--train-fraction", str(args.train_fraction)]
        + ["--delay"] + [k.key for k in _kinds(args.delay)],
        ["evaluate", "--models", str(out / "models"), "--data", str(out / "data" / "pr.csv"),
         "--split", "holdout", "--train-fraction", str(args.train_fraction),
         "--out", str(out / "metrics.csv")],
        ["select", "--metrics", str(out / "metrics.csv"), "--out", str(out / "selection.csv")],
        ["generate", "--models", str(out / "models"), "--selection", str(out / "selection.csv"),
         "--data", str(out / "data" / "bq.csv"), "--out", str(out / "data" / "generated_pr.csv")],
        ["report", "reliability", "--data", str(out / "data" / "bq.csv"),
         str(out / "data" / "generated_pr.csv"), str(out / "data" / "pr.csv"),
         "--out", str(out / "reliability.csv")],
        ["report", "regional", "--data", str(out / "data" / "pr.csv"),
         str(out / "data" / "generated_pr.csv"), "--out", str(out / "regional.csv")],
        ["report", "summary", "--data", str(out / "data" / "pr.csv"),
         str(out / "data" / "generated_pr.csv"), "--holdout", str(args.train_fraction),
         "--out", str(out / "summary.csv")],
    ]
    for argv in steps:
        print(f"== {' '.join(argv[:2]) if argv[0] == 'report' else argv[0]}")
        code = main(argv)
        if code != EXIT_OK:
            return code
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raildelay",
        description="Simulate dual-mode railway cellular campaigns and model PR-mode delays.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a seeded BQ/PR measurement campaign")
    p.add_argument("--config", help="scenario file (default: bundled scenario)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, help="overrides RAILDELAY_SEED and the file seed")
    p.add_argument("--schema", action="store_true", help="print the config reference and exit")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit model presets on PR-mode data")
    p.add_argument("--data", required=True, help="PR-mode CSV")
    p.add_argument("--delay", nargs="+", default=["all"], help="delay kinds or 'all'")
    p.add_argument("--preset", nargs="+", choices=[m.value for m in ModelPreset])
    p.add_argument("--all", action="store_true", help="train all four presets")
    p.add_argument("--out", default="models", help="model directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION,
                   help="chronological share used for fitting (1 = all records)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score models on a dataset")
    p.add_argument("--models", "--model", nargs="+", required=True,
                   help="model files or directories")
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("holdout", "full"), default="holdout")
    p.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION)
    p.add_argument("--out", default="metrics.csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("select", help="pick the minimum-RMSE preset per delay kind")
    p.add_argument("--metrics", "--data", dest="metrics", required=True,
                   help="metrics table from evaluate")
    p.add_argument("--out", default="selection.csv")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("generate", help="predict PR-mode delays for a BQ dataset")
    p.add_argument("--models", "--model", nargs="+", required=True)
    p.add_argument("--selection", help="selection table choosing one preset per kind")
    p.add_argument("--data", required=True, help="BQ-mode CSV")
    p.add_argument("--out", default="generated_pr.csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report", help="reliability, regional or summary tables")
    p.add_argument("report", choices=("reliability", "regional", "summary"))
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--delay", nargs="+")
    p.add_argument("--boundary-lon", type=float, default=DEFAULT_BOUNDARY_LON)
    p.add_argument("--holdout", type=float, metavar="TRAIN_FRACTION",
                   help="restrict each dataset to records after this chronological share")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export-geo", help="GeoJSON points for map styling")
    p.add_argument("--data", required=True)
    p.add_argument("--delay", required=True)
    p.add_argument("--out", default="delays.geojson")
    p.set_defaults(func=cmd_export_geo)

    p = sub.add_parser("pipeline", help="simulate through report in one go")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--delay", nargs="+", default=["all"])
    p.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION)
    p.add_argument("--out", default="run")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not logging.getLogger().handlers:
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
