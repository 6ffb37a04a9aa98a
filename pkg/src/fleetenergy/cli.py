"""Command-line entry point: ``fleetenergy <subcommand> [options]``."""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, FleetEnergyError, StageError
from .experiments import (MODEL_KINDS, TRIP_DURATIONS_MIN, ablation, compare_models, predict_trips,
                          train_model, trip_rows, write_table)
from .map_match import noise_sweep, read_route_csv, write_sweep_csv
from .pipeline import load_config, run_pipeline
from .road_network import FeatureIndex, load_map
from .synth import Grid, grid_route, synthetic_fleet

log = logging.getLogger("fleetenergy")

DEFAULT_SUBSETS = "base;elevation;weather;traffic;elevation,weather;elevation,traffic;weather,traffic;elevation,weather,traffic"


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _subsets(text):
    out = []
    for part in text.split(";"):
        groups = {g.strip() for g in part.split(",") if g.strip() and g.strip() != "base"}
        out.append(groups)
    return out


def _config(args):
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    return load_config(args.config, seed=args.seed)


def _out(args):
    out = Path(args.out or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_stage(args):
    cfg = _config(args)
    run_pipeline(cfg, _out(args), until=args.command)
    return 0


def cmd_evaluate(args):
    cfg = _config(args)
    out = _out(args)
    run = run_pipeline(cfg, out, until="encode")
    extra = {"seed": cfg.seed, "config_hash": cfg.hash()}
    for kind, enriched in run.enriched.items():
        rows = compare_models(enriched, cfg.feature_config(kind), cfg.train_params(kind), cfg.seed,
                              cfg.target(kind), cfg.train_fraction)
        write_table(out / f"compare_{kind}.csv", ["model", "mse", "mae", "train_mse"], rows,
                    {**extra, "target_unit": cfg.target_unit(kind)})
    return 0


def cmd_ablate(args):
    cfg = _config(args)
    out = _out(args)
    run = run_pipeline(cfg, out, until="enrich")
    extra = {"seed": cfg.seed, "config_hash": cfg.hash()}
    for kind, enriched in run.enriched.items():
        rows = ablation(enriched, cfg.feature_config(kind), _subsets(args.subsets), args.model or cfg.model,
                        cfg.train_params(kind), cfg.seed, cfg.target(kind), cfg.train_fraction)
        write_table(out / f"ablation_{kind}.csv", ["subset", "dimension", "mse", "mae"], rows,
                    {**extra, "target_unit": cfg.target_unit(kind)})
    return 0


def cmd_trips(args):
    cfg = _config(args)
    out = _out(args)
    run = run_pipeline(cfg, out, until="encode")
    for kind, ds in run.datasets.items():
        train, _ = run.split(kind)
        preds = {}
        for model_kind in MODEL_KINDS:
            fitted = train_model(model_kind, train, cfg.train_params(kind), cfg.seed)
            preds[model_kind] = fitted.predict(ds.X)
        samples = [e.sample for e in run.enriched[kind]]
        if cfg.target(kind) == "delta_soc":
            samples = [replace(s, energy=s.delta_soc) for s in samples]
        reports = predict_trips(preds, samples, _floats(args.durations))
        header, rows = trip_rows(reports)
        write_table(out / f"trips_{kind}.csv", header, rows, {"seed": cfg.seed, "config_hash": cfg.hash()})
    return 0


def cmd_bench(args):
    if bool(args.map) != bool(args.route):
        raise ConfigError("--map and --route go together (omit both for the synthetic grid)")
    if args.map:
        _, index = load_map(args.map)
        routes = [read_route_csv(r) for r in args.route]
    else:
        grid = Grid(8, 8, 200.0)
        index = FeatureIndex(grid.feature_list())
        routes = [grid_route(grid, 500, 10.0, seed=args.seed + k) for k in range(args.routes)]
    rows = noise_sweep(routes, index, _floats(args.sigmas), args.trials, args.window, args.radius, args.seed)
    target = Path(args.out or "matching_sweep.csv")
    if target.suffix != ".csv":
        target.mkdir(parents=True, exist_ok=True)
        target = target / "matching_sweep.csv"
    write_sweep_csv(target, rows)
    for sigma, acc, _, _ in rows:
        print(f"sigma={sigma:g} m  accuracy={acc:.1f}%")
    return 0


def cmd_synth(args):
    path = synthetic_fleet(_out(args), seed=args.seed, n_electric=args.electric, n_diesel=args.diesel,
                           hours=args.hours)
    print(path)
    return 0


def _global_flags(parser, suppress):
    # accepted before or after the subcommand; subparser copies must not
    # overwrite a value given before it, hence SUPPRESS defaults there
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=default(None), help="pipeline config (JSON)")
    parser.add_argument("--seed", type=int, default=default(None))
    parser.add_argument("--out", default=default(None), help="output directory (or CSV path for bench-matching)")
    parser.add_argument("--verbose", action="store_true", default=default(False))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    p = argparse.ArgumentParser(prog="fleetenergy",
                                description="Transit-fleet energy samples and prediction models.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    for stage in ("ingest", "match", "samples", "enrich", "train"):
        sub.add_parser(stage, parents=[common], help=f"run the pipeline through '{stage}'").set_defaults(func=cmd_stage)
    sub.add_parser("evaluate", parents=[common], help="compare LR/DT/MLP on one split").set_defaults(func=cmd_evaluate)
    a = sub.add_parser("ablate", parents=[common], help="test MSE per feature-group subset")
    a.add_argument("--subsets", default=DEFAULT_SUBSETS,
                   help="';'-separated subsets of comma-separated groups or weather fields")
    a.add_argument("--model", choices=MODEL_KINDS)
    a.set_defaults(func=cmd_ablate)
    t = sub.add_parser("trips", parents=[common], help="relative error on longer trips")
    t.add_argument("--durations", default=",".join(str(d) for d in TRIP_DURATIONS_MIN))
    t.set_defaults(func=cmd_trips)
    b = sub.add_parser("bench-matching", parents=[common], help="map-matching accuracy under GPS noise")
    b.add_argument("--map")
    b.add_argument("--route", action="append", help="ground-truth route CSV (lat,lon,feature_id); repeatable")
    b.add_argument("--sigmas", default="0,7,14,28,55,110")
    b.add_argument("--trials", type=int, default=20)
    b.add_argument("--window", type=int, default=10)
    b.add_argument("--radius", type=float, default=25.0)
    b.add_argument("--routes", type=int, default=3, help="synthetic routes when no --map is given")
    b.set_defaults(func=cmd_bench)
    s = sub.add_parser("synth", parents=[common], help="write a synthetic fleet fixture")
    s.add_argument("--electric", type=int, default=2)
    s.add_argument("--diesel", type=int, default=2)
    s.add_argument("--hours", type=float, default=1.0)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is None and args.command in ("bench-matching", "synth"):
        args.seed = 0
    try:
        return args.func(args)
    except StageError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except FleetEnergyError as exc:
        log.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
