"""End-to-end batch pipeline driven by a JSON config file."""
import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

from . import enrich as en
from . import ingest
from .errors import ConfigError, DataError, FleetEnergyError, StageError
from .experiments import MODEL_KINDS, TrainParams, train_model
from .map_match import DEFAULT_RADIUS_M, DEFAULT_WINDOW, match_locations
from .ml import DIESEL_BEST, ELECTRIC_BEST, FeatureConfig, config_hash, encode, evaluate, save_model, split_indices
from .ml.features import write_dataset_csv
from .road_network import RoutingGraph, load_map
from .sampler import (DEFAULT_CAPACITY_J, DEFAULT_GAP_S, DEFAULT_MIN_DELTA_SOC, filter_erroneous,
                      merge_sample_sets, segment_samples, write_samples_csv)

log = logging.getLogger(__name__)

STAGES = ("ingest", "match", "samples", "enrich", "encode", "train")
KINDS = ("electric", "diesel")
PATH_KEYS = ("telemetry_electric", "telemetry_diesel", "map", "dem", "weather", "traffic", "tmc")


@dataclass
class PipelineConfig:
    paths: Dict[str, Optional[str]]
    garage_polygon: List[List[float]]
    humidity_convention: str = "fraction"
    clamp_negative_fuel: bool = True
    timezone: str = "UTC"
    window: int = DEFAULT_WINDOW
    radius_m: float = DEFAULT_RADIUS_M
    gap_threshold_s: float = DEFAULT_GAP_S
    min_delta_soc: float = DEFAULT_MIN_DELTA_SOC
    battery_capacity_j: float = DEFAULT_CAPACITY_J
    k_nearest: int = 4
    speed_ratio: str = "mean_of_ratios"
    features: Dict[str, dict] = field(default_factory=dict)  # kind -> FeatureConfig dict
    target_electric: str = "energy"
    model: str = "mlp"
    hidden: Dict[str, List[int]] = field(default_factory=lambda: {"electric": [100, 80],
                                                                  "diesel": [400, 200, 100, 50, 25]})
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 0.001
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    standardize: bool = True
    train_fraction: float = 0.8
    seed: int = 0
    base_dir: str = "."

    def resolve(self, key):
        rel = self.paths.get(key)
        if rel is None:
            return None
        p = Path(rel)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def feature_config(self, kind):
        if kind in self.features:
            return FeatureConfig.from_dict(self.features[kind])
        return ELECTRIC_BEST if kind == "electric" else DIESEL_BEST

    def train_params(self, kind):
        return TrainParams(tuple(self.hidden.get(kind, (100, 80))), self.epochs, self.batch_size,
                           self.learning_rate, self.max_depth, self.min_samples_leaf, self.standardize)

    def target(self, kind):
        return self.target_electric if kind == "electric" else "energy"

    def target_unit(self, kind):
        if kind == "diesel":
            return "gallons"
        return "joules" if self.target_electric == "energy" else "delta_soc_pct"

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        return d

    def hash(self):
        return config_hash(self.to_dict())


def load_config(path, **overrides):
    """Read a JSON pipeline config; relative paths resolve against its folder."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(raw, base_dir=str(path.parent))


def config_from_dict(raw, base_dir="."):
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "paths" not in raw or "garage_polygon" not in raw:
        raise ConfigError("config needs 'paths' and 'garage_polygon'")
    bad_paths = set(raw["paths"]) - set(PATH_KEYS)
    if bad_paths:
        raise ConfigError(f"unknown path keys: {sorted(bad_paths)}")
    cfg = PipelineConfig(**{**raw, "base_dir": raw.get("base_dir", base_dir)})
    if cfg.model not in MODEL_KINDS:
        raise ConfigError(f"model must be one of {MODEL_KINDS}")
    if cfg.humidity_convention not in ("fraction", "percent"):
        raise ConfigError("humidity_convention must be 'fraction' or 'percent'")
    if cfg.target_electric not in ("energy", "delta_soc"):
        raise ConfigError("target_electric must be 'energy' or 'delta_soc'")
    if cfg.window < 0 or cfg.radius_m <= 0 or cfg.k_nearest < 1 or cfg.epochs < 1:
        raise ConfigError("window >= 0, radius_m > 0, k_nearest >= 1 and epochs >= 1 required")
    try:
        ingest.GarageZone.from_vertices(cfg.garage_polygon)
        for kind in KINDS:
            cfg.feature_config(kind)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc))
    return cfg


def _require(cfg, key):
    p = cfg.resolve(key)
    if p is None or not p.exists():
        raise DataError(f"input '{key}' missing: {p}")
    return p


def _fmt(x):
    return "" if x is None else repr(float(x))


class Run:
    """Mutable state threaded through the stages of one pipeline run."""

    def __init__(self, cfg: PipelineConfig, out_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = {"config_hash": cfg.hash(), "seed": cfg.seed, "stages": {}}
        self.points: Dict[str, list] = {}
        self.assignments: Dict[str, list] = {}
        self.features = None
        self.index = None
        self.samples = {}
        self.enriched = {}
        self.datasets = {}
        self.models = {}
        self.reports = {}

    def kinds(self):
        return [k for k in KINDS if self.cfg.paths.get(f"telemetry_{k}")]

    def record(self, stage, outputs, rows):
        self.manifest["stages"][stage] = {"outputs": sorted(outputs), "rows": rows}

    def load_map(self):
        if self.features is None:
            self.features, self.index = load_map(_require(self.cfg, "map"))
        return self.features

    # -- stages ---------------------------------------------------------------

    def ingest(self):
        cfg = self.cfg
        zone = ingest.GarageZone.from_vertices(cfg.garage_polygon)
        outputs, rows = [], {}
        for kind in self.kinds():
            parsed = ingest.parse_telemetry(_require(cfg, f"telemetry_{kind}"), kind)
            pts = ingest.remove_garage_points(parsed.points, zone)
            if kind == "electric":
                pts = ingest.remove_charging_points(pts)
            self.points[kind] = pts
            name = f"telemetry_clean_{kind}.csv"
            ingest.write_telemetry(self.out / name, pts)
            outputs.append(name)
            rows[kind] = {"read": parsed.n_rows, "rejected": parsed.n_rejected, "kept": len(pts)}
        self.record("ingest", outputs, rows)

    def match(self):
        self.load_map()
        outputs, rows = [], {}
        for kind, pts in self.points.items():
            assigned = []
            for vid, series in ingest.split_by_vehicle(pts).items():
                res = match_locations([p.position for p in series], self.index, self.cfg.window, self.cfg.radius_m)
                assigned += res.assignments
            self.assignments[kind] = assigned
            name = f"matched_{kind}.csv"
            with (self.out / name).open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["vehicle_id", "timestamp", "feature_id"])
                for p, fid in zip(pts, assigned):
                    w.writerow([p.vehicle_id, repr(p.timestamp), fid or ""])
            outputs.append(name)
            rows[kind] = {"points": len(pts), "matched": sum(a is not None for a in assigned)}
        self.record("match", outputs, rows)

    def make_samples(self):
        cfg = self.cfg
        by_id = {f.feature_id: f for f in self.load_map()}
        outputs, rows = [], {}
        for kind, pts in self.points.items():
            sets = []
            start = 0
            for vid, series in ingest.split_by_vehicle(pts).items():
                assigned = self.assignments[kind][start:start + len(series)]
                start += len(series)
                if len(series) < 2:
                    continue
                if kind == "electric":
                    vals = ingest.estimate_electric_energy(series)
                    cap = cfg.battery_capacity_j
                else:
                    vals = ingest.fuel_delta(series, clamp=cfg.clamp_negative_fuel)
                    cap = None
                sets.append(segment_samples(series, assigned, vals, cfg.gap_threshold_s, cap, by_id))
            ss = merge_sample_sets(sets)
            if kind == "electric":
                ss = filter_erroneous(ss, cfg.min_delta_soc)
            self.samples[kind] = ss
            name = f"samples_{kind}.csv"
            write_samples_csv(self.out / name, ss.samples)
            outputs.append(name)
            rows[kind] = {"samples": len(ss), **{k: ss.provenance[k] for k in sorted(ss.provenance)}}
        self.record("samples", outputs, rows)

    def enrich(self):
        cfg = self.cfg
        dem = en.read_esri_ascii(_require(cfg, "dem"))
        weather = ingest.parse_weather(_require(cfg, "weather"), cfg.humidity_convention)
        wtable = en.build_hourly_weather(weather.records, cfg.timezone)
        traffic = ingest.parse_traffic(_require(cfg, "traffic"))
        ttable = en.build_hourly_traffic(traffic.records, cfg.timezone, cfg.speed_ratio)
        tmcs = en.read_tmc_csv(_require(cfg, "tmc"))
        graph = RoutingGraph.from_features(self.load_map())
        mapping = en.build_tmc_mapping(tmcs, graph, cfg.k_nearest)
        en.write_mapping_csv(self.out / "tmc_mapping.csv", mapping)
        by_id = {f.feature_id: f for f in self.features}
        outputs, rows = ["tmc_mapping.csv"], {"tmc_mapped_features": len(mapping)}
        for kind, ss in self.samples.items():
            enriched = en.enrich_samples(ss.samples, by_id, dem, wtable, mapping, ttable)
            self.enriched[kind] = enriched
            name = f"enriched_{kind}.csv"
            en.write_enriched_csv(self.out / name, enriched)
            outputs.append(name)
            rows[kind] = {"samples": len(enriched),
                          "elevation_flagged": sum(bool(e.flags) for e in enriched)}
        self.record("enrich", outputs, rows)

    def encode(self):
        outputs, rows = [], {}
        for kind, enriched in self.enriched.items():
            ds = encode(enriched, self.cfg.feature_config(kind), self.cfg.target(kind))
            if len(ds) < 2:
                raise DataError(f"{kind}: only {len(ds)} samples, cannot split")
            self.datasets[kind] = ds
            name = f"dataset_{kind}.csv"
            write_dataset_csv(self.out / name, ds)
            outputs.append(name)
            rows[kind] = {"rows": len(ds), "columns": len(ds.columns)}
        self.record("encode", outputs, rows)

    def split(self, kind):
        ds = self.datasets[kind]
        tr, te = split_indices(len(ds), self.cfg.train_fraction, self.cfg.seed)
        return ds.take(tr), ds.take(te)

    def train(self, model_kind=None):
        cfg = self.cfg
        model_kind = model_kind or cfg.model
        outputs, rows = [], {}
        for kind in self.datasets:
            train, test = self.split(kind)
            fitted = train_model(model_kind, train, cfg.train_params(kind), cfg.seed,
                                 meta={"config_hash": cfg.hash(), "vehicle_kind": kind,
                                       "target_unit": cfg.target_unit(kind), "seed": cfg.seed})
            m = evaluate(fitted, test)
            self.models[kind] = fitted
            report = {"model": model_kind, "feature_config": cfg.feature_config(kind).to_dict(),
                      "mse": m.mse, "mae": m.mae, "train_rows": len(train), "test_rows": len(test),
                      "seed": cfg.seed, "target_unit": cfg.target_unit(kind), "vehicle_kind": kind,
                      "config_hash": cfg.hash()}
            self.reports[kind] = report
            save_model(self.out / f"model_{kind}.json", fitted)
            (self.out / f"report_{kind}.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
            outputs += [f"model_{kind}.json", f"report_{kind}.json"]
            rows[kind] = {"train_rows": len(train), "test_rows": len(test)}
        self.record("train", outputs, rows)

    def write_manifest(self):
        (self.out / "manifest.json").write_text(json.dumps(self.manifest, indent=2) + "\n")


STAGE_METHODS = {"ingest": "ingest", "match": "match", "samples": "make_samples", "enrich": "enrich",
                 "encode": "encode", "train": "train"}


def run_pipeline(cfg: PipelineConfig, out_dir, until="train"):
    """Run stages in order up to and including ``until``.

    Every stage persists its outputs under ``out_dir`` and the run manifest
    records the config hash, seed and row counts. A failure raises
    :class:`StageError` naming the stage.
    """
    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    run = Run(cfg, out_dir)
    for stage in STAGES[:STAGES.index(until) + 1]:
        try:
            getattr(run, STAGE_METHODS[stage])()
        except FleetEnergyError as exc:
            raise StageError(stage, exc) from exc
        except (ValueError, KeyError, OSError) as exc:
            raise StageError(stage, DataError(str(exc))) from exc
        log.info("stage %s done", stage)
        run.write_manifest()
    return run
