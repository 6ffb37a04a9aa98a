"""Model training helpers and the experiment runners built on them."""
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from .ml import (FeatureConfig, FittedModel, MlpSpec, Standardizer, encode, evaluate, fit_linear,
                 fit_tree, mlp_train, split_indices)

MODEL_KINDS = ("linear", "tree", "mlp")
TRIP_DURATIONS_MIN = (10, 20, 30, 40, 50, 60, 120, 180, 240, 300, 360)


@dataclass
class TrainParams:
    hidden: tuple = (100, 80)
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 0.001
    max_depth: int = None
    min_samples_leaf: int = 1
    standardize: bool = True


def train_model(kind, ds, params: TrainParams = TrainParams(), seed=0, meta=None):
    """Fit one model kind on a Dataset; input scaling uses its rows only."""
    scaler = Standardizer.fit(ds.X, ds.continuous) if params.standardize else Standardizer.identity(ds.X.shape[1])
    X = scaler.transform(ds.X)
    if kind == "linear":
        model = fit_linear(X, ds.y)
    elif kind == "tree":
        model = fit_tree(X, ds.y, params.max_depth, params.min_samples_leaf)
    elif kind == "mlp":
        spec = MlpSpec(tuple(params.hidden), params.learning_rate)
        model = mlp_train(X, ds.y, spec, params.epochs, params.batch_size, seed)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return FittedModel(model, scaler, ds.columns, meta)


def subset_label(groups):
    return "+".join(sorted(groups)) if groups else "base"


def ablation(enriched, base_cfg: FeatureConfig, subsets: Sequence, model="linear",
             params: TrainParams = TrainParams(), seed=0, target="energy", train_fraction=0.8):
    """Test MSE for each feature-group subset on one shared split.

    Each subset names the context groups to enable on top of the base
    config's distance/road-type columns, e.g. ``{"elevation", "traffic"}``
    or individual weather fields ``{"T", "H"}``.
    """
    if not subsets:
        raise ValueError("need at least one subset")
    tr, te = split_indices(len(enriched), train_fraction, seed)
    rows = []
    for groups in subsets:
        cfg = base_cfg.with_groups(groups)
        ds = encode(enriched, cfg, target)
        fitted = train_model(model, ds.take(tr), params, seed)
        m = evaluate(fitted, ds.take(te))
        rows.append((subset_label(groups), cfg.dimension, m.mse, m.mae))
    return rows


def compare_models(enriched, cfg: FeatureConfig, params: TrainParams = TrainParams(), seed=0,
                   target="energy", train_fraction=0.8, kinds=MODEL_KINDS):
    """Train each model kind on the same split; rows of (model, mse, mae, train_mse)."""
    ds = encode(enriched, cfg, target)
    tr, te = split_indices(len(ds), train_fraction, seed)
    train, test = ds.take(tr), ds.take(te)
    rows = []
    for kind in kinds:
        fitted = train_model(kind, train, params, seed)
        m = evaluate(fitted, test)
        rows.append((kind, m.mse, m.mae, evaluate(fitted, train).mse))
    return rows


@dataclass
class TripReport:
    duration_min: float
    errors: Dict[str, float]  # mean relative error (%) per model
    trip_count: int
    undefined: int = 0


def partition_trips(samples, duration_min, include_partial=False):
    """Group samples into consecutive fixed windows per vehicle.

    Windows start at each vehicle's first sample; a sample belongs to the
    window containing its start time. Trailing windows that end after the
    vehicle's last sample are dropped unless ``include_partial``.
    """
    width = duration_min * 60.0
    by_vehicle: Dict[str, List[int]] = {}
    for k, s in enumerate(samples):
        by_vehicle.setdefault(s.vehicle_id, []).append(k)
    trips = []
    for vid in sorted(by_vehicle):
        idx = sorted(by_vehicle[vid], key=lambda k: samples[k].start_ts)
        t0 = samples[idx[0]].start_ts
        t_last = max(samples[k].end_ts for k in idx)
        windows: Dict[int, List[int]] = {}
        for k in idx:
            windows.setdefault(int(math.floor((samples[k].start_ts - t0) / width)), []).append(k)
        for w in sorted(windows):
            if include_partial or t0 + (w + 1) * width <= t_last:
                trips.append(windows[w])
    return trips


def predict_trips(predictors, samples, durations=TRIP_DURATIONS_MIN, include_partial=False):
    """Relative error of summed sample predictions over trips of each length.

    ``predictors`` maps a model name to either an array of per-sample
    predictions or a callable taking the sample list. Trips whose actual
    total is zero are excluded from the mean and counted in ``undefined``.
    """
    if callable(predictors) or isinstance(predictors, np.ndarray):
        predictors = {"model": predictors}
    samples = list(samples)
    actual = np.array([s.energy for s in samples], dtype=float)
    preds = {}
    for name, p in predictors.items():
        preds[name] = np.asarray(p(samples) if callable(p) else p, dtype=float)
        if len(preds[name]) != len(samples):
            raise ValueError(f"{name}: {len(preds[name])} predictions for {len(samples)} samples")
    reports = []
    for dur in durations:
        trips = partition_trips(samples, dur, include_partial)
        errs = {name: [] for name in preds}
        undefined = 0
        for idx in trips:
            tot = actual[idx].sum()
            if tot == 0:
                undefined += 1
                continue
            for name, p in preds.items():
                errs[name].append(abs(p[idx].sum() - tot) / abs(tot) * 100.0)
        n = len(trips) - undefined
        reports.append(TripReport(float(dur), {k: float(np.mean(v)) if v else math.nan for k, v in errs.items()},
                                  n, undefined))
    return reports


def write_table(path, header, rows, extra=None):
    """CSV table; ``extra`` columns (e.g. seed, config hash) repeat on every row."""
    extra = extra or {}
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header) + list(extra))
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r] + list(extra.values()))


def trip_rows(reports):
    names = sorted({n for r in reports for n in r.errors})
    header = ["duration_min"] + [f"rel_error_pct_{n}" for n in names] + ["trips", "undefined"]
    rows = [[r.duration_min] + [r.errors.get(n, math.nan) for n in names] + [r.trip_count, r.undefined]
            for r in reports]
    return header, rows
