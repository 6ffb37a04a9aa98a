"""Fixed-width feature vectors from enriched samples."""
import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from ..enrich import WEATHER_FIELDS
from ..errors import DataError
from ..road_network import ROAD_TYPES, UNKNOWN

TRAFFIC_FIELDS = ("speed_ratio", "jam_factor")
GROUPS = ("distance", "road_type", "elevation", "weather", "traffic")


def road_type_vocabulary(count):
    """Road-type categories for a one-hot block of ``count`` columns.

    The last slot is always "unknown" and absorbs any type not in the block.
    """
    if not 2 <= count <= len(ROAD_TYPES) + 1:
        raise ValueError(f"road_type_count must be in [2, {len(ROAD_TYPES) + 1}]")
    return tuple(ROAD_TYPES[:count - 1]) + (UNKNOWN,)


@dataclass(frozen=True)
class FeatureConfig:
    distance: bool = True
    road_type: bool = True
    elevation: bool = True
    weather: Tuple[str, ...] = WEATHER_FIELDS
    traffic: Tuple[str, ...] = TRAFFIC_FIELDS
    road_type_count: int = 14

    def __post_init__(self):
        object.__setattr__(self, "weather", tuple(w for w in WEATHER_FIELDS if w in self.weather))
        object.__setattr__(self, "traffic", tuple(t for t in TRAFFIC_FIELDS if t in self.traffic))
        if not (self.distance or self.road_type or self.elevation or self.weather or self.traffic):
            raise ValueError("feature config enables no group")
        road_type_vocabulary(self.road_type_count)

    @property
    def dimension(self):
        return (int(self.distance) + (self.road_type_count if self.road_type else 0)
                + int(self.elevation) + len(self.weather) + len(self.traffic))

    def columns(self):
        cols = []
        if self.distance:
            cols.append("distance_m")
        if self.road_type:
            cols += [f"road_{t}" for t in road_type_vocabulary(self.road_type_count)]
        if self.elevation:
            cols.append("elevation_delta_m")
        cols += [f"weather_{w}" for w in self.weather]
        cols += list(self.traffic)
        return cols

    def continuous_mask(self):
        return np.array([not c.startswith("road_") for c in self.columns()])

    def with_groups(self, groups):
        """Copy enabling only the named groups (distance/road_type always as given)."""
        groups = set(groups)
        unknown = groups - set(GROUPS) - set(WEATHER_FIELDS) - set(TRAFFIC_FIELDS)
        if unknown:
            raise ValueError(f"unknown feature groups {sorted(unknown)}")
        weather = WEATHER_FIELDS if "weather" in groups else tuple(w for w in WEATHER_FIELDS if w in groups)
        traffic = TRAFFIC_FIELDS if "traffic" in groups else tuple(t for t in TRAFFIC_FIELDS if t in groups)
        return replace(self, distance="distance" in groups or self.distance,
                       road_type="road_type" in groups or self.road_type,
                       elevation="elevation" in groups, weather=weather, traffic=traffic)

    def to_dict(self):
        return {"distance": self.distance, "road_type": self.road_type, "elevation": self.elevation,
                "weather": list(self.weather), "traffic": list(self.traffic),
                "road_type_count": self.road_type_count}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["weather"] = tuple(d.get("weather", WEATHER_FIELDS))
        d["traffic"] = tuple(d.get("traffic", TRAFFIC_FIELDS))
        return cls(**d)


DIESEL_BEST = FeatureConfig(weather=("T", "V", "P"))
ELECTRIC_BEST = FeatureConfig(weather=WEATHER_FIELDS)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    columns: List[str]
    continuous: np.ndarray
    keys: List[Tuple[str, float]] = field(default_factory=list)  # (vehicle_id, start_ts)

    def __len__(self):
        return len(self.y)

    def take(self, idx):
        idx = np.asarray(idx, dtype=int)
        keys = [self.keys[i] for i in idx] if self.keys else []
        return Dataset(self.X[idx], self.y[idx], self.columns, self.continuous, keys)


def _target(s, target):
    if target == "energy":
        return s.energy
    if target == "delta_soc":
        if s.delta_soc is None:
            raise DataError(f"sample {s.vehicle_id}@{s.start_ts} has no delta_soc")
        return s.delta_soc
    raise ValueError(f"unknown target {target!r}")


def encode(enriched: Sequence, cfg: FeatureConfig, target="energy"):
    """Encode enriched samples; column order follows ``cfg.columns()``."""
    vocab = road_type_vocabulary(cfg.road_type_count)
    slot = {t: k for k, t in enumerate(vocab)}
    rows, ys, keys = [], [], []
    for e in enriched:
        s = e.sample
        name = f"{s.vehicle_id}@{s.start_ts}"
        row = []
        if cfg.distance:
            row.append(s.distance)
        if cfg.road_type:
            onehot = [0.0] * len(vocab)
            onehot[slot.get(e.road_type, slot[UNKNOWN])] = 1.0
            row += onehot
        if cfg.elevation:
            if e.elevation_delta is None:
                raise DataError(f"sample {name}: elevation enabled but not attached")
            row.append(e.elevation_delta)
        if cfg.weather:
            if e.weather is None:
                raise DataError(f"sample {name}: weather enabled but not attached")
            row += [e.weather[w] for w in cfg.weather]
        if cfg.traffic:
            if e.speed_ratio is None:
                raise DataError(f"sample {name}: traffic enabled but not attached")
            vals = {"speed_ratio": e.speed_ratio, "jam_factor": e.jam_factor}
            row += [vals[t] for t in cfg.traffic]
        rows.append(row)
        ys.append(_target(s, target))
        keys.append((s.vehicle_id, s.start_ts))
    X = np.array(rows, dtype=float).reshape(len(rows), cfg.dimension)
    if not np.all(np.isfinite(X)):
        raise DataError("encoded features contain non-finite values")
    return Dataset(X, np.array(ys, dtype=float), cfg.columns(), cfg.continuous_mask(), keys)


class Standardizer:
    """Zero-mean/unit-variance scaling of the continuous columns only."""

    def __init__(self, mean, scale, mask):
        self.mean = np.asarray(mean, dtype=float)
        self.scale = np.asarray(scale, dtype=float)
        self.mask = np.asarray(mask, dtype=bool)

    @classmethod
    def fit(cls, X, mask):
        mask = np.asarray(mask, dtype=bool)
        mean = np.where(mask, X.mean(axis=0), 0.0) if len(X) else np.zeros(X.shape[1])
        std = X.std(axis=0) if len(X) else np.ones(X.shape[1])
        scale = np.where(mask & (std > 0), std, 1.0)
        return cls(mean, scale, mask)

    @classmethod
    def identity(cls, dim):
        return cls(np.zeros(dim), np.ones(dim), np.zeros(dim, dtype=bool))

    def transform(self, X):
        return (X - self.mean) / self.scale

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist(), "mask": self.mask.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["mean"], d["scale"], d["mask"])


def split_indices(n, train_fraction=0.8, seed=0):
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    n_train = math.ceil(train_fraction * n - 1e-9)
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(ds: Dataset, train_fraction=0.8, seed=0):
    tr, te = split_indices(len(ds), train_fraction, seed)
    return ds.take(tr), ds.take(te)


def write_dataset_csv(path, ds: Dataset):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vehicle_id", "start_ts"] + list(ds.columns) + ["target"])
        for k in range(len(ds)):
            vid, ts = ds.keys[k] if ds.keys else ("", float("nan"))
            w.writerow([vid, repr(ts)] + [repr(float(v)) for v in ds.X[k]] + [repr(float(ds.y[k]))])


def read_dataset_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    cols = header[2:-1]
    X = np.array([[float(v) for v in r[2:-1]] for r in rows], dtype=float).reshape(len(rows), len(cols))
    y = np.array([float(r[-1]) for r in rows])
    keys = [(r[0], float(r[1])) for r in rows]
    mask = np.array([not c.startswith("road_") for c in cols])
    return Dataset(X, y, cols, mask, keys)
