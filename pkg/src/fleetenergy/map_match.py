"""Windowed frequency-vote map matching and its noise benchmark."""
import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import SchemaError
from .geo import EARTH_RADIUS_M, as_latlon_array

DEFAULT_WINDOW = 10
DEFAULT_RADIUS_M = 25.0


@dataclass
class MatchResult:
    assignments: List[Optional[str]]  # None marks an unmatched location
    window: int
    radius: float

    def __len__(self):
        return len(self.assignments)

    @property
    def matched_fraction(self):
        if not self.assignments:
            return 0.0
        return sum(a is not None for a in self.assignments) / len(self.assignments)


def vote(nearby, window):
    """Assign each location the feature seen most often in its window.

    ``nearby[i]`` is a list of ``(feature_id, distance)`` for location i.
    A candidate's score is how many locations in ``[i - window, i + window]``
    list it; ties go to the smaller mean distance over those locations, then
    to the smaller feature id.
    """
    n = len(nearby)
    lookup = [dict(row) for row in nearby]
    out: List[Optional[str]] = [None] * n
    for i in range(n):
        if not nearby[i]:
            continue
        lo, hi = max(0, i - window), min(n - 1, i + window)
        best = None
        for fid, _ in nearby[i]:
            count, dsum = 0, 0.0
            for j in range(lo, hi + 1):
                d = lookup[j].get(fid)
                if d is not None:
                    count += 1
                    dsum += d
            key = (-count, dsum / count, fid)
            if best is None or key < best:
                best = key
        out[i] = best[2]
    return out


def match_locations(locations, index, window=DEFAULT_WINDOW, radius=DEFAULT_RADIUS_M):
    if window < 0:
        raise ValueError("window must be >= 0")
    if radius <= 0:
        raise ValueError("radius must be positive")
    nearby = index.distances_many(locations, radius)
    return MatchResult(vote(nearby, window), window, radius)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def add_gaussian_noise(locations, spec: NoiseSpec, rng=None):
    """Displace each point by N(0, sigma^2) meters east and north.

    Offsets convert to degrees at each point's own latitude. Pass ``rng`` to
    draw from an existing generator instead of ``spec.seed``.
    """
    pts = as_latlon_array(locations) if len(locations) else np.empty((0, 2))
    if spec.sigma == 0 or len(pts) == 0:
        return pts.copy()
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    east, north = rng.normal(0.0, spec.sigma, size=(2, len(pts)))
    lat = pts[:, 0] + np.degrees(north / EARTH_RADIUS_M)
    lon = pts[:, 1] + np.degrees(east / (EARTH_RADIUS_M * np.cos(np.radians(pts[:, 0]))))
    return np.column_stack([lat, lon])


def matching_accuracy(truth: Sequence, predicted):
    pred = predicted.assignments if isinstance(predicted, MatchResult) else list(predicted)
    if len(truth) != len(pred):
        raise ValueError(f"length mismatch: {len(truth)} truth vs {len(pred)} predicted")
    if not truth:
        return 0.0
    hits = sum(1 for t, p in zip(truth, pred) if p is not None and p == t)
    return 100.0 * hits / len(truth)


def trial_seed(seed, sigma_idx, trial):
    return int(np.random.SeedSequence([seed, sigma_idx, trial]).generate_state(1)[0])


def noise_sweep(routes, index, sigmas, trials=20, window=DEFAULT_WINDOW,
                radius=DEFAULT_RADIUS_M, seed=0):
    """Mean matching accuracy per noise level.

    ``routes`` is a list of ``(locations, truth)`` ground-truth traces; each
    trial perturbs every route with its own seed and pools the locations.
    Returns rows of ``(sigma, mean_accuracy_pct, trials, per_trial_accuracies)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for si, sigma in enumerate(sigmas):
        accs = []
        for t in range(trials):
            hits = total = 0
            for k, (trace, truth) in enumerate(routes):
                noisy = add_gaussian_noise(trace, NoiseSpec(float(sigma), trial_seed(seed, si, t) + k))
                res = match_locations(noisy, index, window, radius)
                hits += sum(1 for a, b in zip(res.assignments, truth) if a is not None and a == b)
                total += len(truth)
            accs.append(100.0 * hits / total)
        rows.append((float(sigma), float(np.mean(accs)), trials, accs))
    return rows


def write_sweep_csv(path, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sigma_m", "mean_accuracy_pct", "trials"])
        for sigma, acc, trials, _ in rows:
            w.writerow([repr(sigma), repr(acc), trials])


def read_route_csv(path):
    """Ground-truth route file: ``lat,lon,feature_id`` per on-road location."""
    locs, truth = [], []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["lat", "lon", "feature_id"]:
            raise SchemaError(f"{path}: expected header lat,lon,feature_id")
        for row in reader:
            locs.append((float(row["lat"]), float(row["lon"])))
            truth.append(row["feature_id"])
    return np.asarray(locs), truth


def write_route_csv(path, locations, truth):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lat", "lon", "feature_id"])
        for (lat, lon), fid in zip(locations, truth):
            w.writerow([repr(float(lat)), repr(float(lon)), fid])
