"""Per-road-segment samples from matched telemetry."""
import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import SchemaError
from .geo import GeoPoint, as_latlon_array, segment_distances_xy, to_local_xy

DEFAULT_GAP_S = 60.0
DEFAULT_MIN_DELTA_SOC = -0.2
# Battery capacity used to express energy as SoC points; per-vehicle override via config.
DEFAULT_CAPACITY_J = 1.8e9

SAMPLE_COLUMNS = ["vehicle_id", "feature_id", "start_ts", "end_ts", "start_lat", "start_lon",
                  "end_lat", "end_lon", "distance_m", "energy_j_or_gal", "delta_soc"]


@dataclass(frozen=True)
class Sample:
    vehicle_id: str
    feature_id: str
    start_point: GeoPoint
    end_point: GeoPoint
    start_ts: float
    end_ts: float
    energy: float
    delta_soc: Optional[float] = None  # SoC percentage points consumed (electric only)
    distance: float = 0.0

    @property
    def duration(self):
        return self.end_ts - self.start_ts


@dataclass
class SampleSet:
    samples: List[Sample]
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def _interval_values(energies, n_points):
    vals = getattr(energies, "values", None)
    if vals is None:
        items = list(energies)
        vals = [v[1] if isinstance(v, tuple) else v for v in items]
    vals = np.asarray(vals, dtype=float)
    if len(vals) != max(n_points - 1, 0):
        raise ValueError(f"{len(vals)} interval values for {n_points} points")
    return vals


def segment_samples(points, assignments, energies, gap_threshold=DEFAULT_GAP_S,
                    capacity_j=None, features=None):
    """Cut one vehicle's matched series into samples.

    A sample is a maximal run of consecutive points matched to the same
    feature with no time gap above ``gap_threshold``; its energy is the sum of
    the intervals strictly inside the run. Intervals that straddle two runs,
    touch an unmatched point, or span a gap are excluded and tallied in the
    provenance. ``capacity_j`` (electric) fills ``delta_soc``; ``features``
    (id -> OsmFeature) fills ``distance`` via :func:`travel_distance`.
    """
    n = len(points)
    if len(assignments) != n:
        raise ValueError("points and assignments differ in length")
    vals = _interval_values(energies, n)
    ts = np.array([p.timestamp for p in points], dtype=float)
    samples = []
    used = np.zeros(len(vals), dtype=bool)
    short = 0
    i = 0
    while i < n:
        fid = assignments[i]
        if fid is None:
            i += 1
            continue
        j = i
        while j + 1 < n and assignments[j + 1] == fid and ts[j + 1] - ts[j] <= gap_threshold:
            j += 1
        if j == i:
            short += 1
        else:
            energy = float(vals[i:j].sum())
            used[i:j] = True
            soc = 100.0 * energy / capacity_j if capacity_j else None
            s = Sample(points[i].vehicle_id, fid, points[i].position, points[j].position,
                       float(ts[i]), float(ts[j]), energy, soc)
            if features is not None and fid in features:
                s = replace(s, distance=travel_distance(s, features[fid]))
            samples.append(s)
        i = j + 1
    prov = {
        "points": n,
        "samples": len(samples),
        "short_runs_dropped": short,
        "intervals_excluded": int((~used).sum()),
        "excluded_energy": float(vals[~used].sum()),
        "total_energy": float(vals.sum()),
    }
    return SampleSet(samples, prov)


def merge_sample_sets(sets):
    samples = sorted((s for ss in sets for s in ss.samples), key=lambda s: (s.vehicle_id, s.start_ts))
    prov = {}
    for ss in sets:
        for k, v in ss.provenance.items():
            prov[k] = prov.get(k, 0) + v
    return SampleSet(samples, prov)


def travel_distance(s: Sample, feature):
    """Distance (m) driven along ``feature`` between the sample's end points.

    The segments nearest the start and end locate the partial first and last
    pieces; whole segments in between count at full length. When both ends
    sit on the same segment the straight-line distance is used.
    """
    return _travel_distance(s.start_point, s.end_point, feature.coords)


def _travel_distance(loc_s, loc_e, coords):
    coords = as_latlon_array(coords)
    lat0 = (loc_s[0] + loc_e[0]) / 2
    lon0 = (loc_s[1] + loc_e[1]) / 2
    vx, vy = to_local_xy(coords[:, 0], coords[:, 1], lat0, lon0)
    sx, sy = to_local_xy(loc_s[0], loc_s[1], lat0, lon0)
    ex, ey = to_local_xy(loc_e[0], loc_e[1], lat0, lon0)
    ax, ay, bx, by = vx[:-1], vy[:-1], vx[1:], vy[1:]
    idx_s = int(np.argmin(segment_distances_xy(sx, sy, ax, ay, bx, by)))
    idx_e = int(np.argmin(segment_distances_xy(ex, ey, ax, ay, bx, by)))
    seg_len = np.hypot(bx - ax, by - ay)
    if idx_s == idx_e:
        return float(math.hypot(ex - sx, ey - sy))
    if idx_s > idx_e:
        idx_s, idx_e = idx_e, idx_s
        sx, sy, ex, ey = ex, ey, sx, sy
    l1 = math.hypot(bx[idx_s] - sx, by[idx_s] - sy)
    l2 = float(seg_len[idx_s + 1:idx_e].sum())
    l3 = math.hypot(ex - ax[idx_e], ey - ay[idx_e])
    return float(l1 + l2 + l3)


def filter_erroneous(samples: SampleSet, min_delta_soc=DEFAULT_MIN_DELTA_SOC):
    """Drop electric samples whose SoC consumption is implausibly negative.

    Samples without ``delta_soc`` (diesel) pass through untouched.
    """
    kept = [s for s in samples.samples if s.delta_soc is None or s.delta_soc >= min_delta_soc]
    prov = dict(samples.provenance)
    prov["erroneous_removed"] = prov.get("erroneous_removed", 0) + len(samples.samples) - len(kept)
    return SampleSet(kept, prov)


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_samples_csv(path, samples):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SAMPLE_COLUMNS)
        for s in samples:
            w.writerow([s.vehicle_id, s.feature_id, repr(s.start_ts), repr(s.end_ts),
                        repr(s.start_point.lat), repr(s.start_point.lon),
                        repr(s.end_point.lat), repr(s.end_point.lon),
                        repr(s.distance), repr(s.energy), _fmt(s.delta_soc)])


def read_samples_csv(path):
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SAMPLE_COLUMNS:
            raise SchemaError(f"{path}: unexpected sample header {reader.fieldnames}")
        for r in reader:
            out.append(Sample(
                r["vehicle_id"], r["feature_id"],
                GeoPoint(float(r["start_lat"]), float(r["start_lon"])),
                GeoPoint(float(r["end_lat"]), float(r["end_lon"])),
                float(r["start_ts"]), float(r["end_ts"]), float(r["energy_j_or_gal"]),
                float(r["delta_soc"]) if r["delta_soc"] else None, float(r["distance_m"])))
    return out
