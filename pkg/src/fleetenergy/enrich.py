"""Elevation, weather and traffic context for samples."""
import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple
from zoneinfo import ZoneInfo

import numpy as np

from .errors import DataError, SchemaError
from .geo import GeoPoint, haversine_m, polyline_length
from .road_network import k_nearest_nodes, path_length, shortest_paths_from
from .sampler import SAMPLE_COLUMNS, Sample

log = logging.getLogger(__name__)

WEATHER_FIELDS = ("T", "H", "V", "W", "P")
K_NEAREST = 4


# --- elevation -------------------------------------------------------------

@dataclass
class DemRaster:
    """Elevation grid; row 0 is the southernmost row.

    ``origin`` is the centre of cell (0, 0) and ``cell_size`` is in degrees.
    """

    origin: GeoPoint
    cell_size: float
    elevations: np.ndarray
    nodata: Optional[float] = None

    def __post_init__(self):
        self.elevations = np.asarray(self.elevations, dtype=float)
        if self.elevations.ndim != 2:
            raise ValueError("elevations must be a 2-D grid")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")

    @property
    def rows(self):
        return self.elevations.shape[0]

    @property
    def cols(self):
        return self.elevations.shape[1]

    def valid_mask(self):
        if self.nodata is None:
            return np.isfinite(self.elevations)
        return np.isfinite(self.elevations) & (self.elevations != self.nodata)

    def contains(self, p):
        fr = (p[0] - self.origin.lat) / self.cell_size
        fc = (p[1] - self.origin.lon) / self.cell_size
        return -0.5 <= fr <= self.rows - 0.5 and -0.5 <= fc <= self.cols - 0.5


def read_esri_ascii(path):
    header = {}
    with Path(path).open() as fh:
        lines = fh.read().split("\n")
    k = 0
    while k < len(lines):
        parts = lines[k].split()
        if len(parts) == 2 and parts[0][0].isalpha():
            header[parts[0].lower()] = float(parts[1])
            k += 1
        else:
            break
    try:
        ncols, nrows, cs = int(header["ncols"]), int(header["nrows"]), header["cellsize"]
    except KeyError as exc:
        raise SchemaError(f"{path}: missing ESRI header field {exc}")
    if "xllcenter" in header:
        x0, y0 = header["xllcenter"], header["yllcenter"]
    else:
        x0, y0 = header["xllcorner"] + cs / 2, header["yllcorner"] + cs / 2
    values = np.array(" ".join(lines[k:]).split(), dtype=float)
    if values.size != nrows * ncols:
        raise SchemaError(f"{path}: expected {nrows * ncols} cells, found {values.size}")
    grid = values.reshape(nrows, ncols)[::-1]  # file rows run north to south
    return DemRaster(GeoPoint(y0, x0), cs, grid, header.get("nodata_value"))


def write_esri_ascii(path, dem: DemRaster):
    cs = dem.cell_size
    lines = [f"ncols {dem.cols}", f"nrows {dem.rows}",
             f"xllcorner {dem.origin.lon - cs / 2!r}", f"yllcorner {dem.origin.lat - cs / 2!r}",
             f"cellsize {cs!r}", f"NODATA_value {dem.nodata if dem.nodata is not None else -9999!r}"]
    for row in dem.elevations[::-1]:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _snap(f, tol=1e-9):
    # degree arithmetic leaves cell centres a few ulps off an integer index
    r = round(f)
    return float(r) if abs(f - r) < tol else f


def elevation_at(dem: DemRaster, p):
    """Bilinear elevation from the four surrounding cell centres.

    If any of the four is nodata, the nearest valid cell's value is returned.
    Points in the outer half-cell border are clamped to the edge centres.
    """
    if not dem.contains(p):
        raise ValueError(f"point {tuple(p)} outside DEM extent")
    fr = min(max(_snap((p[0] - dem.origin.lat) / dem.cell_size), 0.0), dem.rows - 1.0)
    fc = min(max(_snap((p[1] - dem.origin.lon) / dem.cell_size), 0.0), dem.cols - 1.0)
    r0 = min(int(math.floor(fr)), max(dem.rows - 2, 0))
    c0 = min(int(math.floor(fc)), max(dem.cols - 2, 0))
    r1, c1 = min(r0 + 1, dem.rows - 1), min(c0 + 1, dem.cols - 1)
    tr, tc = fr - r0, fc - c0
    valid = dem.valid_mask()
    if not (valid[r0, c0] and valid[r0, c1] and valid[r1, c0] and valid[r1, c1]):
        return _nearest_valid(dem, valid, fr, fc)
    z = dem.elevations
    south = z[r0, c0] * (1 - tc) + z[r0, c1] * tc
    north = z[r1, c0] * (1 - tc) + z[r1, c1] * tc
    return float(south * (1 - tr) + north * tr)


def _nearest_valid(dem, valid, fr, fc):
    rr, cc = np.nonzero(valid)
    if len(rr) == 0:
        raise DataError("DEM has no valid cells")
    d2 = (rr - fr) ** 2 + (cc - fc) ** 2
    k = int(np.argmin(d2))
    return float(dem.elevations[rr[k], cc[k]])


def elevation_delta_checked(s: Sample, dem: DemRaster):
    """``(delta_m, ok)``; ``ok`` is False when an endpoint is off the raster."""
    try:
        return elevation_at(dem, s.end_point) - elevation_at(dem, s.start_point), True
    except ValueError:
        log.warning("sample %s@%s: endpoint outside DEM, elevation change imputed as 0",
                    s.vehicle_id, s.start_ts)
        return 0.0, False


def elevation_delta(s: Sample, dem: DemRaster):
    return elevation_delta_checked(s, dem)[0]


# --- weather ---------------------------------------------------------------

def _bucket(ts, tz):
    dt = datetime.fromtimestamp(ts, tz)
    return dt.weekday(), dt.hour


@dataclass
class HourlyWeatherTable:
    buckets: Dict[str, Dict[Tuple[int, int], np.ndarray]]
    fallback: Dict[str, np.ndarray]
    positions: Dict[str, GeoPoint]
    timezone: str = "UTC"

    def predict(self, station_id, ts):
        dow_hour = _bucket(ts, ZoneInfo(self.timezone))
        vals = self.buckets[station_id].get(dow_hour)
        return self.fallback[station_id] if vals is None else vals


def build_hourly_weather(records, timezone="UTC"):
    """Mean (T, H, V, W, P) per station, weekday and local hour."""
    tz = ZoneInfo(timezone)
    sums: Dict[str, Dict] = {}
    positions = {}
    for r in records:
        key = _bucket(r.timestamp, tz)
        vec = np.array([r.temperature, r.humidity, r.visibility, r.wind_speed, r.precipitation])
        st = sums.setdefault(r.station_id, {})
        acc = st.setdefault(key, [np.zeros(5), 0])
        acc[0] += vec
        acc[1] += 1
        positions.setdefault(r.station_id, r.station_position)
    buckets, fallback = {}, {}
    for sid, st in sums.items():
        buckets[sid] = {k: v[0] / v[1] for k, v in st.items()}
        total = sum(v[0] for v in st.values())
        count = sum(v[1] for v in st.values())
        fallback[sid] = total / count
    return HourlyWeatherTable(buckets, fallback, positions, timezone)


def nearest_station(table: HourlyWeatherTable, p, stations=None):
    stations = table.positions if stations is None else stations
    if not stations:
        raise DataError("no weather stations available")
    best = min((float(haversine_m(p[0], p[1], q[0], q[1])), sid) for sid, q in stations.items())
    return best[1]


def attach_weather(s: Sample, table: HourlyWeatherTable, stations=None):
    """Predicted weather at the station nearest the sample's end point.

    Returns a dict keyed T, H, V, W, P for the end timestamp's bucket.
    """
    sid = nearest_station(table, s.end_point, stations)
    vals = table.predict(sid, s.end_ts)
    return dict(zip(WEATHER_FIELDS, (float(v) for v in vals)))


# --- traffic ---------------------------------------------------------------

@dataclass(frozen=True)
class TmcSegment:
    tmc_id: str
    polyline: Tuple[GeoPoint, ...]

    def __post_init__(self):
        if len(self.polyline) < 2:
            raise ValueError(f"TMC {self.tmc_id}: needs >= 2 points")
        if self.length <= 0:
            raise ValueError(f"TMC {self.tmc_id}: zero length")

    @property
    def length(self):
        return polyline_length(self.polyline)


def read_tmc_csv(path):
    rows: Dict[str, List] = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["tmc_id", "seq", "lat", "lon"]:
            raise SchemaError(f"{path}: expected header tmc_id,seq,lat,lon")
        for r in reader:
            rows.setdefault(r["tmc_id"], []).append((int(r["seq"]), float(r["lat"]), float(r["lon"])))
    return [TmcSegment(tid, tuple(GeoPoint(a, b) for _, a, b in sorted(pts)))
            for tid, pts in sorted(rows.items())]


def write_tmc_csv(path, segments):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tmc_id", "seq", "lat", "lon"])
        for seg in segments:
            for k, q in enumerate(seg.polyline):
                w.writerow([seg.tmc_id, k, repr(q.lat), repr(q.lon)])


def _unique_in_order(items):
    seen, out = set(), []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def best_tmc_path(tmc: TmcSegment, g, k=K_NEAREST):
    """``(edges, length_error)`` for the candidate path closest to the TMC length.

    Candidates are shortest paths between every pair of the k nodes nearest
    the TMC start and the k nodes nearest its end. ``edges`` is None when no
    pair is connected.
    """
    if len(g) == 0:
        raise ValueError("routing graph is empty")
    starts = k_nearest_nodes(g, tmc.polyline[0], k)
    ends = k_nearest_nodes(g, tmc.polyline[-1], k)
    target = tmc.length
    best = None
    for a in starts:
        paths = shortest_paths_from(g, a, ends)
        for b in ends:
            if b not in paths:
                continue
            edges = paths[b]
            err = abs(path_length(edges) - target)
            if best is None or (err, a, b) < best[:3]:
                best = (err, a, b, edges)
    if best is None:
        return None, math.inf
    return best[3], best[0]


def map_tmc_to_osm(tmc: TmcSegment, g, k=K_NEAREST):
    edges, _ = best_tmc_path(tmc, g, k)
    if edges is None:
        return []
    return _unique_in_order(e.feature_id for e in edges)


def build_tmc_mapping(segments, g, k=K_NEAREST):
    """feature_id -> tmc_id; a feature claimed twice keeps the first tmc_id."""
    mapping = {}
    for seg in sorted(segments, key=lambda t: t.tmc_id):
        for fid in map_tmc_to_osm(seg, g, k):
            if fid in mapping:
                log.debug("feature %s already mapped to %s, ignoring %s", fid, mapping[fid], seg.tmc_id)
                continue
            mapping[fid] = seg.tmc_id
    return mapping


def write_mapping_csv(path, mapping):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_id", "tmc_id"])
        for fid in sorted(mapping):
            w.writerow([fid, mapping[fid]])


def read_mapping_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["feature_id", "tmc_id"]:
            raise SchemaError(f"{path}: expected header feature_id,tmc_id")
        return {r["feature_id"]: r["tmc_id"] for r in reader}


@dataclass
class HourlyTrafficTable:
    buckets: Dict[str, Dict[Tuple[int, int], Tuple[float, float]]]
    overall: Dict[str, Tuple[float, float]]
    timezone: str = "UTC"


def build_hourly_traffic(records, timezone="UTC", ratio="mean_of_ratios"):
    """Mean (speed_ratio, jam_factor) per TMC, weekday and local hour.

    ``ratio="mean_of_ratios"`` averages speed/free-flow per record;
    ``"ratio_of_means"`` divides mean speed by mean free-flow speed.
    """
    if ratio not in ("mean_of_ratios", "ratio_of_means"):
        raise ValueError(f"unknown speed-ratio aggregation {ratio!r}")
    tz = ZoneInfo(timezone)
    acc: Dict[str, Dict] = {}
    for r in records:
        key = _bucket(r.timestamp, tz)
        # [sum ratio, sum speed, sum freeflow, sum jam, n]
        a = acc.setdefault(r.tmc_id, {}).setdefault(key, np.zeros(5))
        a += (r.speed / r.free_flow_speed, r.speed, r.free_flow_speed, r.jam_factor, 1.0)

    def reduce(a):
        sr = a[0] / a[4] if ratio == "mean_of_ratios" else a[1] / a[2]
        return float(sr), float(a[3] / a[4])

    buckets = {t: {k: reduce(a) for k, a in b.items()} for t, b in acc.items()}
    overall = {t: reduce(sum(b.values())) for t, b in acc.items()}
    return HourlyTrafficTable(buckets, overall, timezone)


FREE_FLOW = (1.0, 0.0)


def attach_traffic(s: Sample, mapping, table: HourlyTrafficTable):
    """(speed_ratio, jam_factor) for the sample's feature at its end time.

    Unmapped features get free-flow values; a mapped TMC with no history
    in that hour falls back to its all-hours mean.
    """
    tmc = mapping.get(s.feature_id)
    if tmc is None or tmc not in table.overall:
        return FREE_FLOW
    vals = table.buckets[tmc].get(_bucket(s.end_ts, ZoneInfo(table.timezone)))
    return vals if vals is not None else table.overall[tmc]


# --- enriched samples ------------------------------------------------------

@dataclass
class EnrichedSample:
    sample: Sample
    road_type: str
    elevation_delta: Optional[float] = None
    weather: Optional[Dict[str, float]] = None
    speed_ratio: Optional[float] = None
    jam_factor: Optional[float] = None
    flags: List[str] = field(default_factory=list)


def enrich_samples(samples, features_by_id, dem=None, weather=None, mapping=None, traffic=None):
    """Attach every available context group; missing sources leave None."""
    out = []
    for s in samples:
        feat = features_by_id.get(s.feature_id)
        e = EnrichedSample(s, feat.road_type if feat is not None else "unknown")
        if dem is not None:
            e.elevation_delta, ok = elevation_delta_checked(s, dem)
            if not ok:
                e.flags.append("elevation_out_of_bounds")
        if weather is not None:
            e.weather = attach_weather(s, weather)
        if traffic is not None:
            e.speed_ratio, e.jam_factor = attach_traffic(s, mapping or {}, traffic)
        out.append(e)
    return out


ENRICHED_COLUMNS = SAMPLE_COLUMNS + ["road_type", "elevation_delta_m"] + list(WEATHER_FIELDS) + [
    "speed_ratio", "jam_factor"]


def _cell(x):
    return "" if x is None else repr(float(x))


def write_enriched_csv(path, enriched):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENRICHED_COLUMNS)
        for e in enriched:
            s = e.sample
            weather = [e.weather[k] if e.weather else None for k in WEATHER_FIELDS]
            w.writerow([s.vehicle_id, s.feature_id, repr(s.start_ts), repr(s.end_ts),
                        repr(s.start_point.lat), repr(s.start_point.lon),
                        repr(s.end_point.lat), repr(s.end_point.lon),
                        repr(s.distance), repr(s.energy), _cell(s.delta_soc),
                        e.road_type, _cell(e.elevation_delta)]
                       + [_cell(v) for v in weather] + [_cell(e.speed_ratio), _cell(e.jam_factor)])


def read_enriched_csv(path):
    out = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ENRICHED_COLUMNS:
            raise SchemaError(f"{path}: unexpected enriched-sample header")

        def opt(v):
            return float(v) if v != "" else None

        for r in reader:
            s = Sample(r["vehicle_id"], r["feature_id"],
                       GeoPoint(float(r["start_lat"]), float(r["start_lon"])),
                       GeoPoint(float(r["end_lat"]), float(r["end_lon"])),
                       float(r["start_ts"]), float(r["end_ts"]), float(r["energy_j_or_gal"]),
                       opt(r["delta_soc"]), float(r["distance_m"]))
            weather = None if r["T"] == "" else {k: float(r[k]) for k in WEATHER_FIELDS}
            out.append(EnrichedSample(s, r["road_type"], opt(r["elevation_delta_m"]), weather,
                                      opt(r["speed_ratio"]), opt(r["jam_factor"])))
    return out
