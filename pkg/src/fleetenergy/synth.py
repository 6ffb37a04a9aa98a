"""Synthetic stand-ins for fleet telemetry and its map/weather/traffic context.

Everything here is deterministic given a seed. The fleet simulator uses a
simple longitudinal vehicle model so that energy depends on distance, grade,
traffic and temperature in physically sensible directions.
"""
import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from zoneinfo import ZoneInfo

import numpy as np

from .enrich import WEATHER_FIELDS, DemRaster, EnrichedSample, TmcSegment, write_esri_ascii, write_tmc_csv
from .geo import GeoPoint, from_local_xy, to_local_xy
from .ingest import (DIESEL_COLUMNS, ELECTRIC_COLUMNS, TRAFFIC_COLUMNS, WEATHER_COLUMNS,
                     ElectricPayload, TelemetryPoint)
from .road_network import ROAD_TYPES, UNKNOWN, OsmFeature, write_map
from .sampler import Sample, SampleSet

ORIGIN = GeoPoint(35.03, -85.32)
TIMEZONE = "America/New_York"
MINOR_TYPES = ("residential", "tertiary", "service", "unclassified", UNKNOWN, "living_street")


# --- street grid -------------------------------------------------------------

class Grid:
    """Rectangular street grid; one feature per block edge.

    Node (r, c) sits ``r * spacing`` m north and ``c * spacing`` m east of
    ``origin``. Horizontal features are ``h{r}_{c}`` ((r, c) -> (r, c+1)),
    vertical ones ``v{r}_{c}`` ((r, c) -> (r+1, c)). With ``bend_m`` each
    feature gets a midpoint vertex pushed sideways, so polylines have two
    segments.
    """

    def __init__(self, rows=8, cols=8, spacing=200.0, origin=ORIGIN, bend_m=0.0, arterial_every=3):
        self.rows, self.cols, self.spacing = rows, cols, float(spacing)
        self.origin = GeoPoint(*origin)
        self.bend_m = bend_m
        self.features = {}
        self.edge_feature = {}
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    kind = "primary" if r % arterial_every == 0 else MINOR_TYPES[(r + c) % len(MINOR_TYPES)]
                    self._add(f"h{r}_{c}", (r, c), (r, c + 1), kind)
                if r + 1 < rows:
                    kind = "secondary" if c % arterial_every == 0 else MINOR_TYPES[(r * 2 + c) % len(MINOR_TYPES)]
                    self._add(f"v{r}_{c}", (r, c), (r + 1, c), kind)

    def node_xy(self, node):
        return node[1] * self.spacing, node[0] * self.spacing

    def xy_to_geo(self, x, y):
        lat, lon = from_local_xy(x, y, self.origin.lat, self.origin.lon)
        return lat, lon

    def geo_to_xy(self, lat, lon):
        return to_local_xy(lat, lon, self.origin.lat, self.origin.lon)

    def _add(self, fid, a, b, road_type):
        ax, ay = self.node_xy(a)
        bx, by = self.node_xy(b)
        pts = [(ax, ay)]
        if self.bend_m:
            # perpendicular push of the midpoint
            nx, ny = -(by - ay) / self.spacing, (bx - ax) / self.spacing
            pts.append(((ax + bx) / 2 + nx * self.bend_m, (ay + by) / 2 + ny * self.bend_m))
        pts.append((bx, by))
        xy = np.array(pts)
        lat, lon = self.xy_to_geo(xy[:, 0], xy[:, 1])
        feat = OsmFeature(fid, tuple(GeoPoint(float(a_), float(b_)) for a_, b_ in zip(lat, lon)), road_type,
                          oneway=False, tunnel=False)
        self.features[fid] = feat
        self.edge_feature[(a, b)] = (fid, xy)
        self.edge_feature[(b, a)] = (fid, xy[::-1])

    def feature_list(self):
        return [self.features[k] for k in sorted(self.features)]

    def neighbors(self, node):
        r, c = node
        out = []
        for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            q = (r + dr, c + dc)
            if 0 <= q[0] < self.rows and 0 <= q[1] < self.cols:
                out.append(q)
        return out

    def random_walk(self, n_edges, rng, start=None):
        """Node sequence of a walk that never immediately reverses."""
        if start is None:
            start = (int(rng.integers(self.rows)), int(rng.integers(self.cols)))
        nodes = [start]
        prev = None
        for _ in range(n_edges):
            options = [q for q in self.neighbors(nodes[-1]) if q != prev]
            nxt = options[int(rng.integers(len(options)))]
            prev = nodes[-1]
            nodes.append(nxt)
        return nodes

    def walk_polyline(self, nodes):
        """Concatenated xy path and per-piece feature ids for a node walk."""
        xy, owners = [], []
        for a, b in zip(nodes[:-1], nodes[1:]):
            fid, pts = self.edge_feature[(a, b)]
            start = 0 if not xy else 1
            for k in range(start, len(pts)):
                xy.append(pts[k])
            owners += [fid] * (len(pts) - 1)
        return np.array(xy), owners


def sample_along(xy, owners, spacing, offset, n_points):
    """Points every ``spacing`` m along a piecewise-linear path.

    Returns ``(xy_points, owner_ids)`` for at most ``n_points`` positions.
    """
    seg = np.hypot(*np.diff(xy, axis=0).T)
    cum = np.r_[0.0, np.cumsum(seg)]
    s = offset + spacing * np.arange(n_points)
    s = s[s < cum[-1]]
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    t = (s - cum[k]) / seg[k]
    pts = xy[k] + (xy[k + 1] - xy[k]) * t[:, None]
    return pts, [owners[i] for i in k]


def grid_route(grid: Grid, n_points=500, spacing=10.0, seed=0):
    """On-road ground-truth trace: ``(latlon array, feature ids)``.

    Positions start half a spacing into the walk so none lands exactly on a
    junction when the block length is a multiple of the spacing.
    """
    rng = np.random.default_rng(seed)
    n_edges = int(math.ceil((n_points + 1) * spacing / grid.spacing)) + 1
    xy, owners = grid.walk_polyline(grid.random_walk(n_edges, rng))
    pts, truth = sample_along(xy, owners, spacing, spacing / 2, n_points)
    lat, lon = grid.xy_to_geo(pts[:, 0], pts[:, 1])
    return np.column_stack([lat, lon]), truth


# --- battery trace -----------------------------------------------------------

@dataclass(frozen=True)
class PowerProfile:
    """P(t) = base + a1 sin(2 pi t / p1) + a2 sin(2 pi t / p2), in watts."""

    base: float = 60e3
    a1: float = 40e3
    p1: float = 600.0
    a2: float = 25e3
    p2: float = 97.0

    def power(self, t):
        t = np.asarray(t, dtype=float)
        return (self.base + self.a1 * np.sin(2 * np.pi * t / self.p1)
                + self.a2 * np.sin(2 * np.pi * t / self.p2))

    def energy(self, t0, t1):
        """Closed-form integral of the power curve over [t0, t1]."""
        def prim(t):
            return (self.base * t - self.a1 * self.p1 / (2 * np.pi) * np.cos(2 * np.pi * t / self.p1)
                    - self.a2 * self.p2 / (2 * np.pi) * np.cos(2 * np.pi * t / self.p2))
        return float(prim(t1) - prim(t0))


def battery_trace(profile=PowerProfile(), duration_s=3600.0, rate_hz=1.0, capacity_j=1.8e9,
                  t0=0.0, vehicle_id="ev-sim", position=ORIGIN, soc0=90.0):
    """Electric telemetry whose current*voltage follows ``profile``.

    Voltage sags linearly; SoC tracks the exact integral, rounded to one
    decimal as in real logs.
    """
    n = int(round(duration_s * rate_hz)) + 1
    t = t0 + np.arange(n) / rate_hz
    volts = 640.0 - 30.0 * (t - t0) / max(duration_s, 1.0)
    power = profile.power(t - t0)
    amps = power / volts
    pts = []
    for k in range(n):
        used = profile.energy(0.0, t[k] - t0)
        soc = round(max(soc0 - 100.0 * used / capacity_j, 0.0), 1)
        pts.append(TelemetryPoint(vehicle_id, float(t[k]), GeoPoint(*position),
                                  ElectricPayload(float(amps[k]), float(volts[k]), soc, False)))
    return pts


# --- fleet fixture -----------------------------------------------------------

def dem_height(x, y, spacing_total):
    """Terrain in meters over local xy: a ramp plus one hill."""
    c = spacing_total / 2
    return 200.0 + 0.02 * y - 0.01 * x + 35.0 * np.exp(-((x - c) ** 2 + (y - c * 0.8) ** 2) / (2 * 450.0 ** 2))


def make_dem(grid: Grid, cell_deg=0.0005, margin_m=600.0, nodata_cells=3, seed=0):
    ext = grid.spacing * (max(grid.rows, grid.cols) - 1)
    lat_lo, lon_lo = grid.xy_to_geo(-margin_m, -margin_m)
    lat_hi, lon_hi = grid.xy_to_geo(ext + margin_m, ext + margin_m)
    rows = int(math.ceil((lat_hi - lat_lo) / cell_deg)) + 1
    cols = int(math.ceil((lon_hi - lon_lo) / cell_deg)) + 1
    lat = lat_lo + cell_deg * np.arange(rows)
    lon = lon_lo + cell_deg * np.arange(cols)
    LON, LAT = np.meshgrid(lon, lat)
    x, y = grid.geo_to_xy(LAT, LON)
    z = np.round(dem_height(x, y, ext), 3)
    rng = np.random.default_rng(seed)
    # a few holes near the edge, away from the streets
    for _ in range(nodata_cells):
        z[int(rng.integers(0, 2)), int(rng.integers(0, cols))] = -9999.0
    return DemRaster(GeoPoint(float(lat_lo), float(lon_lo)), cell_deg, z, -9999.0)


def traffic_ratio(tmc_index, dow, hour):
    """Deterministic speed ratio pattern with weekday rush hours."""
    rush = dow < 5 and (7 <= hour <= 8 or 16 <= hour <= 18)
    base = 0.55 if rush else 0.92
    return float(np.clip(base - 0.04 * (tmc_index % 3) + 0.02 * math.sin(hour + tmc_index), 0.2, 1.2))


def make_tmcs(grid: Grid, blocks=3, arterial_every=3):
    """TMC segments along the arterial rows, ``blocks`` grid edges each.

    Geometry runs 6 m north of the centre line, as a carriageway would.
    """
    segs = []
    for r in range(0, grid.rows, arterial_every):
        for c0 in range(0, grid.cols - 1, blocks):
            c1 = min(c0 + blocks, grid.cols - 1)
            if c1 == c0:
                continue
            xs = np.array([c * grid.spacing for c in range(c0, c1 + 1)])
            ys = np.full(len(xs), r * grid.spacing + 6.0)
            lat, lon = grid.xy_to_geo(xs, ys)
            segs.append(TmcSegment(f"tmc{r:02d}{c0:02d}", tuple(GeoPoint(float(a), float(b))
                                                              for a, b in zip(lat, lon))))
    return segs


def _local_parts(ts, tz):
    dt = datetime.fromtimestamp(ts, tz)
    return dt.weekday(), dt.hour


def make_traffic_records(tmcs, t_start, t_end, seed=0, tz=TIMEZONE):
    rng = np.random.default_rng(seed)
    zone = ZoneInfo(tz)
    rows = []
    for k, seg in enumerate(tmcs):
        for ts in np.arange(t_start, t_end, 900.0):
            dow, hour = _local_parts(float(ts), zone)
            ratio = max(traffic_ratio(k, dow, hour) + rng.normal(0, 0.03), 0.05)
            ff = 50.0
            jam = float(np.clip(10.0 * (1.0 - ratio) * 0.9 + rng.normal(0, 0.2), 0.0, 10.0))
            rows.append((seg.tmc_id, float(ts), round(ff * ratio, 3), ff, round(jam, 3)))
    return rows


def weather_at(ts, station_k, rng, tz):
    dow, hour = _local_parts(ts, tz)
    temp = 14.0 + 8.0 * math.sin(2 * math.pi * (hour - 9) / 24) + 1.5 * station_k + rng.normal(0, 0.8)
    hum = float(np.clip(70.0 - 20.0 * math.sin(2 * math.pi * (hour - 9) / 24) + rng.normal(0, 4), 5, 100))
    precip = max(0.0, rng.normal(0.0, 0.4)) if hour % 7 == 0 else 0.0
    vis = float(np.clip(10.0 - 3.0 * precip + rng.normal(0, 0.3), 0.5, 10.0))
    wind = abs(3.0 + 2.0 * math.sin(hour / 3.0) + rng.normal(0, 0.7))
    return temp, hum, vis, wind, precip


def make_weather_records(grid: Grid, t_start, t_end, seed=0, tz=TIMEZONE):
    rng = np.random.default_rng(seed)
    zone = ZoneInfo(tz)
    ext = grid.spacing * (grid.cols - 1)
    stations = [("KCHA", -800.0, -500.0), ("KDNN", ext + 900.0, ext * 0.5), ("KEST", ext * 0.4, ext + 1200.0)]
    rows = []
    for k, (sid, x, y) in enumerate(stations):
        lat, lon = grid.xy_to_geo(x, y)
        for ts in np.arange(t_start, t_end, 3600.0):
            t, h, v, w, p = weather_at(float(ts), k, rng, zone)
            rows.append((sid, float(ts), float(lat), float(lon), round(t, 2), round(h, 1), round(v, 2),
                         round(w, 2), round(p, 3)))
    return rows


@dataclass
class VehicleModel:
    mass_kg: float = 14000.0
    crr: float = 0.008
    cda: float = 6.0
    drive_eff: float = 0.85
    regen_eff: float = 0.6
    aux_w: float = 7000.0
    hvac_w_per_deg: float = 450.0
    diesel_j_per_gal: float = 1.38e8
    engine_eff: float = 0.33
    idle_w: float = 9000.0


FREE_FLOW_KMH = {"primary": 50.0, "secondary": 45.0}


def _wheel_power(vm, v, a, grade):
    return vm.mass_kg * v * (a + 9.81 * (vm.crr + grade)) + 0.5 * 1.2 * vm.cda * v ** 3


def simulate_vehicle(grid: Grid, kind, vehicle_id, t0, duration_s, rng, tmc_of_feature, tmc_index,
                     garage_xy, dem_fn, temp_fn, tz, gps_sigma=4.0, vm=VehicleModel(),
                     dwell_s=240.0, capacity_j=1.8e9, dropout=True, fuel_glitch=True):
    """1 Hz telemetry rows for one bus: garage dwell, then street driving."""
    zone = ZoneInfo(tz)
    start_node = (0, 0)
    gx, gy = garage_xy
    sx, sy = grid.node_xy(start_node)
    walk = grid.random_walk(int(duration_s * 16 / grid.spacing) + 4, rng, start=start_node)
    path, owners = grid.walk_polyline(walk)
    path = np.vstack([[gx, gy], path])
    owners = [None] + owners
    seg = np.hypot(*np.diff(path, axis=0).T)
    cum = np.r_[0.0, np.cumsum(seg)]
    # bus stops at every other junction
    stops = set(float(cum[k]) for k in range(2, len(cum) - 1, 2))
    stop_list = sorted(stops)

    rows = []
    soc = 92.0 if kind == "electric" else None
    fuel_total, fuel_level = 1500.0 + rng.uniform(0, 50), 120.0
    s_pos, v, t = 0.0, 0.0, float(t0)
    dwell_left = 0.0
    next_stop = 0
    z_prev = dem_fn(gx, gy)
    dropout_at = t0 + dwell_s + duration_s * 0.5 if dropout else None
    glitch_at = t0 + dwell_s + duration_s * 0.3 if fuel_glitch else None
    end_t = t0 + dwell_s + duration_s
    while t <= end_t and s_pos < cum[-1] - 1.0:
        in_garage = t < t0 + dwell_s
        if in_garage:
            a, v_new = 0.0, 0.0
        else:
            k = min(int(np.searchsorted(cum, s_pos, side="right") - 1), len(seg) - 1)
            fid = owners[k]
            dow, hour = _local_parts(t, zone)
            ff = FREE_FLOW_KMH.get(grid.features[fid].road_type, 35.0) if fid else 20.0
            ratio = traffic_ratio(tmc_index[tmc_of_feature[fid]], dow, hour) if fid in tmc_of_feature else 1.0
            v_target = ff / 3.6 * min(ratio, 1.0)
            while next_stop < len(stop_list) and stop_list[next_stop] < s_pos - 0.5:
                next_stop += 1
            if dwell_left > 0:
                v_target = 0.0
                dwell_left -= 1.0
            elif next_stop < len(stop_list):
                gap = stop_list[next_stop] - s_pos
                if gap < 0.5 and v < 0.5:
                    dwell_left = float(rng.integers(10, 30))
                    next_stop += 1
                    v_target = 0.0
                else:
                    v_target = min(v_target, math.sqrt(max(2 * 1.2 * max(gap, 0.0), 0.0)))
            a = float(np.clip(v_target - v, -1.5, 1.0))
            v_new = max(v + a, 0.0)
            s_pos += (v + v_new) / 2
        v = v_new
        s_here = min(s_pos, cum[-1])
        k = min(int(np.searchsorted(cum, s_here, side="right") - 1), len(seg) - 1)
        frac = (s_here - cum[k]) / seg[k] if seg[k] > 0 else 0.0
        x, y = path[k] + (path[k + 1] - path[k]) * frac
        z = dem_fn(x, y)
        grade = (z - z_prev) / max(v, 0.1) if v > 0.1 else 0.0
        grade = float(np.clip(grade, -0.15, 0.15))
        z_prev = z
        temp = temp_fn(t)
        p_wheel = _wheel_power(vm, v, a, grade) if v > 0 else 0.0
        aux = vm.aux_w + vm.hvac_w_per_deg * abs(temp - 20.0)
        nx, ny = rng.normal(0, gps_sigma, size=2)
        lat, lon = grid.xy_to_geo(x + nx, y + ny)
        skip = dropout_at is not None and dropout_at <= t < dropout_at + 90
        if kind == "electric":
            if in_garage:
                p_batt = -50000.0  # charging
            else:
                p_batt = (p_wheel / vm.drive_eff if p_wheel > 0 else p_wheel * vm.regen_eff) + aux
            volts = 640.0 - 0.00008 * p_batt + rng.normal(0, 0.5)
            amps = p_batt / volts
            soc = min(max(soc - 100.0 * p_batt / capacity_j, 0.0), 100.0)
            if not skip:
                rows.append((vehicle_id, t, float(lat), float(lon), round(amps, 4), round(volts, 3),
                             round(soc, 1), 1 if in_garage else 0))
        else:
            p_fuel = (max(p_wheel, 0.0) / vm.engine_eff if v > 0 else 0.0) + vm.idle_w + aux
            burn = p_fuel / vm.diesel_j_per_gal
            fuel_total += burn
            fuel_level -= burn
            reported = fuel_total
            if glitch_at is not None and glitch_at <= t < glitch_at + 1:
                reported = fuel_total - 0.05  # counter glitch
            if not skip:
                rows.append((vehicle_id, t, float(lat), float(lon), round(fuel_level, 6), round(reported, 6)))
        t += 1.0
    return rows


def _write_csv(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def synthetic_fleet(out_dir, seed=0, n_electric=2, n_diesel=2, hours=1.0, grid_size=8, spacing=200.0,
                    start="2020-03-02T06:30:00"):
    """Write a complete fixture (map, DEM, weather, traffic, telemetry, config).

    Returns the path of the generated ``config.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    zone = ZoneInfo(TIMEZONE)
    grid = Grid(grid_size, grid_size, spacing, bend_m=4.0)
    write_map(out / "map.geojson", grid.feature_list())
    dem = make_dem(grid, seed=seed)
    write_esri_ascii(out / "dem.asc", dem)
    ext = grid.spacing * (grid_size - 1)

    def dem_fn(x, y):
        return float(dem_height(x, y, ext))

    t_start = datetime.fromisoformat(start).replace(tzinfo=zone).timestamp()
    t_hist0, t_hist1 = t_start - 14 * 86400, t_start + 2 * 86400
    tmcs = make_tmcs(grid)
    write_tmc_csv(out / "tmc.csv", tmcs)
    tmc_index = {s.tmc_id: k for k, s in enumerate(tmcs)}
    tmc_of_feature = {}
    for s in tmcs:
        r = int(s.tmc_id[3:5]); c0 = int(s.tmc_id[5:7])
        for c in range(c0, min(c0 + 3, grid.cols - 1)):
            tmc_of_feature[f"h{r}_{c}"] = s.tmc_id
    _write_csv(out / "traffic.csv", TRAFFIC_COLUMNS, make_traffic_records(tmcs, t_hist0, t_hist1, seed, TIMEZONE))
    _write_csv(out / "weather.csv", WEATHER_COLUMNS, make_weather_records(grid, t_hist0, t_hist1, seed, TIMEZONE))

    def temp_fn(ts):
        _, hour = _local_parts(ts, zone)
        return 14.0 + 8.0 * math.sin(2 * math.pi * (hour - 9) / 24)

    garage_xy = (-150.0, -150.0)
    ring = [(-230.0, -230.0), (-70.0, -230.0), (-70.0, -70.0), (-230.0, -70.0)]
    garage = [list(map(float, grid.xy_to_geo(x, y))) for x, y in ring]

    files = {}
    for kind, count, cols in (("electric", n_electric, ELECTRIC_COLUMNS), ("diesel", n_diesel, DIESEL_COLUMNS)):
        rows = []
        for k in range(count):
            vid = f"{kind[0]}{k + 1:02d}"
            t0 = t_start + 1800.0 * k
            rows += simulate_vehicle(grid, kind, vid, t0, hours * 3600.0, rng, tmc_of_feature, tmc_index,
                                     garage_xy, dem_fn, temp_fn, TIMEZONE)
        if count:
            name = f"telemetry_{kind}.csv"
            _write_csv(out / name, cols, rows)
            files[kind] = name

    config = {
        "paths": {"telemetry_electric": files.get("electric"), "telemetry_diesel": files.get("diesel"),
                  "map": "map.geojson", "dem": "dem.asc", "weather": "weather.csv",
                  "traffic": "traffic.csv", "tmc": "tmc.csv"},
        "garage_polygon": garage,
        "humidity_convention": "percent",
        "clamp_negative_fuel": True,
        "timezone": TIMEZONE,
        "seed": seed,
    }
    path = out / "config.json"
    path.write_text(json.dumps(config, indent=2, sort_keys=True))
    return path


# --- samples and planted datasets ---------------------------------------------

def synthetic_sample_series(n_vehicles=10, hours=12.0, seed=0, mean_energy=4e5, vehicle_prefix="v"):
    """Back-to-back samples of 20-90 s per vehicle with positive energies."""
    rng = np.random.default_rng(seed)
    samples = []
    for k in range(n_vehicles):
        t = 1.6e9 + 3600.0 * k
        t_end = t + hours * 3600.0
        while t < t_end:
            dur = float(rng.uniform(20, 90))
            e = float(mean_energy * dur / 55.0 * rng.lognormal(0.0, 0.3))
            samples.append(Sample(f"{vehicle_prefix}{k:03d}", f"f{int(rng.integers(200))}",
                                  ORIGIN, ORIGIN, t, t + dur, e, None, 11.0 * dur))
            t += dur + 1.0
    return SampleSet(samples, {})


def planted_enriched(n=400, signal="elevation", seed=0, noise=0.05):
    """Random enriched samples whose target depends on one planted signal.

    ``signal``: "elevation" (target = elevation change only), "linear" (a
    linear function of all continuous inputs), or "piecewise"
    (step function of distance and road type).
    """
    rng = np.random.default_rng(seed)
    out = []
    types = ROAD_TYPES[:6] + (UNKNOWN,)
    for k in range(n):
        dist = float(rng.uniform(20, 400))
        elev = float(rng.normal(0, 5))
        weather = {w: float(v) for w, v in zip(WEATHER_FIELDS, rng.normal([15, 0.6, 9, 4, 0.1], [6, 0.15, 1, 2, 0.2]))}
        sr, jam = float(rng.uniform(0.3, 1.1)), float(rng.uniform(0, 8))
        rt = types[int(rng.integers(len(types)))]
        if signal == "elevation":
            y = 3.0 * elev
        elif signal == "linear":
            y = (0.05 * dist + 2.0 * elev + 0.3 * weather["T"] - 4.0 * weather["H"] + 0.5 * weather["V"]
                 + 0.2 * weather["W"] + 1.5 * weather["P"] - 6.0 * sr + 0.4 * jam + 3.0)
        elif signal == "piecewise":
            y = (10.0 if dist > 200 else 2.0) + (5.0 if rt == "primary" else 0.0)
        else:
            raise ValueError(f"unknown planted signal {signal!r}")
        if signal != "piecewise":
            y += float(rng.normal(0, noise))
        s = Sample("p00", f"f{k}", ORIGIN, ORIGIN, float(k * 100), float(k * 100 + 50), y, None, dist)
        out.append(EnrichedSample(s, rt, elev, weather, sr, jam))
    return out
