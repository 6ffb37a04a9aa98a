"""Telemetry, weather and traffic ingestion plus per-interval energy accounting."""
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import DataError, SchemaError
from .geo import GeoPoint, is_simple_ring, point_in_polygon, valid_latlon

log = logging.getLogger(__name__)

ELECTRIC_COLUMNS = ["vehicle_id", "timestamp", "lat", "lon", "current_a", "voltage_v", "soc_pct", "cable"]
DIESEL_COLUMNS = ["vehicle_id", "timestamp", "lat", "lon", "fuel_level_gal", "total_fuel_gal"]
WEATHER_COLUMNS = ["station_id", "timestamp", "lat", "lon", "temp", "humidity", "visibility", "wind_speed", "precip"]
TRAFFIC_COLUMNS = ["tmc_id", "timestamp", "speed_kmh", "freeflow_kmh", "jam_factor"]


@dataclass(frozen=True)
class ElectricPayload:
    current: float
    voltage: float
    soc: float
    cable_connected: bool


@dataclass(frozen=True)
class DieselPayload:
    fuel_level: float
    total_fuel_used: float


@dataclass(frozen=True)
class TelemetryPoint:
    vehicle_id: str
    timestamp: float
    position: GeoPoint
    payload: Union[ElectricPayload, DieselPayload]

    @property
    def is_electric(self):
        return isinstance(self.payload, ElectricPayload)


@dataclass(frozen=True)
class WeatherRecord:
    station_id: str
    timestamp: float
    temperature: float
    humidity: float
    visibility: float
    wind_speed: float
    precipitation: float
    station_position: GeoPoint


@dataclass(frozen=True)
class TrafficRecord:
    tmc_id: str
    timestamp: float
    speed: float
    free_flow_speed: float
    jam_factor: float


@dataclass(frozen=True)
class GarageZone:
    polygon: Tuple[GeoPoint, ...]

    def __post_init__(self):
        ring = [tuple(v) for v in self.polygon]
        if len(ring) > 1 and ring[0] == ring[-1]:
            ring = ring[:-1]
        if len(ring) < 3:
            raise ValueError("garage polygon needs at least 3 vertices")
        if not is_simple_ring(ring):
            raise ValueError("garage polygon is self-intersecting")

    @classmethod
    def from_vertices(cls, vertices):
        return cls(tuple(GeoPoint(float(a), float(b)) for a, b in vertices))

    def contains(self, positions):
        return point_in_polygon(positions, self.polygon)


@dataclass
class ParseResult:
    """Parsed records plus bookkeeping about rejected rows."""

    records: list
    n_rows: int
    rejects: List[Tuple[int, str]] = field(default_factory=list)

    @property
    def n_rejected(self):
        return len(self.rejects)

    # telemetry callers read `.points`
    @property
    def points(self):
        return self.records


def _read_rows(path, expected):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {expected}")
        header = [h.strip() for h in header]
        if header != expected:
            raise SchemaError(f"{path}: header {header} does not match {expected}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            yield lineno, row


def _finite(value, name):
    x = float(value)
    if not math.isfinite(x):
        raise ValueError(f"{name} is not finite")
    return x


def _position(lat, lon):
    lat = _finite(lat, "lat")
    lon = _finite(lon, "lon")
    if not valid_latlon(lat, lon):
        raise ValueError(f"position out of range ({lat}, {lon})")
    return GeoPoint(lat, lon)


def _telemetry_row(row, kind):
    vid = row[0].strip()
    if not vid:
        raise ValueError("empty vehicle_id")
    ts = _finite(row[1], "timestamp")
    pos = _position(row[2], row[3])
    if kind == "electric":
        soc = _finite(row[6], "soc_pct")
        if not 0.0 <= soc <= 100.0:
            raise ValueError(f"soc {soc} outside [0, 100]")
        cable = row[7].strip()
        if cable not in ("0", "1"):
            raise ValueError(f"cable flag {cable!r} not in {{0, 1}}")
        payload = ElectricPayload(_finite(row[4], "current_a"), _finite(row[5], "voltage_v"), soc, cable == "1")
    else:
        payload = DieselPayload(_finite(row[4], "fuel_level_gal"), _finite(row[5], "total_fuel_gal"))
    return TelemetryPoint(vid, ts, pos, payload)


def parse_telemetry(path, vehicle_kind):
    """Read an electric or diesel telemetry CSV.

    Malformed rows are skipped and listed in ``rejects``; a header mismatch
    raises :class:`SchemaError`. Points come back grouped by vehicle and
    sorted by timestamp, with duplicate timestamps collapsed to the last row.
    """
    if vehicle_kind not in ("electric", "diesel"):
        raise ValueError(f"unknown vehicle kind {vehicle_kind!r}")
    expected = ELECTRIC_COLUMNS if vehicle_kind == "electric" else DIESEL_COLUMNS
    latest = {}
    rejects = []
    n_rows = 0
    for lineno, row in _read_rows(path, expected):
        n_rows += 1
        if len(row) != len(expected):
            rejects.append((lineno, f"expected {len(expected)} fields, got {len(row)}"))
            continue
        try:
            pt = _telemetry_row(row, vehicle_kind)
        except ValueError as exc:
            rejects.append((lineno, str(exc)))
            continue
        latest[(pt.vehicle_id, pt.timestamp)] = pt
    points = [latest[k] for k in sorted(latest)]
    if rejects:
        log.warning("%s: rejected %d of %d rows", path, len(rejects), n_rows)
    return ParseResult(points, n_rows, rejects)


def write_telemetry(path, points):
    points = list(points)
    electric = bool(points) and points[0].is_electric
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ELECTRIC_COLUMNS if electric else DIESEL_COLUMNS)
        for p in points:
            head = [p.vehicle_id, repr(p.timestamp), repr(p.position.lat), repr(p.position.lon)]
            pl = p.payload
            if isinstance(pl, ElectricPayload):
                w.writerow(head + [repr(pl.current), repr(pl.voltage), repr(pl.soc), int(pl.cable_connected)])
            else:
                w.writerow(head + [repr(pl.fuel_level), repr(pl.total_fuel_used)])


def split_by_vehicle(points):
    """Map vehicle_id -> its points, preserving order."""
    out = {}
    for p in points:
        out.setdefault(p.vehicle_id, []).append(p)
    return out


def parse_weather(path, humidity_convention="fraction"):
    """Read a weather CSV; humidity is normalized to [0, 1].

    ``humidity_convention`` declares the source unit: "fraction" or "percent".
    """
    if humidity_convention not in ("fraction", "percent"):
        raise ValueError(f"unknown humidity convention {humidity_convention!r}")
    scale = 100.0 if humidity_convention == "percent" else 1.0
    records, rejects, n = [], [], 0
    for lineno, row in _read_rows(path, WEATHER_COLUMNS):
        n += 1
        try:
            if len(row) != len(WEATHER_COLUMNS):
                raise ValueError(f"expected {len(WEATHER_COLUMNS)} fields, got {len(row)}")
            hum = _finite(row[5], "humidity") / scale
            if not 0.0 <= hum <= 1.0:
                raise ValueError(f"humidity {row[5]} outside declared {humidity_convention} range")
            records.append(WeatherRecord(
                station_id=row[0].strip(),
                timestamp=_finite(row[1], "timestamp"),
                temperature=_finite(row[4], "temp"),
                humidity=hum,
                visibility=_finite(row[6], "visibility"),
                wind_speed=_finite(row[7], "wind_speed"),
                precipitation=_finite(row[8], "precip"),
                station_position=_position(row[2], row[3]),
            ))
        except ValueError as exc:
            rejects.append((lineno, str(exc)))
    return ParseResult(records, n, rejects)


def parse_traffic(path):
    records, rejects, n = [], [], 0
    for lineno, row in _read_rows(path, TRAFFIC_COLUMNS):
        n += 1
        try:
            if len(row) != len(TRAFFIC_COLUMNS):
                raise ValueError(f"expected {len(TRAFFIC_COLUMNS)} fields, got {len(row)}")
            ff = _finite(row[3], "freeflow_kmh")
            jam = _finite(row[4], "jam_factor")
            if ff <= 0:
                raise ValueError("free-flow speed must be positive")
            if not 0.0 <= jam <= 10.0:
                raise ValueError(f"jam factor {jam} outside [0, 10]")
            records.append(TrafficRecord(row[0].strip(), _finite(row[1], "timestamp"),
                                         _finite(row[2], "speed_kmh"), ff, jam))
        except ValueError as exc:
            rejects.append((lineno, str(exc)))
    return ParseResult(records, n, rejects)


def remove_garage_points(points, zone: GarageZone):
    points = list(points)
    if not points:
        return []
    inside = zone.contains([p.position for p in points])
    return [p for p, hit in zip(points, inside) if not hit]


def remove_charging_points(points):
    out = []
    for p in points:
        if not isinstance(p.payload, ElectricPayload):
            raise DataError(f"vehicle {p.vehicle_id}: charging filter needs electric payloads")
        if not p.payload.cable_connected:
            out.append(p)
    return out


class IntervalSeries:
    """Per-interval values between consecutive datapoints.

    Iterating yields ``((t_prev, t_cur), value)`` pairs.
    """

    def __init__(self, t_start, t_end, values, anomalies=0):
        self.t_start = np.asarray(t_start, dtype=float)
        self.t_end = np.asarray(t_end, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.anomalies = anomalies

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        for a, b, v in zip(self.t_start, self.t_end, self.values):
            yield (float(a), float(b)), float(v)

    def __getitem__(self, i):
        return (float(self.t_start[i]), float(self.t_end[i])), float(self.values[i])

    def total(self):
        return float(self.values.sum())


def _check_monotone(ts):
    bad = np.nonzero(np.diff(ts) <= 0)[0]
    if len(bad):
        i = int(bad[0]) + 1
        raise DataError(f"timestamps not strictly increasing at index {i} ({ts[i - 1]} -> {ts[i]})")


def estimate_electric_energy(points: Sequence[TelemetryPoint]):
    """Energy (J) drawn over each interval: current * voltage * elapsed seconds.

    Uses the current and voltage recorded at the end of the interval; negative
    values are regeneration and are kept.
    """
    if len(points) < 2:
        raise DataError("energy estimation needs at least two points")
    if not all(p.is_electric for p in points):
        raise DataError("energy estimation needs electric payloads")
    ts = np.array([p.timestamp for p in points])
    _check_monotone(ts)
    amps = np.array([p.payload.current for p in points])
    volts = np.array([p.payload.voltage for p in points])
    energy = amps[1:] * volts[1:] * np.diff(ts)
    return IntervalSeries(ts[:-1], ts[1:], energy)


def fuel_delta(points: Sequence[TelemetryPoint], clamp=True):
    """Gallons burned per interval from the cumulative fuel counter.

    Negative deltas (counter resets) are counted in ``anomalies`` and, when
    ``clamp`` is set, replaced by zero.
    """
    if len(points) < 2:
        return IntervalSeries([], [], [])
    if any(p.is_electric for p in points):
        raise DataError("fuel deltas need diesel payloads")
    ts = np.array([p.timestamp for p in points])
    _check_monotone(ts)
    total = np.array([p.payload.total_fuel_used for p in points])
    d = np.diff(total)
    neg = d < 0
    n_bad = int(neg.sum())
    if n_bad:
        log.warning("vehicle %s: %d negative fuel deltas%s", points[0].vehicle_id, n_bad,
                    " clamped to 0" if clamp else "")
        if clamp:
            d = np.where(neg, 0.0, d)
    return IntervalSeries(ts[:-1], ts[1:], d, anomalies=n_bad)


def soc_energy_check(points, capacity_j):
    """Compare integrated energy with the SoC drop over the same points.

    Returns ``(estimated_j, soc_implied_j)``; SoC is only a cross-check.
    """
    est = estimate_electric_energy(points).total()
    soc_drop = points[0].payload.soc - points[-1].payload.soc
    return est, soc_drop / 100.0 * capacity_j

