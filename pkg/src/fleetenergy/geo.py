"""Geodesic helpers for city-scale work.

Metric distances use an equirectangular projection centred on a reference
point; node-to-node lengths use the haversine formula.
"""
from typing import NamedTuple, Sequence

import numpy as np

EARTH_RADIUS_M = 6371008.8


class GeoPoint(NamedTuple):
    lat: float
    lon: float


def valid_latlon(lat, lon):
    return -90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0


def check_point(p):
    if not valid_latlon(p[0], p[1]):
        raise ValueError(f"coordinates out of range: lat={p[0]}, lon={p[1]}")
    return GeoPoint(float(p[0]), float(p[1]))


def as_latlon_array(points):
    """(n, 2) float array of lat/lon from a sequence of points."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) lat/lon array, got shape {arr.shape}")
    return arr


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters; broadcasts over numpy arrays."""
    p1 = np.radians(lat1)
    p2 = np.radians(lat2)
    dphi = p2 - p1
    dlam = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def to_local_xy(lat, lon, lat0, lon0):
    """Project to meters east/north of (lat0, lon0)."""
    kx = EARTH_RADIUS_M * np.cos(np.radians(lat0))
    x = np.radians(np.asarray(lon, dtype=float) - lon0) * kx
    y = np.radians(np.asarray(lat, dtype=float) - lat0) * EARTH_RADIUS_M
    return x, y


def from_local_xy(x, y, lat0, lon0):
    kx = EARTH_RADIUS_M * np.cos(np.radians(lat0))
    lat = lat0 + np.degrees(np.asarray(y, dtype=float) / EARTH_RADIUS_M)
    lon = lon0 + np.degrees(np.asarray(x, dtype=float) / kx)
    return lat, lon


def offset_point(p, east_m, north_m):
    """Move a point by metric offsets using the projection at the point itself."""
    lat, lon = from_local_xy(east_m, north_m, p[0], p[1])
    return GeoPoint(float(lat), float(lon))


def segment_distances_xy(px, py, ax, ay, bx, by):
    """Euclidean distance from (px, py) to segments a-b (vectorized)."""
    dx = bx - ax
    dy = by - ay
    len2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((px - ax) * dx + (py - ay) * dy) / len2
    t = np.where(len2 > 0, np.clip(t, 0.0, 1.0), 0.0)
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return np.hypot(qx, qy)


def segment_distances(p, a_lat, a_lon, b_lat, b_lon):
    """Distances in meters from point p to each segment, projected around p."""
    ax, ay = to_local_xy(a_lat, a_lon, p[0], p[1])
    bx, by = to_local_xy(b_lat, b_lon, p[0], p[1])
    return segment_distances_xy(0.0, 0.0, ax, ay, bx, by)


def point_to_polyline_distance(p, polyline):
    """Minimum distance (m) from p to any segment of the polyline.

    A single-vertex polyline degenerates to point distance.
    """
    pl = as_latlon_array(polyline)
    if len(pl) == 1:
        pl = np.vstack([pl, pl])
    d = segment_distances(p, pl[:-1, 0], pl[:-1, 1], pl[1:, 0], pl[1:, 1])
    return float(d.min())


def polyline_length(polyline):
    pl = as_latlon_array(polyline)
    if len(pl) < 2:
        return 0.0
    return float(haversine_m(pl[:-1, 0], pl[:-1, 1], pl[1:, 0], pl[1:, 1]).sum())


def point_in_polygon(points, ring: Sequence):
    """Even-odd rule test; ``points`` is (n, 2) lat/lon, returns bool array.

    Points exactly on an edge may fall either way.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = as_latlon_array(ring)
    if np.allclose(poly[0], poly[-1]):
        poly = poly[:-1]
    y = pts[:, 0][:, None]
    x = pts[:, 1][:, None]
    yi, xi = poly[:, 0], poly[:, 1]
    yj, xj = np.roll(yi, 1), np.roll(xi, 1)
    straddles = (yi > y) != (yj > y)
    with np.errstate(invalid="ignore", divide="ignore"):
        x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi
    crossings = straddles & (x < x_cross)
    return (crossings.sum(axis=1) % 2) == 1


def _segments_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0


def is_simple_ring(ring):
    """True when no two non-adjacent edges of the ring properly cross."""
    poly = [tuple(v) for v in as_latlon_array(ring)]
    if poly[0] == poly[-1]:
        poly = poly[:-1]
    n = len(poly)
    edges = [(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True
