"""Street-map features with radius queries, plus the routing graph built from them."""
import csv
import heapq
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, NamedTuple, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, NoPath
from .geo import (GeoPoint, as_latlon_array, haversine_m, segment_distances, to_local_xy,
                  valid_latlon)

log = logging.getLogger(__name__)

# OSM highway classes seen on transit routes; anything else is "unknown".
ROAD_TYPES = (
    "motorway", "trunk", "primary", "secondary", "tertiary", "unclassified",
    "residential", "service", "motorway_link", "trunk_link", "primary_link",
    "secondary_link", "tertiary_link", "living_street",
)
UNKNOWN = "unknown"


def normalize_road_type(value):
    v = str(value or "").strip().lower()
    return v if v in ROAD_TYPES else UNKNOWN


@dataclass(frozen=True)
class OsmFeature:
    feature_id: str
    polyline: Tuple[GeoPoint, ...]
    road_type: str = UNKNOWN
    oneway: bool = False
    tunnel: bool = False

    def __post_init__(self):
        if len(self.polyline) < 2:
            raise ValueError(f"feature {self.feature_id}: polyline needs >= 2 points")

    @property
    def coords(self):
        return as_latlon_array(self.polyline)


class FeatureIndex:
    """Radius queries over feature polylines.

    Segments are bucketed in a KD-tree on their midpoints (in one map-wide
    projection); candidates are then confirmed with the exact per-point
    distance, so results agree with :func:`point_to_polyline_distance`.
    """

    def __init__(self, features):
        self.features = list(features)
        self.by_id = {f.feature_id: f for f in self.features}
        if len(self.by_id) != len(self.features):
            raise DataError("duplicate feature_id in map")
        if not self.features:
            self._tree = None
            return
        a_lat, a_lon, b_lat, b_lon, owner = [], [], [], [], []
        for k, f in enumerate(self.features):
            c = f.coords
            a_lat.append(c[:-1, 0]); a_lon.append(c[:-1, 1])
            b_lat.append(c[1:, 0]); b_lon.append(c[1:, 1])
            owner.append(np.full(len(c) - 1, k))
        self.a_lat = np.concatenate(a_lat); self.a_lon = np.concatenate(a_lon)
        self.b_lat = np.concatenate(b_lat); self.b_lon = np.concatenate(b_lon)
        self.owner = np.concatenate(owner)
        self.lat0 = float(np.mean(np.r_[self.a_lat, self.b_lat]))
        self.lon0 = float(np.mean(np.r_[self.a_lon, self.b_lon]))
        ax, ay = to_local_xy(self.a_lat, self.a_lon, self.lat0, self.lon0)
        bx, by = to_local_xy(self.b_lat, self.b_lon, self.lat0, self.lon0)
        mid = np.column_stack([(ax + bx) / 2, (ay + by) / 2])
        self._half = float(np.max(np.hypot(bx - ax, by - ay)) / 2)
        self._tree = cKDTree(mid)

    def __len__(self):
        return len(self.features)

    def _search_radius(self, radius):
        # slack covers the map-wide vs point-centred projection mismatch
        r = radius + self._half
        return r * 1.01 + 1.0

    def distances(self, p, radius):
        """``(feature_id, distance)`` pairs within radius, nearest first."""
        if self._tree is None:
            return []
        x, y = to_local_xy(p[0], p[1], self.lat0, self.lon0)
        cand = self._tree.query_ball_point([float(x), float(y)], self._search_radius(radius))
        return self._confirm(p, np.asarray(cand, dtype=int), radius)

    def _confirm(self, p, cand, radius):
        if len(cand) == 0:
            return []
        cand = np.sort(cand)
        d = segment_distances(p, self.a_lat[cand], self.a_lon[cand], self.b_lat[cand], self.b_lon[cand])
        owners = self.owner[cand]
        best = {}
        for o, dist in zip(owners.tolist(), d.tolist()):
            if o not in best or dist < best[o]:
                best[o] = dist
        hits = [(dist, self.features[o].feature_id) for o, dist in best.items() if dist <= radius]
        hits.sort()
        return [(fid, dist) for dist, fid in hits]

    def query(self, p, radius):
        return [fid for fid, _ in self.distances(p, radius)]

    def distances_many(self, points, radius):
        """Batch form of :meth:`distances` for an (n, 2) lat/lon array."""
        pts = as_latlon_array(points) if len(points) else np.empty((0, 2))
        if self._tree is None or len(pts) == 0:
            return [[] for _ in range(len(pts))]
        x, y = to_local_xy(pts[:, 0], pts[:, 1], self.lat0, self.lon0)
        cands = self._tree.query_ball_point(np.column_stack([x, y]), self._search_radius(radius))
        return [self._confirm(p, np.asarray(c, dtype=int), radius) for p, c in zip(pts, cands)]


def nearby_features(index: FeatureIndex, p, radius):
    """Feature ids within ``radius`` meters of p, sorted by (distance, id)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    return index.query(p, radius)


def read_map(path):
    """Parse a GeoJSON FeatureCollection of LineStrings.

    Returns ``(features, rejects)`` where rejects lists ``(position, reason)``.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})")
    if doc.get("type") != "FeatureCollection":
        raise DataError(f"{path}: expected a GeoJSON FeatureCollection")
    features, rejects, seen = [], [], set()
    for k, item in enumerate(doc.get("features", [])):
        props = item.get("properties") or {}
        geom = item.get("geometry") or {}
        fid = str(props.get("feature_id", ""))
        try:
            if not fid:
                raise ValueError("missing feature_id")
            if fid in seen:
                raise ValueError(f"duplicate feature_id {fid}")
            if geom.get("type") != "LineString":
                raise ValueError(f"geometry type {geom.get('type')!r} is not LineString")
            # GeoJSON order is lon, lat
            pts = tuple(GeoPoint(float(c[1]), float(c[0])) for c in geom.get("coordinates", []))
            if len(pts) < 2:
                raise ValueError(f"degenerate geometry with {len(pts)} point(s)")
            if not all(valid_latlon(*q) for q in pts):
                raise ValueError("coordinates out of range")
            feat = OsmFeature(fid, pts, normalize_road_type(props.get("road_type")),
                              bool(props.get("oneway", False)), bool(props.get("tunnel", False)))
        except (ValueError, TypeError, IndexError) as exc:
            rejects.append((k, f"{fid or '?'}: {exc}"))
            log.warning("map feature %d rejected: %s", k, exc)
            continue
        seen.add(fid)
        features.append(feat)
    return features, rejects


def load_map(path):
    features, _ = read_map(path)
    return features, FeatureIndex(features)


def write_map(path, features):
    doc = {"type": "FeatureCollection", "features": [
        {"type": "Feature",
         "properties": {"feature_id": f.feature_id, "road_type": f.road_type,
                        "oneway": f.oneway, "tunnel": f.tunnel},
         "geometry": {"type": "LineString", "coordinates": [[q.lon, q.lat] for q in f.polyline]}}
        for f in features]}
    Path(path).write_text(json.dumps(doc, indent=1))


class Edge(NamedTuple):
    a: int
    b: int
    feature_id: str
    length: float


class RoutingGraph:
    """Undirected multigraph over polyline vertices.

    Vertices shared between features (after rounding to ``precision``
    decimal degrees) become one node, so features connect at junctions.
    """

    def __init__(self, nodes, edges):
        self.nodes: List[GeoPoint] = list(nodes)
        self.edges: List[Edge] = list(edges)
        self._coords = as_latlon_array(self.nodes) if self.nodes else np.empty((0, 2))
        self.adj: Dict[int, Dict[int, Edge]] = {i: {} for i in range(len(self.nodes))}
        for e in self.edges:
            if e.length <= 0:
                raise ValueError(f"edge {e} has non-positive length")
            for u, v in ((e.a, e.b), (e.b, e.a)):
                cur = self.adj[u].get(v)
                # parallel edges: keep the shortest, then smallest feature id
                if cur is None or (e.length, e.feature_id) < (cur.length, cur.feature_id):
                    self.adj[u][v] = e

    def __len__(self):
        return len(self.nodes)

    @classmethod
    def from_features(cls, features, precision=7):
        key_to_node = {}
        raw = []
        for f in features:
            keys = [(round(q.lat, precision), round(q.lon, precision)) for q in f.polyline]
            raw.append((f.feature_id, keys))
            for k in keys:
                key_to_node.setdefault(k, None)
        ordered = sorted(key_to_node)
        key_to_node = {k: i for i, k in enumerate(ordered)}
        nodes = [GeoPoint(*k) for k in ordered]
        edges = []
        for fid, keys in raw:
            for k1, k2 in zip(keys[:-1], keys[1:]):
                if k1 == k2:
                    continue
                length = float(haversine_m(k1[0], k1[1], k2[0], k2[1]))
                edges.append(Edge(key_to_node[k1], key_to_node[k2], fid, length))
        return cls(nodes, edges)

    @property
    def coords(self):
        return self._coords

    def export_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_a", "node_b", "feature_id", "length_m"])
            for e in self.edges:
                w.writerow([e.a, e.b, e.feature_id, repr(e.length)])


def path_length(edges):
    return float(sum(e.length for e in edges))


def _dijkstra(g: RoutingGraph, source, targets=None):
    """Settled ``node -> (distance, node_path)``; ties go to the smaller path."""
    remaining = set(targets) if targets is not None else None
    settled = {}
    heap = [(0.0, (source,))]
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u in settled:
            continue
        settled[u] = (d, path)
        if remaining is not None:
            remaining.discard(u)
            if not remaining:
                break
        for v, e in g.adj[u].items():
            if v not in settled:
                heapq.heappush(heap, (d + e.length, path + (v,)))
    return settled


def _edges_along(g, node_path):
    return [g.adj[u][v] for u, v in zip(node_path[:-1], node_path[1:])]


def shortest_path(g: RoutingGraph, a, b):
    """Edges of the minimum-length path from node a to node b.

    Equal-length paths are ranked by their node sequence. Raises
    :class:`NoPath` when b is unreachable.
    """
    for n in (a, b):
        if n not in g.adj:
            raise KeyError(f"node {n} not in graph")
    if a == b:
        return []
    settled = _dijkstra(g, a, [b])
    if b not in settled:
        raise NoPath(f"no path from {a} to {b}")
    return _edges_along(g, settled[b][1])


def shortest_paths_from(g: RoutingGraph, a, targets):
    """``target -> edge list`` for every reachable target."""
    settled = _dijkstra(g, a, targets)
    return {t: _edges_along(g, settled[t][1]) for t in targets if t in settled}


def k_nearest_nodes(g: RoutingGraph, p, k):
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(g) == 0:
        raise ValueError("graph is empty")
    d = haversine_m(p[0], p[1], g.coords[:, 0], g.coords[:, 1])
    order = np.lexsort((np.arange(len(d)), d))
    return [int(i) for i in order[:k]]
