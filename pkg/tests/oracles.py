"""Independent reference implementations shared by the unit and acceptance tests."""
import math

import numpy as np

from fleetenergy.road_network import RoutingGraph

from conftest import xy_feature


def literal_vote(nearby, window):
    """Direct transcription of the nested-loop voting, plus the tie-break."""
    n = len(nearby)
    out = []
    for i in range(n):
        if len(nearby[i]) == 0:
            out.append(None)
            continue
        freq = []
        for road, _ in nearby[i]:
            count, dist = 0, 0.0
            for j in range(i - window, i + window + 1):
                if j < 0 or j >= n:
                    continue
                for other, d in nearby[j]:
                    if road == other:
                        count += 1
                        dist += d
            freq.append((count, dist / count, road))
        best = freq[0]
        for f in freq[1:]:
            if f[0] > best[0] or (f[0] == best[0] and (f[1], f[2]) < (best[1], best[2])):
                best = f
        out.append(best[2])
    return out


def random_polyline(rng, n_seg=20):
    """Non-self-intersecting polyline in local metres and its cumulative arc length."""
    headings = rng.uniform(-math.pi / 3, math.pi / 3, size=n_seg)
    lengths = rng.uniform(20, 80, size=n_seg)
    steps = np.column_stack([np.cos(headings), np.sin(headings)]) * lengths[:, None]
    xy = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
    return xy, np.r_[0.0, np.cumsum(lengths)]


def point_at_arc(xy, cum, s):
    """Point at arc length s and the index of the segment holding it."""
    k = min(int(np.searchsorted(cum, s, side="right")) - 1, len(cum) - 2)
    t = (s - cum[k]) / (cum[k + 1] - cum[k])
    return xy[k] + t * (xy[k + 1] - xy[k]), k


def simple_path_lengths(g, a, b):
    """Lengths of every simple path from a to b."""
    out = []

    def walk(u, seen, total):
        if u == b:
            out.append(total)
            return
        for v, e in sorted(g.adj[u].items()):
            if v not in seen:
                walk(v, seen | {v}, total + e.length)

    walk(a, {a}, 0.0)
    return out


def dual_carriageway():
    """Two parallel carriageways 30 m apart; the southern one detours.

    North N0..N4 along y=+15 (400 m). South S0..S4 along y=-15 with S2
    pushed south so that route is about 460 m. Crossovers at both ends plus
    a side road at each end make 12 nodes.
    """
    north = [(x, 15) for x in (0, 100, 200, 300, 400)]
    south = [(0, -15), (100, -15), (200, -98.2), (300, -15), (400, -15)]
    feats = [xy_feature(f"n{k}", [north[k], north[k + 1]]) for k in range(4)]
    feats += [xy_feature(f"s{k}", [south[k], south[k + 1]]) for k in range(4)]
    feats += [xy_feature("x0", [north[0], south[0]]), xy_feature("x4", [north[4], south[4]]),
              xy_feature("sideA", [(-80, -40), south[0]]), xy_feature("sideB", [south[4], (480, -40)])]
    return feats, RoutingGraph.from_features(feats)
