import math

import numpy as np
import pytest

from fleetenergy.geo import to_local_xy
from fleetenergy.map_match import (MatchResult, NoiseSpec, add_gaussian_noise, match_locations,
                                   matching_accuracy, noise_sweep, read_route_csv, vote, write_route_csv,
                                   write_sweep_csv)
from fleetenergy.road_network import FeatureIndex
from fleetenergy.synth import grid_route

from conftest import xy_feature, xy_point
from oracles import literal_vote


def junction_trace(n=200, seed=0, sigma=6.0):
    """Trace along road A that turns onto road B, with GPS noise."""
    a = xy_feature("A", [(-1000, 0), (0, 0)])
    b = xy_feature("B", [(0, 0), (0, 1000)])
    c = xy_feature("C", [(0, 0), (1000, 0)])
    rng = np.random.default_rng(seed)
    s = np.linspace(-500, 500, n)
    xy = np.where(s[:, None] < 0, np.column_stack([s, 0 * s]), np.column_stack([0 * s, s]))
    xy = xy + rng.normal(0, sigma, size=xy.shape)
    return [xy_point(x, y) for x, y in xy], FeatureIndex([a, b, c])


def test_points_near_only_one_feature():
    a = xy_feature("A", [(-500, 0), (500, 0)])
    index = FeatureIndex([a, xy_feature("Z", [(-500, 300), (500, 300)])])
    locs = [xy_point(x, 3) for x in range(-20, 30, 10)]
    assert match_locations(locs, index).assignments == ["A"] * 5


def test_neighbours_outvote_a_closer_road():
    nearby = [[("A", 5.0)], [("A", 6.0)], [("B", 1.0), ("A", 9.0)], [("A", 4.0)], [("A", 5.0)]]
    assert vote(nearby, 2)[2] == "A"


def test_unmatched_locations_are_kept():
    res = vote([[("A", 1.0)], [], [("A", 2.0)]], 1)
    assert res == ["A", None, "A"]


def test_junction_trace_matches_literal_algorithm():
    locs, index = junction_trace()
    nearby = index.distances_many(locs, 25.0)
    res = match_locations(locs, index, window=10, radius=25.0)
    assert res.assignments == literal_vote(nearby, 10)
    assert len(res) == len(locs)


def test_window_zero_snaps_to_nearest():
    locs, index = junction_trace(seed=4)
    res = match_locations(locs, index, window=0, radius=25.0)
    for p, a in zip(locs, res.assignments):
        near = index.distances(p, 25.0)
        assert a == (near[0][0] if near else None)


def test_assigned_features_are_within_radius():
    locs, index = junction_trace(seed=2, sigma=15)
    res = match_locations(locs, index, window=10, radius=25.0)
    for p, a in zip(locs, res.assignments):
        if a is not None:
            assert a in index.query(p, 25.0)


def test_reversed_trace_gives_reversed_assignment(grid, grid_index):
    locs, _ = grid_route(grid, 300, 10.0, seed=8)
    noisy = add_gaussian_noise(locs, NoiseSpec(10.0, 1))
    fwd = match_locations(noisy, grid_index).assignments
    bwd = match_locations(noisy[::-1], grid_index).assignments
    assert bwd == fwd[::-1]


def test_invalid_parameters():
    index = FeatureIndex([])
    with pytest.raises(ValueError):
        match_locations([], index, window=-1)
    with pytest.raises(ValueError):
        match_locations([], index, radius=0)
    with pytest.raises(ValueError):
        NoiseSpec(-1.0)


def test_zero_noise_is_identity():
    pts = [xy_point(k, 2 * k) for k in range(10)]
    assert np.array_equal(add_gaussian_noise(pts, NoiseSpec(0.0, 3)), np.asarray(pts))


def test_noise_is_deterministic_per_seed():
    pts = [xy_point(k, 2 * k) for k in range(10)]
    assert np.array_equal(add_gaussian_noise(pts, NoiseSpec(5.0, 3)), add_gaussian_noise(pts, NoiseSpec(5.0, 3)))
    assert not np.array_equal(add_gaussian_noise(pts, NoiseSpec(5.0, 3)), add_gaussian_noise(pts, NoiseSpec(5.0, 4)))


def _displacements(sigma, n=10_000, seed=7):
    p0 = xy_point(0, 0)
    noisy = add_gaussian_noise([p0] * n, NoiseSpec(sigma, seed))
    return to_local_xy(noisy[:, 0], noisy[:, 1], p0.lat, p0.lon)


def test_per_axis_displacement_is_half_normal():
    sigma = 14.0
    dx, dy = _displacements(sigma)
    expected = sigma * math.sqrt(2 / math.pi)
    assert np.mean(np.abs(dx)) == pytest.approx(expected, rel=0.02)
    assert np.mean(np.abs(dy)) == pytest.approx(expected, rel=0.02)


def test_radial_displacement_is_rayleigh():
    sigma = 14.0
    dx, dy = _displacements(sigma)
    assert np.mean(np.hypot(dx, dy)) == pytest.approx(sigma * math.sqrt(math.pi / 2), rel=0.02)


def test_accuracy_examples():
    truth = ["A", "B", "C", "D"]
    assert matching_accuracy(truth, truth) == 100.0
    assert matching_accuracy(truth, ["A", "B", None, "X"]) == 50.0
    assert matching_accuracy(truth, MatchResult(["A", "B", "C", "D"], 10, 25.0)) == 100.0
    with pytest.raises(ValueError):
        matching_accuracy(truth, ["A"])


def test_sweep_zero_noise_is_perfect(grid, grid_index):
    routes = [grid_route(grid, 200, 10.0, seed=k) for k in range(2)]
    (row,) = noise_sweep(routes, grid_index, [0.0], trials=2)
    assert row[1] == 100.0
    assert row[3] == [100.0, 100.0]


def test_sweep_trials_differ_only_by_seed(grid, grid_index, tmp_path):
    routes = [grid_route(grid, 200, 10.0, seed=1)]
    a = noise_sweep(routes, grid_index, [28.0], trials=2, seed=5)
    b = noise_sweep(routes, grid_index, [28.0], trials=2, seed=5)
    assert a == b
    assert a[0][3][0] != a[0][3][1]
    write_sweep_csv(tmp_path / "s.csv", a)
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "sigma_m,mean_accuracy_pct,trials"


def test_route_csv_round_trip(grid, tmp_path):
    locs, truth = grid_route(grid, 50, 10.0, seed=2)
    write_route_csv(tmp_path / "r.csv", locs, truth)
    locs2, truth2 = read_route_csv(tmp_path / "r.csv")
    assert truth2 == truth
    assert np.array_equal(np.asarray(locs2), np.asarray(locs))
