import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fleetenergy.ingest import ElectricPayload, TelemetryPoint
from fleetenergy.sampler import (Sample, SampleSet, _travel_distance, filter_erroneous, read_samples_csv,
                                 segment_samples, travel_distance, write_samples_csv)

from conftest import ORIGIN, xy_feature, xy_point
from oracles import point_at_arc, random_polyline


def points(n, dt=1.0, t0=0.0):
    return [TelemetryPoint("v", t0 + k * dt, xy_point(10 * k, 0), ElectricPayload(1.0, 600.0, 80.0, False))
            for k in range(n)]


def runs(samples):
    return [s.feature_id for s in samples]


def test_two_runs():
    ss = segment_samples(points(5), list("AAABB"), [1.0, 2.0, 3.0, 4.0])
    assert runs(ss) == ["A", "B"]
    # the A->B interval (3.0) straddles both runs
    assert [s.energy for s in ss] == [3.0, 4.0]


def test_return_to_a_road_is_a_new_sample():
    ss = segment_samples(points(6), list("AABBAA"), [1.0] * 5)
    assert runs(ss) == ["A", "B", "A"]


def test_single_point_runs_are_dropped():
    ss = segment_samples(points(3), list("ABA"), [1.0, 1.0])
    assert len(ss) == 0
    assert ss.provenance["short_runs_dropped"] == 3


def test_unmatched_point_splits_and_excludes_energy():
    ss = segment_samples(points(5), ["A", "A", None, "A", "A"], [1.0, 10.0, 20.0, 2.0])
    assert runs(ss) == ["A", "A"]
    assert [s.energy for s in ss] == [1.0, 2.0]
    assert ss.provenance["excluded_energy"] == 30.0


def test_time_gap_splits_run():
    pts = points(4)
    pts[2] = TelemetryPoint("v", 500.0, pts[2].position, pts[2].payload)
    pts[3] = TelemetryPoint("v", 501.0, pts[3].position, pts[3].payload)
    ss = segment_samples(pts, list("AAAA"), [1.0, 5.0, 1.0], gap_threshold=60)
    assert len(ss) == 2
    assert all(s.end_ts > s.start_ts for s in ss)


def test_delta_soc_from_capacity():
    ss = segment_samples(points(3), list("AA") + ["A"], [9e5, 9e5], capacity_j=1.8e9)
    assert ss.samples[0].delta_soc == pytest.approx(0.1)


@settings(max_examples=100, deadline=None)
@given(labels=st.lists(st.sampled_from(["A", "B", "C", None]), min_size=1, max_size=60),
       seed=st.integers(0, 1000))
def test_energy_conservation_and_partition(labels, seed):
    rng = np.random.default_rng(seed)
    n = len(labels)
    dt = rng.choice([1.0, 1.0, 1.0, 90.0], size=n)
    pts = [TelemetryPoint("v", float(t), ORIGIN, ElectricPayload(1.0, 1.0, 50.0, False))
           for t in np.cumsum(dt)]
    e = rng.normal(1000, 800, size=max(n - 1, 0))
    ss = segment_samples(pts, labels, e)
    total = sum(s.energy for s in ss) + ss.provenance["excluded_energy"]
    assert total == pytest.approx(e.sum(), rel=1e-9, abs=1e-6)
    # samples are disjoint in time and each covers one feature
    spans = sorted((s.start_ts, s.end_ts) for s in ss)
    for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
        assert a1 < b0
    ts = np.array([p.timestamp for p in pts])
    for s in ss:
        inside = [labels[k] for k in range(n) if s.start_ts <= ts[k] <= s.end_ts]
        assert set(inside) == {s.feature_id}


def test_same_segment_is_straight_line():
    f = xy_feature("A", [(0, 0), (100, 0), (100, 100)])
    s = Sample("v", "A", xy_point(10, 0), xy_point(70, 0), 0, 1, 0)
    assert travel_distance(s, f) == pytest.approx(60.0, rel=1e-6)


def test_full_polyline_length():
    f = xy_feature("A", [(0, 0), (100, 0), (100, 150), (300, 150)])
    s = Sample("v", "A", xy_point(0, 0), xy_point(300, 150), 0, 1, 0)
    assert travel_distance(s, f) == pytest.approx(450.0, rel=1e-3)


def test_matches_cumulative_arc_length_oracle():
    rng = np.random.default_rng(4)
    for _ in range(5):
        xy, cum = random_polyline(rng)
        f = xy_feature("P", xy)
        for _ in range(20):
            s1, s2 = rng.uniform(0, cum[-1], size=2)
            (p1, k1), (p2, k2) = point_at_arc(xy, cum, s1), point_at_arc(xy, cum, s2)
            got = _travel_distance(xy_point(*p1), xy_point(*p2), f.coords)
            expected = abs(s1 - s2) if k1 != k2 else float(np.hypot(*(p1 - p2)))
            assert got == pytest.approx(expected, abs=1.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), noise=st.floats(0, 20))
def test_symmetric_and_bounded(seed, noise):
    rng = np.random.default_rng(seed)
    xy, cum = random_polyline(rng, 10)
    f = xy_feature("P", xy)
    s1, s2 = rng.uniform(0, cum[-1], size=2)
    p1 = point_at_arc(xy, cum, s1)[0] + rng.uniform(-noise, noise, 2)
    p2 = point_at_arc(xy, cum, s2)[0] + rng.uniform(-noise, noise, 2)
    a, b = xy_point(*p1), xy_point(*p2)
    d_ab = _travel_distance(a, b, f.coords)
    assert d_ab == pytest.approx(_travel_distance(b, a, f.coords), abs=1e-9)
    assert 0 <= d_ab <= cum[-1] * 1.001 + 2 * 25.0


@pytest.mark.parametrize("dsoc,kept", [(-0.3, False), (-0.1, True), (0.0, True), (None, True)])
def test_erroneous_filter(dsoc, kept):
    s = Sample("v", "A", ORIGIN, ORIGIN, 0, 1, 1.0, dsoc)
    out = filter_erroneous(SampleSet([s]))
    assert (len(out) == 1) == kept
    assert out.provenance["erroneous_removed"] == (0 if kept else 1)


def test_samples_csv_round_trip(tmp_path):
    ss = [Sample("v", "A", xy_point(0, 0), xy_point(5, 0), 0.0, 2.5, 123.25, 0.125, 5.0),
          Sample("w", "B", xy_point(1, 1), xy_point(9, 3), 3.0, 9.0, 0.002, None, 8.5)]
    write_samples_csv(tmp_path / "s.csv", ss)
    assert read_samples_csv(tmp_path / "s.csv") == ss
