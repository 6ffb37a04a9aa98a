import csv
import math

import numpy as np
import pytest

from fleetenergy.experiments import (TrainParams, ablation, compare_models, partition_trips, predict_trips,
                                     trip_rows, write_table)
from fleetenergy.geo import GeoPoint
from fleetenergy.ml import FeatureConfig
from fleetenergy.sampler import Sample
from fleetenergy.synth import planted_enriched, synthetic_sample_series

FAST = TrainParams(hidden=(16,), epochs=60, batch_size=32)
P0 = GeoPoint(35.0, -85.0)


def test_planted_elevation_signal_wins_ablation():
    data = planted_enriched(300, "elevation", seed=1)
    rows = ablation(data, FeatureConfig(), [{"elevation"}, {"traffic"}], "linear", seed=0)
    (l1, _, mse_elev, _), (l2, _, mse_traffic, _) = rows
    assert (l1, l2) == ("elevation", "traffic")
    assert mse_elev < mse_traffic


def test_all_groups_no_worse_than_weather_only():
    data = planted_enriched(300, "linear", seed=2)
    rows = ablation(data, FeatureConfig(), [{"elevation", "weather", "traffic"}, {"weather"}], "linear")
    assert rows[0][1] == 23 and rows[1][1] == 20
    assert rows[0][2] <= rows[1][2] + 1e-6


def test_duplicate_subset_is_reproducible():
    data = planted_enriched(120, "linear", seed=3)
    rows = ablation(data, FeatureConfig(), [{"weather"}, {"weather"}], "mlp", FAST, seed=4)
    assert rows[0] == rows[1]


def test_linear_ground_truth_favours_linear_regression():
    data = planted_enriched(300, "linear", seed=5)
    rows = {r[0]: r for r in compare_models(data, FeatureConfig(), FAST, seed=0)}
    assert set(rows) == {"linear", "tree", "mlp"}
    assert rows["linear"][1] <= rows["tree"][1]
    assert rows["linear"][1] <= rows["mlp"][1] + 1e-6


def test_piecewise_ground_truth_tree_fits_training_set():
    data = planted_enriched(200, "piecewise", seed=6)
    rows = {r[0]: r for r in compare_models(data, FeatureConfig(), FAST, seed=0, kinds=("tree",))}
    assert rows["tree"][3] == 0.0


def mk(vid, t0, t1, e):
    return Sample(vid, "f", P0, P0, float(t0), float(t1), float(e))


def test_single_sample_trip_error():
    s = [mk("v", 0, 300, 100.0), mk("v", 600, 900, 50.0)]
    (rep,) = predict_trips(np.array([110.0, 50.0]), s, durations=[10], include_partial=True)
    assert rep.trip_count == 2
    assert rep.errors["model"] == pytest.approx((10.0 + 0.0) / 2)


def test_identity_predictor_is_exact():
    ss = synthetic_sample_series(3, 7.0, seed=0).samples
    reps = predict_trips({"oracle": lambda xs: [x.energy for x in xs]}, ss)
    assert all(r.errors["oracle"] == 0.0 for r in reps if r.trip_count)
    assert [r.duration_min for r in reps][-1] == 360.0


def test_zero_total_trips_are_undefined():
    s = [mk("v", 0, 60, 0.0), mk("v", 700, 760, 5.0), mk("v", 1300, 1400, 1.0)]
    (rep,) = predict_trips(np.array([1.0, 5.0, 1.0]), s, durations=[10])
    assert rep.undefined == 1 and rep.trip_count == 1
    assert rep.errors["model"] == 0.0


def test_partition_covers_every_sample_once():
    ss = synthetic_sample_series(4, 3.0, seed=1).samples
    for dur in (10, 60, 360):
        trips = partition_trips(ss, dur, include_partial=True)
        flat = sorted(k for t in trips for k in t)
        assert flat == list(range(len(ss)))
        for t in trips:
            assert len({ss[k].vehicle_id for k in t}) == 1


def test_partial_windows_dropped_by_default():
    ss = [mk("v", 0, 60, 1.0), mk("v", 700, 760, 1.0)]
    assert partition_trips(ss, 10) == [[0]]
    assert partition_trips(ss, 10, include_partial=True) == [[0], [1]]


def test_noisy_unbiased_model_improves_with_trip_length():
    ss = synthetic_sample_series(12, 12.0, seed=2).samples
    y = np.array([s.energy for s in ss])
    noisy = y + np.random.default_rng(3).normal(0, 0.5 * y.std(), len(y))
    reps = predict_trips(noisy, ss)
    assert reps[-1].errors["model"] < reps[0].errors["model"]


def test_tables_carry_extra_columns(tmp_path):
    ss = synthetic_sample_series(2, 2.0, seed=0).samples
    header, rows = trip_rows(predict_trips(np.array([s.energy for s in ss]), ss, [10, 60]))
    write_table(tmp_path / "t.csv", header, rows, {"seed": 7, "config_hash": "abc"})
    with (tmp_path / "t.csv").open() as fh:
        got = list(csv.DictReader(fh))
    assert got[0]["seed"] == "7" and got[0]["config_hash"] == "abc"
    assert float(got[0]["rel_error_pct_model"]) == 0.0
    assert not math.isnan(float(got[1]["duration_min"]))
