"""
Longer trips, smaller relative error
====================================

Per-road predictions are noisy, but the noise partly cancels when a trip's
samples are summed. Here a predictor that is unbiased with large random
error is scored on trips of 10 minutes up to 6 hours.
"""
import numpy as np

from fleetenergy.experiments import predict_trips, trip_rows
from fleetenergy.synth import synthetic_sample_series

series = synthetic_sample_series(100, 12.5, seed=0)
samples = series.samples
actual = np.array([s.energy for s in samples])
print(f"{len(samples)} samples from 100 vehicles")

rng = np.random.default_rng(1)
predictors = {
    "noisy": actual + rng.normal(0.0, 0.5 * actual.std(), len(actual)),
    "biased": 1.05 * actual,
}
header, rows = trip_rows(predict_trips(predictors, samples))
print("  ".join(f"{h:>18s}" for h in header))
for row in rows:
    print("  ".join(f"{v:18.3f}" if isinstance(v, float) else f"{v:>18}" for v in row))

# The noisy predictor improves with duration; the biased one stays at 5%.
