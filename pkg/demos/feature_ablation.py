"""
Which features matter?
======================

Plant a known signal in synthetic enriched samples and check that the
ablation study recovers it, then compare the three model families on data
built to favour each of them.
"""
from fleetenergy.experiments import TrainParams, ablation, compare_models
from fleetenergy.ml import DIESEL_BEST, ELECTRIC_BEST, FeatureConfig
from fleetenergy.synth import planted_enriched

print("best diesel set:", DIESEL_BEST.dimension, "columns")
print("best electric set:", ELECTRIC_BEST.dimension, "columns")
print("electric extras:", sorted(set(ELECTRIC_BEST.columns()) - set(DIESEL_BEST.columns())))

# Energy here depends on elevation change only. Adding the elevation group to
# the base features should beat any other single group.
data = planted_enriched(400, "elevation", seed=1)
subsets = [set(), {"elevation"}, {"weather"}, {"traffic"}, {"elevation", "weather", "traffic"}]
print("\nsubset                      dim   test MSE")
for label, dim, mse, _ in ablation(data, FeatureConfig(), subsets, "linear", seed=0):
    print(f"{label:26s} {dim:4d}  {mse:10.4g}")

# Model families: linear truth suits regression; step-shaped truth suits trees.
params = TrainParams(hidden=(32, 16), epochs=100, batch_size=32)
for signal in ("linear", "piecewise"):
    rows = compare_models(planted_enriched(300, signal, seed=5), FeatureConfig(), params, seed=0)
    print(f"\n{signal} ground truth")
    for model, mse, mae, train_mse in rows:
        print(f"  {model:6s} test MSE {mse:9.4g}  MAE {mae:8.4g}  train MSE {train_mse:9.4g}")
