"""Feature encoding and the three regression models."""
from .features import (DIESEL_BEST, ELECTRIC_BEST, Dataset, FeatureConfig, Standardizer, encode,
                       road_type_vocabulary, split, split_indices)
from .linear import LinearModel, fit_linear
from .metrics import Metrics, evaluate
from .mlp import MLP, Adam, MlpSpec, loss_and_grad, mlp_forward, mlp_train
from .persist import FittedModel, config_hash, load_model, save_model
from .tree import TreeModel, best_split, fit_tree

__all__ = [
    "DIESEL_BEST", "ELECTRIC_BEST", "Dataset", "FeatureConfig", "Standardizer", "encode",
    "road_type_vocabulary", "split", "split_indices", "LinearModel", "fit_linear", "Metrics",
    "evaluate", "MLP", "Adam", "MlpSpec", "loss_and_grad", "mlp_forward", "mlp_train",
    "FittedModel", "config_hash", "load_model", "save_model", "TreeModel", "best_split", "fit_tree",
]
