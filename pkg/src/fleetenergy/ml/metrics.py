from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Metrics:
    mse: float
    mae: float


def evaluate(model, X, y=None):
    """MSE and MAE of ``model.predict`` on a test set.

    Accepts either ``(model, X, y)`` or ``(model, dataset)``.
    """
    if y is None:
        X, y = X.X, X.y
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("empty test set")
    err = np.asarray(model.predict(X), dtype=float) - y
    return Metrics(float(np.mean(err * err)), float(np.mean(np.abs(err))))
