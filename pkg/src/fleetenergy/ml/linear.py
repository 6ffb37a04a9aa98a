import numpy as np

RIDGE_FALLBACK = 1e-8


class LinearModel:
    kind = "linear"

    def __init__(self, weights, intercept):
        self.weights = np.asarray(weights, dtype=float)
        self.intercept = float(intercept)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.weights + self.intercept

    def to_dict(self):
        return {"weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, d):
        return cls(d["weights"], d["intercept"])


def fit_linear(X, y, ridge=RIDGE_FALLBACK):
    """Least-squares fit via the normal equations.

    Singular or badly conditioned systems get a tiny ridge term, which
    approaches the minimum-norm solution.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.column_stack([X, np.ones(len(X))])
    AtA = A.T @ A
    Aty = A.T @ y
    if np.linalg.cond(AtA) < 1e12:
        coef = np.linalg.solve(AtA, Aty)
    else:
        scale = max(float(np.trace(AtA)) / len(AtA), 1.0)
        coef = np.linalg.solve(AtA + ridge * scale * np.eye(len(AtA)), Aty)
    return LinearModel(coef[:-1], coef[-1])
