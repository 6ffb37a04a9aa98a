"""Feed-forward regression network: sigmoid hidden layers, linear output, Adam."""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..errors import NumericalError

log = logging.getLogger(__name__)

ELECTRIC_HIDDEN = (100, 80)
DIESEL_HIDDEN = (400, 200, 100, 50, 25)


@dataclass(frozen=True)
class MlpSpec:
    hidden: Tuple[int, ...] = ELECTRIC_HIDDEN
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.hidden or min(self.hidden) <= 0:
            raise ValueError("hidden layer widths must be positive")

    @classmethod
    def preset(cls, kind):
        return cls({"electric": ELECTRIC_HIDDEN, "diesel": DIESEL_HIDDEN}[kind])

    def to_dict(self):
        return {"hidden": list(self.hidden), "learning_rate": self.learning_rate,
                "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}


def sigmoid(z):
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_params(sizes, rng):
    """Glorot-uniform weights, zero biases; ``sizes`` = [in, hidden..., 1]."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-lim, lim, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X):
    """Network output for rows of X, plus the activations used by backprop."""
    acts = [X]
    h = X
    n_layers = len(params) // 2
    for k in range(n_layers):
        z = h @ params[2 * k] + params[2 * k + 1]
        h = sigmoid(z) if k < n_layers - 1 else z
        acts.append(h)
    return h[:, 0], acts


def loss_and_grad(params, X, y):
    """Mean squared error and its gradient for every parameter array."""
    pred, acts = forward(params, X)
    n = len(y)
    resid = pred - y
    loss = float(np.mean(resid * resid))
    grads = [None] * len(params)
    delta = (2.0 / n) * resid[:, None]
    n_layers = len(params) // 2
    for k in reversed(range(n_layers)):
        grads[2 * k] = acts[k].T @ delta
        grads[2 * k + 1] = delta.sum(axis=0)
        if k > 0:
            a = acts[k]
            delta = (delta @ params[2 * k].T) * a * (1.0 - a)
    return loss, grads


class Adam:
    """Adam with bias-corrected moment estimates."""

    def __init__(self, params, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass
class MLP:
    spec: MlpSpec
    params: List[np.ndarray]
    y_mean: float = 0.0
    y_scale: float = 1.0
    history: List[float] = field(default_factory=list)
    kind = "mlp"

    @property
    def input_dim(self):
        return self.params[0].shape[0]

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.input_dim:
            raise ValueError(f"input has {X.shape[1]} features, network expects {self.input_dim}")
        out, _ = forward(self.params, X)
        return out * self.y_scale + self.y_mean

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "params": [p.tolist() for p in self.params],
                "y_mean": self.y_mean, "y_scale": self.y_scale, "history": self.history}

    @classmethod
    def from_dict(cls, d):
        spec = MlpSpec(**{**d["spec"], "hidden": tuple(d["spec"]["hidden"])})
        params = [np.asarray(p, dtype=float) for p in d["params"]]
        return cls(spec, params, d["y_mean"], d["y_scale"], list(d.get("history", [])))


def mlp_forward(model: MLP, x):
    """Prediction for one feature vector (or a batch of rows)."""
    x = np.asarray(x, dtype=float)
    out = model.predict(x)
    return float(out[0]) if x.ndim == 1 else out


def canonical_order(X, y):
    """Row permutation that depends only on row contents."""
    return np.lexsort(np.column_stack([X, y]).T[::-1])


def mlp_train(X, y, spec: MlpSpec = MlpSpec(), epochs=200, batch_size=64, seed=0,
              scale_target=True):
    """Fit by mini-batch Adam on mean squared error.

    Rows are put in a content-defined order before shuffling so the result
    does not depend on how the caller ordered them. The target is scaled to
    unit variance during training when ``scale_target`` is set; predictions
    are returned in the original units.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    y_mean, y_scale = 0.0, 1.0
    if scale_target and len(y):
        y_mean = float(y.mean())
        y_scale = float(y.std()) or 1.0
    yt = (y - y_mean) / y_scale
    rng = np.random.default_rng(seed)
    params = init_params([X.shape[1], *spec.hidden, 1], rng)
    opt = Adam(params, spec.learning_rate, spec.beta1, spec.beta2, spec.eps)
    history = []
    n = len(yt)
    for epoch in range(epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            b = perm[start:start + batch_size]
            loss, grads = loss_and_grad(params, X[b], yt[b])
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch starting {start}")
            opt.step(params, grads)
            total += loss * len(b)
        history.append(total / n * y_scale ** 2)
    log.debug("mlp %s trained %d epochs, final loss %.6g", spec.hidden, epochs, history[-1])
    return MLP(spec, params, y_mean, y_scale, history)
