"""Model files as JSON: weights, spec, scaling stats and config hash."""
import hashlib
import json
from pathlib import Path

from .features import Standardizer
from .linear import LinearModel
from .mlp import MLP
from .tree import TreeModel

_KINDS = {"linear": LinearModel, "tree": TreeModel, "mlp": MLP}


def config_hash(obj):
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class FittedModel:
    """A model bundled with the input scaling it was trained under."""

    def __init__(self, model, scaler: Standardizer, columns, meta=None):
        self.model = model
        self.scaler = scaler
        self.columns = list(columns)
        self.meta = dict(meta or {})

    @property
    def kind(self):
        return self.model.kind

    def predict(self, X):
        return self.model.predict(self.scaler.transform(X))

    def to_dict(self):
        return {"kind": self.kind, "model": self.model.to_dict(), "scaler": self.scaler.to_dict(),
                "columns": self.columns, "meta": self.meta}

    @classmethod
    def from_dict(cls, d):
        return cls(_KINDS[d["kind"]].from_dict(d["model"]), Standardizer.from_dict(d["scaler"]),
                   d["columns"], d.get("meta"))


def save_model(path, fitted: FittedModel):
    Path(path).write_text(json.dumps(fitted.to_dict(), sort_keys=True))


def load_model(path):
    return FittedModel.from_dict(json.loads(Path(path).read_text()))
