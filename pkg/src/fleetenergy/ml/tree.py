"""CART regression tree (variance reduction, mean-valued leaves)."""
import numpy as np


class TreeModel:
    kind = "tree"

    def __init__(self, feature, threshold, left, right, value):
        # parallel node arrays; leaves have feature == -1
        self.feature = np.asarray(feature, dtype=int)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=int)
        self.right = np.asarray(right, dtype=int)
        self.value = np.asarray(value, dtype=float)

    @property
    def n_nodes(self):
        return len(self.value)

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=int)
        for k in range(self.n_nodes):
            if self.feature[k] >= 0:
                depth[self.left[k]] = depth[self.right[k]] = depth[k] + 1
        return int(depth.max())

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            n = node[idx]
            go_left = X[idx, self.feature[n]] <= self.threshold[n]
            node[idx] = np.where(go_left, self.left[n], self.right[n])
            active = self.feature[node] >= 0
        return self.value[node]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d):
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"])


def best_split(X, y, min_samples_leaf=1):
    """Return ``(sse, feature, threshold)`` of the best split, or None.

    Thresholds are midpoints between consecutive distinct values. Equal
    SSE resolves to the lower feature index, then the lower threshold.
    """
    n, d = X.shape
    if n < 2 * min_samples_leaf:
        return None
    yc = y - y.mean()
    best = None
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], yc[order]
        cs, cs2 = np.cumsum(ys), np.cumsum(ys * ys)
        k = np.arange(1, n)  # left child size
        valid = (xs[1:] > xs[:-1]) & (k >= min_samples_leaf) & (n - k >= min_samples_leaf)
        if not valid.any():
            continue
        kl = k[valid]
        sl, sl2 = cs[kl - 1], cs2[kl - 1]
        sr, sr2 = cs[-1] - sl, cs2[-1] - sl2
        sse = (sl2 - sl * sl / kl) + (sr2 - sr * sr / (n - kl))
        thr = (xs[kl - 1] + xs[kl]) / 2
        thr = np.where(thr < xs[kl], thr, xs[kl - 1])  # adjacent floats
        j = int(np.argmin(sse))  # first minimum = lowest threshold
        cand = (float(sse[j]), f, float(thr[j]))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def fit_tree(X, y, max_depth=None, min_samples_leaf=1):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise ValueError("cannot fit a tree on no rows")
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1); threshold.append(0.0); left.append(-1); right.append(-1)
        value.append(float(y[idx].mean()))
        return len(value) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if max_depth is not None and depth >= max_depth:
            continue
        yi = y[idx]
        if np.all(yi == yi[0]):
            continue
        split = best_split(X[idx], yi, min_samples_leaf)
        if split is None:
            continue
        _, f, thr = split
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(li), new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return TreeModel(feature, threshold, left, right, value)
